#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "analysis.hpp"
#include "balance.hpp"
#include "error.hpp"
#include "forage_game.hpp"
#include "generator.hpp"
#include "level.hpp"
#include "optimizer.hpp"
#include "policy.hpp"
#include "swap_env.hpp"

namespace forage::io {

using nlohmann::json;

inline std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline std::vector<std::string> read_lines(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!line.empty())
            lines.push_back(line);
    }
    return lines;
}

inline json parse_json_line(const std::string& line, const std::string& path, std::size_t lineno)
{
    try {
        return json::parse(line);
    } catch (const json::exception& e) {
        throw IoError(path + ":" + std::to_string(lineno + 1) + ": " + e.what());
    }
}

// Dataset: one {"id": int, "rows": [string]} object per line.

inline json dataset_entry_json(const DatasetEntry& e) { return json{{"id", e.id}, {"rows", level_rows(e.level)}}; }

inline std::string dataset_to_jsonl(const Dataset& dataset)
{
    std::string out;
    for (const auto& e : dataset) {
        out += dataset_entry_json(e).dump();
        out.push_back('\n');
    }
    return out;
}

inline void write_dataset(const std::string& path, const Dataset& dataset) { open_out(path) << dataset_to_jsonl(dataset); }

inline Dataset parse_dataset(const std::vector<std::string>& lines, const std::string& origin = "<dataset>")
{
    Dataset out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const json j = parse_json_line(lines[i], origin, i);
        try {
            out.push_back({j.at("id").get<int>(), level_from_rows(j.at("rows").get<std::vector<std::string>>())});
        } catch (const json::exception& e) {
            throw IoError(origin + ":" + std::to_string(i + 1) + ": " + e.what());
        }
    }
    return out;
}

inline Dataset read_dataset(const std::string& path) { return parse_dataset(read_lines(path), path); }

inline std::vector<Level> levels_of(const Dataset& dataset, bool distinguish_players = true)
{
    std::vector<Level> out;
    out.reserve(dataset.size());
    for (const auto& e : dataset) {
        out.push_back(e.level);
        out.back().set_distinguish_players(distinguish_players);
    }
    return out;
}

inline json tile_pair_json(const std::optional<std::pair<Tile, Tile>>& p)
{
    if (!p)
        return nullptr;
    return json::array({std::string(tile_name(p->first)), std::string(tile_name(p->second))});
}

inline Tile tile_from_name(const std::string& name)
{
    for (Tile t : kAllTiles)
        if (tile_name(t) == name)
            return t;
    throw IoError("unknown tile name '" + name + "'");
}

// Episode log: {step, action, swapped_types, w_p1, b, reward, changes}, plus
// the level id when written by the batch driver.

inline json step_record_json(const StepRecord& s, std::optional<int> level_id = std::nullopt)
{
    json j{{"step", s.step},   {"action", s.action}, {"swapped_types", tile_pair_json(s.swapped_types)},
           {"w_p1", s.w_p1},   {"b", s.b},           {"reward", s.reward},
           {"changes", s.changes}};
    if (level_id)
        j["level"] = *level_id;
    return j;
}

/// Swapped type pairs of every logged step that changed the level.
inline std::vector<std::pair<Tile, Tile>> read_swap_pairs(const std::string& path)
{
    std::vector<std::pair<Tile, Tile>> out;
    const auto lines = read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const json j = parse_json_line(lines[i], path, i);
        const json& p = j.contains("swapped_types") ? j["swapped_types"] : j.value("swap", json());
        if (p.is_array() && p.size() == 2)
            out.emplace_back(tile_from_name(p[0].get<std::string>()), tile_from_name(p[1].get<std::string>()));
    }
    return out;
}

inline json result_json(const BalancingResult& r, int id, const std::string& method, double b)
{
    json swaps = json::array();
    for (const auto& s : r.swap_log)
        swaps.push_back(json{{"step", s.step},
                             {"types", {std::string(tile_name(s.first)), std::string(tile_name(s.second))}}});
    return json{{"id", id},
                {"method", method},
                {"b", b},
                {"before", level_rows(r.level_before)},
                {"after", level_rows(r.level_after)},
                {"b_initial", r.b_initial},
                {"b_final", r.b_final},
                {"w_p1_initial", r.w_p1_initial},
                {"w_p1_final", r.w_p1_final},
                {"changes", r.changes},
                {"episode_length", r.episode_length},
                {"reached", r.reached},
                {"improved", r.improved},
                {"unplayable", r.unplayable},
                {"initially_attained", r.initially_attained},
                {"swap_log", swaps}};
}

inline BalancingResult result_from_json(const json& j)
{
    BalancingResult r;
    r.level_before = level_from_rows(j.at("before").get<std::vector<std::string>>());
    r.level_after = level_from_rows(j.at("after").get<std::vector<std::string>>());
    r.b_initial = j.at("b_initial").get<double>();
    r.b_final = j.at("b_final").get<double>();
    r.w_p1_initial = j.at("w_p1_initial").get<double>();
    r.w_p1_final = j.at("w_p1_final").get<double>();
    r.changes = j.at("changes").get<int>();
    r.episode_length = j.at("episode_length").get<int>();
    r.reached = j.at("reached").get<bool>();
    r.improved = j.at("improved").get<bool>();
    r.unplayable = j.at("unplayable").get<bool>();
    r.initially_attained = j.at("initially_attained").get<bool>();
    for (const auto& s : j.at("swap_log"))
        r.swap_log.push_back({s.at("step").get<int>(), tile_from_name(s.at("types")[0].get<std::string>()),
                              tile_from_name(s.at("types")[1].get<std::string>())});
    return r;
}

// Policy checkpoint: JSON with a format tag, version and architecture header.

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
    Representation representation = Representation::SwapNarrow;
    int width = Level::kDefaultSize;
    int height = Level::kDefaultSize;
    bool distinguish_players = true;
    double target_b = 0.5;
    PolicyNetwork policy;
};

inline json checkpoint_json(const Checkpoint& c)
{
    const PolicyArchitecture& a = c.policy.architecture();
    return json{{"format", "forage-balance-policy"},
                {"version", kCheckpointVersion},
                {"representation", std::string(representation_name(c.representation))},
                {"width", c.width},
                {"height", c.height},
                {"distinguish_players", c.distinguish_players},
                {"target_b", c.target_b},
                {"architecture", {{"input_dim", a.input_dim}, {"hidden", a.hidden}, {"action_dim", a.action_dim}}},
                {"parameters", c.policy.parameters()}};
}

inline void write_checkpoint(const std::string& path, const Checkpoint& c) { open_out(path) << checkpoint_json(c).dump() << '\n'; }

inline Checkpoint read_checkpoint(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open checkpoint '" + path + "'");
    try {
        const json j = json::parse(in);
        if (j.at("format").get<std::string>() != "forage-balance-policy")
            throw IoError("'" + path + "' is not a policy checkpoint");
        if (j.at("version").get<int>() != kCheckpointVersion)
            throw IoError("unsupported checkpoint version in '" + path + "'");
        Checkpoint c;
        c.representation = parse_representation(j.at("representation").get<std::string>());
        c.width = j.at("width").get<int>();
        c.height = j.at("height").get<int>();
        c.distinguish_players = j.at("distinguish_players").get<bool>();
        c.target_b = j.at("target_b").get<double>();
        const json& a = j.at("architecture");
        PolicyArchitecture arch{a.at("input_dim").get<int>(), a.at("hidden").get<int>(), a.at("action_dim").get<int>()};
        c.policy = PolicyNetwork(arch, j.at("parameters").get<std::vector<double>>());
        return c;
    } catch (const json::exception& e) {
        throw IoError("malformed checkpoint '" + path + "': " + e.what());
    }
}

// CSV / Markdown tables.

inline std::string fmt(double x, int precision = 6)
{
    std::ostringstream s;
    s << std::setprecision(precision) << x;
    return s.str();
}

inline std::string run_count_csv(const RunCountSelection& sel)
{
    std::string out = "n,mu,sigma,mu_plus_sigma\n";
    for (const auto& r : sel.table)
        out += std::to_string(r.n) + "," + fmt(r.mu, 10) + "," + fmt(r.sigma, 10) + "," + fmt(r.mu + r.sigma, 10) + "\n";
    return out;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve)
{
    std::string out = "update,mean_reward,mean_episode_len,balanced_rate\n";
    for (const auto& p : curve)
        out += std::to_string(p.update) + "," + fmt(p.mean_reward, 10) + "," + fmt(p.mean_episode_len, 10) + "," +
               fmt(p.balanced_rate, 10) + "\n";
    return out;
}

inline std::string histogram_csv(const Histogram& h)
{
    std::string out = "bin_left,count\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k)
        out += fmt(h.bin_left(k), 10) + "," + std::to_string(h.counts[k]) + "\n";
    return out;
}

inline std::string summary_csv(const std::vector<std::pair<std::string, SummaryRow>>& rows)
{
    std::string out = "method,b,levels,initially_attained,balanced_pct,improved_pct,unplayable_pct,changes_mean,"
                      "changes_std,episode_length_mean,episode_length_std,distance_before,distance_after\n";
    for (const auto& [method, r] : rows)
        out += method + "," + fmt(r.b) + "," + std::to_string(r.levels) + "," + std::to_string(r.initially_attained) +
               "," + fmt(r.balanced_pct) + "," + fmt(r.improved_pct) + "," + fmt(r.unplayable_pct) + "," +
               fmt(r.changes.mean) + "," + fmt(r.changes.std) + "," + fmt(r.episode_length.mean) + "," +
               fmt(r.episode_length.std) + "," + fmt(r.mean_distance_before) + "," + fmt(r.mean_distance_after) + "\n";
    return out;
}

inline std::string fixed(double x, int digits)
{
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << x;
    return s.str();
}

inline std::string summary_markdown(const std::vector<std::pair<std::string, SummaryRow>>& rows)
{
    std::string out = "| method | b | levels | balanced % | improved % | unplayable % | avg. changes | avg. ep. length |\n"
                      "|---|---|---|---|---|---|---|---|\n";
    for (const auto& [method, r] : rows)
        out += "| " + method + " | " + fixed(r.b, 2) + " | " + std::to_string(r.levels) + " | " +
               fixed(r.balanced_pct, 1) + " | " + fixed(r.improved_pct, 1) + " | " + fixed(r.unplayable_pct, 1) +
               " | " + fixed(r.changes.mean, 1) + " ± " + fixed(r.changes.std, 1) + " | " +
               fixed(r.episode_length.mean, 1) + " ± " + fixed(r.episode_length.std, 1) + " |\n";
    return out;
}

// Per-tick episode trace.

inline json trace_json(const GameState& s)
{
    json agents = json::array();
    for (const auto& a : s.agents)
        agents.push_back(json{{"id", a.id},
                              {"pos", {a.position.row, a.position.col}},
                              {"health", a.health},
                              {"food", a.food},
                              {"water", a.water},
                              {"collected", a.food_collected},
                              {"alive", a.alive}});
    json scrub = json::array();
    for (int f = 0; f < s.grid.size(); ++f)
        if (s.grid[f] == Tile::Scrub)
            scrub.push_back({s.grid.position(f).row, s.grid.position(f).col});
    return json{{"tick", s.tick}, {"agents", agents}, {"scrub", scrub}};
}

} // namespace forage::io
