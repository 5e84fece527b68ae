// forage-balance: batch driver for level generation, balancing and analysis.
//
// Exit codes: 0 success, 2 invalid arguments, 3 I/O, 4 numerical abort.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "forage_balance/forage_balance.hpp"

namespace {

using namespace forage;
using nlohmann::json;

constexpr int kExitInvalid = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;

/// key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

struct Settings {
    std::uint64_t seed = 0;
    int jobs = 1;
    GameConfig game{};
    GeneratorConfig generator{};
    EpisodeConfig episode{};
    TrainConfig train{};
    bool legacy = false;
};

double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidArgument("config key '" + key + "' expects a number, got '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v)
{
    const double x = to_double(key, v);
    if (x != static_cast<double>(static_cast<long long>(x)))
        throw InvalidArgument("config key '" + key + "' expects an integer, got '" + v + "'");
    return static_cast<int>(x);
}

void apply_config(Settings& s, const std::map<std::string, std::string>& kv)
{
    for (const auto& [k, v] : kv) {
        if (k == "seed")
            s.seed = static_cast<std::uint64_t>(std::stoull(v));
        else if (k == "jobs")
            s.jobs = to_int(k, v);
        else if (k == "food_win_target")
            s.game.food_win_target = to_int(k, v);
        else if (k == "scrub_respawn_prob")
            s.game.scrub_respawn_prob = to_double(k, v);
        else if (k == "indicator_capacity")
            s.game.indicator_capacity = to_int(k, v);
        else if (k == "indicator_decay")
            s.game.indicator_decay = to_int(k, v);
        else if (k == "health_capacity")
            s.game.health_capacity = to_int(k, v);
        else if (k == "health_loss_per_empty_indicator")
            s.game.health_loss_per_empty_indicator = to_int(k, v);
        else if (k == "health_regen")
            s.game.health_regen = to_int(k, v);
        else if (k == "regen_threshold_fraction")
            s.game.regen_threshold_fraction = to_double(k, v);
        else if (k == "water_seek_threshold_fraction")
            s.game.water_seek_threshold_fraction = to_double(k, v);
        else if (k == "max_ticks")
            s.game.max_ticks = to_int(k, v);
        else if (k == "width")
            s.generator.width = to_int(k, v);
        else if (k == "height")
            s.generator.height = to_int(k, v);
        else if (k == "weight_grass")
            s.generator.weights.grass = to_double(k, v);
        else if (k == "weight_forest")
            s.generator.weights.forest = to_double(k, v);
        else if (k == "weight_stone")
            s.generator.weights.stone = to_double(k, v);
        else if (k == "weight_water")
            s.generator.weights.water = to_double(k, v);
        else if (k == "max_attempts")
            s.generator.max_attempts = to_int(k, v);
        else if (k == "n_sims")
            s.episode.n_sims = to_int(k, v);
        else if (k == "max_steps")
            s.episode.max_steps = to_int(k, v);
        else if (k == "max_changes")
            s.episode.max_changes = to_int(k, v);
        else if (k == "alpha")
            s.episode.target.alpha = to_double(k, v);
        else if (k == "count_reverted_changes")
            s.episode.count_reverted_changes = v == "true" || v == "1";
        else if (k == "legacy")
            s.legacy = v == "true" || v == "1";
        else if (k == "learning_rate")
            s.train.learning_rate = to_double(k, v);
        else if (k == "rollout_length")
            s.train.rollout_length = to_int(k, v);
        else if (k == "minibatch_size")
            s.train.minibatch_size = to_int(k, v);
        else if (k == "epochs_per_update")
            s.train.epochs_per_update = to_int(k, v);
        else if (k == "num_envs")
            s.train.num_envs = to_int(k, v);
        else if (k == "hidden")
            s.train.hidden = to_int(k, v);
        else if (k == "clip_epsilon")
            s.train.clip_epsilon = to_double(k, v);
        else if (k == "discount")
            s.train.discount = to_double(k, v);
        else if (k == "gae_lambda")
            s.train.gae_lambda = to_double(k, v);
        else if (k == "entropy_coef")
            s.train.entropy_coef = to_double(k, v);
        else if (k == "value_coef")
            s.train.value_coef = to_double(k, v);
        else
            throw InvalidArgument("unknown config key '" + k + "'");
    }
}

json game_json(const GameConfig& g)
{
    return json{{"food_win_target", g.food_win_target},
                {"scrub_respawn_prob", g.scrub_respawn_prob},
                {"indicator_capacity", g.indicator_capacity},
                {"indicator_decay", g.indicator_decay},
                {"health_capacity", g.health_capacity},
                {"health_loss_per_empty_indicator", g.health_loss_per_empty_indicator},
                {"health_regen", g.health_regen},
                {"regen_threshold_fraction", g.regen_threshold_fraction},
                {"water_seek_threshold_fraction", g.water_seek_threshold_fraction},
                {"max_ticks", g.max_ticks}};
}

json settings_json(const Settings& s)
{
    const auto& w = s.generator.weights;
    return json{{"seed", s.seed},
                {"game", game_json(s.game)},
                {"generator",
                 {{"width", s.generator.width},
                  {"height", s.generator.height},
                  {"weights", {w.grass, w.forest, w.stone, w.water}},
                  {"max_attempts", s.generator.max_attempts},
                  {"legacy", s.legacy}}},
                {"episode",
                 {{"n_sims", s.episode.n_sims},
                  {"max_steps", s.episode.max_steps},
                  {"max_changes", s.episode.max_changes},
                  {"alpha", s.episode.target.alpha},
                  {"count_reverted_changes", s.episode.count_reverted_changes}}},
                {"train",
                 {{"learning_rate", s.train.learning_rate},
                  {"rollout_length", s.train.rollout_length},
                  {"minibatch_size", s.train.minibatch_size},
                  {"epochs_per_update", s.train.epochs_per_update},
                  {"num_envs", s.train.num_envs},
                  {"hidden", s.train.hidden},
                  {"clip_epsilon", s.train.clip_epsilon},
                  {"discount", s.train.discount},
                  {"gae_lambda", s.train.gae_lambda},
                  {"entropy_coef", s.train.entropy_coef},
                  {"value_coef", s.train.value_coef}}}};
}

std::string hex64(std::uint64_t x)
{
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << x;
    return s.str();
}

/// Writes `<output>.manifest.json`. The id is a hash of the command and its
/// effective parameters, so reruns share an id; the timestamp is the only
/// non-deterministic field and lives only here.
std::string write_manifest(const std::string& output, const std::string& command, const json& params, const Settings& s)
{
    const json body{{"command", command}, {"params", params}, {"settings", settings_json(s)}};
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : body.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    const std::string id = hex64(mix64(h));
    json manifest = body;
    manifest["id"] = id;
    manifest["tool_version"] = kVersion;
    manifest["output"] = output;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    manifest["timestamp"] = stamp;
    io::open_out(output + ".manifest.json") << manifest.dump(2) << '\n';
    return id;
}

void write_text(const std::string& path, const std::string& text) { io::open_out(path) << text; }

Dataset load_dataset(const std::string& path, const Settings& s, int limit = 0)
{
    Dataset d = io::read_dataset(path);
    if (d.empty())
        throw InvalidArgument("dataset '" + path + "' is empty");
    if (limit > 0 && static_cast<int>(d.size()) > limit)
        d.resize(static_cast<std::size_t>(limit));
    for (auto& e : d)
        e.level.set_distinguish_players(!s.legacy);
    return d;
}

std::string glyph_legend()
{
    return "legend: G grass  F forest  C scrub  S stone  W water  1 player1  2 player2";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Simulation-driven balancing of two-player tile levels"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    Settings settings;
    std::string config_path;
    std::uint64_t seed_flag = 0;
    auto* seed_opt = app.add_option("--seed", seed_flag, "global seed (fallback: $FORAGE_BALANCE_SEED, then 0)");
    auto* jobs_opt = app.add_option("--jobs", settings.jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--config", config_path, "key=value config file; flags take precedence")->check(CLI::ExistingFile);
    bool legacy_flag = false;
    app.add_flag("--legacy", legacy_flag, "fold Player1/Player2 into one observation class");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a dataset of playable levels");
    int gen_count = 1000;
    std::string gen_out;
    std::vector<double> gen_weights;
    gen->add_option("--count", gen_count, "number of levels")->check(CLI::PositiveNumber);
    gen->add_option("-o,--out", gen_out, "output JSON-lines file")->required();
    gen->add_option("--weights", gen_weights, "sampling weights grass,forest,stone,water")->delimiter(',')->expected(4);

    // choose-n
    auto* choose = app.add_subcommand("choose-n", "select the number of simulation runs");
    std::string choose_dataset;
    std::string choose_out;
    int choose_sample = 500;
    int choose_nmax = 30;
    choose->add_option("--dataset", choose_dataset)->required();
    choose->add_option("--sample", choose_sample, "levels used (first s of the dataset)")->check(CLI::PositiveNumber);
    choose->add_option("--n-max", choose_nmax, "largest even run count")->check(CLI::PositiveNumber);
    choose->add_option("-o,--out", choose_out, "CSV output")->required();

    // balance
    auto* balance = app.add_subcommand("balance", "balance every level of a dataset");
    std::string bal_dataset;
    std::string bal_method = "hc-swap-narrow";
    double bal_b = 0.5;
    std::string bal_out;
    std::string bal_log;
    std::string bal_summary;
    int bal_limit = 0;
    int bal_nsims = 0;
    bool bal_sample = false;
    balance->add_option("--dataset", bal_dataset)->required();
    balance->add_option("--method", bal_method, "hc-swap-narrow | hc-narrow | policy:<checkpoint> | random:<repr>");
    balance->add_option("--b", bal_b, "target Player1 win rate")->check(CLI::Range(0.0, 1.0));
    balance->add_option("-o,--out", bal_out, "results JSON-lines")->required();
    balance->add_option("--log", bal_log, "per-step episode log (environment methods)");
    balance->add_option("--summary", bal_summary, "summary prefix (.md and .csv); default <out>.summary");
    balance->add_option("--limit", bal_limit, "only the first k levels");
    balance->add_option("--n-sims", bal_nsims, "runs per estimate (even)");
    balance->add_flag("--sample", bal_sample, "sample policy actions instead of argmax");

    // train
    auto* train = app.add_subcommand("train", "train a balancing policy with PPO");
    std::string train_repr = "swap-narrow";
    double train_b = 0.5;
    int train_steps = 20000;
    std::string train_out;
    std::string train_curve;
    std::string train_pool;
    train->add_option("--repr", train_repr, "swap-narrow | swap-turtle | swap-wide | narrow");
    train->add_option("--b", train_b)->check(CLI::Range(0.0, 1.0));
    train->add_option("--steps", train_steps)->check(CLI::NonNegativeNumber);
    train->add_option("-o,--out", train_out, "checkpoint path")->required();
    train->add_option("--curve", train_curve, "training curve CSV; default <out>.curve.csv");
    train->add_option("--dataset", train_pool, "train on this level pool instead of fresh generator draws");
    train->add_option("--lr", settings.train.learning_rate);
    train->add_option("--rollout", settings.train.rollout_length);
    train->add_option("--hidden", settings.train.hidden);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "symmetry, diversity, swap impact, histograms, summaries");
    std::string an_symmetry;
    std::string an_diversity;
    std::string an_impact;
    std::string an_impact_dataset;
    std::string an_histogram;
    std::string an_results;
    std::string an_out;
    int an_n = 14;
    analyze->add_option("--symmetry", an_symmetry, "dataset or results file");
    analyze->add_option("--diversity", an_diversity, "dataset or results file");
    analyze->add_option("--impact", an_impact, "episode log JSON-lines");
    analyze->add_option("--dataset", an_impact_dataset, "dataset for tile occurrence probabilities");
    analyze->add_option("--histogram", an_histogram, "dataset to estimate initial balance for");
    analyze->add_option("--results", an_results, "balancing results: before/after histogram of w_p1");
    analyze->add_option("--n", an_n, "runs per estimate");
    analyze->add_option("-o,--out", an_out, "output prefix for CSV files");

    // render
    auto* render = app.add_subcommand("render", "print a level as an ASCII panel");
    std::string r_dataset;
    int r_id = 0;
    std::string r_level;
    std::vector<std::string> r_diff;
    bool r_simulate = false;
    int r_n = 14;
    std::string r_trace;
    render->add_option("--dataset", r_dataset);
    render->add_option("--id", r_id);
    render->add_option("--level", r_level, "plain text level file");
    render->add_option("--diff", r_diff, "two level files: before after")->expected(2);
    render->add_flag("--simulate", r_simulate, "append a w_p1 estimate");
    render->add_option("--n", r_n);
    render->add_option("--trace", r_trace, "write a per-tick JSON-lines trace of one episode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitInvalid;
    }

    try {
        if (!config_path.empty())
            apply_config(settings, read_config_file(config_path));
        if (seed_opt->count() > 0)
            settings.seed = seed_flag;
        else if (config_path.empty() || settings.seed == 0)
            if (const char* env = std::getenv("FORAGE_BALANCE_SEED"))
                settings.seed = static_cast<std::uint64_t>(std::stoull(env));
        (void)jobs_opt;
        if (legacy_flag)
            settings.legacy = true;
        settings.generator.distinguish_players = !settings.legacy;
        settings.generator.seed = settings.seed;
        settings.episode.game = settings.game;
        settings.episode.sim_jobs = 1;

        if (*gen) {
            if (!gen_weights.empty())
                settings.generator.weights = {gen_weights[0], gen_weights[1], gen_weights[2], gen_weights[3]};
            const Dataset d = generate_dataset(gen_count, settings.generator);
            io::write_dataset(gen_out, d);
            write_manifest(gen_out, "gen", json{{"count", gen_count}}, settings);
            std::cout << "wrote " << d.size() << " levels to " << gen_out << "\n";
            return 0;
        }

        if (*choose) {
            const Dataset d = load_dataset(choose_dataset, settings, choose_sample);
            const RunCountSelection sel = choose_n(io::levels_of(d), settings.game, choose_nmax, settings.seed, settings.jobs);
            write_text(choose_out, io::run_count_csv(sel));
            write_manifest(choose_out, "choose-n", json{{"dataset", choose_dataset}, {"sample", d.size()}, {"n_max", choose_nmax}},
                           settings);
            std::cout << io::run_count_csv(sel);
            std::cout << "chosen n: " << (sel.chosen ? std::to_string(*sel.chosen) : std::string("none")) << "\n";
            return 0;
        }

        if (*balance) {
            const Dataset d = load_dataset(bal_dataset, settings, bal_limit);
            EpisodeConfig ec = settings.episode;
            if (bal_nsims > 0)
                ec.n_sims = bal_nsims;
            ec.target = BalanceTarget::for_runs(bal_b, ec.n_sims, settings.episode.target.alpha);
            ec.validate();

            std::optional<io::Checkpoint> checkpoint;
            std::optional<Representation> random_repr;
            enum class Kind { HcSwap, HcNarrow, Policy, Random } kind{};
            if (bal_method == "hc-swap-narrow")
                kind = Kind::HcSwap;
            else if (bal_method == "hc-narrow")
                kind = Kind::HcNarrow;
            else if (bal_method.rfind("policy:", 0) == 0) {
                kind = Kind::Policy;
                checkpoint = io::read_checkpoint(bal_method.substr(7));
                if (checkpoint->distinguish_players == settings.legacy)
                    throw InvalidArgument(std::string("checkpoint was trained ") +
                                          (checkpoint->distinguish_players ? "without" : "with") + " --legacy");
            } else if (bal_method.rfind("random:", 0) == 0) {
                kind = Kind::Random;
                random_repr = parse_representation(bal_method.substr(7));
            } else
                throw InvalidArgument("unknown method '" + bal_method + "'");

            std::vector<BalancingResult> results(d.size());
            std::vector<std::vector<StepRecord>> logs(d.size());
            parallel_for(d.size(), settings.jobs, [&](std::size_t i) {
                const Level& level = d[i].level;
                const std::uint64_t seed = derive_seed(settings.seed, static_cast<std::uint64_t>(d[i].id));
                switch (kind) {
                case Kind::HcSwap: results[i] = hill_climb_swap_narrow(level, ec, seed); break;
                case Kind::HcNarrow: results[i] = hill_climb_narrow(level, ec, seed); break;
                case Kind::Policy:
                    results[i] = balance_with_policy(checkpoint->policy, checkpoint->representation, level, ec, seed,
                                                     bal_sample ? ActionMode::Sample : ActionMode::Greedy, &logs[i]);
                    break;
                case Kind::Random: {
                    const int actions = action_space_size(*random_repr, level.width(), level.height(),
                                                          level.distinguish_players());
                    results[i] = run_balancing_episode(*random_repr, level, ec, seed, uniform_chooser(actions), &logs[i]);
                    break;
                }
                }
            });

            std::string out;
            for (std::size_t i = 0; i < d.size(); ++i)
                out += io::result_json(results[i], d[i].id, bal_method, bal_b).dump() + "\n";
            write_text(bal_out, out);
            const json params{{"dataset", bal_dataset}, {"method", bal_method}, {"b", bal_b}, {"n_sims", ec.n_sims},
                              {"levels", d.size()}};
            write_manifest(bal_out, "balance", params, settings);

            if (!bal_log.empty()) {
                std::string log_text;
                for (std::size_t i = 0; i < d.size(); ++i) {
                    if (kind == Kind::HcSwap || kind == Kind::HcNarrow) {
                        for (const auto& s : results[i].swap_log)
                            log_text += json{{"level", d[i].id},
                                             {"step", s.step},
                                             {"swapped_types",
                                              {std::string(tile_name(s.first)), std::string(tile_name(s.second))}}}
                                            .dump() +
                                        "\n";
                    } else {
                        for (const auto& s : logs[i])
                            log_text += io::step_record_json(s, d[i].id).dump() + "\n";
                    }
                }
                write_text(bal_log, log_text);
                write_manifest(bal_log, "balance-log", params, settings);
            }

            const SummaryRow row = summarize(results, ec.target);
            const std::vector<std::pair<std::string, SummaryRow>> rows{{bal_method, row}};
            const std::string prefix = bal_summary.empty() ? bal_out + ".summary" : bal_summary;
            write_text(prefix + ".md", io::summary_markdown(rows));
            write_text(prefix + ".csv", io::summary_csv(rows));
            std::cout << io::summary_markdown(rows);
            std::cout << "initially at target (excluded): " << row.initially_attained << "\n";
            return 0;
        }

        if (*train) {
            const Representation repr = parse_representation(train_repr);
            EpisodeConfig ec = settings.episode;
            ec.target = BalanceTarget::for_runs(train_b, ec.n_sims, settings.episode.target.alpha);
            TrainConfig tc = settings.train;
            tc.total_steps = train_steps;
            tc.seed = settings.seed;
            LevelSource source = settings.generator;
            if (!train_pool.empty())
                source = io::levels_of(load_dataset(train_pool, settings));
            const TrainResult res = train_policy(repr, source, ec, tc, [](const CurvePoint& p) {
                std::cerr << "update " << p.update << " mean_reward " << p.mean_reward << " balanced_rate "
                          << p.balanced_rate << "\n";
            });
            io::Checkpoint ck;
            ck.representation = repr;
            ck.width = settings.generator.width;
            ck.height = settings.generator.height;
            ck.distinguish_players = !settings.legacy;
            ck.target_b = train_b;
            ck.policy = res.policy;
            io::write_checkpoint(train_out, ck);
            const std::string curve_path = train_curve.empty() ? train_out + ".curve.csv" : train_curve;
            write_text(curve_path, io::curve_csv(res.curve));
            const json params{{"repr", train_repr}, {"b", train_b}, {"steps", train_steps}, {"pool", train_pool}};
            write_manifest(train_out, "train", params, settings);
            std::cout << "wrote checkpoint " << train_out << " (" << res.curve.size() << " updates)\n";
            return 0;
        }

        if (*analyze) {
            auto load_levels = [&](const std::string& path) {
                // Accept datasets ({"rows"}) and results ({"after"}).
                std::vector<Level> levels;
                const auto lines = io::read_lines(path);
                for (std::size_t i = 0; i < lines.size(); ++i) {
                    const json j = io::parse_json_line(lines[i], path, i);
                    const json& rows = j.contains("rows") ? j["rows"] : j.at("after");
                    levels.push_back(level_from_rows(rows.get<std::vector<std::string>>()));
                    levels.back().set_distinguish_players(!settings.legacy);
                }
                if (levels.empty())
                    throw InvalidArgument("'" + path + "' contains no levels");
                return levels;
            };
            const std::string prefix = an_out.empty() ? "analysis" : an_out;
            bool did = false;
            if (!an_symmetry.empty()) {
                did = true;
                std::vector<double> cols[4];
                for (const Level& l : load_levels(an_symmetry)) {
                    const SymmetryScores s = symmetry_scores(l);
                    cols[0].push_back(s.diagonal);
                    cols[1].push_back(s.counter_diagonal);
                    cols[2].push_back(s.vertical);
                    cols[3].push_back(s.horizontal);
                }
                std::string md = "| | diagonal | counter-diagonal | vertical | horizontal |\n|---|---|---|---|---|\n";
                std::string csv = "stat,diagonal,counter_diagonal,vertical,horizontal\n";
                auto add = [&](const std::string& name, auto fn) {
                    md += "| " + name;
                    csv += name;
                    for (auto& c : cols) {
                        md += " | " + io::fixed(fn(c), 2);
                        csv += "," + io::fmt(fn(c), 10);
                    }
                    md += " |\n";
                    csv += "\n";
                };
                add("mean", [](const std::vector<double>& c) { return mean_std(c).mean; });
                add("std", [](const std::vector<double>& c) { return mean_std(c).std; });
                add("min", [](const std::vector<double>& c) { return *std::min_element(c.begin(), c.end()); });
                add("max", [](const std::vector<double>& c) { return *std::max_element(c.begin(), c.end()); });
                write_text(prefix + ".symmetry.csv", csv);
                std::cout << md;
            }
            if (!an_diversity.empty()) {
                did = true;
                std::cout << "diversity: " << diversity(load_levels(an_diversity)) << "\n";
            }
            if (!an_impact.empty()) {
                did = true;
                if (an_impact_dataset.empty())
                    throw InvalidArgument("--impact needs --dataset for tile occurrence counts");
                const auto rows = swap_impact(io::read_swap_pairs(an_impact), load_levels(an_impact_dataset), !settings.legacy);
                std::string csv = "pair,count,normalized,random_baseline\n";
                for (const auto& r : rows) {
                    const std::string name = impact_class_name(r.pair.first, !settings.legacy) + "-" +
                                             impact_class_name(r.pair.second, !settings.legacy);
                    csv += name + "," + std::to_string(r.raw_count) + "," + io::fmt(r.normalized, 10) + "," +
                           io::fmt(r.random_baseline, 10) + "\n";
                }
                write_text(prefix + ".impact.csv", csv);
                std::cout << csv;
            }
            if (!an_histogram.empty()) {
                did = true;
                const Histogram h = balance_histogram(load_levels(an_histogram), settings.game, an_n, settings.seed, settings.jobs);
                write_text(prefix + ".histogram.csv", io::histogram_csv(h));
                std::cout << io::histogram_csv(h);
            }
            if (!an_results.empty()) {
                did = true;
                std::vector<double> before;
                std::vector<double> after;
                for (const auto& line : io::read_lines(an_results)) {
                    const BalancingResult r = io::result_from_json(json::parse(line));
                    before.push_back(r.w_p1_initial);
                    after.push_back(r.w_p1_final);
                }
                const Histogram hb = histogram_of(before, an_n);
                const Histogram ha = histogram_of(after, an_n);
                std::string csv = "bin_left,before,after\n";
                for (std::size_t k = 0; k < hb.counts.size(); ++k)
                    csv += io::fmt(hb.bin_left(k), 10) + "," + std::to_string(hb.counts[k]) + "," +
                           std::to_string(ha.counts[k]) + "\n";
                write_text(prefix + ".before_after.csv", csv);
                std::cout << csv;
            }
            if (!did)
                throw InvalidArgument("analyze needs at least one of --symmetry, --diversity, --impact, --histogram, --results");
            return 0;
        }

        if (*render) {
            auto read_level_file = [&](const std::string& path) {
                std::ifstream in(path);
                if (!in)
                    throw IoError("cannot open level file '" + path + "'");
                std::stringstream ss;
                ss << in.rdbuf();
                Level l = parse_level(ss.str());
                l.set_distinguish_players(!settings.legacy);
                return l;
            };
            if (!r_diff.empty()) {
                const Level before = read_level_file(r_diff[0]);
                const Level after = read_level_file(r_diff[1]);
                if (before.width() != after.width() || before.height() != after.height())
                    throw InvalidArgument("--diff levels differ in size");
                int differing = 0;
                for (int r = 0; r < after.height(); ++r) {
                    std::string line_a;
                    std::string line_b;
                    std::string marks;
                    for (int c = 0; c < after.width(); ++c) {
                        const bool diff = before.at({r, c}) != after.at({r, c});
                        differing += diff;
                        line_a.push_back(tile_char(before.at({r, c})));
                        line_b.push_back(tile_char(after.at({r, c})));
                        marks.push_back(diff ? '*' : '.');
                    }
                    std::cout << line_a << "   " << line_b << "   " << marks << "\n";
                }
                std::cout << glyph_legend() << "\n";
                std::cout << "changed cells: " << differing << "\n";
                return 0;
            }
            Level level;
            if (!r_level.empty()) {
                level = read_level_file(r_level);
            } else if (!r_dataset.empty()) {
                const Dataset d = load_dataset(r_dataset, settings);
                const auto it = std::find_if(d.begin(), d.end(), [&](const DatasetEntry& e) { return e.id == r_id; });
                if (it == d.end())
                    throw InvalidArgument("no level with id " + std::to_string(r_id));
                level = it->level;
            } else {
                throw InvalidArgument("render needs --level, --dataset/--id or --diff");
            }
            std::cout << serialize_level(level) << "\n" << glyph_legend() << "\n";
            if (r_simulate) {
                const WinRates w = estimate_win_rates(level, settings.game, r_n, settings.seed, settings.jobs);
                std::cout << "w_p1 = " << w.w_p1() << " (n = " << w.n << ", draws = " << w.draws << ")\n";
            }
            if (!r_trace.empty()) {
                std::string text;
                const GameOutcome o = run_episode_observed(level, settings.game, run_seed(settings.seed, 0),
                                                           [&](const GameState& s) { text += io::trace_json(s).dump() + "\n"; });
                write_text(r_trace, text);
                std::cout << "episode: " << (o.kind == OutcomeKind::Win ? "win player " + std::to_string(o.winner) : "draw")
                          << " at tick " << o.tick << " (" << reason_name(o.reason) << ")\n";
            }
            return 0;
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const UnplayableLevel& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const GenerationFailed& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
