#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "level.hpp"
#include "rng.hpp"

namespace forage {

/// Positions of the unique Player1/Player2 tiles, if each occurs exactly once.
struct Spawns {
    Position p1;
    Position p2;
};

inline std::optional<Spawns> find_spawns(const Level& level)
{
    int n1 = 0;
    int n2 = 0;
    Spawns s{};
    for (int i = 0; i < level.size(); ++i) {
        if (level[i] == Tile::Player1) {
            ++n1;
            s.p1 = level.position(i);
        } else if (level[i] == Tile::Player2) {
            ++n2;
            s.p2 = level.position(i);
        }
    }
    if (n1 != 1 || n2 != 1)
        return std::nullopt;
    return s;
}

/// Exactly one spawn per player, no Scrub, and a 4-connected passable path
/// between the spawns.
inline bool is_playable(const Level& level)
{
    if (level.count(Tile::Scrub) != 0)
        return false;
    const auto spawns = find_spawns(level);
    if (!spawns)
        return false;

    std::vector<char> seen(static_cast<std::size_t>(level.size()), 0);
    std::vector<int> stack{level.flat(spawns->p1)};
    seen[static_cast<std::size_t>(stack.back())] = 1;
    const int target = level.flat(spawns->p2);
    constexpr std::array<Position, 4> steps{{{-1, 0}, {1, 0}, {0, 1}, {0, -1}}};
    while (!stack.empty()) {
        const int cur = stack.back();
        stack.pop_back();
        if (cur == target)
            return true;
        const Position p = level.position(cur);
        for (Position d : steps) {
            const Position q{p.row + d.row, p.col + d.col};
            if (!level.in_bounds(q))
                continue;
            const int f = level.flat(q);
            if (seen[static_cast<std::size_t>(f)] || !is_passable(level[f]))
                continue;
            seen[static_cast<std::size_t>(f)] = 1;
            stack.push_back(f);
        }
    }
    return false;
}

struct TileWeights {
    double grass = 0.5;
    double forest = 0.2;
    double stone = 0.15;
    double water = 0.15;
};

struct GeneratorConfig {
    int width = Level::kDefaultSize;
    int height = Level::kDefaultSize;
    TileWeights weights{};
    int max_attempts = 1000;
    std::uint64_t seed = 0;
    bool distinguish_players = true;

    void validate() const
    {
        if (width < 2 || height < 2)
            throw InvalidArgument("generator dimensions must be at least 2x2");
        const std::array<double, 4> w{weights.grass, weights.forest, weights.stone, weights.water};
        double sum = 0.0;
        for (double x : w) {
            if (!(x >= 0.0))
                throw InvalidArgument("tile weights must be non-negative");
            sum += x;
        }
        if (!(sum > 0.0))
            throw InvalidArgument("tile weights must not all be zero");
        if (max_attempts < 1)
            throw InvalidArgument("max_attempts must be positive");
    }
};

class GenerationFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline Tile sample_tile(Rng& rng, const TileWeights& w)
{
    const double total = w.grass + w.forest + w.stone + w.water;
    double u = rng.uniform01() * total;
    if ((u -= w.grass) < 0.0)
        return Tile::Grass;
    if ((u -= w.forest) < 0.0)
        return Tile::Forest;
    if ((u -= w.stone) < 0.0)
        return Tile::Stone;
    if (w.water > 0.0)
        return Tile::Water;
    // Rounding fell past the last bucket; return the last tile with weight.
    if (w.stone > 0.0)
        return Tile::Stone;
    return w.forest > 0.0 ? Tile::Forest : Tile::Grass;
}

} // namespace detail

/// Rejection sampler: i.i.d. terrain from the weights, two distinct uniform
/// spawn cells, accept the first playable draw.
inline Level generate_level(const GeneratorConfig& config)
{
    config.validate();
    Rng rng(config.seed);
    const int cells = config.width * config.height;
    for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
        Level level(config.width, config.height, Tile::Grass, config.distinguish_players);
        for (int i = 0; i < cells; ++i)
            level.set(level.position(i), detail::sample_tile(rng, config.weights));
        const int a = rng.index(cells);
        int b = rng.index(cells - 1);
        if (b >= a)
            ++b;
        level.set(level.position(a), Tile::Player1);
        level.set(level.position(b), Tile::Player2);
        if (is_playable(level))
            return level;
    }
    throw GenerationFailed("no playable level after " + std::to_string(config.max_attempts) + " attempts");
}

struct DatasetEntry {
    int id = 0;
    Level level;
};

using Dataset = std::vector<DatasetEntry>;

/// Seed used for level `id` of a dataset generated from `seed`.
constexpr std::uint64_t level_seed(std::uint64_t seed, int id) noexcept
{
    return derive_seed(derive_seed(seed, stream::levels), static_cast<std::uint64_t>(id));
}

inline Dataset generate_dataset(int count, const GeneratorConfig& config)
{
    if (count < 1)
        throw InvalidArgument("dataset count must be at least 1");
    Dataset out;
    out.reserve(static_cast<std::size_t>(count));
    for (int id = 0; id < count; ++id) {
        GeneratorConfig per_level = config;
        per_level.seed = level_seed(config.seed, id);
        out.push_back({id, generate_level(per_level)});
    }
    return out;
}

} // namespace forage
