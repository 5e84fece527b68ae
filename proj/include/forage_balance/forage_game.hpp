#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "generator.hpp"
#include "level.hpp"
#include "rng.hpp"

namespace forage {

/// Forage-survival rules. Indicator magnitudes are tunable; the respawn
/// probability, food target and regeneration fraction follow the original game.
struct GameConfig {
    int food_win_target = 5;
    double scrub_respawn_prob = 0.025;
    int indicator_capacity = 10;
    int indicator_decay = 1;
    int health_capacity = 10;
    int health_loss_per_empty_indicator = 1;
    int health_regen = 1;
    double regen_threshold_fraction = 0.5;
    double water_seek_threshold_fraction = 0.5;
    int max_ticks = 100;

    void validate() const
    {
        if (food_win_target < 1 || indicator_capacity < 1 || indicator_decay < 1 || health_capacity < 1 ||
            health_loss_per_empty_indicator < 1 || health_regen < 1 || max_ticks < 1)
            throw InvalidArgument("game config counts must be positive");
        if (!(scrub_respawn_prob >= 0.0 && scrub_respawn_prob <= 1.0))
            throw InvalidArgument("scrub_respawn_prob must lie in [0,1]");
        if (!(regen_threshold_fraction > 0.0 && regen_threshold_fraction < 1.0) ||
            !(water_seek_threshold_fraction > 0.0 && water_seek_threshold_fraction < 1.0))
            throw InvalidArgument("threshold fractions must lie in (0,1)");
    }

    friend bool operator==(const GameConfig&, const GameConfig&) = default;
};

struct AgentState {
    int id = 1;
    Position position{};
    int health = 0;
    int food = 0;
    int water = 0;
    bool alive = true;
    int food_collected = 0;

    friend bool operator==(const AgentState&, const AgentState&) = default;
};

enum class Move : std::uint8_t { North, South, East, West, Stay };

constexpr Position offset(Move m) noexcept
{
    switch (m) {
    case Move::North: return {-1, 0};
    case Move::South: return {1, 0};
    case Move::East: return {0, 1};
    case Move::West: return {0, -1};
    case Move::Stay: return {0, 0};
    }
    return {0, 0};
}

enum class OutcomeKind : std::uint8_t { Win, Draw };

enum class OutcomeReason : std::uint8_t {
    FoodTarget,
    LastStanding,
    SimultaneousDeath,
    SimultaneousFoodTarget,
    TimeoutTie,
    /// Timeout with both alive, decided by food collected.
    TimeoutFood,
};

constexpr std::string_view reason_name(OutcomeReason r) noexcept
{
    switch (r) {
    case OutcomeReason::FoodTarget: return "food_target";
    case OutcomeReason::LastStanding: return "last_standing";
    case OutcomeReason::SimultaneousDeath: return "simultaneous_death";
    case OutcomeReason::SimultaneousFoodTarget: return "simultaneous_food_target";
    case OutcomeReason::TimeoutTie: return "timeout_tie";
    case OutcomeReason::TimeoutFood: return "timeout_food";
    }
    return "?";
}

struct GameOutcome {
    OutcomeKind kind = OutcomeKind::Draw;
    int winner = 0; ///< 1 or 2 for a win, 0 for a draw
    int tick = 0;
    OutcomeReason reason = OutcomeReason::TimeoutTie;

    static GameOutcome win(int player, int tick, OutcomeReason reason) { return {OutcomeKind::Win, player, tick, reason}; }
    static GameOutcome draw(int tick, OutcomeReason reason) { return {OutcomeKind::Draw, 0, tick, reason}; }

    /// Player1's share of the result in half-points: 2 win, 1 draw, 0 loss.
    int p1_half_credit() const noexcept
    {
        if (kind == OutcomeKind::Draw)
            return 1;
        return winner == 1 ? 2 : 0;
    }

    friend bool operator==(const GameOutcome&, const GameOutcome&) = default;
};

struct GameState {
    Level grid; ///< spawn tiles replaced by Grass; may contain Scrub
    std::array<AgentState, 2> agents{};
    int tick = 0;
    GameConfig config{};
    Rng rng{0};
    int contested_draws = 0; ///< coin flips used to settle a shared Forest

    friend bool operator==(const GameState&, const GameState&) = default;
};

inline GameState init_game(const Level& level, const GameConfig& config, std::uint64_t seed)
{
    config.validate();
    if (!is_playable(level))
        throw UnplayableLevel("level is not playable:\n" + serialize_level(level));
    const Spawns spawns = *find_spawns(level);

    GameState s;
    s.grid = level;
    s.grid.set(spawns.p1, Tile::Grass);
    s.grid.set(spawns.p2, Tile::Grass);
    s.config = config;
    s.rng = Rng(seed);
    const std::array<Position, 2> at{spawns.p1, spawns.p2};
    for (int i = 0; i < 2; ++i) {
        AgentState& a = s.agents[static_cast<std::size_t>(i)];
        a.id = i + 1;
        a.position = at[static_cast<std::size_t>(i)];
        a.health = config.health_capacity;
        a.food = config.indicator_capacity;
        a.water = config.indicator_capacity;
        a.alive = true;
        a.food_collected = 0;
    }
    return s;
}

namespace detail {

inline constexpr std::array<Move, 4> kMoves{Move::North, Move::South, Move::East, Move::West};

inline constexpr int kUnreached = std::numeric_limits<int>::max();

/// BFS distances over passable cells from `source`.
inline std::vector<int> passable_distances(const Level& grid, Position source)
{
    std::vector<int> dist(static_cast<std::size_t>(grid.size()), kUnreached);
    std::vector<int> queue;
    queue.reserve(static_cast<std::size_t>(grid.size()));
    dist[static_cast<std::size_t>(grid.flat(source))] = 0;
    queue.push_back(grid.flat(source));
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const int cur = queue[head];
        const Position p = grid.position(cur);
        for (Move m : kMoves) {
            const Position d = offset(m);
            const Position q{p.row + d.row, p.col + d.col};
            if (!grid.in_bounds(q) || !is_passable(grid.at(q)))
                continue;
            const int f = grid.flat(q);
            if (dist[static_cast<std::size_t>(f)] != kUnreached)
                continue;
            dist[static_cast<std::size_t>(f)] = dist[static_cast<std::size_t>(cur)] + 1;
            queue.push_back(f);
        }
    }
    return dist;
}

inline bool adjacent_to_water(const Level& grid, Position p)
{
    for (Move m : kMoves) {
        const Position d = offset(m);
        const Position q{p.row + d.row, p.col + d.col};
        if (grid.in_bounds(q) && grid.at(q) == Tile::Water)
            return true;
    }
    return false;
}

inline bool wants_water(const AgentState& a, const GameConfig& c)
{
    return a.water < c.water_seek_threshold_fraction * c.indicator_capacity;
}

} // namespace detail

/// Scripted forage agent. Walks a shortest passable path towards the nearest
/// Forest, or towards the nearest cell next to Water once its water indicator
/// falls below the seek threshold. Ties: smallest (row, col) target, then
/// smallest (row, col) first step. Stays when the target is unreachable or
/// already reached.
inline Move forage_policy(const GameState& state, int agent_id)
{
    if (agent_id != 1 && agent_id != 2)
        throw InvalidArgument("agent id must be 1 or 2");
    const AgentState& agent = state.agents[static_cast<std::size_t>(agent_id - 1)];
    if (!agent.alive)
        throw StateError("forage_policy called for a dead agent");

    const Level& grid = state.grid;
    const bool water_mode = detail::wants_water(agent, state.config);
    const std::vector<int> from_agent = detail::passable_distances(grid, agent.position);

    int target = -1;
    int best = detail::kUnreached;
    for (int f = 0; f < grid.size(); ++f) {
        const int d = from_agent[static_cast<std::size_t>(f)];
        if (d == detail::kUnreached || d >= best)
            continue;
        const bool is_target = water_mode ? detail::adjacent_to_water(grid, grid.position(f)) : grid[f] == Tile::Forest;
        if (is_target) {
            best = d;
            target = f;
        }
    }
    if (target < 0 || best == 0)
        return Move::Stay;

    // Step to the neighbour that is one closer to the target; flat index order
    // equals (row, col) order.
    const std::vector<int> to_target = detail::passable_distances(grid, grid.position(target));
    Move chosen = Move::Stay;
    int chosen_flat = detail::kUnreached;
    for (Move m : detail::kMoves) {
        const Position d = offset(m);
        const Position q{agent.position.row + d.row, agent.position.col + d.col};
        if (!grid.in_bounds(q))
            continue;
        const int f = grid.flat(q);
        if (to_target[static_cast<std::size_t>(f)] == best - 1 && f < chosen_flat) {
            chosen = m;
            chosen_flat = f;
        }
    }
    return chosen;
}

/// Terminal check after a tick; nullopt while the game goes on.
inline std::optional<GameOutcome> check_outcome(const GameState& s)
{
    const AgentState& a = s.agents[0];
    const AgentState& b = s.agents[1];
    const int target = s.config.food_win_target;
    const bool a_food = a.alive && a.food_collected >= target;
    const bool b_food = b.alive && b.food_collected >= target;
    if (a_food && b_food)
        return GameOutcome::draw(s.tick, OutcomeReason::SimultaneousFoodTarget);
    if (a_food)
        return GameOutcome::win(1, s.tick, OutcomeReason::FoodTarget);
    if (b_food)
        return GameOutcome::win(2, s.tick, OutcomeReason::FoodTarget);
    if (!a.alive && !b.alive)
        return GameOutcome::draw(s.tick, OutcomeReason::SimultaneousDeath);
    if (!a.alive)
        return GameOutcome::win(2, s.tick, OutcomeReason::LastStanding);
    if (!b.alive)
        return GameOutcome::win(1, s.tick, OutcomeReason::LastStanding);
    if (s.tick >= s.config.max_ticks) {
        if (a.food_collected == b.food_collected)
            return GameOutcome::draw(s.tick, OutcomeReason::TimeoutTie);
        return GameOutcome::win(a.food_collected > b.food_collected ? 1 : 2, s.tick, OutcomeReason::TimeoutFood);
    }
    return std::nullopt;
}

/// Advances the game by one simultaneous step, in place.
/// Order: move, eat, drink, decay, health, scrub regrowth.
inline void advance(GameState& s)
{
    if (check_outcome(s))
        throw StateError("tick called on a finished game");
    const GameConfig& cfg = s.config;

    std::array<Move, 2> moves{Move::Stay, Move::Stay};
    for (std::size_t i = 0; i < 2; ++i)
        if (s.agents[i].alive)
            moves[i] = forage_policy(s, static_cast<int>(i) + 1);
    for (std::size_t i = 0; i < 2; ++i) {
        AgentState& a = s.agents[i];
        if (!a.alive)
            continue;
        const Position d = offset(moves[i]);
        a.position = {a.position.row + d.row, a.position.col + d.col};
    }

    // Eat. A shared Forest goes to one agent by a fair coin.
    std::array<bool, 2> on_forest{};
    for (std::size_t i = 0; i < 2; ++i)
        on_forest[i] = s.agents[i].alive && s.grid.at(s.agents[i].position) == Tile::Forest;
    auto eat = [&](AgentState& a) {
        a.food = cfg.indicator_capacity;
        ++a.food_collected;
        s.grid.set(a.position, Tile::Scrub);
    };
    if (on_forest[0] && on_forest[1] && s.agents[0].position == s.agents[1].position) {
        ++s.contested_draws;
        eat(s.agents[s.rng.bernoulli(0.5) ? 0 : 1]);
    } else {
        for (std::size_t i = 0; i < 2; ++i)
            if (on_forest[i])
                eat(s.agents[i]);
    }

    const double regen_level = cfg.regen_threshold_fraction * cfg.indicator_capacity;
    for (AgentState& a : s.agents) {
        if (!a.alive)
            continue;
        if (detail::adjacent_to_water(s.grid, a.position))
            a.water = cfg.indicator_capacity;
        a.food = std::max(0, a.food - cfg.indicator_decay);
        a.water = std::max(0, a.water - cfg.indicator_decay);
        const int empty = (a.food == 0) + (a.water == 0);
        a.health -= empty * cfg.health_loss_per_empty_indicator;
        if (a.food > regen_level && a.water > regen_level)
            a.health += cfg.health_regen;
        a.health = std::clamp(a.health, 0, cfg.health_capacity);
        a.alive = a.health > 0;
    }

    for (int f = 0; f < s.grid.size(); ++f)
        if (s.grid[f] == Tile::Scrub && s.rng.bernoulli(cfg.scrub_respawn_prob))
            s.grid.set(s.grid.position(f), Tile::Forest);

    ++s.tick;
}

inline GameState tick(GameState state)
{
    advance(state);
    return state;
}

/// Plays one episode; `observer` sees the initial state and every state after
/// a tick.
template <typename Observer>
GameOutcome run_episode_observed(const Level& level, const GameConfig& config, std::uint64_t seed,
                                 Observer&& observer)
{
    GameState s = init_game(level, config, seed);
    observer(static_cast<const GameState&>(s));
    for (;;) {
        advance(s);
        observer(static_cast<const GameState&>(s));
        if (auto outcome = check_outcome(s))
            return *outcome;
    }
}

inline GameOutcome run_episode(const Level& level, const GameConfig& config, std::uint64_t seed)
{
    return run_episode_observed(level, config, seed, [](const GameState&) {});
}

} // namespace forage
