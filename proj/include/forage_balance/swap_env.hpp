#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "balance.hpp"
#include "error.hpp"
#include "forage_game.hpp"
#include "generator.hpp"
#include "level.hpp"
#include "rng.hpp"

namespace forage {

enum class Representation : std::uint8_t { SwapNarrow, SwapTurtle, SwapWide, NarrowBaseline };

constexpr std::string_view representation_name(Representation r) noexcept
{
    switch (r) {
    case Representation::SwapNarrow: return "swap-narrow";
    case Representation::SwapTurtle: return "swap-turtle";
    case Representation::SwapWide: return "swap-wide";
    case Representation::NarrowBaseline: return "narrow";
    }
    return "?";
}

inline Representation parse_representation(std::string_view name)
{
    for (auto r : {Representation::SwapNarrow, Representation::SwapTurtle, Representation::SwapWide,
                   Representation::NarrowBaseline})
        if (representation_name(r) == name)
            return r;
    throw InvalidArgument("unknown representation '" + std::string(name) + "'");
}

/// Tile types the narrow baseline can place: Grass, Forest, Stone, Water and
/// either both player tiles or one shared player tile in legacy mode.
constexpr int placeable_tile_count(bool distinguish_players) noexcept { return distinguish_players ? 6 : 5; }

/// 2 for swap-narrow, 4*4*2 for swap-turtle, w*h*w*h*2 for swap-wide and
/// placeable tiles + a no-op for the narrow baseline.
constexpr int action_space_size(Representation repr, int width, int height, bool distinguish_players = true) noexcept
{
    switch (repr) {
    case Representation::SwapNarrow: return 2;
    case Representation::SwapTurtle: return 4 * 4 * 2;
    case Representation::SwapWide: return width * height * width * height * 2;
    case Representation::NarrowBaseline: return placeable_tile_count(distinguish_players) + 1;
    }
    return 0;
}

/// Trailing cursor planes appended to the level one-hot.
constexpr int cursor_channels(Representation repr) noexcept
{
    switch (repr) {
    case Representation::SwapNarrow:
    case Representation::SwapTurtle: return 2;
    case Representation::NarrowBaseline: return 1;
    case Representation::SwapWide: return 0;
    }
    return 0;
}

/// 20% of the grid, rounded up.
constexpr int default_max_changes(int width, int height) noexcept { return (width * height * 20 + 99) / 100; }

struct EpisodeConfig {
    int max_steps = 100;
    int max_changes = default_max_changes(Level::kDefaultSize, Level::kDefaultSize);
    BalanceTarget target = BalanceTarget::for_runs(0.5, 14);
    int n_sims = 14;
    std::uint64_t master_seed = 0;
    GameConfig game{};
    /// Hill climbing: whether a reverted edit still consumes the change budget.
    bool count_reverted_changes = true;
    /// Worker threads for the n simulation runs of one estimate.
    int sim_jobs = 1;

    void validate() const
    {
        if (max_steps < 1)
            throw InvalidArgument("max_steps must be positive");
        if (max_changes < 1)
            throw InvalidArgument("max_changes must be positive");
        if (n_sims < 2 || n_sims % 2 != 0)
            throw InvalidArgument("n_sims must be even and at least 2");
        target.validate();
        game.validate();
    }
};

enum class DoneReason : std::uint8_t { None, Balanced, MaxSteps, MaxChanges };

constexpr std::string_view done_reason_name(DoneReason r) noexcept
{
    switch (r) {
    case DoneReason::None: return "none";
    case DoneReason::Balanced: return "balanced";
    case DoneReason::MaxSteps: return "max_steps";
    case DoneReason::MaxChanges: return "max_changes";
    }
    return "?";
}

struct SwapEnvState {
    Level level;
    int steps = 0;
    int changes = 0;
    double b_prev = 0.0;
    double w_p1 = 0.5;
    Position cursor_a{};
    Position cursor_b{};
    bool done = false;
    DoneReason done_reason = DoneReason::None;
    bool playable = true;
};

struct StepInfo {
    std::optional<double> w_p1; ///< set when this step ran an estimate
    double b_cur = 0.0;
    int sim_calls = 0; ///< win-rate estimates run during this step
    std::optional<std::pair<Tile, Tile>> swap_pair_types;
    bool changed = false;
    bool playable = true;
};

struct StepResult {
    ObservationTensor observation;
    double reward = 0.0;
    bool done = false;
    StepInfo info;
};

/// One entry of the per-episode log consumed by the swap-impact analysis.
struct StepRecord {
    int step = 0;
    int action = 0;
    std::optional<std::pair<Tile, Tile>> swapped_types;
    double w_p1 = 0.0;
    double b = 0.0;
    double reward = 0.0;
    int changes = 0;
};

/// Level-editing MDP. Every change that leaves the level playable is scored by
/// a fresh n-run win-rate estimate.
class SwapEnv {
public:
    SwapEnv(Representation repr, EpisodeConfig config) : repr_(repr), config_(std::move(config))
    {
        config_.validate();
    }

    Representation representation() const noexcept { return repr_; }
    const EpisodeConfig& config() const noexcept { return config_; }
    const SwapEnvState& state() const noexcept { return state_; }
    const std::vector<StepRecord>& log() const noexcept { return log_; }
    int total_sim_calls() const noexcept { return total_sim_calls_; }
    int action_count() const noexcept
    {
        return action_space_size(repr_, state_.level.width(), state_.level.height(),
                                 state_.level.distinguish_players());
    }

    /// Estimates the initial balance; a level already within tolerance of the
    /// target finishes immediately with DoneReason::Balanced.
    ObservationTensor reset(const Level& level)
    {
        if (!is_playable(level))
            throw UnplayableLevel("reset requires a playable level");
        state_ = SwapEnvState{};
        state_.level = level;
        log_.clear();
        evaluations_ = 0;
        total_sim_calls_ = 0;
        cursor_rng_ = Rng(derive_seed(config_.master_seed, stream::cursor));

        const WinRates rates = evaluate(level);
        state_.w_p1 = rates.w_p1();
        state_.b_prev = balance_distance(state_.w_p1, config_.target.b);
        if (config_.target.attained(state_.b_prev)) {
            state_.done = true;
            state_.done_reason = DoneReason::Balanced;
        }
        if (repr_ != Representation::SwapWide)
            draw_cursors();
        return observe();
    }

    StepResult step(int action)
    {
        if (state_.done)
            throw StateError("step called on a finished episode");
        if (action < 0 || action >= action_count())
            throw InvalidArgument("action " + std::to_string(action) + " out of range [0," +
                                  std::to_string(action_count()) + ")");

        StepResult out;
        out.info.b_cur = state_.b_prev;
        const Edit edit = decode(action);
        if (edit.kind != EditKind::None)
            apply(edit, out);

        ++state_.steps;
        out.info.playable = state_.playable;
        log_.push_back({state_.steps - 1, action, out.info.swap_pair_types, state_.w_p1, state_.b_prev, out.reward,
                        state_.changes});

        if (out.info.w_p1 && state_.playable && config_.target.attained(state_.b_prev)) {
            state_.done = true;
            state_.done_reason = DoneReason::Balanced;
        } else if (state_.changes >= config_.max_changes) {
            state_.done = true;
            state_.done_reason = DoneReason::MaxChanges;
        } else if (state_.steps >= config_.max_steps) {
            state_.done = true;
            state_.done_reason = DoneReason::MaxSteps;
        }
        if (!state_.done && (repr_ == Representation::SwapNarrow || repr_ == Representation::NarrowBaseline))
            draw_cursors();
        out.done = state_.done;
        out.observation = observe();
        return out;
    }

    ObservationTensor observe() const
    {
        ObservationTensor obs = one_hot(state_.level, cursor_channels(repr_));
        const int base = tile_channels(state_.level.distinguish_players());
        if (cursor_channels(repr_) >= 1)
            obs.at(state_.cursor_a.row, state_.cursor_a.col, base) = 1.0f;
        if (cursor_channels(repr_) >= 2)
            obs.at(state_.cursor_b.row, state_.cursor_b.col, base + 1) = 1.0f;
        return obs;
    }

private:
    enum class EditKind { None, Swap, Place };

    struct Edit {
        EditKind kind = EditKind::None;
        Position a{};
        Position b{};
        Tile tile = Tile::Grass;
    };

    Edit decode(int action)
    {
        const Level& lv = state_.level;
        switch (repr_) {
        case Representation::SwapNarrow:
            if (action == 1)
                return {EditKind::Swap, state_.cursor_a, state_.cursor_b};
            return {};
        case Representation::SwapTurtle: {
            const int swap = action % 2;
            const int move_b = (action / 2) % 4;
            const int move_a = action / 8;
            if (swap == 1)
                return {EditKind::Swap, state_.cursor_a, state_.cursor_b};
            state_.cursor_a = moved(state_.cursor_a, move_a);
            state_.cursor_b = moved(state_.cursor_b, move_b);
            return {};
        }
        case Representation::SwapWide: {
            // [x1, y1, x2, y2, swap], swap fastest.
            int rest = action;
            const int swap = rest % 2;
            rest /= 2;
            const int y2 = rest % lv.height();
            rest /= lv.height();
            const int x2 = rest % lv.width();
            rest /= lv.width();
            const int y1 = rest % lv.height();
            const int x1 = rest / lv.height();
            if (swap == 0)
                return {};
            return {EditKind::Swap, {y1, x1}, {y2, x2}};
        }
        case Representation::NarrowBaseline: {
            if (action == 0)
                return {};
            Tile t = kPlaceableTiles[static_cast<std::size_t>(action - 1)];
            if (!lv.distinguish_players() && t == Tile::Player1)
                t = legacy_player_tile();
            return {EditKind::Place, state_.cursor_a, {}, t};
        }
        }
        return {};
    }

    /// Legacy mode has one player tile; place whichever spawn is missing.
    Tile legacy_player_tile() const
    {
        return state_.level.count(Tile::Player1) == 0 || state_.level.count(Tile::Player2) > 0 ? Tile::Player1
                                                                                                 : Tile::Player2;
    }

    Position moved(Position p, int move) const
    {
        constexpr std::array<Move, 4> moves{Move::North, Move::South, Move::East, Move::West};
        const Position d = offset(moves[static_cast<std::size_t>(move)]);
        return {std::clamp(p.row + d.row, 0, state_.level.height() - 1),
                std::clamp(p.col + d.col, 0, state_.level.width() - 1)};
    }

    void apply(const Edit& edit, StepResult& out)
    {
        Level next = state_.level;
        if (edit.kind == EditKind::Swap) {
            const Tile ta = state_.level.at(edit.a);
            const Tile tb = state_.level.at(edit.b);
            if (ta == tb)
                return; // same-type swap: no change, no simulation, reward 0
            out.info.swap_pair_types = std::pair{ta, tb};
            next = swap_tiles(state_.level, edit.a, edit.b);
        } else {
            const Tile before = state_.level.at(edit.a);
            if (before == edit.tile)
                return;
            out.info.swap_pair_types = std::pair{before, edit.tile};
            next.set(edit.a, edit.tile);
        }
        out.info.changed = true;
        ++state_.changes;
        state_.level = std::move(next);
        state_.playable = is_playable(state_.level);
        if (!state_.playable) {
            out.reward = -1.0;
            return;
        }
        const WinRates rates = evaluate(state_.level);
        out.info.sim_calls = 1;
        state_.w_p1 = rates.w_p1();
        const double b_cur = balance_distance(state_.w_p1, config_.target.b);
        out.reward = reward(state_.b_prev, b_cur, config_.target);
        out.info.w_p1 = state_.w_p1;
        out.info.b_cur = b_cur;
        state_.b_prev = b_cur;
    }

    /// Each estimate gets its own derived seed block.
    WinRates evaluate(const Level& level)
    {
        const std::uint64_t seed =
            derive_seed(derive_seed(config_.master_seed, stream::evaluation), static_cast<std::uint64_t>(evaluations_++));
        ++total_sim_calls_;
        return estimate_win_rates(level, config_.game, config_.n_sims, seed, config_.sim_jobs);
    }

    void draw_cursors()
    {
        const int cells = state_.level.size();
        const int a = cursor_rng_.index(cells);
        state_.cursor_a = state_.level.position(a);
        if (repr_ == Representation::NarrowBaseline)
            return;
        int b = cursor_rng_.index(cells - 1);
        if (b >= a)
            ++b;
        state_.cursor_b = state_.level.position(b);
    }

    Representation repr_;
    EpisodeConfig config_;
    SwapEnvState state_{};
    std::vector<StepRecord> log_;
    Rng cursor_rng_{0};
    int evaluations_ = 0;
    int total_sim_calls_ = 0;
};

} // namespace forage
