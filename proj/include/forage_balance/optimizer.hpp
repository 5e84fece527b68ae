#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "balance.hpp"
#include "error.hpp"
#include "generator.hpp"
#include "level.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "swap_env.hpp"

namespace forage {

struct SwapLogEntry {
    int step = 0;
    Tile first = Tile::Grass;
    Tile second = Tile::Grass;
};

struct BalancingResult {
    Level level_before;
    Level level_after;
    double b_initial = 0.0;
    double b_final = 0.0;
    double w_p1_initial = 0.5;
    double w_p1_final = 0.5;
    int changes = 0;
    int episode_length = 0;
    bool reached = false;
    bool improved = false;
    bool unplayable = false;
    /// Already within tolerance before any edit; excluded from summary rates.
    bool initially_attained = false;
    std::vector<SwapLogEntry> swap_log;
};

namespace detail {

/// "Improved": strictly closer to the target, or the target reached, on a
/// level that is still playable.
inline void finish_result(BalancingResult& r, const BalanceTarget& target)
{
    r.reached = !r.unplayable && target.attained(r.b_final);
    r.improved = !r.unplayable && (r.reached || r.b_final < r.b_initial - kRateSlack);
}

/// Seeded source of win-rate estimates; every call uses a fresh seed block.
class Evaluator {
public:
    Evaluator(const EpisodeConfig& config, std::uint64_t seed)
        : config_(config), base_(derive_seed(seed, stream::evaluation))
    {
    }

    WinRates operator()(const Level& level)
    {
        return estimate_win_rates(level, config_.game, config_.n_sims, derive_seed(base_, count_++), config_.sim_jobs);
    }

    int calls() const noexcept { return static_cast<int>(count_); }

private:
    const EpisodeConfig& config_;
    std::uint64_t base_;
    std::uint64_t count_ = 0;
};

/// Generic revert-on-negative-reward loop. `propose` returns the edited level
/// and the (before, after) tile pair, or nullopt when no edit exists.
template <typename Propose>
BalancingResult hill_climb(const Level& level, const EpisodeConfig& config, std::uint64_t seed, bool allow_unplayable,
                           Propose&& propose)
{
    config.validate();
    if (!is_playable(level))
        throw UnplayableLevel("hill climbing requires a playable level");
    Evaluator evaluate(config, seed);
    Rng rng(derive_seed(seed, stream::edits));
    const BalanceTarget& target = config.target;

    BalancingResult r;
    r.level_before = level;
    r.level_after = level;
    const WinRates initial = evaluate(level);
    r.w_p1_initial = r.w_p1_final = initial.w_p1();
    r.b_initial = r.b_final = balance_distance(r.w_p1_initial, target.b);
    if (target.attained(r.b_initial)) {
        r.initially_attained = true;
        finish_result(r, target);
        return r;
    }

    Level current = level;
    double b = r.b_initial;
    double w = r.w_p1_initial;
    bool playable = true;
    int iterations = 0;
    int changes = 0;
    while (changes < config.max_changes && iterations < config.max_steps) {
        auto proposal = propose(current, rng);
        if (!proposal)
            break;
        ++iterations;
        auto& [candidate, types] = *proposal;
        const bool candidate_playable = is_playable(candidate);
        bool accept = false;
        double b_new = b;
        double w_new = w;
        if (candidate_playable) {
            w_new = evaluate(candidate).w_p1();
            b_new = balance_distance(w_new, target.b);
            accept = reward(b, b_new, target) >= 0.0;
        } else {
            // No simulation possible; the narrow climber keeps the edit with a
            // neutral reward, the swap climber treats it as a penalty.
            accept = allow_unplayable;
        }
        if (accept || config.count_reverted_changes)
            ++changes;
        if (!accept)
            continue;
        current = std::move(candidate);
        playable = candidate_playable;
        b = b_new;
        w = w_new;
        r.swap_log.push_back({iterations - 1, types.first, types.second});
        if (playable && target.attained(b))
            break;
    }

    r.level_after = current;
    r.b_final = b;
    r.w_p1_final = w;
    r.changes = changes;
    r.episode_length = iterations;
    r.unplayable = !playable;
    finish_result(r, target);
    return r;
}

} // namespace detail

/// Random swap of two distinct positions holding different tile types; the
/// swap is reverted when the reward is negative.
inline BalancingResult hill_climb_swap_narrow(const Level& level, const EpisodeConfig& config, std::uint64_t seed)
{
    return detail::hill_climb(level, config, seed, false,
                              [](const Level& cur, Rng& rng) -> std::optional<std::pair<Level, std::pair<Tile, Tile>>> {
                                  const int cells = cur.size();
                                  for (int tries = 0; tries < 100000; ++tries) {
                                      const int a = rng.index(cells);
                                      int b = rng.index(cells - 1);
                                      if (b >= a)
                                          ++b;
                                      const Tile ta = cur[a];
                                      const Tile tb = cur[b];
                                      if (ta == tb)
                                          continue;
                                      return std::pair{swap_tiles(cur, cur.position(a), cur.position(b)), std::pair{ta, tb}};
                                  }
                                  return std::nullopt;
                              });
}

/// Places a uniformly drawn tile type at a uniform position. Playability is
/// not enforced; unplayable intermediate levels are kept.
inline BalancingResult hill_climb_narrow(const Level& level, const EpisodeConfig& config, std::uint64_t seed)
{
    return detail::hill_climb(level, config, seed, true,
                              [](const Level& cur, Rng& rng) -> std::optional<std::pair<Level, std::pair<Tile, Tile>>> {
                                  for (int tries = 0; tries < 100000; ++tries) {
                                      const Position p = cur.position(rng.index(cur.size()));
                                      const Tile t = kPlaceableTiles[static_cast<std::size_t>(
                                          rng.index(static_cast<int>(kPlaceableTiles.size())))];
                                      const Tile before = cur.at(p);
                                      if (before == t)
                                          continue;
                                      Level next = cur;
                                      next.set(p, t);
                                      return std::pair{std::move(next), std::pair{before, t}};
                                  }
                                  return std::nullopt;
                              });
}

enum class ActionMode : std::uint8_t { Greedy, Sample };

/// Action chooser: given the raw observation returns an action index.
using ActionChooser = std::function<int(const ObservationTensor&, Rng&)>;

inline ActionChooser policy_chooser(const PolicyNetwork& policy, ActionMode mode, int tile_channels)
{
    return [&policy, mode, tile_channels](const ObservationTensor& obs, Rng& rng) {
        const std::vector<double> x = policy_features(obs, tile_channels);
        return mode == ActionMode::Greedy ? policy.greedy_action(x) : policy.sample_action(x, rng);
    };
}

/// Uniform random actions; the reference point a learned policy must beat.
inline ActionChooser uniform_chooser(int action_count)
{
    return [action_count](const ObservationTensor&, Rng& rng) { return rng.index(action_count); };
}

/// Rolls a chooser through one environment episode and records the result.
/// `log` optionally receives the per-step records.
inline BalancingResult run_balancing_episode(Representation repr, const Level& level, const EpisodeConfig& config,
                                             std::uint64_t seed, const ActionChooser& choose,
                                             std::vector<StepRecord>* log = nullptr)
{
    EpisodeConfig cfg = config;
    cfg.master_seed = seed;
    SwapEnv env(repr, cfg);
    Rng rng(derive_seed(seed, stream::policy));
    ObservationTensor obs = env.reset(level);

    BalancingResult r;
    r.level_before = level;
    r.w_p1_initial = env.state().w_p1;
    r.b_initial = env.state().b_prev;
    r.initially_attained = env.state().done;
    while (!env.state().done) {
        StepResult s = env.step(choose(obs, rng));
        if (s.info.swap_pair_types)
            r.swap_log.push_back({env.state().steps - 1, s.info.swap_pair_types->first, s.info.swap_pair_types->second});
        obs = std::move(s.observation);
    }
    const SwapEnvState& st = env.state();
    r.level_after = st.level;
    r.b_final = st.b_prev;
    r.w_p1_final = st.w_p1;
    r.changes = st.changes;
    r.episode_length = st.steps;
    r.unplayable = !st.playable;
    detail::finish_result(r, cfg.target);
    if (log)
        *log = env.log();
    return r;
}

inline BalancingResult balance_with_policy(const PolicyNetwork& policy, Representation repr, const Level& level,
                                           const EpisodeConfig& config, std::uint64_t seed, ActionMode mode,
                                           std::vector<StepRecord>* log = nullptr)
{
    const int expected = action_space_size(repr, level.width(), level.height(), level.distinguish_players());
    if (policy.architecture().action_dim != expected)
        throw InvalidArgument("policy action dimension " + std::to_string(policy.architecture().action_dim) +
                              " does not match representation (" + std::to_string(expected) + ")");
    return run_balancing_episode(repr, level, config, seed,
                                 policy_chooser(policy, mode, tile_channels(level.distinguish_players())), log);
}

struct TrainConfig {
    int total_steps = 20000;
    int rollout_length = 256;
    int minibatch_size = 64;
    int epochs_per_update = 4;
    int num_envs = 4;
    int hidden = 128;
    double clip_epsilon = 0.2;
    double discount = 0.99;
    double gae_lambda = 0.95;
    double learning_rate = 3e-4;
    double entropy_coef = 0.01;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (total_steps < 0 || rollout_length < 1 || minibatch_size < 1 || epochs_per_update < 1 || num_envs < 1 ||
            hidden < 1)
            throw InvalidArgument("training counts must be positive");
        if (!(clip_epsilon > 0.0 && clip_epsilon < 1.0))
            throw InvalidArgument("clip_epsilon must lie in (0,1)");
        if (!(discount > 0.0 && discount <= 1.0))
            throw InvalidArgument("discount must lie in (0,1]");
        if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0))
            throw InvalidArgument("gae_lambda must lie in [0,1]");
        if (!(learning_rate >= 0.0))
            throw InvalidArgument("learning_rate must be non-negative");
    }
};

struct CurvePoint {
    int update = 0;
    double mean_reward = 0.0; ///< mean return of episodes finished in the rollout
    double mean_episode_len = 0.0;
    double balanced_rate = 0.0;
    int episodes = 0;
    double loss = 0.0;
};

struct TrainResult {
    PolicyNetwork policy;
    std::vector<CurvePoint> curve;
};

/// Where training episodes get their levels: a fixed pool cycled in a seeded
/// order, or fresh generator draws.
using LevelSource = std::variant<std::vector<Level>, GeneratorConfig>;

/// Generalized advantage estimation for one environment's trajectory segment.
/// `dones[t]` marks that the episode ended after step t; `bootstrap` is the
/// value of the state following the last step.
inline std::vector<double> gae_advantages(const std::vector<double>& rewards, const std::vector<double>& values,
                                          const std::vector<char>& dones, double bootstrap, double discount,
                                          double lambda)
{
    std::vector<double> adv(rewards.size(), 0.0);
    double running = 0.0;
    double next_value = bootstrap;
    for (std::size_t k = rewards.size(); k-- > 0;) {
        const double not_done = dones[k] ? 0.0 : 1.0;
        const double delta = rewards[k] + discount * next_value * not_done - values[k];
        running = delta + discount * lambda * not_done * running;
        adv[k] = running;
        next_value = values[k];
    }
    return adv;
}

/// PPO (clipped surrogate, GAE) over `num_envs` environments stepped in turn.
/// Deterministic in train_config.seed. `on_update` is called after every
/// update with the new curve point.
inline TrainResult train_policy(Representation repr, const LevelSource& source, const EpisodeConfig& episode_config,
                                const TrainConfig& tc, const std::function<void(const CurvePoint&)>& on_update = {})
{
    tc.validate();
    episode_config.validate();

    int width = Level::kDefaultSize;
    int height = Level::kDefaultSize;
    bool distinguish = true;
    if (const auto* pool = std::get_if<std::vector<Level>>(&source)) {
        if (pool->empty())
            throw InvalidArgument("training level pool is empty");
        width = pool->front().width();
        height = pool->front().height();
        distinguish = pool->front().distinguish_players();
    } else {
        const auto& g = std::get<GeneratorConfig>(source);
        g.validate();
        width = g.width;
        height = g.height;
        distinguish = g.distinguish_players;
    }
    const int tiles = tile_channels(distinguish);
    PolicyArchitecture arch;
    arch.input_dim = policy_input_dim(height, width, tiles, cursor_channels(repr));
    arch.hidden = tc.hidden;
    arch.action_dim = action_space_size(repr, width, height, distinguish);

    TrainResult result{PolicyNetwork::initialized(arch, derive_seed(tc.seed, stream::policy)), {}};
    PolicyNetwork& net = result.policy;
    AdamOptimizer adam(net.parameters().size(), tc.learning_rate, tc.max_grad_norm);
    const PpoCoefficients coef{tc.clip_epsilon, tc.value_coef, tc.entropy_coef};
    Rng action_rng(derive_seed(tc.seed, 1));
    Rng shuffle_rng(derive_seed(tc.seed, 2));
    std::uint64_t episode_counter = 0;

    auto next_level = [&](std::uint64_t episode) -> Level {
        if (const auto* pool = std::get_if<std::vector<Level>>(&source)) {
            Rng pick(derive_seed(derive_seed(tc.seed, stream::levels), episode));
            return (*pool)[static_cast<std::size_t>(pick.index(static_cast<int>(pool->size())))];
        }
        GeneratorConfig g = std::get<GeneratorConfig>(source);
        g.seed = level_seed(derive_seed(tc.seed, stream::levels), static_cast<int>(episode));
        return generate_level(g);
    };

    struct Slot {
        std::optional<SwapEnv> env;
        ObservationTensor obs;
        double episode_return = 0.0;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(tc.num_envs));
    auto start_episode = [&](Slot& slot) {
        // Levels already at the target end at reset and are skipped.
        for (;;) {
            const std::uint64_t id = episode_counter++;
            EpisodeConfig cfg = episode_config;
            cfg.master_seed = derive_seed(derive_seed(tc.seed, stream::episodes), id);
            slot.env.emplace(repr, cfg);
            slot.obs = slot.env->reset(next_level(id));
            slot.episode_return = 0.0;
            if (!slot.env->state().done)
                return;
        }
    };
    if (tc.total_steps > 0)
        for (Slot& slot : slots)
            start_episode(slot);

    const int updates = tc.total_steps / tc.rollout_length;
    const int per_env = std::max(1, tc.rollout_length / tc.num_envs);
    for (int update = 0; update < updates; ++update) {
        std::vector<PpoSample> samples;
        std::vector<double> all_values;
        CurvePoint point;
        point.update = update;
        double len_sum = 0.0;
        int balanced = 0;

        for (Slot& slot : slots) {
            std::vector<double> rewards;
            std::vector<double> values;
            std::vector<char> dones;
            const std::size_t first = samples.size();
            for (int t = 0; t < per_env; ++t) {
                PpoSample s;
                s.input = policy_features(slot.obs, tiles);
                const PolicyOutput out = net.forward(s.input);
                s.action = PolicyNetwork::sample_from(out.probs, action_rng);
                s.old_log_prob = out.log_probs(s.action);
                StepResult step = slot.env->step(s.action);
                slot.episode_return += step.reward;
                rewards.push_back(step.reward);
                values.push_back(out.value);
                dones.push_back(step.done ? 1 : 0);
                samples.push_back(std::move(s));
                if (step.done) {
                    ++point.episodes;
                    point.mean_reward += slot.episode_return;
                    len_sum += slot.env->state().steps;
                    balanced += slot.env->state().done_reason == DoneReason::Balanced;
                    start_episode(slot);
                } else {
                    slot.obs = std::move(step.observation);
                }
            }
            const double bootstrap = net.forward(policy_features(slot.obs, tiles)).value;
            const std::vector<double> adv =
                gae_advantages(rewards, values, dones, bootstrap, tc.discount, tc.gae_lambda);
            for (std::size_t k = 0; k < adv.size(); ++k) {
                samples[first + k].advantage = adv[k];
                samples[first + k].return_target = adv[k] + values[k];
            }
        }
        if (point.episodes > 0) {
            point.mean_reward /= point.episodes;
            point.mean_episode_len = len_sum / point.episodes;
            point.balanced_rate = static_cast<double>(balanced) / point.episodes;
        }

        // Advantage normalization over the whole rollout.
        double mean = 0.0;
        for (const auto& s : samples)
            mean += s.advantage;
        mean /= static_cast<double>(samples.size());
        double var = 0.0;
        for (const auto& s : samples)
            var += (s.advantage - mean) * (s.advantage - mean);
        const double sd = std::sqrt(var / static_cast<double>(samples.size())) + 1e-8;
        for (auto& s : samples)
            s.advantage = (s.advantage - mean) / sd;

        std::vector<std::size_t> order(samples.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::vector<double> grad;
        double loss_sum = 0.0;
        int batches = 0;
        for (int epoch = 0; epoch < tc.epochs_per_update; ++epoch) {
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[shuffle_rng.below(i)]);
            for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tc.minibatch_size)) {
                const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tc.minibatch_size));
                std::vector<const PpoSample*> batch;
                for (std::size_t i = start; i < end; ++i)
                    batch.push_back(&samples[order[i]]);
                const PpoLoss loss = ppo_loss(net, batch, coef, &grad);
                if (!std::isfinite(loss.total))
                    throw NumericalError("non-finite PPO loss at update " + std::to_string(update) +
                                         " (policy " + std::to_string(loss.policy) + ", value " +
                                         std::to_string(loss.value) + ")");
                adam.step(net.parameters(), grad);
                loss_sum += loss.total;
                ++batches;
            }
        }
        for (double p : net.parameters())
            if (!std::isfinite(p))
                throw NumericalError("non-finite policy parameter after update " + std::to_string(update));
        point.loss = batches > 0 ? loss_sum / batches : 0.0;
        result.curve.push_back(point);
        if (on_update)
            on_update(point);
    }
    return result;
}

} // namespace forage
