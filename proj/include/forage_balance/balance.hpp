#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "error.hpp"
#include "forage_game.hpp"
#include "level.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace forage {

/// Slack for comparisons between rates that are exact multiples of 0.5/n but
/// pass through floating point.
inline constexpr double kRateSlack = 1e-9;

/// Win-rate estimate from n runs. Draws give half a point to each side, so the
/// estimate is stored exactly as Player1 half-points.
struct WinRates {
    int n = 0;
    int p1_half_points = 0;
    int draws = 0;

    double w_p1() const noexcept { return n == 0 ? 0.5 : static_cast<double>(p1_half_points) / (2.0 * n); }
    double w_p2() const noexcept { return n == 0 ? 0.5 : static_cast<double>(2 * n - p1_half_points) / (2.0 * n); }

    friend bool operator==(const WinRates&, const WinRates&) = default;
};

struct BalanceTarget {
    double b = 0.5;
    double alpha = 1.0;
    double epsilon_b = 0.5 / 14.0;

    /// Target whose attainment tolerance is half the win-rate resolution of an
    /// n-run estimate.
    static BalanceTarget for_runs(double b, int n, double alpha = 1.0) { return {b, alpha, 0.5 / n}; }

    bool attained(double distance) const noexcept { return distance <= epsilon_b + kRateSlack; }

    void validate() const
    {
        if (!(b >= 0.0 && b <= 1.0))
            throw InvalidArgument("balance target b must lie in [0,1]");
        if (!(alpha >= 0.0))
            throw InvalidArgument("alpha must be non-negative");
        if (!(epsilon_b >= 0.0))
            throw InvalidArgument("epsilon_b must be non-negative");
    }
};

/// Seed of run `i` in an estimate keyed by `master_seed`.
constexpr std::uint64_t run_seed(std::uint64_t master_seed, int i) noexcept
{
    return derive_seed(derive_seed(master_seed, stream::episodes), static_cast<std::uint64_t>(i));
}

/// Player1 half-points of runs 0..n-1, in run order.
inline std::vector<int> simulate_runs(const Level& level, const GameConfig& config, int n, std::uint64_t master_seed,
                                      int jobs = 1)
{
    if (!is_playable(level))
        throw UnplayableLevel("cannot estimate win rates of an unplayable level");
    std::vector<int> credits(static_cast<std::size_t>(n), 0);
    parallel_for(credits.size(), jobs, [&](std::size_t i) {
        credits[i] = run_episode(level, config, run_seed(master_seed, static_cast<int>(i))).p1_half_credit();
    });
    return credits;
}

inline WinRates estimate_win_rates(const Level& level, const GameConfig& config, int n, std::uint64_t master_seed,
                                   int jobs = 1)
{
    if (n < 2 || n % 2 != 0)
        throw InvalidArgument("number of runs must be even and at least 2");
    WinRates r;
    r.n = n;
    for (int c : simulate_runs(level, config, n, master_seed, jobs)) {
        r.p1_half_points += c;
        r.draws += (c == 1);
    }
    return r;
}

/// |w_p1 - b|.
inline double balance_distance(double w_p1, double b) { return std::fabs(w_p1 - b); }

/// Improvement of the balance distance plus the attainment bonus.
inline double reward(double b_prev, double b_cur, const BalanceTarget& target)
{
    return b_prev - b_cur + (target.attained(b_cur) ? target.alpha : 0.0);
}

/// 1 - |w_p1 - w_p2| >= threshold.
inline bool fair_range_check(const WinRates& rates, double threshold = 0.8)
{
    return 1.0 - std::fabs(rates.w_p1() - rates.w_p2()) >= threshold - kRateSlack;
}

struct RunCountRow {
    int n = 0;
    double mu = 0.0;
    double sigma = 0.0;
};

struct RunCountSelection {
    std::optional<int> chosen; ///< smallest n with mu + sigma below the threshold
    std::vector<RunCountRow> table;
};

/// Core of the run-count selection, over precomputed per-level result
/// streams (Player1 half-points per run). For every even n >= 4 the
/// deviation |w_n - w_{n-2}| of the prefix estimates is averaged over levels;
/// sigma is the population standard deviation over levels.
inline RunCountSelection choose_n_from_streams(const std::vector<std::vector<int>>& streams, int n_max,
                                               double threshold = 0.05)
{
    if (streams.empty())
        throw InvalidArgument("run-count selection needs at least one level");
    if (n_max < 4 || n_max % 2 != 0)
        throw InvalidArgument("n_max must be even and at least 4");
    for (const auto& s : streams)
        if (static_cast<int>(s.size()) < n_max)
            throw InvalidArgument("result stream shorter than n_max");

    const auto count = static_cast<double>(streams.size());
    RunCountSelection out;
    std::vector<int> prefix(streams.size(), 0);
    std::vector<double> prev_rate(streams.size(), 0.0);
    for (std::size_t l = 0; l < streams.size(); ++l) {
        prefix[l] = streams[l][0] + streams[l][1];
        prev_rate[l] = prefix[l] / 4.0;
    }
    for (int n = 4; n <= n_max; n += 2) {
        std::vector<double> dev(streams.size());
        for (std::size_t l = 0; l < streams.size(); ++l) {
            prefix[l] += streams[l][static_cast<std::size_t>(n - 2)] + streams[l][static_cast<std::size_t>(n - 1)];
            const double rate = prefix[l] / (2.0 * n);
            dev[l] = std::fabs(rate - prev_rate[l]);
            prev_rate[l] = rate;
        }
        double mean = 0.0;
        for (double d : dev)
            mean += d;
        mean /= count;
        double var = 0.0;
        for (double d : dev)
            var += (d - mean) * (d - mean);
        const double sigma = std::sqrt(var / count);
        out.table.push_back({n, mean, sigma});
        if (!out.chosen && mean + sigma < threshold)
            out.chosen = n;
    }
    return out;
}

/// Simulates every level n_max times (seeds keyed by level index) and selects
/// the run count.
inline RunCountSelection choose_n(const std::vector<Level>& levels, const GameConfig& config, int n_max,
                                  std::uint64_t seed, int jobs = 1, double threshold = 0.05)
{
    if (levels.empty())
        throw InvalidArgument("run-count selection needs at least one level");
    if (n_max < 4 || n_max % 2 != 0)
        throw InvalidArgument("n_max must be even and at least 4");
    std::vector<std::vector<int>> streams(levels.size());
    parallel_for(levels.size(), jobs, [&](std::size_t i) {
        streams[i] = simulate_runs(levels[i], config, n_max, derive_seed(seed, i));
    });
    return choose_n_from_streams(streams, n_max, threshold);
}

} // namespace forage
