#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "balance.hpp"
#include "error.hpp"
#include "level.hpp"
#include "optimizer.hpp"
#include "parallel.hpp"
#include "swap_env.hpp"

namespace forage {

struct SymmetryScores {
    double diagonal = 0.0;
    double counter_diagonal = 0.0;
    double vertical = 0.0;
    double horizontal = 0.0;
};

namespace detail {

/// sqrt of the number of cells where the level differs from its image under
/// `mirror`, i.e. the Frobenius norm of the 0/1 difference indicator.
template <typename Mirror>
double mismatch_norm(const Level& level, Mirror&& mirror)
{
    const int n = level.width();
    int count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            count += level.at({i, j}) != level.at(mirror(i, j, n));
    return std::sqrt(static_cast<double>(count));
}

} // namespace detail

/// Mismatch norms against the transpose, the anti-transpose, the left-right
/// mirror (vertical axis) and the up-down mirror (horizontal axis).
inline SymmetryScores symmetry_scores(const Level& level)
{
    if (level.width() != level.height())
        throw InvalidArgument("symmetry scores need a square level");
    SymmetryScores s;
    s.diagonal = detail::mismatch_norm(level, [](int i, int j, int) { return Position{j, i}; });
    s.counter_diagonal = detail::mismatch_norm(level, [](int i, int j, int n) { return Position{n - 1 - j, n - 1 - i}; });
    s.vertical = detail::mismatch_norm(level, [](int i, int j, int n) { return Position{i, n - 1 - j}; });
    s.horizontal = detail::mismatch_norm(level, [](int i, int j, int n) { return Position{n - 1 - i, j}; });
    return s;
}

/// Fraction of levels with no content-identical twin in the set.
inline double diversity(const std::vector<Level>& levels)
{
    if (levels.empty())
        throw InvalidArgument("diversity of an empty dataset");
    std::map<std::string, int> seen;
    for (const Level& l : levels)
        ++seen[std::to_string(l.width()) + ":" + serialize_level(l)];
    int unique = 0;
    for (const Level& l : levels)
        unique += seen[std::to_string(l.width()) + ":" + serialize_level(l)] == 1;
    return static_cast<double>(unique) / static_cast<double>(levels.size());
}

/// Unordered pair of distinct tile classes, smaller index first.
using TilePair = std::pair<int, int>;

/// Tile class used by the impact analysis: the one-hot channel, so legacy mode
/// folds both spawns into one class.
inline int impact_class(Tile t, bool distinguish_players) { return tile_channel(t, distinguish_players); }

inline std::string impact_class_name(int cls, bool distinguish_players)
{
    static const char* extended[] = {"grass", "forest", "stone", "water", "player1", "player2"};
    if (!distinguish_players && cls == 4)
        return "player";
    return extended[cls];
}

struct SwapImpactRow {
    TilePair pair;
    int raw_count = 0;
    double normalized = 0.0; ///< count / (p_a p_b), rescaled to sum to 1
    double random_baseline = 0.0; ///< the same quantity expected from uniform random swaps
};

/// Swap frequencies per unordered type pair, weighted by the inverse of the
/// dataset-wide occurrence probabilities of both types and normalized to sum
/// to one. Every distinct pair is reported: C(5,2) = 10 in legacy mode,
/// C(6,2) = 15 with distinguished players.
inline std::vector<SwapImpactRow> swap_impact(const std::vector<std::pair<Tile, Tile>>& swaps,
                                              const std::vector<Level>& dataset, bool distinguish_players)
{
    if (swaps.empty())
        throw InvalidArgument("swap impact needs at least one logged swap");
    const int classes = tile_channels(distinguish_players);
    std::vector<double> occurrences(static_cast<std::size_t>(classes), 0.0);
    double total = 0.0;
    for (const Level& l : dataset)
        for (Tile t : l.cells()) {
            occurrences[static_cast<std::size_t>(impact_class(t, distinguish_players))] += 1.0;
            total += 1.0;
        }

    std::vector<SwapImpactRow> rows;
    for (int a = 0; a < classes; ++a)
        for (int b = a + 1; b < classes; ++b)
            rows.push_back({{a, b}, 0, 0.0, 0.0});
    auto row_of = [&](int a, int b) -> SwapImpactRow* {
        if (a > b)
            std::swap(a, b);
        for (auto& r : rows)
            if (r.pair == TilePair{a, b})
                return &r;
        return nullptr;
    };
    for (const auto& [x, y] : swaps) {
        const int a = impact_class(x, distinguish_players);
        const int b = impact_class(y, distinguish_players);
        if (a == b)
            continue;
        ++row_of(a, b)->raw_count;
    }

    double sum = 0.0;
    double baseline_sum = 0.0;
    for (auto& r : rows) {
        const double pa = total > 0.0 ? occurrences[static_cast<std::size_t>(r.pair.first)] / total : 0.0;
        const double pb = total > 0.0 ? occurrences[static_cast<std::size_t>(r.pair.second)] / total : 0.0;
        if (pa > 0.0 && pb > 0.0) {
            r.normalized = r.raw_count / (pa * pb);
            // Uniform random swaps hit a pair with probability ~ 2 p_a p_b.
            r.random_baseline = 1.0;
        }
        sum += r.normalized;
        baseline_sum += r.random_baseline;
    }
    if (!(sum > 0.0))
        throw InvalidArgument("no logged swap involves tile types present in the dataset");
    for (auto& r : rows) {
        r.normalized /= sum;
        if (baseline_sum > 0.0)
            r.random_baseline /= baseline_sum;
    }
    return rows;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};

inline MeanStd mean_std(const std::vector<double>& xs)
{
    MeanStd m;
    if (xs.empty())
        return m;
    for (double x : xs)
        m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs)
        m.std += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(m.std / static_cast<double>(xs.size()));
    return m;
}

struct SummaryRow {
    double b = 0.5;
    int levels = 0; ///< results counted (initially attained excluded)
    int initially_attained = 0;
    double balanced_pct = 0.0;
    double improved_pct = 0.0;
    double unplayable_pct = 0.0;
    MeanStd changes;
    MeanStd episode_length;
    double mean_distance_before = 0.0;
    double mean_distance_after = 0.0;
};

/// Table row over the results of one method and target. Initially attained
/// levels are counted separately and excluded from every rate.
inline SummaryRow summarize(const std::vector<BalancingResult>& results, const BalanceTarget& target)
{
    if (results.empty())
        throw InvalidArgument("summary of an empty result list");
    SummaryRow row;
    row.b = target.b;
    std::vector<double> changes;
    std::vector<double> lengths;
    int balanced = 0;
    int improved = 0;
    int unplayable = 0;
    for (const auto& r : results) {
        if (r.initially_attained) {
            ++row.initially_attained;
            continue;
        }
        ++row.levels;
        balanced += r.reached;
        improved += r.improved;
        unplayable += r.unplayable;
        changes.push_back(r.changes);
        lengths.push_back(r.episode_length);
        row.mean_distance_before += r.b_initial;
        row.mean_distance_after += r.b_final;
    }
    if (row.levels > 0) {
        const double n = row.levels;
        row.balanced_pct = 100.0 * balanced / n;
        row.improved_pct = 100.0 * improved / n;
        row.unplayable_pct = 100.0 * unplayable / n;
        row.mean_distance_before /= n;
        row.mean_distance_after /= n;
    }
    row.changes = mean_std(changes);
    row.episode_length = mean_std(lengths);
    return row;
}

/// Counts over the 2n+1 attainable win-rate values k * 0.5/n, k = 0..2n.
struct Histogram {
    double bin_width = 0.0;
    std::vector<int> counts;

    double bin_left(std::size_t k) const { return static_cast<double>(k) * bin_width; }
};

inline Histogram histogram_of(const std::vector<double>& rates, int n)
{
    if (n < 1)
        throw InvalidArgument("histogram resolution must be positive");
    Histogram h;
    h.bin_width = 0.5 / n;
    h.counts.assign(static_cast<std::size_t>(2 * n + 1), 0);
    for (double w : rates) {
        const auto k = static_cast<long>(std::floor(w / h.bin_width + 1e-6));
        ++h.counts[static_cast<std::size_t>(std::clamp<long>(k, 0, 2 * n))];
    }
    return h;
}

/// Histogram of Player1 win-rate estimates for a set of levels; level i uses
/// seed derive_seed(seed, i).
inline Histogram balance_histogram(const std::vector<Level>& levels, const GameConfig& config, int n,
                                   std::uint64_t seed, int jobs = 1)
{
    std::vector<double> rates(levels.size());
    parallel_for(levels.size(), jobs, [&](std::size_t i) {
        rates[i] = estimate_win_rates(levels[i], config, n, derive_seed(seed, i)).w_p1();
    });
    return histogram_of(rates, n);
}

} // namespace forage
