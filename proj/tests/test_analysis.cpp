#include <gtest/gtest.h>

#include <random>

#include <boost/math/distributions/chi_squared.hpp>

#include "forage_balance/forage_balance.hpp"
#include "oracles.hpp"

using namespace forage;

namespace {

Level binary_grid(int n, unsigned bits)
{
    Level l(n, n);
    for (int i = 0; i < n * n; ++i)
        if (bits & (1u << i))
            l.set(l.position(i), Tile::Stone);
    return l;
}

} // namespace

TEST(Symmetry, AllGrassIsSymmetric)
{
    const SymmetryScores s = symmetry_scores(Level(6, 6));
    EXPECT_EQ(s.diagonal, 0.0);
    EXPECT_EQ(s.counter_diagonal, 0.0);
    EXPECT_EQ(s.vertical, 0.0);
    EXPECT_EQ(s.horizontal, 0.0);
}

TEST(Symmetry, MaximalDiagonalMismatch)
{
    // Upper triangle Stone, lower Grass: every off-diagonal cell differs.
    Level l(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j)
            l.set({i, j}, Tile::Stone);
    EXPECT_NEAR(symmetry_scores(l).diagonal, std::sqrt(30.0), 1e-12);
}

TEST(Symmetry, MaximalVerticalMismatch)
{
    Level l(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j)
            l.set({i, j}, Tile::Water);
    EXPECT_EQ(symmetry_scores(l).vertical, 6.0);
    EXPECT_EQ(symmetry_scores(l).horizontal, 0.0);
}

TEST(Symmetry, MatchesTransformCompositions)
{
    for (unsigned bits = 0; bits < 512; ++bits) {
        const Level l = binary_grid(3, bits);
        const oracle::Grid g = oracle::grid_of(l);
        const SymmetryScores s = symmetry_scores(l);
        ASSERT_EQ(s.diagonal, oracle::indicator_norm(g, oracle::transpose(g)));
        ASSERT_EQ(s.counter_diagonal, oracle::indicator_norm(g, oracle::anti_transpose(g)));
        ASSERT_EQ(s.vertical, oracle::indicator_norm(g, oracle::flip_lr(g)));
        ASSERT_EQ(s.horizontal, oracle::indicator_norm(g, oracle::flip_ud(g)));
    }
}

TEST(Symmetry, BoundsOnGeneratedLevels)
{
    GeneratorConfig gc;
    gc.seed = 12;
    for (const auto& e : generate_dataset(300, gc)) {
        const SymmetryScores s = symmetry_scores(e.level);
        EXPECT_LE(s.diagonal, std::sqrt(30.0) + 1e-12);
        EXPECT_LE(s.counter_diagonal, std::sqrt(30.0) + 1e-12);
        EXPECT_LE(s.vertical, 6.0);
        EXPECT_LE(s.horizontal, 6.0);
        EXPECT_GE(s.diagonal, 0.0);
    }
}

TEST(Symmetry, RejectsNonSquare)
{
    EXPECT_THROW(symmetry_scores(Level(3, 2)), InvalidArgument);
}

TEST(Diversity, Examples)
{
    const Level a = parse_level("1G\nG2");
    const Level b = parse_level("12\nGG");
    EXPECT_EQ(diversity({a, a}), 0.0);
    EXPECT_EQ(diversity({a, b}), 1.0);
    EXPECT_NEAR(diversity({a, a, b}), 1.0 / 3.0, 1e-12);
    EXPECT_THROW(diversity({}), InvalidArgument);

    GeneratorConfig gc;
    gc.seed = 1;
    EXPECT_EQ(diversity(io::levels_of(generate_dataset(1000, gc))), 1.0);
}

TEST(SwapImpact, SinglePairConcentrates)
{
    GeneratorConfig gc;
    const auto dataset = io::levels_of(generate_dataset(50, gc));
    const std::vector<std::pair<Tile, Tile>> swaps(20, {Tile::Forest, Tile::Stone});
    const auto rows = swap_impact(swaps, dataset, true);
    EXPECT_EQ(rows.size(), 15u);
    double total = 0.0;
    for (const auto& r : rows) {
        total += r.normalized;
        const bool fs = r.pair == TilePair{tile_channel(Tile::Forest, true), tile_channel(Tile::Stone, true)};
        EXPECT_EQ(r.normalized, fs ? 1.0 : 0.0);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(SwapImpact, LegacyHasTenPairs)
{
    GeneratorConfig gc;
    gc.distinguish_players = false;
    const auto dataset = io::levels_of(generate_dataset(20, gc), false);
    const std::vector<std::pair<Tile, Tile>> swaps{{Tile::Player1, Tile::Grass}, {Tile::Player2, Tile::Water}};
    const auto rows = swap_impact(swaps, dataset, false);
    EXPECT_EQ(rows.size(), 10u);
}

TEST(SwapImpact, UniformRandomSwapsAreUniform)
{
    // Uniform composition: each of the six classes equally frequent. Random
    // swaps of two distinct-type cells then hit every pair equally often.
    std::vector<Level> dataset;
    Level l(6, 6);
    for (int i = 0; i < 36; ++i)
        l.set(l.position(i), kPlaceableTiles[static_cast<std::size_t>(i % 6)]);
    dataset.push_back(l);

    std::mt19937_64 gen(1);
    std::vector<std::pair<Tile, Tile>> swaps;
    while (swaps.size() < 6000) {
        const Tile a = l[static_cast<int>(gen() % 36)];
        const Tile b = l[static_cast<int>(gen() % 36)];
        if (a != b)
            swaps.push_back({a, b});
    }
    const auto rows = swap_impact(swaps, dataset, true);
    ASSERT_EQ(rows.size(), 15u);
    double chi2 = 0.0;
    const double expected = static_cast<double>(swaps.size()) / 15.0;
    for (const auto& r : rows) {
        chi2 += (r.raw_count - expected) * (r.raw_count - expected) / expected;
        EXPECT_NEAR(r.random_baseline, 1.0 / 15.0, 1e-12);
    }
    const boost::math::chi_squared dist(14.0);
    EXPECT_GT(1.0 - boost::math::cdf(dist, chi2), 0.01);
}

TEST(SwapImpact, EmptyLogRejected)
{
    EXPECT_THROW(swap_impact({}, {Level(2, 2)}, true), InvalidArgument);
}

TEST(Summary, AllReached)
{
    BalancingResult r;
    r.reached = true;
    r.improved = true;
    const SummaryRow row = summarize({r, r, r}, BalanceTarget::for_runs(0.5, 14));
    EXPECT_EQ(row.balanced_pct, 100.0);
    EXPECT_EQ(row.improved_pct, 100.0);
}

TEST(Summary, MixedResults)
{
    BalancingResult reached;
    reached.reached = reached.improved = true;
    reached.changes = 2;
    BalancingResult improved;
    improved.improved = true;
    improved.changes = 8;
    BalancingResult worse;
    worse.changes = 8;
    BalancingResult initial;
    initial.initially_attained = true;
    const SummaryRow row = summarize({reached, reached, improved, worse, initial}, BalanceTarget::for_runs(0.5, 14));
    EXPECT_EQ(row.levels, 4);
    EXPECT_EQ(row.initially_attained, 1);
    EXPECT_EQ(row.balanced_pct, 50.0);
    EXPECT_EQ(row.improved_pct, 75.0);
    EXPECT_EQ(row.changes.mean, 5.0);
    EXPECT_EQ(row.changes.std, 3.0);
}

TEST(Histogram, ForcedWinnersSitInTopBin)
{
    const Level l = parse_level("1FFFFFGGGGGGGGGG2");
    const Histogram h = balance_histogram({l, l, l}, GameConfig{}, 14, 3);
    ASSERT_EQ(h.counts.size(), 29u);
    EXPECT_EQ(h.counts.back(), 3);
    EXPECT_NEAR(h.bin_left(28), 1.0, 1e-12);
}

TEST(Histogram, PlayerMirroredTwinsAreSymmetric)
{
    // Each level plus its twin with the spawn labels exchanged: relabelling
    // mirrors outcomes, so the histogram is symmetric about 0.5 up to noise.
    GeneratorConfig gc;
    gc.seed = 88;
    std::vector<Level> levels;
    for (const auto& e : generate_dataset(150, gc)) {
        levels.push_back(e.level);
        Level twin = e.level;
        const Spawns s = *find_spawns(twin);
        twin.set(s.p1, Tile::Player2);
        twin.set(s.p2, Tile::Player1);
        levels.push_back(twin);
    }
    const Histogram h = balance_histogram(levels, GameConfig{}, 14, 5);
    double mean = 0.0;
    int total = 0;
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
        mean += h.counts[k] * h.bin_left(k);
        total += h.counts[k];
    }
    mean /= total;
    EXPECT_NEAR(mean, 0.5, 0.03);
    // Mass below and above one half should agree within sampling error.
    int below = 0;
    int above = 0;
    for (std::size_t k = 0; k < 14; ++k)
        below += h.counts[k];
    for (std::size_t k = 15; k < 29; ++k)
        above += h.counts[k];
    EXPECT_LT(std::abs(below - above), 3.0 * std::sqrt(static_cast<double>(below + above)));
}

TEST(Histogram, Binning)
{
    const Histogram h = histogram_of({0.0, 0.5, 0.5, 1.0, 7.5 / 14.0}, 14);
    EXPECT_EQ(h.counts[0], 1);
    EXPECT_EQ(h.counts[14], 2);
    EXPECT_EQ(h.counts[15], 1);
    EXPECT_EQ(h.counts[28], 1);
}
