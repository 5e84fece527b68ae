#include <gtest/gtest.h>

#include <random>

#include "forage_balance/balance.hpp"
#include "forage_balance/generator.hpp"
#include "oracles.hpp"

using namespace forage;

namespace {

const Level& p1_level()
{
    static const Level l = parse_level("1FFFFFGGGGGGGGGG2");
    return l;
}

} // namespace

TEST(Balance, ForcedWinnerRateIsOne)
{
    const WinRates w = estimate_win_rates(p1_level(), GameConfig{}, 14, 5);
    EXPECT_EQ(w.n, 14);
    EXPECT_EQ(w.w_p1(), 1.0);
    EXPECT_EQ(w.draws, 0);
}

TEST(Balance, TallyArithmetic)
{
    // 7 wins, 6 losses, 1 draw.
    const WinRates w{14, 7 * 2 + 1, 1};
    EXPECT_DOUBLE_EQ(w.w_p1(), 7.5 / 14.0);
    EXPECT_DOUBLE_EQ(w.w_p1() + w.w_p2(), 1.0);
}

TEST(Balance, EstimateIsDeterministicAndJobInvariant)
{
    GeneratorConfig gc;
    gc.seed = 99;
    const Level l = generate_level(gc);
    const WinRates a = estimate_win_rates(l, GameConfig{}, 14, 123);
    EXPECT_EQ(a, estimate_win_rates(l, GameConfig{}, 14, 123));
    EXPECT_EQ(a, estimate_win_rates(l, GameConfig{}, 14, 123, 4));
}

TEST(Balance, EstimateRejectsOddRuns)
{
    EXPECT_THROW(estimate_win_rates(p1_level(), GameConfig{}, 13, 0), InvalidArgument);
    EXPECT_THROW(estimate_win_rates(p1_level(), GameConfig{}, 0, 0), InvalidArgument);
}

TEST(Balance, DistanceExamples)
{
    EXPECT_EQ(balance_distance(0.5, 0.5), 0.0);
    EXPECT_EQ(balance_distance(1.0, 0.0), 1.0);
    EXPECT_NEAR(balance_distance(7.0 / 14.0, 0.3), 0.2, 1e-12);
}

TEST(Balance, RewardExamples)
{
    const BalanceTarget t = BalanceTarget::for_runs(0.5, 14);
    EXPECT_NEAR(reward(0.5, 0.2, t), 0.3, 1e-12);
    EXPECT_NEAR(reward(0.1, 0.0, t), 1.1, 1e-12);
    EXPECT_EQ(reward(0.3, 0.3, t), 0.0);
}

TEST(Balance, RewardMatchesOracleOnRandomTriples)
{
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const int n = 2 * (1 + static_cast<int>(gen() % 15));
        const double w = static_cast<double>(gen() % static_cast<std::uint64_t>(2 * n + 1)) / (2.0 * n);
        const double b = u(gen);
        const double b_prev = u(gen);
        const BalanceTarget t = BalanceTarget::for_runs(b, n, 1.0);
        EXPECT_EQ(balance_distance(w, b), oracle::distance(w, b));
        EXPECT_EQ(reward(b_prev, balance_distance(w, b), t), oracle::reward(b_prev, oracle::distance(w, b), 0.5 / n, 1.0));
    }
}

TEST(Balance, FairRange)
{
    EXPECT_TRUE(fair_range_check(WinRates{10, 10, 0}));
    EXPECT_FALSE(fair_range_check(WinRates{10, 20, 0}));
    // 0.6 vs 0.4: 1 - 0.2 = 0.8 sits on the inclusive boundary.
    EXPECT_TRUE(fair_range_check(WinRates{10, 12, 0}));
    EXPECT_FALSE(fair_range_check(WinRates{10, 13, 0}));
}

TEST(Balance, ChooseNForcedWinners)
{
    const std::vector<Level> levels(5, p1_level());
    const RunCountSelection sel = choose_n(levels, GameConfig{}, 12, 1);
    ASSERT_TRUE(sel.chosen.has_value());
    EXPECT_EQ(*sel.chosen, 4);
    ASSERT_EQ(sel.table.size(), 5u);
    for (const auto& row : sel.table) {
        EXPECT_EQ(row.mu, 0.0);
        EXPECT_EQ(row.sigma, 0.0);
    }
}

TEST(Balance, ChooseNSingleRow)
{
    const RunCountSelection sel = choose_n({p1_level()}, GameConfig{}, 4, 1);
    EXPECT_EQ(sel.table.size(), 1u);
}

TEST(Balance, ChooseNRejectsBadMax)
{
    EXPECT_THROW(choose_n({p1_level()}, GameConfig{}, 5, 1), InvalidArgument);
    EXPECT_THROW(choose_n({p1_level()}, GameConfig{}, 2, 1), InvalidArgument);
    EXPECT_THROW(choose_n({}, GameConfig{}, 10, 1), InvalidArgument);
}

TEST(Balance, ChooseNMatchesBinomialExpectation)
{
    // Synthetic Bernoulli(0.5) win streams (2 = win, 0 = loss).
    const int levels = 4000;
    const int n_max = 20;
    std::mt19937_64 gen(2024);
    std::vector<std::vector<int>> streams(levels, std::vector<int>(n_max));
    for (auto& s : streams)
        for (int& x : s)
            x = (gen() & 1) ? 2 : 0;
    const RunCountSelection sel = choose_n_from_streams(streams, n_max);
    for (const auto& row : sel.table) {
        const double expected = oracle::expected_prefix_gap(row.n, 0.5);
        // Standard error of a mean of bounded deviations; 5 sigma margin.
        const double se = row.sigma / std::sqrt(static_cast<double>(levels));
        EXPECT_NEAR(row.mu, expected, 5.0 * se + 1e-12) << "n = " << row.n;
    }
}

TEST(Balance, ChooseNMayFindNothing)
{
    const std::vector<std::vector<int>> streams = {{0, 0, 2, 2, 0, 0}, {2, 0, 2, 0, 2, 0}};
    const RunCountSelection sel = choose_n_from_streams(streams, 6, 0.01);
    EXPECT_FALSE(sel.chosen.has_value());
}

TEST(Balance, TargetValidation)
{
    EXPECT_THROW((BalanceTarget{1.5, 1.0, 0.1}.validate()), InvalidArgument);
    EXPECT_THROW((BalanceTarget{0.5, -1.0, 0.1}.validate()), InvalidArgument);
    EXPECT_NO_THROW(BalanceTarget::for_runs(0.0, 14).validate());
}
