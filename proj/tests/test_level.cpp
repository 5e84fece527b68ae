#include <gtest/gtest.h>

#include <random>

#include "forage_balance/level.hpp"

using namespace forage;

namespace {

Level random_level(std::mt19937_64& gen, int w, int h)
{
    Level l(w, h);
    std::uniform_int_distribution<int> pick(0, kTileCount - 1);
    for (int i = 0; i < w * h; ++i)
        l.set(l.position(i), kAllTiles[static_cast<std::size_t>(pick(gen))]);
    return l;
}

} // namespace

TEST(Level, ParsesAllGrass)
{
    const Level l = parse_level("GG\nGG");
    EXPECT_EQ(l.width(), 2);
    EXPECT_EQ(l.height(), 2);
    EXPECT_EQ(l.count(Tile::Grass), 4);
}

TEST(Level, ParsesPlayers)
{
    const Level l = parse_level("GGGGGG\nG1GGGG\nGGGGGG\nGGGG2G\nGGGGGG\nGGGGGG");
    EXPECT_EQ(l.count(Tile::Player1), 1);
    EXPECT_EQ(l.count(Tile::Player2), 1);
    EXPECT_EQ(l.at({1, 1}), Tile::Player1);
    EXPECT_EQ(l.at({3, 4}), Tile::Player2);
}

TEST(Level, ParseErrors)
{
    EXPECT_THROW(parse_level("GG\nG"), InvalidArgument);
    EXPECT_THROW(parse_level("GX"), InvalidArgument);
    EXPECT_THROW(parse_level(""), InvalidArgument);
    EXPECT_NO_THROW(parse_level("GG\nGG\n"));
}

TEST(Level, Serialize)
{
    EXPECT_EQ(serialize_level(Level(1, 1)), "G");
    Level l(2, 2);
    l.set({0, 1}, Tile::Water);
    l.set({1, 0}, Tile::Forest);
    l.set({1, 1}, Tile::Stone);
    EXPECT_EQ(serialize_level(l), "GW\nFS");
}

TEST(Level, RoundTripProperty)
{
    std::mt19937_64 gen(42);
    for (int k = 0; k < 500; ++k) {
        const int w = 1 + static_cast<int>(gen() % 8);
        const int h = 1 + static_cast<int>(gen() % 8);
        const Level l = random_level(gen, w, h);
        EXPECT_EQ(parse_level(serialize_level(l)), l);
        EXPECT_EQ(level_from_rows(level_rows(l)), l);
    }
}

TEST(Level, SameTypeSwapIsNoOp)
{
    const Level l(6, 6);
    EXPECT_EQ(swap_tiles(l, {0, 0}, {3, 4}), l);
}

TEST(Level, SwapExchangesTwoCells)
{
    Level l(6, 6);
    l.set({0, 0}, Tile::Forest);
    l.set({5, 5}, Tile::Stone);
    const Level s = swap_tiles(l, {0, 0}, {5, 5});
    EXPECT_EQ(tile_histogram(s), tile_histogram(l));
    int differing = 0;
    for (int i = 0; i < l.size(); ++i)
        differing += l[i] != s[i];
    EXPECT_EQ(differing, 2);
    EXPECT_EQ(s.at({0, 0}), Tile::Stone);
    EXPECT_EQ(s.at({5, 5}), Tile::Forest);
}

TEST(Level, SwapIsInvolutionAndPreservesMultiset)
{
    std::mt19937_64 gen(7);
    for (int k = 0; k < 300; ++k) {
        const Level l = random_level(gen, 6, 6);
        const Position a = l.position(static_cast<int>(gen() % 36));
        Position b = l.position(static_cast<int>(gen() % 36));
        if (a == b)
            b = l.position((l.flat(a) + 1) % 36);
        const Level once = swap_tiles(l, a, b);
        EXPECT_EQ(tile_histogram(once), tile_histogram(l));
        EXPECT_EQ(swap_tiles(once, a, b), l);
    }
}

TEST(Level, SwapErrors)
{
    const Level l(3, 3);
    EXPECT_THROW(swap_tiles(l, {0, 0}, {0, 0}), InvalidArgument);
    EXPECT_THROW(swap_tiles(l, {0, 0}, {3, 0}), InvalidArgument);
}

TEST(Level, OneHotShapeAndNormalization)
{
    std::mt19937_64 gen(3);
    const Level l = random_level(gen, 6, 6);
    const ObservationTensor t = one_hot(l);
    EXPECT_EQ(t.height, 6);
    EXPECT_EQ(t.width, 6);
    EXPECT_EQ(t.channels, 6);
    double sum = 0.0;
    for (int r = 0; r < 6; ++r)
        for (int c = 0; c < 6; ++c) {
            int ones = 0;
            for (int ch = 0; ch < t.channels; ++ch) {
                sum += t.at(r, c, ch);
                ones += t.at(r, c, ch) == 1.0f;
            }
            EXPECT_EQ(ones, 1);
        }
    EXPECT_EQ(sum, 36.0);
}

TEST(Level, OneHotAllGrass)
{
    const ObservationTensor t = one_hot(Level(2, 2));
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (int ch = 0; ch < t.channels; ++ch)
                EXPECT_EQ(t.at(r, c, ch), ch == 0 ? 1.0f : 0.0f);
}

TEST(Level, LegacyEncodingFoldsPlayers)
{
    Level l = parse_level("1G\nG2");
    l.set_distinguish_players(false);
    const ObservationTensor t = one_hot(l);
    EXPECT_EQ(t.channels, 5);
    EXPECT_EQ(t.at(0, 0, 4), 1.0f);
    EXPECT_EQ(t.at(1, 1, 4), 1.0f);

    l.set_distinguish_players(true);
    const ObservationTensor e = one_hot(l);
    EXPECT_EQ(e.at(0, 0, 4), 1.0f);
    EXPECT_EQ(e.at(1, 1, 5), 1.0f);
}

TEST(Level, Histogram)
{
    const TileHistogram h = tile_histogram(Level(6, 6));
    EXPECT_EQ(h[static_cast<std::size_t>(tile_index(Tile::Grass))], 36);
    int total = 0;
    for (int c : h)
        total += c;
    EXPECT_EQ(total, 36);
}
