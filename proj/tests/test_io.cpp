#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "forage_balance/forage_balance.hpp"

using namespace forage;

namespace {

std::string temp_path(const std::string& name)
{
    return (std::filesystem::temp_directory_path() / ("forage_io_" + name)).string();
}

} // namespace

TEST(Io, DatasetRoundTrip)
{
    GeneratorConfig gc;
    gc.seed = 3;
    const Dataset d = generate_dataset(25, gc);
    const std::string path = temp_path("dataset.jsonl");
    io::write_dataset(path, d);
    const Dataset back = io::read_dataset(path);
    ASSERT_EQ(back.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        EXPECT_EQ(back[i].id, d[i].id);
        EXPECT_EQ(back[i].level, d[i].level);
    }
    EXPECT_EQ(io::dataset_to_jsonl(back), io::dataset_to_jsonl(d));
    std::remove(path.c_str());
}

TEST(Io, MalformedDataset)
{
    EXPECT_THROW(io::parse_dataset({"{\"id\": 0, \"rows\": [\"GX\"]}"}), InvalidArgument);
    EXPECT_THROW(io::parse_dataset({"not json"}), IoError);
    EXPECT_THROW(io::read_dataset("/nonexistent/forage.jsonl"), IoError);
}

TEST(Io, ResultRoundTrip)
{
    GeneratorConfig gc;
    const Level l = generate_level(gc);
    EpisodeConfig c;
    const BalancingResult r = hill_climb_swap_narrow(l, c, 4);
    const BalancingResult back = io::result_from_json(io::result_json(r, 7, "hc-swap-narrow", 0.5));
    EXPECT_EQ(back.level_before, r.level_before);
    EXPECT_EQ(back.level_after, r.level_after);
    EXPECT_EQ(back.b_final, r.b_final);
    EXPECT_EQ(back.w_p1_initial, r.w_p1_initial);
    EXPECT_EQ(back.changes, r.changes);
    EXPECT_EQ(back.reached, r.reached);
    EXPECT_EQ(back.swap_log.size(), r.swap_log.size());
}

TEST(Io, CheckpointRoundTripIsExact)
{
    io::Checkpoint ck;
    ck.representation = Representation::SwapTurtle;
    ck.policy = PolicyNetwork::initialized({policy_input_dim(6, 6, 6, 2), 16, 32}, 12);
    const std::string path = temp_path("policy.json");
    io::write_checkpoint(path, ck);
    const io::Checkpoint back = io::read_checkpoint(path);
    EXPECT_EQ(back.representation, Representation::SwapTurtle);
    EXPECT_EQ(back.policy.architecture(), ck.policy.architecture());
    EXPECT_EQ(back.policy.parameters(), ck.policy.parameters());
    std::remove(path.c_str());
}

TEST(Io, CheckpointErrors)
{
    const std::string path = temp_path("bad.json");
    io::open_out(path) << "{\"format\": \"something-else\", \"version\": 1}";
    EXPECT_THROW(io::read_checkpoint(path), IoError);
    io::open_out(path) << "{\"format\": \"forage-balance-policy\", \"version\": 99}";
    EXPECT_THROW(io::read_checkpoint(path), IoError);
    std::remove(path.c_str());
}

TEST(Io, SwapPairsFromLog)
{
    const std::string path = temp_path("log.jsonl");
    StepRecord changed;
    changed.swapped_types = std::pair{Tile::Forest, Tile::Stone};
    StepRecord unchanged;
    io::open_out(path) << io::step_record_json(changed, 1).dump() << "\n" << io::step_record_json(unchanged).dump() << "\n";
    const auto pairs = io::read_swap_pairs(path);
    ASSERT_EQ(pairs.size(), 1u);
    EXPECT_EQ(pairs[0], (std::pair{Tile::Forest, Tile::Stone}));
    std::remove(path.c_str());
}

TEST(Io, CsvHeaders)
{
    RunCountSelection sel;
    sel.table = {{4, 0.1, 0.2}};
    EXPECT_EQ(io::run_count_csv(sel).substr(0, 25), "n,mu,sigma,mu_plus_sigma\n");
    EXPECT_EQ(io::curve_csv({}), "update,mean_reward,mean_episode_len,balanced_rate\n");
    const Histogram h = histogram_of({0.5}, 2);
    EXPECT_EQ(io::histogram_csv(h).substr(0, 15), "bin_left,count\n");
}

TEST(Io, TraceRecordsAgents)
{
    const GameState s = init_game(parse_level("1GF\nGG2"), GameConfig{}, 0);
    const auto j = io::trace_json(s);
    EXPECT_EQ(j.at("tick").get<int>(), 0);
    ASSERT_EQ(j.at("agents").size(), 2u);
    EXPECT_EQ(j.at("agents")[0].at("health").get<int>(), 10);
}
