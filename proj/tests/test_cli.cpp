#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#ifndef FORAGE_BALANCE_EXE
#error "FORAGE_BALANCE_EXE must point at the command-line tool"
#endif

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("forage_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    Outcome run(const std::string& args) const
    {
        const std::string out_file = path("stdout.txt");
        const std::string cmd = std::string(FORAGE_BALANCE_EXE) + " " + args + " > " + out_file + " 2>&1";
        const int status = std::system(cmd.c_str());
        Outcome r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = slurp(out_file);
        return r;
    }

    static std::string slurp(const std::string& p)
    {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    static int lines(const std::string& text)
    {
        int n = 0;
        for (char c : text)
            n += c == '\n';
        return n;
    }

    fs::path dir_;
};

} // namespace

TEST_F(Cli, GenIsReproducible)
{
    ASSERT_EQ(run("--seed 7 gen --count 50 -o " + path("a.jsonl")).code, 0);
    ASSERT_EQ(run("--seed 7 gen --count 50 -o " + path("b.jsonl")).code, 0);
    const std::string a = slurp(path("a.jsonl"));
    EXPECT_EQ(a, slurp(path("b.jsonl")));
    EXPECT_EQ(lines(a), 50);
    const auto manifest = nlohmann::json::parse(slurp(path("a.jsonl.manifest.json")));
    const auto manifest_b = nlohmann::json::parse(slurp(path("b.jsonl.manifest.json")));
    EXPECT_EQ(manifest.at("id"), manifest_b.at("id"));
    EXPECT_EQ(manifest.at("settings").at("seed").get<std::uint64_t>(), 7u);

    ASSERT_EQ(run("--seed 8 gen --count 50 -o " + path("c.jsonl")).code, 0);
    EXPECT_NE(a, slurp(path("c.jsonl")));
}

TEST_F(Cli, SeedFromEnvironment)
{
    setenv("FORAGE_BALANCE_SEED", "7", 1);
    ASSERT_EQ(run("gen --count 5 -o " + path("env.jsonl")).code, 0);
    unsetenv("FORAGE_BALANCE_SEED");
    ASSERT_EQ(run("--seed 7 gen --count 5 -o " + path("flag.jsonl")).code, 0);
    EXPECT_EQ(slurp(path("env.jsonl")), slurp(path("flag.jsonl")));
}

TEST_F(Cli, GenSingleLevel)
{
    ASSERT_EQ(run("gen --count 1 -o " + path("one.jsonl")).code, 0);
    EXPECT_EQ(lines(slurp(path("one.jsonl"))), 1);
}

TEST_F(Cli, ChooseNSingleRow)
{
    ASSERT_EQ(run("gen --count 10 -o " + path("d.jsonl")).code, 0);
    const Outcome r = run("choose-n --dataset " + path("d.jsonl") + " --n-max 4 -o " + path("n.csv"));
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(lines(slurp(path("n.csv"))), 2);
    EXPECT_NE(r.out.find("chosen n:"), std::string::npos);
}

TEST_F(Cli, BalanceAndAnalyze)
{
    ASSERT_EQ(run("--seed 2 gen --count 12 -o " + path("d.jsonl")).code, 0);
    const Outcome b = run("--seed 2 balance --dataset " + path("d.jsonl") + " --method hc-swap-narrow --b 0.5 -o " +
                      path("r.jsonl") + " --log " + path("log.jsonl"));
    ASSERT_EQ(b.code, 0) << b.out;
    EXPECT_EQ(lines(slurp(path("r.jsonl"))), 12);
    EXPECT_NE(b.out.find("balanced %"), std::string::npos);
    EXPECT_TRUE(fs::exists(path("r.jsonl.summary.md")));
    EXPECT_TRUE(fs::exists(path("r.jsonl.summary.csv")));

    const Outcome again = run("--seed 2 balance --dataset " + path("d.jsonl") + " --method hc-swap-narrow --b 0.5 -o " +
                          path("r2.jsonl"));
    EXPECT_EQ(slurp(path("r.jsonl")), slurp(path("r2.jsonl")));

    const Outcome a = run("analyze --symmetry " + path("d.jsonl") + " --diversity " + path("d.jsonl") + " --impact " +
                      path("log.jsonl") + " --dataset " + path("d.jsonl") + " -o " + path("an"));
    ASSERT_EQ(a.code, 0) << a.out;
    EXPECT_NE(a.out.find("| mean"), std::string::npos);
    EXPECT_NE(a.out.find("diversity: 1"), std::string::npos);
    EXPECT_EQ(lines(slurp(path("an.impact.csv"))), 16);
}

TEST_F(Cli, TrainWritesCheckpointAndCurve)
{
    const Outcome t = run("--seed 1 train --repr swap-narrow --steps 512 --rollout 256 --hidden 16 -o " + path("p.json"));
    ASSERT_EQ(t.code, 0) << t.out;
    EXPECT_EQ(lines(slurp(path("p.json.curve.csv"))), 3);
    ASSERT_EQ(run("--seed 1 gen --count 4 -o " + path("d.jsonl")).code, 0);
    const Outcome b = run("balance --dataset " + path("d.jsonl") + " --method policy:" + path("p.json") + " -o " +
                      path("r.jsonl"));
    EXPECT_EQ(b.code, 0) << b.out;
}

TEST_F(Cli, RenderPanel)
{
    ASSERT_EQ(run("gen --count 3 -o " + path("d.jsonl")).code, 0);
    const Outcome r = run("render --dataset " + path("d.jsonl") + " --id 2");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(lines(r.out), 7);
    EXPECT_NE(r.out.find("legend"), std::string::npos);
}

TEST_F(Cli, ExitCodes)
{
    EXPECT_EQ(run("gen --count 0 -o " + path("x.jsonl")).code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("balance --dataset " + path("missing.jsonl") + " -o " + path("x.jsonl")).code, 3);
    ASSERT_EQ(run("gen --count 2 -o " + path("d.jsonl")).code, 0);
    EXPECT_EQ(run("balance --dataset " + path("d.jsonl") + " --method annealing -o " + path("x.jsonl")).code, 2);
    EXPECT_EQ(run("train --steps 256 --rollout 128 --hidden 4 --lr 1e300 -o " + path("p.json")).code, 4);
}
