// Drives the leeisd executable end to end.

#include <leeisd/io.hpp>

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

using namespace leeisd;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run(const std::string& args) {
    const std::string cmd = std::string(LEEISD_CLI_PATH) + " " + args + " 2>/dev/null";
    CliResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("leeisd_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, SphereUniformPoint) {
    const CliResult r = run("sphere --q 5 --weight lee --omega 1.2");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("s=1.000000"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("lambda=0.200000 0.200000 0.200000 0.200000 0.200000"), std::string::npos) << r.out;
}

TEST_F(Cli, SphereExactCount) {
    const CliResult r = run("sphere --q 5 --weight lee --n 2 --w 2 --exact --json");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(Json::parse(r.out).at("count"), "8");
}

TEST_F(Cli, SphereHamming) {
    const CliResult r = run("sphere --q 3 --weight hamming --omega 0.5");
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("s=0.946395"), std::string::npos) << r.out;
}

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
    EXPECT_EQ(run("sphere --q 5").code, 2);
    EXPECT_EQ(run("sphere --q 5 --omega 1 --n 2 --w 2").code, 2);
    EXPECT_EQ(run("sphere --q 6 --omega 1").code, 2);
    EXPECT_EQ(run("sphere --q 5 --omega 3").code, 2);
    EXPECT_EQ(run("estimate --q 5 --R 0.5").code, 2);
    EXPECT_EQ(run("estimate --q 5 --R 1.5 --omega 1").code, 2);
    EXPECT_EQ(run("solve /nonexistent/instance.json").code, 2);
    EXPECT_EQ(run("sweep --q 5 --model bogus").code, 2);
    EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, CorruptWeightTable) {
    std::ofstream(path("bad.json")) << R"({"q": 5, "table": [1, 1, 2, 2, 1]})";
    EXPECT_EQ(run("sphere --q 5 --weight " + path("bad.json") + " --omega 1").code, 2);
    std::ofstream(path("good.json")) << R"({"q": 7, "table": [0, 1, 2, 3, 3, 2, 1]})";
    EXPECT_EQ(run("sphere --q 7 --weight " + path("good.json") + " --omega 1").out,
              run("sphere --q 7 --weight lee --omega 1").out);
}

TEST_F(Cli, GenSolvePrange) {
    ASSERT_EQ(run("gen --q 3 --n 16 --k 8 --w 4 --weight hamming --seed 3 --out " + path("i.json")).code, 0);
    const CliResult r = run("solve " + path("i.json") + " --alg prange --seed 1");
    ASSERT_EQ(r.code, 0) << r.out;
    const Json j = Json::parse(r.out);
    EXPECT_TRUE(j.at("found").get<bool>());
    EXPECT_TRUE(j.at("verified").get<bool>());
    const SdInstance inst = instance_from_json(read_json_file(path("i.json")));
    EXPECT_TRUE(verify_solution(inst, FqVector(3, j.at("solution").get<std::vector<Symbol>>())));
}

TEST_F(Cli, SolveZeroWeight) {
    ASSERT_EQ(run("gen --q 3 --n 10 --k 5 --w 0 --out " + path("z.json")).code, 0);
    const Json j = Json::parse(run("solve " + path("z.json")).out);
    EXPECT_EQ(j.at("outer_loops"), 1);
    EXPECT_EQ(j.at("solution"), Json(std::vector<int>(10, 0)));
}

TEST_F(Cli, SolveWagnerAcrossSeeds) {
    for (int seed = 0; seed < 10; ++seed) {
        const std::string inst = path("w" + std::to_string(seed) + ".json");
        ASSERT_EQ(run("gen --q 3 --n 24 --k 8 --w 6 --seed " + std::to_string(seed) + " --out " + inst).code, 0);
        const CliResult r = run("solve " + inst + " --alg wagner1 --a 2 --ell 4 --p 2 --seed " + std::to_string(seed));
        ASSERT_EQ(r.code, 0) << "seed " << seed;
        EXPECT_TRUE(Json::parse(r.out).at("verified").get<bool>());
    }
}

TEST_F(Cli, SolveBudgetExhausted) {
    ASSERT_EQ(run("gen --q 3 --n 40 --k 20 --w 12 --seed 1 --out " + path("h.json")).code, 0);
    const CliResult r = run("solve " + path("h.json") + " --max-loops 1 --no-auto-budget --seed 5");
    if (r.code == 3) {
        EXPECT_FALSE(Json::parse(r.out).at("found").get<bool>());
    } else {
        EXPECT_EQ(r.code, 0);
    }
    EXPECT_EQ(run("solve " + path("h.json") + " --alg prange --ell 3").code, 2);
}

TEST_F(Cli, SolveIsDeterministic) {
    ASSERT_EQ(run("gen --q 5 --n 20 --k 10 --w 5 --seed 9 --out " + path("d.json")).code, 0);
    const std::string args = "solve " + path("d.json") + " --alg dumer --ell 2 --p 2 --seed 4";
    EXPECT_EQ(run(args).out, run(args).out);
    EXPECT_EQ(run(args).out, run(args + " --threads 2").out);
}

TEST_F(Cli, GenRoundTrip) {
    ASSERT_EQ(run("gen --q 5 --n 12 --k 6 --w 7/1 --weight lee --seed 2 --out " + path("g.json")).code, 0);
    const std::string text = slurp(path("g.json"));
    EXPECT_EQ(instance_to_json(instance_from_json(Json::parse(text))).dump() + "\n", text);
    EXPECT_EQ(run("gen --q 5 --n 12 --k 6 --w 7 --weight lee --seed 2").out, text);
}

TEST_F(Cli, EstimateZeroWeight) {
    const CliResult r = run("estimate --q 3 --R 0.5 --omega 0");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(Json::parse(r.out).at("alpha_bin").get<double>(), 0.0);
}

TEST_F(Cli, EstimateTableOneQ3) {
    const CliResult r = run("estimate --q 3 --weight lee --R 0.370 --omega-normalized 1 --model classical");
    ASSERT_EQ(r.code, 0);
    EXPECT_NEAR(Json::parse(r.out).at("alpha_bin").get<double>(), 0.269, 0.01);
}

TEST_F(Cli, EstimateFixedPoint) {
    const CliResult r = run("estimate --q 3 --R 0.5 --omega 0.4 --L 0 --P 0");
    ASSERT_EQ(r.code, 0);
    const Json j = Json::parse(r.out);
    EXPECT_NEAR(j.at("alpha_q").get<double>(), -j.at("pi1").get<double>(), 1e-12);
}

TEST_F(Cli, HardestQ3Classical) {
    ASSERT_EQ(run("hardest --q 3 --weight lee --model classical --out " + path("h.csv")).code, 0);
    std::ifstream in(path("h.csv"));
    const auto rows = read_csv(in);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0].R, 0.370, 0.02);
    EXPECT_NEAR(rows[0].alpha_q, 0.170, 0.005);
    EXPECT_NEAR(rows[0].alpha_bin, rows[0].alpha_q * std::log2(3.0), 1e-12);
}

TEST_F(Cli, SweepTwoMaximaRoundTripAndDeterminism) {
    const std::string args = "sweep --q 5 --weight lee --R 0.5 --model classical --alg wagner --points 400 --grid 32";
    ASSERT_EQ(run(args + " --out " + path("a.csv")).code, 0);
    ASSERT_EQ(run(args + " --threads 2 --out " + path("b.csv")).code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    std::ifstream in(path("a.csv"));
    const auto rows = read_csv(in);
    ASSERT_EQ(rows.size(), 401u);
    std::vector<double> values;
    for (const auto& r : rows) values.push_back(r.alpha_q);
    EXPECT_EQ(local_maxima(values).size(), 2u);
    std::ostringstream again;
    write_csv(again, rows);
    EXPECT_EQ(again.str(), slurp(path("a.csv")));
}

TEST_F(Cli, SweepStandardMethods) {
    const CliResult r = run("sweep --q 3 --R 0.4 --points 4 --grid 12");
    ASSERT_EQ(r.code, 0);
    std::istringstream in(r.out);
    const auto rows = read_csv(in);
    EXPECT_EQ(rows.size(), 5u * 4u);
}

TEST_F(Cli, UnwritableOutput) {
    EXPECT_EQ(run("gen --q 3 --n 10 --k 5 --w 2 --out /nonexistent/dir/x.json").code, 2);
}
