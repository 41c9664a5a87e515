#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "rgtn/cli.hpp"
#include "rgtn/tensor_io.hpp"

using namespace rgtn;
namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("rgtn_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    RunConfig small_config() const {
        RunConfig c;
        c.out = dir_.string();
        c.synth.preset = "";
        c.synth.dims = {4, 5, 3};
        c.synth.edges = {{0, 1}, {1, 2}};
        c.search.epochs_initial = 30;
        c.search.epochs_compress = 5;
        c.search.expand_steps = 0;
        c.search.compress_steps = 2;
        c.search.eta0_cores = 0.05;
        c.eval.max_bond = c.search.init_bond;
        return c;
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    int run(const std::string& cmd, const RunConfig& c) {
        log_.str("");
        err_.str("");
        return cli::run(cmd, c, log_, err_);
    }

    fs::path dir_;
    std::ostringstream log_, err_;
};

}  // namespace

TEST_F(CliTest, SynthPresetWritesHeaderDims) {
    RunConfig c;
    c.out = dir_.string();
    ASSERT_EQ(run("synth", c), 0) << err_.str();
    EXPECT_EQ(load_tensor(dir_ / "tensor.rgt").shape(), (Shape{7, 8, 7, 8, 7, 8}));
    EXPECT_TRUE(fs::exists(dir_ / "truth.json"));
    EXPECT_FALSE(fs::exists(dir_ / "mask.rgt"));
    EXPECT_NE(log_.str().find("(7,8,7,8,7,8)"), std::string::npos);
}

TEST_F(CliTest, SynthIsByteIdenticalOnRerun) {
    RunConfig c = small_config();
    c.synth.missing_fraction = 0.5;
    ASSERT_EQ(run("synth", c), 0);
    const auto t = slurp(dir_ / "tensor.rgt"), s = slurp(dir_ / "truth.json"), m = slurp(dir_ / "mask.rgt");
    ASSERT_EQ(run("synth", c), 0);
    EXPECT_EQ(slurp(dir_ / "tensor.rgt"), t);
    EXPECT_EQ(slurp(dir_ / "truth.json"), s);
    EXPECT_EQ(slurp(dir_ / "mask.rgt"), m);
}

TEST_F(CliTest, MissingOutputDirectoryIsAnError) {
    RunConfig c = small_config();
    c.out = (dir_ / "absent").string();
    EXPECT_EQ(run("synth", c), cli::kExitUsage);
    EXPECT_NE(err_.str().find("does not exist"), std::string::npos);
}

TEST_F(CliTest, SearchSmokeAndDeterminism) {
    RunConfig c = small_config();
    ASSERT_EQ(run("synth", c), 0);
    c.input.tensor = (dir_ / "tensor.rgt").string();
    ASSERT_EQ(run("search", c), 0) << err_.str();
    for (const char* f : {"best.json", "signature.txt", "report.json", "results.csv"})
        EXPECT_TRUE(fs::exists(dir_ / f)) << f;
    const auto best = slurp(dir_ / "best.json"), sig = slurp(dir_ / "signature.txt");
    auto report = nlohmann::json::parse(slurp(dir_ / "report.json"));
    ASSERT_EQ(run("search", c), 0);
    EXPECT_EQ(slurp(dir_ / "best.json"), best);
    EXPECT_EQ(slurp(dir_ / "signature.txt"), sig);
    auto again = nlohmann::json::parse(slurp(dir_ / "report.json"));
    // Timing fields are excluded from the determinism check.
    for (auto* r : {&report, &again}) {
        r->erase("seconds");
        for (auto& s : (*r)["scales"])
            for (const char* k : {"seconds_expand", "seconds_compress", "seconds_refine"}) s.erase(k);
    }
    EXPECT_EQ(report, again);
    // Results are append-only: one header and two rows.
    std::istringstream rows(slurp(dir_ / "results.csv"));
    std::string line;
    int n = 0;
    while (std::getline(rows, line)) ++n;
    EXPECT_EQ(n, 3);
}

TEST_F(CliTest, SearchNeedsInput) {
    EXPECT_EQ(run("search", small_config()), cli::kExitUsage);
    EXPECT_NE(err_.str().find("input.tensor"), std::string::npos);
}

TEST_F(CliTest, CompleteWritesMetricsAndRejectsBadMask) {
    RunConfig c = small_config();
    c.synth.missing_fraction = 0.3;
    ASSERT_EQ(run("synth", c), 0);
    c.input.tensor = (dir_ / "tensor.rgt").string();
    c.input.truth = c.input.tensor;
    c.eval.temporal_mode = 0;
    EXPECT_EQ(run("complete", c), cli::kExitUsage);  // mask required
    c.input.mask = (dir_ / "mask.rgt").string();
    ASSERT_EQ(run("complete", c), 0) << err_.str();
    EXPECT_EQ(load_tensor(dir_ / "completed.rgt").shape(), (Shape{4, 5, 3}));
    EXPECT_NE(log_.str().find("mpsnr"), std::string::npos);

    save_tensor(dir_ / "bad_mask.rgt", DenseTensor::filled({4, 5}, 1.0));
    c.input.mask = (dir_ / "bad_mask.rgt").string();
    EXPECT_EQ(run("complete", c), cli::kExitUsage);
}

TEST_F(CliTest, CompleteWithAlmostEverythingMissingTerminates) {
    RunConfig c = small_config();
    c.synth.missing_fraction = 0.99;
    ASSERT_EQ(run("synth", c), 0);
    c.input.tensor = (dir_ / "tensor.rgt").string();
    c.input.mask = (dir_ / "mask.rgt").string();
    const int code = run("complete", c);
    EXPECT_TRUE(code == 0 || code == cli::kExitNumerical) << err_.str();
    EXPECT_TRUE(fs::exists(dir_ / "report.json"));
}

TEST_F(CliTest, CompareOneRowPerMethodWithPositiveTime) {
    RunConfig c = small_config();
    ASSERT_EQ(run("synth", c), 0);
    c.input.tensor = (dir_ / "tensor.rgt").string();
    c.trals.max_rank = 3;
    ASSERT_EQ(run("compare", c), 0) << err_.str();
    std::istringstream rows(slurp(dir_ / "results.csv"));
    std::string line;
    std::getline(rows, line);
    EXPECT_EQ(line, kResultsHeader);
    std::vector<std::string> methods;
    while (std::getline(rows, line)) {
        methods.push_back(line.substr(0, line.find(',')));
        EXPECT_GT(std::stod(line.substr(line.rfind(',') + 1)), 0.0);
    }
    EXPECT_EQ(methods, (std::vector<std::string>{"rgtn", "trals"}));

    c.compare.methods = {"trals"};
    fs::remove(dir_ / "results.csv");
    ASSERT_EQ(run("compare", c), 0);
    std::istringstream one(slurp(dir_ / "results.csv"));
    int n = 0;
    while (std::getline(one, line)) ++n;
    EXPECT_EQ(n, 2);

    c.compare.methods = {"tnls"};
    EXPECT_EQ(run("compare", c), cli::kExitUsage);
}

TEST_F(CliTest, RevealWritesTables) {
    RunConfig c = small_config();
    c.reveal.specs = {"chain"};
    c.reveal.trials = 2;
    ASSERT_EQ(run("reveal", c), 0) << err_.str();
    const auto table = slurp(dir_ / "success.csv");
    EXPECT_EQ(table.rfind("spec,trials,matches,fraction\nchain,2,", 0), 0u) << table;
    EXPECT_TRUE(fs::exists(dir_ / "trials.csv"));
}

TEST_F(CliTest, UnknownCommand) { EXPECT_EQ(run("plot", small_config()), cli::kExitUsage); }

TEST_F(CliTest, NonFiniteInputAbortsWithCodeTwo) {
    RunConfig c = small_config();
    DenseTensor x = DenseTensor::filled({4, 5, 3}, 1.0);
    x[7] = std::numeric_limits<double>::quiet_NaN();
    save_tensor(dir_ / "nan.rgt", x);
    c.input.tensor = (dir_ / "nan.rgt").string();
    EXPECT_EQ(run("search", c), cli::kExitNumerical) << err_.str();
    EXPECT_TRUE(fs::exists(dir_ / "report.json"));
    EXPECT_TRUE(nlohmann::json::parse(slurp(dir_ / "report.json"))["aborted"].get<bool>());
}
