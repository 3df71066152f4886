#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "dunkl/config.hpp"
#include "dunkl/runner.hpp"
#include "json.hpp"

using namespace dunkl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* kDysonConvergence = R"({
  "model": {
    "root_system": {"type": "A", "d": 2},
    "T": 1.0, "xi": [0.5, -0.5], "k": [4.0], "sigma": {"scalar": 1.0}, "drift": "zero"
  },
  "scheme": {"variant": "exact", "theta": 0.0},
  "experiment": {"kind": "convergence"},
  "run": {"M": 120, "n_list": [16, 32], "n_ref": 512, "seed": 99}
})";

const char* kDysonValidate = R"({
  "model": {
    "root_system": {"type": "A", "d": 3},
    "T": 1.0, "xi": [1.0, 0.0, -1.0], "k": [4.0], "sigma": {"scalar": 1.0}
  },
  "experiment": {"kind": "validate", "samples": 128},
  "run": {"seed": 7}
})";

const char* kTruncatedDescribe = R"({
  "model": {
    "root_system": {"type": "A", "d": 3},
    "T": 1.0, "xi": [1.0, 0.0, -1.0], "k": [1.0], "sigma": {"scalar": 1.0}
  },
  "scheme": {"variant": "truncated", "theta": 0.0, "c": 1.1},
  "experiment": {"kind": "simulate"},
  "run": {"M": 1, "n": 100, "seed": 7, "allow_assumption_violation": true}
})";

class TempDir {
  public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("dunkl_runner_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

  private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path write_config(const TempDir& dir, const std::string& text) {
    const fs::path p = dir.path() / "config.json";
    std::ofstream(p) << text;
    return p;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Runner, ValidateDysonPasses) {
    TempDir dir;
    const fs::path cfg = write_config(dir, kDysonValidate);
    std::ostringstream out, err;
    EXPECT_EQ(command_validate(cfg.string(), out, err), kExitOk) << out.str() << err.str();
    EXPECT_NE(out.str().find("pass"), std::string::npos);
    EXPECT_EQ(out.str().find("fail"), std::string::npos);

    ExperimentConfig c = parse_config(kDysonValidate);
    c.output_dir = (dir.path() / "out").string();
    EXPECT_EQ(run_experiment(c, out, err), kExitOk) << err.str();
    EXPECT_TRUE(fs::exists(dir.path() / "out" / "validate.csv"));
}

TEST(Runner, ConvergenceCsvIsByteIdenticalAcrossThreads) {
    TempDir dir;
    std::string first;
    for (int threads : {1, 4, 0}) {
        ExperimentConfig c = parse_config(kDysonConvergence);
        c.threads = threads;
        c.output_dir = (dir.path() / ("t" + std::to_string(threads))).string();
        std::ostringstream out, err;
        ASSERT_EQ(run_experiment(c, out, err), kExitOk) << err.str();
        const std::string csv = slurp(fs::path(c.output_dir) / "convergence.csv");
        ASSERT_FALSE(csv.empty());
        if (first.empty()) {
            first = csv;
            EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,rms_sup_error,std_error,M,n_ref");
        } else {
            EXPECT_EQ(csv, first);
        }
    }
}

TEST(Runner, ManifestCountsMatchFiles) {
    TempDir dir;
    ExperimentConfig c = parse_config(kDysonConvergence);
    c.output_dir = (dir.path() / "out").string();
    std::ostringstream out, err;
    ASSERT_EQ(run_experiment(c, out, err), kExitOk);
    const json manifest = json::parse(slurp(dir.path() / "out" / "manifest.json"));
    ASSERT_FALSE(manifest["files"].empty());
    for (const auto& f : manifest["files"]) {
        const std::string text = slurp(dir.path() / "out" / f["name"].get<std::string>());
        EXPECT_EQ(f["lines"].get<std::size_t>(), count_lines(text));
        if (!f["rows"].is_null()) {
            EXPECT_EQ(f["rows"].get<std::size_t>(), count_lines(text) - 1);
        }
    }
    EXPECT_EQ(manifest["config"], json::parse(c.echo));
    const json summary = json::parse(slurp(dir.path() / "out" / "summary.json"));
    EXPECT_EQ(summary["seed"].get<std::uint64_t>(), 99u);
    for (const auto& e : fs::directory_iterator(dir.path() / "out")) {
        EXPECT_NE(e.path().extension(), ".tmp");
    }
}

TEST(Runner, UnwritableOutputDirectory) {
    ExperimentConfig c = parse_config(kDysonConvergence);
    c.output_dir = "/proc/dunkl_no_such_dir/out";
    std::ostringstream out, err;
    EXPECT_EQ(run_experiment(c, out, err), kExitIo);
    EXPECT_FALSE(err.str().empty());
}

TEST(Runner, MissingAndInvalidConfigFiles) {
    TempDir dir;
    std::ostringstream out, err;
    EXPECT_EQ(command_run((dir.path() / "absent.json").string(), {}, out, err), kExitIo);
    const fs::path bad = write_config(dir, R"({"run": {"seed": 1}})");
    EXPECT_EQ(command_run(bad.string(), {}, out, err), kExitInvalid);
}

TEST(Runner, AssumptionGate) {
    TempDir dir;
    // k = 0.2 with sigma = 1 violates 2k >= sigma^2.
    std::string text = kDysonConvergence;
    text.replace(text.find("[4.0]"), 5, "[0.2]");
    ExperimentConfig c = parse_config(text);
    c.output_dir = (dir.path() / "out").string();
    std::ostringstream out, err;
    EXPECT_EQ(run_experiment(c, out, err), kExitInvalid);
}

TEST(Runner, SolverFailureExitCode) {
    TempDir dir;
    std::string text = kDysonConvergence;
    text.replace(text.find(R"("theta": 0.0)"), 12, R"("theta": 0.0, "max_iterations": 1, "tol": 1e-300)");
    ExperimentConfig c = parse_config(text);
    c.output_dir = (dir.path() / "out").string();
    std::ostringstream out, err;
    EXPECT_EQ(run_experiment(c, out, err), kExitSolver);
    EXPECT_NE(err.str().find("path_id="), std::string::npos);
    EXPECT_NE(err.str().find("step="), std::string::npos);
    EXPECT_FALSE(fs::exists(dir.path() / "out" / "manifest.json"));
}

TEST(Runner, OutputDirectoryOverrides) {
    TempDir dir;
    const fs::path cfg = write_config(dir, kDysonValidate);
    std::ostringstream out, err;
    Overrides o;
    o.output_dir = (dir.path() / "cli").string();
    ASSERT_EQ(command_run(cfg.string(), o, out, err), kExitOk) << err.str();
    EXPECT_TRUE(fs::exists(dir.path() / "cli" / "manifest.json"));
}

TEST(Describe, DysonPStarAndWarning) {
    std::ostringstream out;
    describe(parse_config(kDysonConvergence), out);
    const std::string s = out.str();
    EXPECT_NE(s.find("p* = 7\n"), std::string::npos) << s;
    EXPECT_NE(s.find("requires p* > 8"), std::string::npos);
    EXPECT_EQ(s.find("requires p* > 6"), std::string::npos);
    EXPECT_EQ(s.find("eps_n"), std::string::npos);
    EXPECT_NE(s.find("(reference)"), std::string::npos);
}

TEST(Describe, TruncationLevel) {
    std::ostringstream out;
    describe(parse_config(kTruncatedDescribe), out);
    const std::string s = out.str();
    EXPECT_NE(s.find("L_k = 6\n"), std::string::npos) << s;
    EXPECT_NE(s.find("eps_n = 0.269444"), std::string::npos) << s;
}

TEST(Version, NonEmpty) { EXPECT_GT(std::string(version_string()).size(), 0u); }
