#include "exitlab_app/commands.hpp"
#include "exitlab_app/config.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace exitlab::app;
namespace fs = std::filesystem;

namespace {

struct Shell {
    int status;
    std::string out;
    std::string err;
};

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("exitlab_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

Shell run_cli(const std::string& args, const fs::path& dir) {
    const fs::path o = dir / "stdout.txt", e = dir / "stderr.txt";
    const std::string cmd = std::string(EXITLAB_CLI_PATH) + " " + args + " > " + o.string() + " 2> " + e.string();
    const int raw = std::system(cmd.c_str());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(o), slurp(e)};
}

}  // namespace

TEST(Config, MinimalCatalogConfig) {
    const ExperimentConfig c = parse_config(R"({"potential": "P1", "h": 0.3})");
    EXPECT_EQ(c.potential.catalog, "P1");
    EXPECT_DOUBLE_EQ(c.temperature(), 0.3);
    EXPECT_EQ(c.grid().nx(), 2048);
    EXPECT_EQ(c.seed, 20140101u);
}

TEST(Config, MisspelledKeyIsNamed) {
    try {
        (void)parse_config(R"({"potential": "P1", "temprature": 0.3})");
        FAIL();
    } catch (const SchemaError& e) {
        ASSERT_FALSE(e.violations().empty());
        EXPECT_NE(std::string(e.what()).find("temprature"), std::string::npos);
    }
}

TEST(Config, AllViolationsReported) {
    try {
        (void)parse_config(R"({"potential": "P9", "h": -1, "sim": {"dt": 0}})");
        FAIL();
    } catch (const SchemaError& e) {
        EXPECT_GE(e.violations().size(), 3u);
    }
}

TEST(Config, InvalidJson) { EXPECT_THROW((void)parse_config("{\"potential\": "), SchemaError); }

TEST(Config, RoundTrip) {
    const std::string text = R"({
      "potential": {"polynomial": {"dim": 2, "terms": [{"coeff": 1, "px": 2, "py": 0}, {"coeff": 2, "px": 0, "py": 2}]}},
      "domain": {"rectangle": {"x": [-1, 1], "y": [-0.5, 1]}},
      "grid": {"nodes": 64}, "h": 0.25, "h_list": [0.5, 0.25],
      "sim": {"dt": 1e-4, "n_replicas": 10, "x0": [0.1, 0.2]},
      "windows": {"radius": 0.05},
      "tad": {"h_low": 0.1, "restart_mode": "reflected_equilibration"},
      "kmc": {"rates": [1, 3], "n_samples": 5},
      "seed": 99})";
    const ExperimentConfig a = parse_config(text);
    const ExperimentConfig b = parse_config(emit(a));
    EXPECT_TRUE(a == b);
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(emit(a), emit(b));
    ExperimentConfig c = a;
    c.seed = 100;
    EXPECT_NE(config_hash(a), config_hash(c));
}

TEST(Config, MissingTemperature) {
    const ExperimentConfig c = parse_config(R"({"potential": "P1"})");
    EXPECT_THROW((void)c.temperature(), SchemaError);
}

TEST(Dispatch, QsdOnP1) {
    const fs::path dir = scratch("qsd");
    ExperimentConfig c = parse_config(R"({"potential": "P1", "h": 0.3, "grid": {"nodes": 1024}})");
    RunOptions opt;
    opt.out_dir = dir;
    std::ostringstream out;
    ASSERT_EQ(dispatch("qsd", c, opt, out), 0);
    const auto j = nlohmann::json::parse(slurp(dir / "qsd.json"));
    EXPECT_GT(j.at("lambda_h").get<double>(), 0.0);
    EXPECT_EQ(j.at("header").at("config_hash").get<std::string>(), config_hash(c));
    EXPECT_TRUE(fs::exists(dir / "config.json"));
}

TEST(Dispatch, UnknownCommand) {
    RunOptions opt;
    std::ostringstream out;
    EXPECT_EQ(dispatch("frobnicate", ExperimentConfig{}, opt, out), 2);
}

TEST(Binary, BadCommandPrintsUsage) {
    const Shell r = run_cli("frobnicate", scratch("bad"));
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("validate"), std::string::npos);
}

TEST(Binary, ValidateSymmetrySuite) {
    const fs::path dir = scratch("validate");
    const Shell r = run_cli("validate prop7-symmetry --out " + dir.string(), dir);
    EXPECT_EQ(r.status, 0) << r.out << r.err;
    EXPECT_TRUE(fs::exists(dir / "validate_prop7-symmetry.json"));
}

TEST(Binary, ErrorsAreJsonOnStderr) {
    const fs::path dir = scratch("error");
    const Shell r = run_cli("validate no-such-suite --out " + dir.string(), dir);
    EXPECT_EQ(r.status, 1);
    const auto j = nlohmann::json::parse(r.err);
    EXPECT_NE(j.dump().find("UnknownSuite"), std::string::npos);
}

TEST(Binary, SchemaErrorFromFile) {
    const fs::path dir = scratch("schema");
    std::ofstream(dir / "c.json") << R"({"potential": "P1", "temprature": 0.3})";
    const Shell r = run_cli("qsd --config " + (dir / "c.json").string() + " --out " + dir.string(), dir);
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.err.find("temprature"), std::string::npos);
}
