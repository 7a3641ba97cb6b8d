#include "dynqueue/cli.hpp"

#include <doctest.h>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace dynq::cli;
namespace fs = std::filesystem;

namespace {

// Per-process scratch root, removed at exit.
struct ScratchRoot {
    fs::path path = fs::temp_directory_path() / ("dynq-test-" + std::to_string(::getpid()));
    ScratchRoot() { fs::remove_all(path); }
    ~ScratchRoot() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

fs::path scratch(const std::string& name) {
    static ScratchRoot root;
    static std::atomic<int> counter{0};
    return root.path / (std::to_string(counter++) + "-" + name);
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

RunConfig reference_config() {
    return RunConfig::parse(
        "# reference quadratic\n"
        "profile.family = quadratic\n"
        "profile.params = 4, 0.5, 1\n"
        "server.tau = 1\n"
        "policy.kind = threshold\n"
        "sim.horizon = 3000\n");
}

struct Run {
    int code;
    std::string out;
    std::string err;
};

template <class Cmd>
Run invoke(Cmd cmd, const RunConfig& config, const fs::path& dir) {
    std::ostringstream out, err;
    CommandContext ctx{dir, out, err, std::nullopt};
    const int code = cmd(config, ctx);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = reference_config();
    CHECK(cfg.get("profile.family") == "quadratic");
    CHECK(cfg.tau() == 1.0);
    CHECK(cfg.horizon() == 3000);
    CHECK_FALSE(cfg.policy_threshold().has_value());
    CHECK(cfg.lambda().relative);
    CHECK(cfg.lambda().value == 0.9);

    CHECK_THROWS_AS(RunConfig::parse("bogus.key = 1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("no equals sign\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("server.tau = 1\nserver.tau = 2\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("server.tau = abc\n").tau(), ConfigError);

    const auto again = RunConfig::parse(cfg.serialize());
    CHECK(again.entries() == cfg.entries());
}

TEST_CASE("rate specs") {
    const auto r = RateSpec::parse("1.05x");
    CHECK(r.relative);
    CHECK(r.resolve(2.0) == doctest::Approx(2.1));
    const auto a = RateSpec::parse(" 0.42 ");
    CHECK_FALSE(a.relative);
    CHECK(a.resolve(2.0) == 0.42);
    CHECK_THROWS_AS(RateSpec::parse("-1"), ConfigError);
    CHECK_THROWS_AS(RateSpec::parse("fastx"), ConfigError);
}

TEST_CASE("output directory resolution") {
    auto cfg = reference_config();
    CHECK(resolve_out_dir(cfg, std::nullopt) == fs::path("dynq-out"));
    cfg.set("output.dir", "from-config");
    CHECK(resolve_out_dir(cfg, std::nullopt) == fs::path("from-config"));
    CHECK(resolve_out_dir(cfg, std::string("flag")) == fs::path("flag"));
}

TEST_CASE("equilibrium command") {
    const auto dir = scratch("eq");
    auto cfg = reference_config();
    cfg.set("equilibrium.curves", "true");
    const auto r = invoke(cmd_equilibrium, cfg, dir);
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("lambda_eq_max = 0.7175836681739") != std::string::npos);
    CHECK(r.out.find("degenerate = false") != std::string::npos);
    CHECK(fs::exists(dir / "curves.csv"));
    CHECK(slurp(dir / "curves.csv").rfind("lambda,x,S,R\n", 0) == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(m["command"] == "equilibrium");
    CHECK(m["files"].size() == 2);

    const auto two = scratch("eq-degenerate");
    const auto d = invoke(cmd_equilibrium, RunConfig::parse("profile.family = constant\nprofile.params = 2\n"), two);
    CHECK(d.code == kExitOk);
    CHECK(d.out.find("degenerate = true") != std::string::npos);
    CHECK(d.err.find("warning") != std::string::npos);

    const auto bad = invoke(cmd_equilibrium, RunConfig::parse("profile.family = quadratic\nprofile.params = 1, 0, -1\n"),
                            scratch("eq-bad"));
    CHECK(bad.code == kExitValidation);
    CHECK(bad.err.find("invalid service profile") != std::string::npos);
}

TEST_CASE("simulate command") {
    auto cfg = reference_config();
    cfg.set("sim.lambda", "0.95x");
    const auto dir = scratch("sim");
    auto r = invoke(cmd_simulate, cfg, dir);
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("verdict = stable") != std::string::npos);
    CHECK(slurp(dir / "trajectory.csv").rfind("t,kind,x,n\n", 0) == 0);

    cfg.set("sim.lambda", "1.05x");
    cfg.set("sim.horizon", "20000");
    r = invoke(cmd_simulate, cfg, scratch("sim-over"));
    CHECK(r.out.find("verdict = unstable") != std::string::npos);

    cfg.set("sim.horizon", "1");
    r = invoke(cmd_simulate, cfg, scratch("sim-one"));
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("verdict = inconclusive") != std::string::npos);

    cfg.set("sim.x0", "1.5");
    CHECK(invoke(cmd_simulate, cfg, scratch("sim-bad")).code == kExitValidation);
}

TEST_CASE("manifest round trip reproduces the outputs") {
    auto cfg = reference_config();
    cfg.set("sim.lambda", "1.02x");
    cfg.set("sim.n0", "4");
    cfg.set("sim.x0", "0.9");
    const auto first = scratch("rt-a");
    REQUIRE(invoke(cmd_simulate, cfg, first).code == kExitOk);

    const auto m = nlohmann::json::parse(slurp(first / "manifest.json"));
    std::map<std::string, std::string> entries;
    for (const auto& [k, v] : m["config"].items()) entries[k] = v.get<std::string>();
    const auto second = scratch("rt-b");
    REQUIRE(invoke(cmd_simulate, RunConfig::from_entries(entries), second).code == kExitOk);

    for (const char* f : {"trajectory.csv", "summary.txt", "manifest.json"}) {
        CHECK(slurp(first / f) == slurp(second / f));
    }
    const std::vector<std::string> files = m["files"];
    CHECK(files == std::vector<std::string>{"summary.txt", "trajectory.csv"});
}

TEST_CASE("sweep command") {
    auto cfg = reference_config();
    cfg.set("sim.horizon", "20000");
    cfg.set("sweep.lambdas", "1.1x, 0.8x, 0.9x, 1x, 1.05x");
    cfg.set("run.workers", "3");
    const auto dir = scratch("sweep");
    const auto r = invoke(cmd_sweep, cfg, dir);
    CHECK(r.code == kExitOk);
    std::istringstream csv(slurp(dir / "sweep.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "lambda,verdict,max_queue,growth_rate");
    std::vector<std::string> verdicts;
    while (std::getline(csv, line)) {
        const auto a = line.find(',');
        verdicts.push_back(line.substr(a + 1, line.find(',', a + 1) - a - 1));
    }
    CHECK(verdicts == std::vector<std::string>{"stable", "stable", "stable", "unstable", "unstable"});
    CHECK(fs::exists(dir / "run_004" / "trajectory.csv"));

    cfg.set("sweep.lambdas", "");
    CHECK(invoke(cmd_sweep, cfg, scratch("sweep-empty")).code == kExitValidation);
}

TEST_CASE("static-oracle command") {
    auto cfg = reference_config();
    const auto dir = scratch("static");
    const auto r = invoke(cmd_static_oracle, cfg, dir);
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("result = pass") != std::string::npos);
    cfg.set("static.n", "9");
    CHECK(invoke(cmd_static_oracle, cfg, scratch("static-big")).code == kExitValidation);
}

TEST_CASE("certify command") {
    auto cfg = reference_config();
    cfg.set("sim.n0", "10");
    cfg.set("sim.x0", "1");
    const auto dir = scratch("certify");
    const auto r = invoke(cmd_certify, cfg, dir);
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("bound_holds = true") != std::string::npos);
    CHECK(r.out.find("verdict = stable") != std::string::npos);
    CHECK(fs::exists(dir / "certify.csv"));

    const auto deg = invoke(cmd_certify, RunConfig::parse("profile.family = constant\nprofile.params = 2\n"),
                            scratch("certify-degenerate"));
    CHECK(deg.code == kExitValidation);
    CHECK(deg.err.find("refused") != std::string::npos);
}
