#pragma once

#include "dynqueue/policy.hpp"
#include "dynqueue/service_model.hpp"
#include "dynqueue/simulator.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dynq::cli {

inline constexpr std::string_view kVersion = "0.1.0";

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

// Bad config text, unknown keys, malformed values.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Arrival rate given either absolutely ("0.42") or relative to the critical
// rate ("1.05x").
struct RateSpec {
    double value = 0.0;
    bool relative = false;

    static RateSpec parse(std::string_view text);
    double resolve(double lambda_eq_max) const { return relative ? value * lambda_eq_max : value; }
    std::string to_string() const;
};

// Flat key = value configuration with dotted sections:
//
//   profile.family = quadratic
//   profile.params = 4, 0.5, 1
//   server.tau     = 1
//   policy.kind    = threshold      # threshold omitted: x_th is filled in
//   sim.lambda     = 0.95x
//
// Lines starting with '#' are comments. Only the keys listed by known_keys()
// are accepted.
class RunConfig {
public:
    static RunConfig parse(std::string_view text);
    static RunConfig load(const std::filesystem::path& path);
    static RunConfig from_entries(const std::map<std::string, std::string>& entries);

    static const std::vector<std::string>& known_keys();

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return entries_.contains(key); }
    std::optional<std::string> get(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const noexcept { return entries_; }
    std::string serialize() const;

    ServiceProfile profile() const;
    double tau() const;
    // Threshold left empty when the config omits it; callers fill in x_th.
    PolicyKind policy_kind() const;
    std::optional<double> policy_threshold() const;
    RateSpec lambda() const;
    double x0() const;
    std::int64_t n0() const;
    std::int64_t horizon() const;
    RecordGranularity record() const;
    std::vector<RateSpec> sweep_lambdas() const;
    int static_n() const;
    std::optional<double> static_x() const;
    double static_grid_step() const;  // default 0.01 tau
    double static_idle_cap() const;   // default 3 tau
    bool curves() const;
    std::vector<RateSpec> curve_lambdas() const;
    int curve_points() const;
    unsigned workers() const;
    std::optional<std::string> output_dir() const;

private:
    double get_real(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;

    std::map<std::string, std::string> entries_;
};

struct CommandContext {
    std::filesystem::path out_dir;
    std::ostream& out;
    std::ostream& err;
    std::optional<unsigned> workers;  // overrides run.workers
};

// Each command writes its files into ctx.out_dir, writes manifest.json last,
// prints a key = value report to ctx.out and returns an exit code.
int cmd_equilibrium(const RunConfig& config, const CommandContext& ctx);
int cmd_simulate(const RunConfig& config, const CommandContext& ctx);
int cmd_sweep(const RunConfig& config, const CommandContext& ctx);
int cmd_static_oracle(const RunConfig& config, const CommandContext& ctx);
int cmd_certify(const RunConfig& config, const CommandContext& ctx);

// Resolves the output directory: explicit flag, then output.dir, then
// "dynq-out".
std::filesystem::path resolve_out_dir(const RunConfig& config, const std::optional<std::string>& flag);

}  // namespace dynq::cli
