// dynq: command-line driver for the dynamical-queue toolkit.
//
//   dynq equilibrium   --config run.cfg
//   dynq simulate      --config run.cfg --out results/ --sim.lambda 0.95x
//   dynq sweep         --config run.cfg --workers 4
//   dynq static-oracle --config run.cfg --static.n 3
//   dynq certify       --config run.cfg
//
// Every config key can be overridden with --<key> <value> or --set key=value.

#include "dynqueue/cli.hpp"

#include <CLI11.hpp>

#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Options {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<unsigned> workers;
    std::vector<std::string> sets;
    std::map<std::string, std::string> overrides;
};

using Command = std::function<int(const dynq::cli::RunConfig&, const dynq::cli::CommandContext&)>;

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help, Options& opts) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", opts.config_path, "Key-value config file");
    sub->add_option("-o,--out", opts.out_dir, "Output directory (default: output.dir or dynq-out)");
    sub->add_option("-w,--workers", opts.workers, "Concurrent workers")->check(CLI::PositiveNumber);
    sub->add_option("--set", opts.sets, "Override a config key: key=value");
    for (const auto& key : dynq::cli::RunConfig::known_keys()) {
        sub->add_option_function<std::string>(
            "--" + key, [&opts, key](const std::string& v) { opts.overrides[key] = v; }, "Config key " + key);
    }
    return sub;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamical queue: critical rates, threshold release policy, simulation and certificates"};
    app.set_version_flag("--version", std::string(dynq::cli::kVersion));
    app.require_subcommand(1);

    Options opts;
    const std::vector<std::pair<CLI::App*, Command>> commands = {
        {add_command(app, "equilibrium", "Critical rate, threshold state and optional S/R curves", opts),
         dynq::cli::cmd_equilibrium},
        {add_command(app, "simulate", "Event-driven run with trajectory CSV and stability verdict", opts),
         dynq::cli::cmd_simulate},
        {add_command(app, "sweep", "Verdicts across a list of arrival rates", opts), dynq::cli::cmd_sweep},
        {add_command(app, "static-oracle", "Exhaustive check of the n-task static lower bound", opts),
         dynq::cli::cmd_static_oracle},
        {add_command(app, "certify", "Stability constants, queue bound and verdict", opts), dynq::cli::cmd_certify},
    };

    CLI11_PARSE(app, argc, argv);

    try {
        auto config = opts.config_path.empty() ? dynq::cli::RunConfig{}
                                               : dynq::cli::RunConfig::load(opts.config_path);
        for (const auto& kv : opts.sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) {
                std::cerr << "error: --set expects key=value, got '" << kv << "'\n";
                return dynq::cli::kExitValidation;
            }
            config.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        for (const auto& [key, value] : opts.overrides) config.set(key, value);

        dynq::cli::CommandContext ctx{dynq::cli::resolve_out_dir(config, opts.out_dir), std::cout, std::cerr,
                                      opts.workers};
        for (const auto& [sub, command] : commands) {
            if (sub->parsed()) return command(config, ctx);
        }
    } catch (const dynq::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dynq::cli::kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
