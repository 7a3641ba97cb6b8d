#include "dynqueue/cli.hpp"

#include "dynqueue/equilibrium.hpp"
#include "dynqueue/errors.hpp"
#include "dynqueue/io.hpp"
#include "dynqueue/stability.hpp"
#include "dynqueue/static_oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>

namespace dynq::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_real(std::string_view text, const std::string& what) {
    text = trim(text);
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ConfigError(what + ": expected a number, got '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t parse_int(std::string_view text, const std::string& what) {
    text = trim(text);
    std::int64_t v = 0;
    const auto* end = text.data() + text.size();
    const auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ConfigError(what + ": expected an integer, got '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string> split_list(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '[') text.remove_prefix(1);
    if (!text.empty() && text.back() == ']') text.remove_suffix(1);
    std::vector<std::string> items;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto comma = text.find(',', pos);
        const auto item = trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
        if (!item.empty()) items.emplace_back(item);
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return items;
}

std::vector<RateSpec> parse_rates(const std::string& text) {
    std::vector<RateSpec> out;
    for (const auto& item : split_list(text)) out.push_back(RateSpec::parse(item));
    return out;
}

// Ordered key = value report, echoed to the terminal and saved to disk.
class Report {
public:
    void add(std::string key, std::string value) { lines_.emplace_back(std::move(key), std::move(value)); }
    void add(std::string key, double value) { add(std::move(key), format_real(value)); }
    void add(std::string key, std::int64_t value) { add(std::move(key), std::to_string(value)); }
    void add(std::string key, bool value) { add(std::move(key), std::string(value ? "true" : "false")); }

    std::string str() const {
        std::string s;
        for (const auto& [k, v] : lines_) s += k + " = " + v + "\n";
        return s;
    }

private:
    std::vector<std::pair<std::string, std::string>> lines_;
};

// Tracks written files so the manifest can list them; the manifest itself is
// always written last.
class OutputDir {
public:
    explicit OutputDir(fs::path root) : root_(std::move(root)) { fs::create_directories(root_); }

    void write(const std::string& relative, const std::string& content) {
        const auto path = root_ / relative;
        fs::create_directories(path.parent_path());
        {
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
            f << content;
            f.flush();
            if (!f) throw std::runtime_error("failed writing " + path.string());
        }
        std::lock_guard lock(mu_);
        files_.push_back(relative);
    }

    void write_manifest(std::string_view command, const RunConfig& config, json derived, json runs) {
        std::vector<std::string> files;
        {
            std::lock_guard lock(mu_);
            files = files_;
        }
        std::sort(files.begin(), files.end());
        json m;
        m["artifact"] = "dynqueue";
        m["version"] = std::string(kVersion);
        m["command"] = std::string(command);
        m["config"] = json::object();
        for (const auto& [k, v] : config.entries()) m["config"][k] = v;
        m["derived"] = std::move(derived);
        m["runs"] = std::move(runs);
        m["files"] = files;
        std::ofstream f(root_ / "manifest.json", std::ios::binary | std::ios::trunc);
        f << m.dump(2) << "\n";
    }

    const fs::path& root() const { return root_; }

private:
    fs::path root_;
    std::mutex mu_;
    std::vector<std::string> files_;
};

std::string real_or_nan(const std::optional<double>& v) {
    return v ? format_real(*v) : std::string("nan");
}

json critical_json(const CriticalPoint& cp) {
    json j;
    j["lambda_eq_max"] = format_real(cp.lambda_eq_max);
    j["x_th"] = format_real(cp.x_th);
    j["degenerate"] = cp.degenerate;
    j["gap_at_min"] = format_real(cp.gap_at_min);
    return j;
}

json constants_json(const StabilityConstants& k) {
    json j;
    j["x_min"] = format_real(k.x_min);
    j["x_l1"] = format_real(k.x_l1);
    j["x_l2"] = format_real(k.x_l2);
    j["x_u1"] = format_real(k.x_u1);
    j["x_u2"] = format_real(k.x_u2);
    j["x_L"] = format_real(k.x_L);
    j["x_U"] = format_real(k.x_U);
    j["c1"] = format_real(k.c1);
    j["c2"] = format_real(k.c2);
    j["c"] = format_real(k.c);
    return j;
}

void add_constants(Report& r, const StabilityConstants& k) {
    r.add("x_min", k.x_min);
    r.add("x_l1", k.x_l1);
    r.add("x_l2", k.x_l2);
    r.add("x_u1", k.x_u1);
    r.add("x_u2", k.x_u2);
    r.add("x_L", k.x_L);
    r.add("x_U", k.x_U);
    r.add("c1", k.c1);
    r.add("c2", k.c2);
    r.add("c", k.c);
}

double resolve_rate(const RateSpec& spec, const CriticalPoint& cp) {
    if (spec.relative && cp.degenerate) {
        throw ConfigError("relative rate '" + spec.to_string() +
                          "' needs a non-degenerate critical point (x_th < 1)");
    }
    const double lambda = spec.resolve(cp.lambda_eq_max);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("arrival rate must be >= 0");
    return lambda;
}

PolicySpec resolve_policy(const RunConfig& config, const CriticalPoint& cp) {
    if (config.policy_kind() == PolicyKind::always_on) return PolicySpec::always_on();
    if (const auto th = config.policy_threshold()) return PolicySpec::threshold_at(*th);
    if (cp.degenerate) {
        throw ConfigError("policy.threshold omitted but x_th = 1 (degenerate); set the threshold explicitly");
    }
    return PolicySpec::threshold_at(cp.x_th);
}

struct RunOutcome {
    double lambda = 0.0;
    Trajectory trajectory;
    Classification classification;
};

RunOutcome simulate_one(const RunConfig& config, const ServiceProfile& profile, const CriticalPoint& cp,
                        const PolicySpec& policy, double lambda) {
    SimConfig sim;
    sim.lambda = lambda;
    sim.tau = config.tau();
    sim.x0 = config.x0();
    sim.n0 = config.n0();
    sim.horizon_tasks = config.horizon();
    sim.record = config.record();
    RunOutcome o;
    o.lambda = lambda;
    o.trajectory = run(sim, profile, policy);
    o.classification = classify(o.trajectory, profile, sim.tau, lambda, cp);
    return o;
}

std::string summary_text(const RunOutcome& o) {
    const auto& s = o.trajectory.summary;
    const auto& c = o.classification;
    Report r;
    r.add("lambda", o.lambda);
    r.add("max_queue", s.max_queue);
    r.add("max_queue_at_starts", s.max_queue_at_starts);
    r.add("final_queue", s.final_queue);
    r.add("completions", s.completions);
    r.add("arrivals", s.arrivals);
    r.add("end_time", s.end_time);
    r.add("growth_rate", real_or_nan(c.growth_rate));
    r.add("growth_residual", real_or_nan(c.growth_residual));
    r.add("slope_tolerance", c.slope_tolerance);
    if (c.bound) {
        r.add("queue_bound", c.bound->bound);
        r.add("queue_bound_n_t1", c.bound->n_t1);
    }
    r.add("verdict", std::string(to_string(c.verdict)));
    r.add("reason", c.reason);
    return r.str();
}

std::string trajectory_csv(const Trajectory& t) {
    std::ostringstream os;
    write_trajectory_csv(os, t);
    return os.str();
}

json run_json(const RunOutcome& o, const std::string& dir) {
    json j;
    j["lambda"] = format_real(o.lambda);
    j["verdict"] = std::string(to_string(o.classification.verdict));
    j["max_queue"] = o.trajectory.summary.max_queue;
    j["growth_rate"] = real_or_nan(o.classification.growth_rate);
    j["dir"] = dir;
    return j;
}

int guarded(const CommandContext& ctx, const std::function<int()>& body) {
    try {
        return body();
    } catch (const InvalidProfile& e) {
        ctx.err << "error: invalid service profile\n";
        for (const auto& v : e.violations()) ctx.err << "  - " << v << "\n";
        return kExitValidation;
    } catch (const ConfigError& e) {
        ctx.err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const RefusedError& e) {
        ctx.err << "refused: " << e.what() << "\n";
        return kExitValidation;
    } catch (const DomainError& e) {
        ctx.err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InfeasibleError& e) {
        ctx.err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        ctx.err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const InternalConsistencyError& e) {
        ctx.err << "internal error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

unsigned effective_workers(const RunConfig& config, const CommandContext& ctx) {
    return std::max(1u, ctx.workers.value_or(config.workers()));
}

}  // namespace

RateSpec RateSpec::parse(std::string_view text) {
    text = trim(text);
    RateSpec spec;
    if (!text.empty() && (text.back() == 'x' || text.back() == 'X')) {
        spec.relative = true;
        text.remove_suffix(1);
    }
    spec.value = parse_real(text, "rate");
    if (!(spec.value >= 0.0) || !std::isfinite(spec.value)) throw ConfigError("rate must be finite and >= 0");
    return spec;
}

std::string RateSpec::to_string() const { return format_real(value) + (relative ? "x" : ""); }

const std::vector<std::string>& RunConfig::known_keys() {
    static const std::vector<std::string> keys = {
        "profile.family", "profile.params", "server.tau",      "policy.kind",     "policy.threshold",
        "sim.lambda",     "sim.x0",         "sim.n0",          "sim.horizon",     "sim.record",
        "sweep.lambdas",  "static.n",       "static.x",        "static.grid_step", "static.idle_cap",
        "equilibrium.curves", "equilibrium.curve_lambdas", "equilibrium.curve_points",
        "run.seed",       "run.workers",    "output.dir",
    };
    return keys;
}

RunConfig RunConfig::parse(std::string_view text) {
    RunConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        if (cfg.has(key)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        cfg.set(key, std::string(trim(line.substr(eq + 1))));
    }
    return cfg;
}

RunConfig RunConfig::load(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

RunConfig RunConfig::from_entries(const std::map<std::string, std::string>& entries) {
    RunConfig cfg;
    for (const auto& [k, v] : entries) cfg.set(k, v);
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("unknown config key '" + key + "'");
    }
    entries_[key] = value;
}

std::optional<std::string> RunConfig::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::string RunConfig::serialize() const {
    std::string s;
    for (const auto& [k, v] : entries_) s += k + " = " + v + "\n";
    return s;
}

double RunConfig::get_real(const std::string& key, double fallback) const {
    const auto v = get(key);
    return v ? parse_real(*v, key) : fallback;
}

std::int64_t RunConfig::get_int(const std::string& key, std::int64_t fallback) const {
    const auto v = get(key);
    return v ? parse_int(*v, key) : fallback;
}

ServiceProfile RunConfig::profile() const {
    const auto family = get("profile.family");
    const auto params = get("profile.params");
    if (!family || !params) throw ConfigError("profile.family and profile.params are required");
    std::vector<double> values;
    for (const auto& item : split_list(*params)) values.push_back(parse_real(item, "profile.params"));
    try {
        return ServiceProfile::create(parse_family(*family), std::move(values));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

double RunConfig::tau() const {
    const double t = get_real("server.tau", 1.0);
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("server.tau must be positive");
    return t;
}

PolicyKind RunConfig::policy_kind() const {
    try {
        return parse_policy_kind(get("policy.kind").value_or("threshold"));
    } catch (const DomainError& e) {
        throw ConfigError(e.what());
    }
}

std::optional<double> RunConfig::policy_threshold() const {
    const auto v = get("policy.threshold");
    if (!v || trim(*v).empty() || trim(*v) == "auto") return std::nullopt;
    return parse_real(*v, "policy.threshold");
}

RateSpec RunConfig::lambda() const { return RateSpec::parse(get("sim.lambda").value_or("0.9x")); }

double RunConfig::x0() const { return get_real("sim.x0", 0.0); }

std::int64_t RunConfig::n0() const { return get_int("sim.n0", 0); }

std::int64_t RunConfig::horizon() const { return get_int("sim.horizon", 10000); }

RecordGranularity RunConfig::record() const {
    const auto v = get("sim.record").value_or("events");
    if (v == "events") return RecordGranularity::events;
    if (v == "service_starts") return RecordGranularity::service_starts;
    throw ConfigError("sim.record must be 'events' or 'service_starts'");
}

std::vector<RateSpec> RunConfig::sweep_lambdas() const {
    return parse_rates(get("sweep.lambdas").value_or(""));
}

int RunConfig::static_n() const { return static_cast<int>(get_int("static.n", 2)); }

std::optional<double> RunConfig::static_x() const {
    const auto v = get("static.x");
    if (!v || trim(*v) == "auto") return std::nullopt;
    return parse_real(*v, "static.x");
}

double RunConfig::static_grid_step() const { return get_real("static.grid_step", 0.01 * tau()); }

double RunConfig::static_idle_cap() const { return get_real("static.idle_cap", 3.0 * tau()); }

bool RunConfig::curves() const {
    const auto v = get("equilibrium.curves").value_or("false");
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("equilibrium.curves must be true or false");
}

std::vector<RateSpec> RunConfig::curve_lambdas() const {
    return parse_rates(get("equilibrium.curve_lambdas").value_or("0.8x, 0.9x, 1x"));
}

int RunConfig::curve_points() const {
    const auto n = get_int("equilibrium.curve_points", 201);
    if (n < 2) throw ConfigError("equilibrium.curve_points must be >= 2");
    return static_cast<int>(n);
}

unsigned RunConfig::workers() const {
    const auto w = get_int("run.workers", 1);
    if (w < 1) throw ConfigError("run.workers must be >= 1");
    return static_cast<unsigned>(w);
}

std::optional<std::string> RunConfig::output_dir() const { return get("output.dir"); }

fs::path resolve_out_dir(const RunConfig& config, const std::optional<std::string>& flag) {
    if (flag) return *flag;
    if (const auto d = config.output_dir()) return *d;
    return "dynq-out";
}

int cmd_equilibrium(const RunConfig& config, const CommandContext& ctx) {
    return guarded(ctx, [&] {
        const auto profile = config.profile();
        const double tau = config.tau();
        const auto cp = critical_rate(profile, tau);

        OutputDir out(ctx.out_dir);
        Report r;
        r.add("command", std::string("equilibrium"));
        r.add("profile.family", std::string(to_string(profile.family())));
        r.add("tau", tau);
        r.add("s_min", profile.s_min());
        r.add("s_max", profile.s_max());
        r.add("lambda_eq_max", cp.lambda_eq_max);
        r.add("x_th", cp.x_th);
        r.add("degenerate", cp.degenerate);
        r.add("gap_at_min", cp.gap_at_min);
        if (cp.degenerate) {
            ctx.err << "warning: degenerate critical point (x_th = 1); stability certificates do not apply\n";
        }

        if (config.curves()) {
            std::ostringstream csv;
            csv << "lambda,x,S,R\n";
            const int points = config.curve_points();
            for (const auto& spec : config.curve_lambdas()) {
                const double lambda = resolve_rate(spec, cp);
                if (!(lambda > 0.0)) throw ConfigError("curve rates must be positive");
                for (int i = 0; i < points; ++i) {
                    const double x = static_cast<double>(i) / (points - 1);
                    csv << format_real(lambda) << ',' << format_real(x) << ',' << format_real(profile(x)) << ','
                        << format_real(eval_R(x, tau, lambda)) << '\n';
                }
            }
            out.write("curves.csv", csv.str());
        }

        const auto text = r.str();
        out.write("report.txt", text);
        ctx.out << text;
        json derived;
        derived["critical"] = critical_json(cp);
        out.write_manifest("equilibrium", config, derived, json::array());
        return kExitOk;
    });
}

int cmd_simulate(const RunConfig& config, const CommandContext& ctx) {
    return guarded(ctx, [&] {
        const auto profile = config.profile();
        const double tau = config.tau();
        const auto cp = critical_rate(profile, tau);
        const double lambda = resolve_rate(config.lambda(), cp);
        const auto policy = resolve_policy(config, cp);

        const auto outcome = simulate_one(config, profile, cp, policy, lambda);
        OutputDir out(ctx.out_dir);
        out.write("trajectory.csv", trajectory_csv(outcome.trajectory));
        const auto summary = summary_text(outcome);
        out.write("summary.txt", summary);

        ctx.out << "command = simulate\n"
                << "lambda_eq_max = " << format_real(cp.lambda_eq_max) << "\n"
                << "x_th = " << format_real(cp.x_th) << "\n"
                << "threshold = " << format_real(policy.threshold) << "\n"
                << "policy = " << to_string(policy.kind) << "\n"
                << summary;

        json derived;
        derived["critical"] = critical_json(cp);
        derived["resolved_lambda"] = format_real(lambda);
        derived["policy"] = {{"kind", std::string(to_string(policy.kind))},
                             {"threshold", format_real(policy.threshold)}};
        if (!cp.degenerate) derived["constants"] = constants_json(compute_constants(profile, tau, cp));
        json runs = json::array();
        runs.push_back(run_json(outcome, "."));
        out.write_manifest("simulate", config, derived, runs);
        return kExitOk;
    });
}

int cmd_sweep(const RunConfig& config, const CommandContext& ctx) {
    return guarded(ctx, [&] {
        const auto specs = config.sweep_lambdas();
        if (specs.empty()) throw ConfigError("sweep.lambdas is empty");
        const auto profile = config.profile();
        const double tau = config.tau();
        const auto cp = critical_rate(profile, tau);
        const auto policy = resolve_policy(config, cp);

        std::vector<double> lambdas;
        for (const auto& s : specs) lambdas.push_back(resolve_rate(s, cp));
        std::stable_sort(lambdas.begin(), lambdas.end());

        OutputDir out(ctx.out_dir);
        std::vector<RunOutcome> outcomes(lambdas.size());
        auto dir_name = [](std::size_t i) {
            std::ostringstream os;
            os << "run_" << std::setw(3) << std::setfill('0') << i;
            return os.str();
        };
        auto work = [&](std::size_t i) {
            outcomes[i] = simulate_one(config, profile, cp, policy, lambdas[i]);
            out.write(dir_name(i) + "/trajectory.csv", trajectory_csv(outcomes[i].trajectory));
            out.write(dir_name(i) + "/summary.txt", summary_text(outcomes[i]));
            // Keep memory flat across large sweeps.
            outcomes[i].trajectory.events = {};
            outcomes[i].trajectory.events.shrink_to_fit();
        };

        const unsigned workers = effective_workers(config, ctx);
        for (std::size_t base = 0; base < lambdas.size(); base += workers) {
            std::vector<std::future<void>> batch;
            for (std::size_t i = base; i < std::min(lambdas.size(), base + workers); ++i) {
                batch.push_back(std::async(std::launch::async, work, i));
            }
            for (auto& f : batch) f.get();
        }

        std::ostringstream table;
        table << "lambda,verdict,max_queue,growth_rate\n";
        json runs = json::array();
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            const auto& o = outcomes[i];
            table << format_real(o.lambda) << ',' << to_string(o.classification.verdict) << ','
                  << o.trajectory.summary.max_queue << ',' << real_or_nan(o.classification.growth_rate) << '\n';
            runs.push_back(run_json(o, dir_name(i)));
        }
        out.write("sweep.csv", table.str());
        ctx.out << "command = sweep\n"
                << "lambda_eq_max = " << format_real(cp.lambda_eq_max) << "\n"
                << "x_th = " << format_real(cp.x_th) << "\n"
                << table.str();

        json derived;
        derived["critical"] = critical_json(cp);
        json resolved = json::array();
        for (double l : lambdas) resolved.push_back(format_real(l));
        derived["resolved_lambdas"] = resolved;
        derived["policy"] = {{"kind", std::string(to_string(policy.kind))},
                             {"threshold", format_real(policy.threshold)}};
        out.write_manifest("sweep", config, derived, runs);
        return kExitOk;
    });
}

int cmd_static_oracle(const RunConfig& config, const CommandContext& ctx) {
    return guarded(ctx, [&] {
        const auto profile = config.profile();
        const double tau = config.tau();
        const auto cp = critical_rate(profile, tau);
        StaticProblem problem;
        problem.tau = tau;
        problem.n = config.static_n();
        if (const auto x = config.static_x()) {
            problem.x = *x;
        } else {
            if (cp.degenerate) throw ConfigError("static.x omitted but x_th = 1 is not a valid boundary state");
            problem.x = cp.x_th;
        }
        const double step = config.static_grid_step();
        const double cap = config.static_idle_cap();
        const auto check = verify_bound(problem, profile, cp, step, cap, effective_workers(config, ctx));

        std::string schedule;
        for (std::size_t i = 0; i < check.best_schedule.idle_before.size(); ++i) {
            if (i) schedule += ";";
            schedule += format_real(check.best_schedule.idle_before[i]);
        }
        Report r;
        r.add("command", std::string("static-oracle"));
        r.add("n", static_cast<std::int64_t>(problem.n));
        r.add("x", problem.x);
        r.add("tau", tau);
        r.add("grid_step", step);
        r.add("idle_cap", cap);
        r.add("lambda_eq_max", cp.lambda_eq_max);
        r.add("best_schedule", schedule);
        r.add("best_time", check.best_time);
        r.add("bound", check.bound);
        r.add("tolerance", check.tolerance);
        r.add("margin", check.margin);
        r.add("result", std::string(check.pass ? "pass" : "fail"));

        OutputDir out(ctx.out_dir);
        const auto text = r.str();
        out.write("report.txt", text);
        ctx.out << text;
        json derived;
        derived["critical"] = critical_json(cp);
        derived["static"] = {{"n", problem.n},
                             {"x", format_real(problem.x)},
                             {"best_time", format_real(check.best_time)},
                             {"margin", format_real(check.margin)},
                             {"result", check.pass ? "pass" : "fail"}};
        out.write_manifest("static-oracle", config, derived, json::array());
        return check.pass ? kExitOk : 1;
    });
}

int cmd_certify(const RunConfig& config, const CommandContext& ctx) {
    return guarded(ctx, [&] {
        const auto profile = config.profile();
        const double tau = config.tau();
        const auto cp = critical_rate(profile, tau);
        if (cp.degenerate) {
            throw RefusedError(
                "x_th = 1 for this profile and tau; the queue bound and instability certificate "
                "only hold when x_th < 1 (lambda_eq_max = " +
                format_real(cp.lambda_eq_max) + ")");
        }
        const auto constants = compute_constants(profile, tau, cp);
        const double lambda = resolve_rate(config.lambda(), cp);
        const auto policy = resolve_policy(config, cp);
        const auto outcome = simulate_one(config, profile, cp, policy, lambda);
        const auto& cls = outcome.classification;
        const bool at_threshold =
            policy.kind == PolicyKind::threshold && std::abs(policy.threshold - cp.x_th) <= 1e-12;

        Report r;
        r.add("command", std::string("certify"));
        r.add("lambda", lambda);
        r.add("lambda_eq_max", cp.lambda_eq_max);
        r.add("x_th", cp.x_th);
        r.add("policy", std::string(to_string(policy.kind)));
        r.add("threshold", policy.threshold);
        add_constants(r, constants);

        std::string bound_col = "nan", n_t1_col = "nan", overload_col = "nan";
        if (lambda <= cp.lambda_eq_max) {
            const auto qb = queue_upper_bound(profile, tau, lambda, cp, config.x0(), config.n0());
            r.add("n_t1", qb.n_t1);
            r.add("rise_increment", qb.rise_increment);
            r.add("idle_increment", qb.idle_increment);
            r.add("queue_bound", qb.bound);
            r.add("bound_applies", at_threshold);
            r.add("bound_holds", outcome.trajectory.summary.max_queue_at_starts <= qb.bound);
            bound_col = std::to_string(qb.bound);
            n_t1_col = std::to_string(qb.n_t1);
        } else if (at_threshold) {
            const auto oc = check_overload_bound(outcome.trajectory, constants, lambda, cp.lambda_eq_max);
            r.add("x_th_in_band", cp.x_th >= constants.x_L && cp.x_th <= constants.x_U);
            r.add("band_starts", static_cast<std::int64_t>(oc.band_starts));
            r.add("overload_bound_holds", oc.holds);
            r.add("overload_min_margin", oc.min_margin);
            overload_col = format_real(oc.min_margin);
        }
        r.add("max_queue_at_starts", outcome.trajectory.summary.max_queue_at_starts);
        r.add("growth_rate", real_or_nan(cls.growth_rate));
        r.add("verdict", std::string(to_string(cls.verdict)));
        r.add("reason", cls.reason);

        std::ostringstream csv;
        csv << "lambda,lambda_eq_max,x_th,x_L,x_U,c1,c2,c,n_t1,queue_bound,overload_min_margin,"
               "max_queue_at_starts,growth_rate,verdict\n";
        csv << format_real(lambda) << ',' << format_real(cp.lambda_eq_max) << ',' << format_real(cp.x_th) << ','
            << format_real(constants.x_L) << ',' << format_real(constants.x_U) << ',' << format_real(constants.c1)
            << ',' << format_real(constants.c2) << ',' << format_real(constants.c) << ',' << n_t1_col << ','
            << bound_col << ',' << overload_col << ',' << outcome.trajectory.summary.max_queue_at_starts << ','
            << real_or_nan(cls.growth_rate) << ',' << to_string(cls.verdict) << '\n';

        OutputDir out(ctx.out_dir);
        const auto text = r.str();
        out.write("report.txt", text);
        out.write("certify.csv", csv.str());
        ctx.out << text;
        json derived;
        derived["critical"] = critical_json(cp);
        derived["constants"] = constants_json(constants);
        derived["resolved_lambda"] = format_real(lambda);
        json runs = json::array();
        runs.push_back(run_json(outcome, "."));
        out.write_manifest("certify", config, derived, runs);
        return kExitOk;
    });
}

}  // namespace dynq::cli
