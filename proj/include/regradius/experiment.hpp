#pragma once

// Batch experiments: a JSON config names a mapping, a base point, a scale
// schedule and a list of tasks; the runner writes report.json and
// traces.csv (task, delta, value).
//
// Exit codes: 0 all verdicts pass, 1 config errors, 2 a verdict failed,
// 3 a construction error, 4 I/O failure.

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "regradius/error.hpp"
#include "regradius/mappings.hpp"
#include "regradius/moduli.hpp"
#include "regradius/radius.hpp"
#include "regradius/serialize.hpp"

namespace regradius {

enum class ExitCode : int { ok = 0, config = 1, verdict = 2, construction = 3, io = 4 };

// ---- logging ------------------------------------------------------------

enum class LogLevel { error = 0, info = 1, debug = 2 };

inline LogLevel log_level() {
    const char* env = std::getenv("REGRADIUS_LOG");
    if (!env) return LogLevel::error;
    const std::string s(env);
    if (s == "debug") return LogLevel::debug;
    if (s == "info") return LogLevel::info;
    return LogLevel::error;
}

inline void log(LogLevel level, const std::string& msg) {
    static std::mutex m;
    if (level > log_level()) return;
    static const char* names[] = {"error", "info", "debug"};
    std::lock_guard<std::mutex> lock(m);
    std::cerr << "[regradius " << names[static_cast<int>(level)] << "] " << msg << '\n';
}

// ---- config -------------------------------------------------------------

struct TaskSpec {
    std::string name;  // rg, rg_plus, bounds, destabilize, interpolate, lyusternik_graves, strong_check
    double r = 0.0;
    std::optional<Perturbation> f;
    double radius = 0.1;
    std::size_t grid = 16;
};

struct ExperimentConfig {
    std::optional<MappingModel> mapping;
    GraphPoint base;
    ScaleSchedule schedule;
    std::vector<TaskSpec> tasks;
    std::size_t k = 8;
    std::uint64_t seed = 1;
    std::string output = "out";
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty() && config.has_value(); }
};

namespace detail {

inline void collect(std::vector<std::string>& errors, const std::function<void()>& step) {
    try {
        step();
    } catch (const Error& e) {
        errors.emplace_back(e.what());
    } catch (const io::json::exception& e) {
        errors.emplace_back(e.what());
    }
}

inline TaskSpec parse_task(const io::json& t, const std::string& where, std::size_t domain_dim) {
    TaskSpec spec;
    const io::json* args = nullptr;
    if (t.is_string()) {
        spec.name = t.get<std::string>();
    } else if (t.is_object() && t.size() == 1) {
        spec.name = t.begin().key();
        args = &t.begin().value();
        require(args->is_object(), ErrorKind::invalid_argument, where + "." + spec.name + ": expected an object");
    } else {
        fail(ErrorKind::invalid_argument, where + ": expected a task name or {name: {...}}");
    }
    static const std::vector<std::string> known{"rg",          "rg_plus",           "bounds",      "destabilize",
                                                "interpolate", "lyusternik_graves", "strong_check"};
    require(std::find(known.begin(), known.end(), spec.name) != known.end(), ErrorKind::invalid_argument,
            where + ": unknown task '" + spec.name + "'");
    const std::string w = where + "." + spec.name;
    if (spec.name == "interpolate") {
        require(args != nullptr && args->contains("r"), ErrorKind::invalid_argument, w + ".r: missing");
        spec.r = io::to_number(args->at("r"), w + ".r");
        require(spec.r >= 0.0 && std::isfinite(spec.r), ErrorKind::invalid_argument, w + ".r: must be in [0, inf)");
    } else if (spec.name == "lyusternik_graves") {
        require(args != nullptr && args->contains("f"), ErrorKind::invalid_argument, w + ".f: missing");
        spec.f = io::to_perturbation(args->at("f"), w + ".f");
        if (const auto* lin = spec.f->linear())
            require(lin->matrix.cols() == domain_dim, ErrorKind::dimension_mismatch,
                    w + ".f: perturbation domain differs from the mapping domain");
    } else if (spec.name == "strong_check" && args) {
        spec.radius = io::optional_number(*args, "radius", spec.radius, w);
        require(spec.radius > 0.0, ErrorKind::invalid_argument, w + ".radius: must be positive");
        if (args->contains("grid")) spec.grid = args->at("grid").get<std::size_t>();
    }
    return spec;
}

}  // namespace detail

/// Validates a config document; every field-level problem is reported.
inline ParseResult parse_config(const std::string& text) {
    ParseResult out;
    io::json doc;
    try {
        doc = io::json::parse(text);
    } catch (const io::json::parse_error& e) {
        out.errors.emplace_back(std::string("malformed JSON: ") + e.what());
        return out;
    }
    if (!doc.is_object()) {
        out.errors.emplace_back("config: expected a JSON object");
        return out;
    }
    ExperimentConfig cfg;
    auto& errors = out.errors;

    detail::collect(errors, [&] {
        io::json m = io::field(doc, "mapping", "config");
        if (doc.contains("norms")) {
            const io::json& n = doc.at("norms");
            if (n.contains("domain_p")) m["domain_p"] = n.at("domain_p");
            if (n.contains("range_p")) m["range_p"] = n.at("range_p");
        }
        cfg.mapping = io::to_mapping(m, "mapping");
    });

    detail::collect(errors, [&] {
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("K")) {
            const auto k = doc.at("K").get<long long>();
            require(k >= 3, ErrorKind::invalid_argument, "K: must be >= 3");
            cfg.k = static_cast<std::size_t>(k);
        }
        if (doc.contains("output")) cfg.output = doc.at("output").get<std::string>();
    });

    detail::collect(errors, [&] {
        const io::json s = doc.contains("schedule") ? doc.at("schedule") : io::json::object();
        require(s.is_object(), ErrorKind::invalid_argument, "schedule: expected an object");
        if (s.contains("radii")) {
            cfg.schedule.radii = io::to_vec(s.at("radii"), "schedule.radii");
            cfg.schedule.epsilons =
                s.contains("epsilons") ? io::to_vec(s.at("epsilons"), "schedule.epsilons") : cfg.schedule.radii;
        } else {
            const auto count = static_cast<std::size_t>(io::optional_number(s, "count", 8, "schedule"));
            cfg.schedule = ScaleSchedule::geometric(count, io::optional_number(s, "first", 1.0, "schedule"),
                                                    io::optional_number(s, "ratio", std::sqrt(10.0), "schedule"));
        }
        if (s.contains("samples_per_scale")) cfg.schedule.samples_per_scale = s.at("samples_per_scale").get<std::size_t>();
        for (const auto& p : cfg.schedule.problems()) errors.push_back("schedule: " + p);
    });
    cfg.schedule.seed = cfg.seed;

    if (cfg.mapping) {
        detail::collect(errors, [&] {
            const io::json& b = io::field(doc, "base_point", "config");
            cfg.base.x = io::to_vec(io::field(b, "x", "base_point"), "base_point.x");
            require(cfg.base.x.size() == cfg.mapping->domain().dimension(), ErrorKind::dimension_mismatch,
                    "base_point.x: dimension " + std::to_string(cfg.base.x.size()) + " differs from the mapping domain " +
                        std::to_string(cfg.mapping->domain().dimension()));
            if (b.contains("y")) {
                cfg.base.y = io::to_vec(b.at("y"), "base_point.y");
                require(cfg.base.y.size() == cfg.mapping->range().dimension(), ErrorKind::dimension_mismatch,
                        "base_point.y: dimension differs from the mapping range");
            } else {
                const auto imgs = cfg.mapping->images(cfg.base.x);
                require(!imgs.empty(), ErrorKind::not_on_graph, "base_point.y: missing and F(x) is empty");
                cfg.base.y = imgs.front();
            }
            require(cfg.mapping->distance_to_image(cfg.base.x, cfg.base.y) <= 1e-10, ErrorKind::not_on_graph,
                    "base_point: (x, y) is not on the graph");
        });
    }

    detail::collect(errors, [&] {
        const io::json& t = io::field(doc, "tasks", "config");
        require(t.is_array() && !t.empty(), ErrorKind::invalid_argument, "tasks: expected a nonempty array");
        const std::size_t n = cfg.mapping ? cfg.mapping->domain().dimension() : 0;
        for (std::size_t i = 0; i < t.size(); ++i)
            detail::collect(errors, [&] { cfg.tasks.push_back(detail::parse_task(t[i], "tasks[" + std::to_string(i) + "]", n)); });
    });

    if (errors.empty()) out.config = std::move(cfg);
    return out;
}

// ---- running ------------------------------------------------------------

struct TaskOutcome {
    io::json report;
    std::vector<std::string> traces;  // CSV rows without newline
    bool passed = true;
    bool construction_error = false;
};

namespace detail {

inline std::string csv_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

inline void add_traces(TaskOutcome& out, const std::string& label, const std::optional<ModulusEstimate>& e) {
    if (!e) return;
    for (const auto& s : e->per_scale) out.traces.push_back(label + "," + csv_number(s.delta) + "," + csv_number(s.value));
}

inline TaskOutcome run_task(const ExperimentConfig& cfg, const TaskSpec& task, std::size_t index) {
    TaskOutcome out;
    const std::string label = std::to_string(index) + ":" + task.name;
    RadiusOptions opt;
    opt.build.k = cfg.k;
    RadiusReport rep;
    try {
        const MappingModel& f = *cfg.mapping;
        if (task.name == "rg") {
            rep.task = "rg";
            rep.rg = rg_estimate(f, cfg.base, cfg.schedule, opt.ratio);
        } else if (task.name == "rg_plus") {
            rep.task = "rg_plus";
            rep.rg_plus = rg_plus_estimate(f, cfg.base, cfg.schedule, opt.build.coderivative);
        } else if (task.name == "bounds") {
            rep = radius_bounds(f, cfg.base, cfg.schedule, opt);
        } else if (task.name == "destabilize") {
            rep = verify_destabilization(f, cfg.base, cfg.schedule, opt);
        } else if (task.name == "interpolate") {
            rep = verify_interpolation(f, cfg.base, task.r, cfg.schedule, opt);
        } else if (task.name == "lyusternik_graves") {
            rep = verify_lyusternik_graves(f, cfg.base, *task.f, cfg.schedule, opt);
        } else {
            rep.task = "strong_check";
        }
        out.report = io::report(rep);
        if (task.name == "strong_check")
            out.report["strongly_regular"] =
                strong_regularity_localization_check(f, cfg.base, task.radius, task.grid, cfg.seed);
        out.passed = rep.passed();
    } catch (const Error& e) {
        out.report = io::json{{"task", task.name}, {"error", e.what()}};
        out.passed = false;
        out.construction_error = true;
        log(LogLevel::error, label + ": " + e.what());
    }
    add_traces(out, label + ".rg", rep.rg);
    add_traces(out, label + ".rg_plus", rep.rg_plus);
    add_traces(out, label + ".lip", rep.lip);
    add_traces(out, label + ".rg_perturbed", rep.rg_perturbed);
    return out;
}

inline std::string timestamp_utc() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

}  // namespace detail

/// Construction errors dominate verdict failures.
inline ExitCode classify(const std::vector<TaskOutcome>& outcomes) {
    bool all_pass = true, construction = false;
    for (const auto& o : outcomes) {
        all_pass = all_pass && o.passed;
        construction = construction || o.construction_error;
    }
    return construction ? ExitCode::construction : (all_pass ? ExitCode::ok : ExitCode::verdict);
}

struct RunResult {
    ExitCode code = ExitCode::ok;
    io::json report;
    std::string traces_csv;
};

/// Runs every task (up to `jobs` at a time) and assembles the report in task
/// order, so the result does not depend on scheduling.
inline RunResult execute(const ExperimentConfig& cfg, std::size_t jobs = 1) {
    std::vector<TaskOutcome> outcomes(cfg.tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cfg.tasks.size(); i = next++) {
            log(LogLevel::info, "task " + std::to_string(i) + ": " + cfg.tasks[i].name);
            outcomes[i] = detail::run_task(cfg, cfg.tasks[i], i);
            log(LogLevel::debug, "task " + std::to_string(i) + " done: " + outcomes[i].report.dump());
        }
    };
    const std::size_t n = std::max<std::size_t>(1, std::min(jobs, cfg.tasks.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    RunResult r;
    r.report = io::json{{"timestamp", detail::timestamp_utc()},
                        {"seed", cfg.seed},
                        {"K", cfg.k},
                        {"mapping", io::mapping(*cfg.mapping)},
                        {"base_point", io::graph_point(cfg.base)},
                        {"schedule", io::json{{"radii", io::vec(cfg.schedule.radii)},
                                              {"epsilons", io::vec(cfg.schedule.epsilons)},
                                              {"samples_per_scale", cfg.schedule.samples_per_scale}}}};
    io::json reports = io::json::array();
    std::string csv = "task,delta,value\n";
    r.code = classify(outcomes);
    for (auto& o : outcomes) {
        reports.push_back(std::move(o.report));
        for (const auto& row : o.traces) csv += row + "\n";
    }
    r.report["reports"] = std::move(reports);
    r.report["passed"] = r.code == ExitCode::ok;
    r.traces_csv = std::move(csv);
    return r;
}

/// Writes report.json and traces.csv under `out_dir`; returns the exit code.
inline int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir, std::size_t jobs = 1) {
    const RunResult r = execute(cfg, jobs);
    try {
        std::filesystem::create_directories(out_dir);
        const auto dir = std::filesystem::path(out_dir);
        std::ofstream rep(dir / "report.json");
        std::ofstream tr(dir / "traces.csv");
        if (!rep || !tr) fail(ErrorKind::io, "cannot open output files in '" + out_dir + "'");
        rep << r.report.dump(2) << '\n';
        tr << r.traces_csv;
        if (!rep || !tr) fail(ErrorKind::io, "write to '" + out_dir + "' failed");
    } catch (const std::exception& e) {
        log(LogLevel::error, e.what());
        return static_cast<int>(ExitCode::io);
    }
    return static_cast<int>(r.code);
}

inline int run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, cfg.output, 1); }

}  // namespace regradius
