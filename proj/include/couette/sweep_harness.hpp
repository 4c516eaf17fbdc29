#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "couette/checkpoint.hpp"
#include "couette/diagnostics.hpp"
#include "couette/errors.hpp"
#include "couette/run_config.hpp"

namespace couette {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Single runs.

struct RunOutcome {
    std::string hash;
    RunConfig config;
    StabilityVerdict verdict;
    long steps = 0;
    bool aborted = false;
    bool blew_up = false;
    std::string abort_reason;
    double final_time = 0.0;
    std::vector<NormSeries> series;
    bool reused = false;  ///< loaded from an existing manifest
};

inline void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write '" + path.string() + "'");
    os << text;
}

inline std::string read_text_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot read '" + path.string() + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline nlohmann::ordered_json manifest_json(const RunOutcome& r) {
    nlohmann::ordered_json cfg;
    for (const auto& key : detail::run_config_keys()) cfg[key.name] = key.get(r.config);
    nlohmann::ordered_json j;
    j["hash"] = r.hash;
    j["config"] = cfg;
    j["verdict"] = {{"classification", to_string(r.verdict.classification)},
                    {"growth_factor", r.verdict.growth_factor},
                    {"damping_integral", r.verdict.damping_integral},
                    {"enstrophy_tail_nonincreasing", r.verdict.enstrophy_tail_nonincreasing}};
    j["steps"] = r.steps;
    j["aborted"] = r.aborted;
    j["blew_up"] = r.blew_up;
    j["abort_reason"] = r.abort_reason;
    j["final_time"] = r.final_time;
    nlohmann::ordered_json ids = nlohmann::ordered_json::array();
    for (const auto& s : r.series) ids.push_back(s.norm_id);
    j["norm_ids"] = ids;
    j["complete"] = true;
    return j;
}

inline Classification classification_from_string(const std::string& s) {
    if (s == "stable") return Classification::stable;
    if (s == "transitioned") return Classification::transitioned;
    if (s == "inconclusive") return Classification::inconclusive;
    throw ValidationError("unknown classification '" + s + "'");
}

/// Loads a finished run of the same configuration, if one is on disk.
inline std::optional<RunOutcome> load_run(const RunConfig& cfg, const fs::path& out_root) {
    const auto hash = run_hash(cfg);
    const auto path = out_root / "runs" / hash / "manifest.json";
    if (!fs::exists(path)) return std::nullopt;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;
    }
    if (!j.value("complete", false) || j.value("hash", std::string()) != hash) return std::nullopt;
    ConfigEntries entries;
    for (const auto& [k, v] : j.at("config").items()) entries[k] = v.get<std::string>();
    if (serialize(run_config_from_entries(entries)) != serialize(cfg)) return std::nullopt;
    RunOutcome r;
    r.hash = hash;
    r.config = cfg;
    const auto& v = j.at("verdict");
    r.verdict.classification = classification_from_string(v.at("classification").get<std::string>());
    r.verdict.growth_factor = v.at("growth_factor").get<double>();
    r.verdict.damping_integral = v.at("damping_integral").get<double>();
    r.verdict.enstrophy_tail_nonincreasing = v.at("enstrophy_tail_nonincreasing").get<bool>();
    r.steps = j.at("steps").get<long>();
    r.aborted = j.at("aborted").get<bool>();
    r.blew_up = j.at("blew_up").get<bool>();
    r.abort_reason = j.at("abort_reason").get<std::string>();
    r.final_time = j.at("final_time").get<double>();
    r.reused = true;
    return r;
}

/// Runs one configuration. With a nonempty out_root, writes
/// runs/<hash>/norms.csv and runs/<hash>/manifest.json (and checkpoints if
/// requested); with resume, a complete manifest of the same config is reused.
inline RunOutcome execute_run(const RunConfig& cfg, const fs::path& out_root = {}, bool resume = false) {
    cfg.validate();
    if (resume && !out_root.empty())
        if (auto done = load_run(cfg, out_root)) return *done;

    RunOutcome r;
    r.config = cfg;
    r.hash = run_hash(cfg);
    const fs::path dir = out_root.empty() ? fs::path() : out_root / "runs" / r.hash;
    if (!dir.empty()) fs::create_directories(dir);

    const auto initial = cfg.initial_field();
    SolverConfig solver = cfg.solver;
    if (solver.dt == 0.0) solver.dt = default_dt(initial, solver);

    RunOptions opts;
    opts.probe_interval = cfg.probe_interval;
    const auto params = cfg.multiplier_params();
    const auto specs = standard_norm_specs();
    for (const auto& s : specs) opts.probes.push_back(make_norm_probe(params, s));
    if (cfg.checkpoints && !dir.empty()) {
        auto counter = std::make_shared<int>(0);
        opts.on_probe = [dir, counter, nu = solver.nu](const MovingFrameState& s) {
            char name[32];
            std::snprintf(name, sizeof name, "ckpt_%05d.ctl", (*counter)++);
            write_checkpoint((dir / name).string(), s.f, s.t, nu);
        };
    }

    const auto traj = run(initial, solver, opts);
    r.steps = traj.steps;
    r.aborted = traj.aborted;
    r.blew_up = traj.blew_up;
    r.abort_reason = traj.abort_reason;
    r.final_time = traj.final_state.t;
    for (const auto& s : specs) r.series.push_back(series_from(traj, s.id()));
    r.verdict = classify(make_run_record(traj, cfg.rate), cfg.thresholds);

    if (!dir.empty()) {
        write_text_file(dir / "norms.csv", norms_csv(r.series));
        write_text_file(dir / "manifest.json", manifest_json(r).dump(2) + "\n");
    }
    return r;
}

// ---------------------------------------------------------------------------
// Bisection.

struct Bracket {
    double lo = 0.0;
    double hi = 1.0;
};

struct BisectionResult {
    double a_star = 0.0;
    double lo = 0.0;  ///< final bracket, lo classified stable
    double hi = 0.0;
    int iterations = 0;
    int evaluations = 0;
};

/// Classifier for amplitude a; horizon 0 is the base run, 1 the extended one.
using AmplitudeClassifier = std::function<Classification(double a, int horizon)>;

namespace detail {

/// An inconclusive verdict is retried once with the extended horizon; a
/// second inconclusive counts as not stable.
inline bool is_stable(const AmplitudeClassifier& classify_at, double a, int& evaluations) {
    ++evaluations;
    auto c = classify_at(a, 0);
    if (c == Classification::inconclusive) {
        ++evaluations;
        c = classify_at(a, 1);
    }
    return c == Classification::stable;
}

}  // namespace detail

/// Bisection for the stability threshold amplitude inside the bracket.
/// Returns the midpoint of a final bracket of width (hi - lo) 2^{-max_iters}.
inline BisectionResult bisect_threshold(const AmplitudeClassifier& classify_at, Bracket bracket, int max_iters) {
    if (!(bracket.lo < bracket.hi)) throw ValidationError("bisection: bracket must satisfy lo < hi");
    if (max_iters < 0) throw ValidationError("bisection: max_iters must be >= 0");
    BisectionResult r;
    const bool lo_stable = detail::is_stable(classify_at, bracket.lo, r.evaluations);
    const bool hi_stable = detail::is_stable(classify_at, bracket.hi, r.evaluations);
    if (lo_stable == hi_stable)
        throw BracketInvalid(std::string("bisection: both endpoints classify as ") +
                             (lo_stable ? "stable" : "not stable"));
    if (!lo_stable) throw BracketInvalid("bisection: lower endpoint is not stable while the upper one is");
    double lo = bracket.lo, hi = bracket.hi;
    for (int it = 0; it < max_iters; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (detail::is_stable(classify_at, mid, r.evaluations)) lo = mid;
        else hi = mid;
        ++r.iterations;
    }
    r.lo = lo;
    r.hi = hi;
    r.a_star = 0.5 * (lo + hi);
    return r;
}

// ---------------------------------------------------------------------------
// Exponent fit.

struct BetaFit {
    double beta_hat = 0.0;
    double band = 0.0;  ///< two standard errors of the slope
    double residual = 0.0;
    double r_squared = 0.0;
    double distance_to_third = 0.0;
    double distance_to_half = 0.0;
    std::size_t points = 0;
};

/// Slope of log a* against log nu; needs >= 4 points over >= 1.5 decades.
inline BetaFit fit_beta(const std::vector<std::pair<double, double>>& nu_astar) {
    if (nu_astar.size() < 4) throw InsufficientData("fit_beta: need at least 4 nu values");
    double lo = INFINITY, hi = -INFINITY;
    std::vector<double> x, y;
    for (const auto& [nu, a] : nu_astar) {
        if (!(nu > 0.0 && a > 0.0)) throw InsufficientData("fit_beta: nu and a* must be positive");
        x.push_back(std::log10(nu));
        y.push_back(std::log10(a));
        lo = std::min(lo, x.back());
        hi = std::max(hi, x.back());
    }
    if (hi - lo < 1.5 - 1e-12) throw InsufficientData("fit_beta: nu values span less than 1.5 decades");
    const auto ls = least_squares(x, y);
    BetaFit f;
    f.beta_hat = ls.slope;
    f.band = 2.0 * ls.slope_stderr;
    f.residual = ls.residual_rms;
    f.r_squared = ls.r_squared;
    f.distance_to_third = std::abs(f.beta_hat - 1.0 / 3.0);
    f.distance_to_half = std::abs(f.beta_hat - 0.5);
    f.points = x.size();
    return f;
}

// ---------------------------------------------------------------------------
// Campaigns.

enum class SweepMode { grid, bisect };

struct SweepConfig {
    RunConfig base;
    SweepMode mode = SweepMode::grid;
    std::vector<double> nus{1e-2, 1e-3};
    std::vector<double> amplitudes{1e-3, 1e-2};
    Bracket bracket{};
    int max_iters = 6;
    double horizon_factor = 2.0;

    void validate() const {
        base.validate();
        if (nus.empty()) throw ValidationError("sweep.nus must not be empty");
        for (double nu : nus)
            if (!(nu > 0.0)) throw ValidationError("sweep.nus entries must be > 0");
        if (mode == SweepMode::grid && amplitudes.empty()) throw ValidationError("sweep.amplitudes must not be empty");
        for (double a : amplitudes)
            if (!(a >= 0.0)) throw ValidationError("sweep.amplitudes entries must be >= 0");
        if (mode == SweepMode::bisect && !(bracket.lo < bracket.hi))
            throw ValidationError("sweep bracket must satisfy lo < hi");
        if (!(horizon_factor >= 1.0)) throw ValidationError("sweep.horizon_factor must be >= 1");
    }

    RunConfig run_for(double nu, double amplitude) const {
        RunConfig c = base;
        c.solver.nu = nu;
        c.data.amplitude = amplitude;
        return c;
    }

    /// The base horizon stretched by horizon_factor, capped by the no-remap bound.
    RunConfig extended(RunConfig c) const {
        const auto g = c.grid();
        const double cap = 0.5 * g.xi_max() / g.k_max();
        c.solver.t_max = std::min(c.solver.t_max * horizon_factor, cap);
        return c;
    }
};

inline SweepConfig sweep_config_from_entries(ConfigEntries entries) {
    SweepConfig s;
    apply_run_entries(s.base, entries);
    auto take = [&](const char* key) -> std::optional<std::string> {
        const auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        auto v = it->second;
        entries.erase(it);
        return v;
    };
    if (auto v = take("sweep.mode")) {
        if (*v == "grid") s.mode = SweepMode::grid;
        else if (*v == "bisect") s.mode = SweepMode::bisect;
        else throw ValidationError("sweep.mode must be grid or bisect");
    }
    if (auto v = take("sweep.nus")) s.nus = parse_double_list("sweep.nus", *v);
    if (auto v = take("sweep.amplitudes")) s.amplitudes = parse_double_list("sweep.amplitudes", *v);
    if (auto v = take("sweep.bracket_lo")) s.bracket.lo = parse_double("sweep.bracket_lo", *v);
    if (auto v = take("sweep.bracket_hi")) s.bracket.hi = parse_double("sweep.bracket_hi", *v);
    if (auto v = take("sweep.max_iters")) s.max_iters = static_cast<int>(parse_int("sweep.max_iters", *v));
    if (auto v = take("sweep.horizon_factor")) s.horizon_factor = parse_double("sweep.horizon_factor", *v);
    reject_unknown(entries);
    return s;
}

struct SweepPoint {
    double nu = 0.0;
    double amplitude = 0.0;
    double t_max = 0.0;
    std::string hash;
    StabilityVerdict verdict;
    bool monotone_violation = false;  ///< stable above a transitioned amplitude
};

struct ThresholdEstimate {
    double nu = 0.0;
    BisectionResult bisection;
    bool valid = false;
    std::string error;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<ThresholdEstimate> thresholds;
    std::optional<BetaFit> beta;
    std::string beta_error;
    bool complete = true;
    int executed_runs = 0;
    int reused_runs = 0;
    int monotone_violations = 0;
};

struct CampaignOptions {
    fs::path out_root;
    int threads = 1;
    bool resume = false;
    int run_budget = -1;  ///< stop after this many newly executed runs, < 0 for no limit
};

namespace detail {

struct BudgetExhausted : std::exception {
    const char* what() const noexcept override { return "run budget exhausted"; }
};

/// Runs job(i) for i in [0, count) on a fixed number of worker threads.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                job(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    const int n = std::max(1, std::min<int>(threads, static_cast<int>(count)));
    std::vector<std::thread> pool;
    for (int t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

inline void mark_monotone_violations(std::vector<SweepPoint>& points) {
    // points sorted by (nu, amplitude)
    for (std::size_t a = 0; a < points.size(); ++a) {
        std::size_t b = a;
        while (b < points.size() && points[b].nu == points[a].nu) ++b;
        bool seen_transition = false;
        for (std::size_t n = a; n < b; ++n) {
            if (seen_transition && points[n].verdict.classification == Classification::stable)
                points[n].monotone_violation = true;
            if (points[n].verdict.classification == Classification::transitioned) seen_transition = true;
        }
        a = b - 1;
    }
}

}  // namespace detail

inline std::string sweep_csv(const SweepResult& r) {
    std::ostringstream os;
    os.precision(17);
    os << "nu,amplitude,t_max,hash,classification,growth_factor,damping_integral,monotone_violation\n";
    for (const auto& p : r.points)
        os << p.nu << ',' << p.amplitude << ',' << p.t_max << ',' << p.hash << ','
           << to_string(p.verdict.classification) << ',' << p.verdict.growth_factor << ','
           << p.verdict.damping_integral << ',' << (p.monotone_violation ? 1 : 0) << '\n';
    return os.str();
}

inline std::string thresholds_csv(const SweepResult& r) {
    std::ostringstream os;
    os.precision(17);
    os << "nu,a_star,lo,hi,iterations,valid,error\n";
    for (const auto& t : r.thresholds)
        os << t.nu << ',' << t.bisection.a_star << ',' << t.bisection.lo << ',' << t.bisection.hi << ','
           << t.bisection.iterations << ',' << (t.valid ? 1 : 0) << ',' << t.error << '\n';
    return os.str();
}

inline nlohmann::ordered_json sweep_summary_json(const SweepResult& r) {
    nlohmann::ordered_json j;
    j["points"] = r.points.size();
    j["monotone_violations"] = r.monotone_violations;
    if (r.beta) {
        j["beta_hat"] = r.beta->beta_hat;
        j["band"] = r.beta->band;
        j["residual"] = r.beta->residual;
        j["distance_to_third"] = r.beta->distance_to_third;
        j["distance_to_half"] = r.beta->distance_to_half;
    } else if (!r.beta_error.empty()) {
        j["beta_error"] = r.beta_error;
    }
    return j;
}

/// Runs a campaign. Every run is an isolated value; results are sorted by
/// (nu, amplitude, t_max) before emission so the output does not depend on
/// the thread count or on which runs were reused.
inline SweepResult run_campaign(const SweepConfig& sweep, const CampaignOptions& opt) {
    sweep.validate();
    SweepResult result;
    std::mutex mutex;
    std::atomic<int> budget{opt.run_budget};

    auto evaluate = [&](const RunConfig& cfg) {
        if (opt.resume && !opt.out_root.empty())
            if (auto done = load_run(cfg, opt.out_root)) {
                std::lock_guard lock(mutex);
                ++result.reused_runs;
                return *done;
            }
        if (opt.run_budget >= 0 && budget.fetch_sub(1) <= 0) throw detail::BudgetExhausted();
        auto r = execute_run(cfg, opt.out_root, false);
        std::lock_guard lock(mutex);
        ++result.executed_runs;
        return r;
    };
    auto record = [&](const RunOutcome& r) {
        std::lock_guard lock(mutex);
        result.points.push_back({r.config.solver.nu, r.config.data.amplitude, r.config.solver.t_max, r.hash,
                                 r.verdict, false});
    };

    try {
        if (sweep.mode == SweepMode::grid) {
            std::vector<RunConfig> jobs;
            for (double nu : sweep.nus)
                for (double a : sweep.amplitudes) jobs.push_back(sweep.run_for(nu, a));
            detail::parallel_for(jobs.size(), opt.threads, [&](std::size_t i) { record(evaluate(jobs[i])); });
        } else {
            result.thresholds.resize(sweep.nus.size());
            detail::parallel_for(sweep.nus.size(), opt.threads, [&](std::size_t i) {
                const double nu = sweep.nus[i];
                auto classify_at = [&](double a, int horizon) {
                    auto cfg = sweep.run_for(nu, a);
                    if (horizon > 0) {
                        const auto ext = sweep.extended(cfg);
                        if (ext.solver.t_max <= cfg.solver.t_max) return Classification::inconclusive;
                        cfg = ext;
                    }
                    const auto r = evaluate(cfg);
                    record(r);
                    return r.verdict.classification;
                };
                ThresholdEstimate est;
                est.nu = nu;
                try {
                    est.bisection = bisect_threshold(classify_at, sweep.bracket, sweep.max_iters);
                    est.valid = true;
                } catch (const BracketInvalid& e) {
                    est.error = e.what();
                }
                result.thresholds[i] = est;
            });
        }
    } catch (const detail::BudgetExhausted&) {
        result.complete = false;
    }

    auto key = [](const SweepPoint& p) { return std::make_tuple(p.nu, p.amplitude, p.t_max); };
    std::sort(result.points.begin(), result.points.end(),
              [&](const SweepPoint& a, const SweepPoint& b) { return key(a) < key(b); });
    result.points.erase(std::unique(result.points.begin(), result.points.end(),
                                    [&](const SweepPoint& a, const SweepPoint& b) { return key(a) == key(b); }),
                        result.points.end());
    detail::mark_monotone_violations(result.points);
    for (const auto& p : result.points) result.monotone_violations += p.monotone_violation;
    std::sort(result.thresholds.begin(), result.thresholds.end(),
              [](const ThresholdEstimate& a, const ThresholdEstimate& b) { return a.nu < b.nu; });

    if (result.complete && sweep.mode == SweepMode::bisect) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& t : result.thresholds)
            if (t.valid) pts.emplace_back(t.nu, t.bisection.a_star);
        try {
            result.beta = fit_beta(pts);
        } catch (const InsufficientData& e) {
            result.beta_error = e.what();
        }
    }

    if (result.complete && !opt.out_root.empty()) {
        fs::create_directories(opt.out_root);
        write_text_file(opt.out_root / "sweep.csv", sweep_csv(result));
        if (sweep.mode == SweepMode::bisect) write_text_file(opt.out_root / "thresholds.csv", thresholds_csv(result));
        write_text_file(opt.out_root / "summary.json", sweep_summary_json(result).dump(2) + "\n");
    }
    return result;
}

}  // namespace couette
