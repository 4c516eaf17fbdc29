// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "couette.hpp"
#include "../oracles.hpp"

using namespace couette;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double rel_diff(const SpectralField& a, const SpectralField& b) {
    const double s = std::max(a.l2_norm(), b.l2_norm());
    return s > 0.0 ? (a - b).l2_norm() / s : 0.0;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome oracle_equivalence() {
    const auto g = make_grid(64, 64, 64 * pi, 2 * pi);
    InitialDataSpec spec;
    spec.amplitude = 1.0;
    const auto w = make_initial_data(g, spec);
    SolverConfig cfg;
    cfg.nu = 1e-2;
    cfg.dt = 0.05;
    cfg.t_max = 5.0;
    cfg.mode = SolverMode::linear_only;
    const auto traj = run(w, cfg);
    const double err = rel_diff(traj.final_state.f, kelvin_solve(w, cfg.nu, cfg.t_max));
    return {err <= 1e-10 && !traj.aborted, fmt("relative L2 error %.3e (limit 1e-10), %ld steps", err, traj.steps)};
}

Outcome closed_form_exponent() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> lognu(-6.0, 0.0), uk(-10.0, 10.0), ut(0.0, 50.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const double nu = std::pow(10.0, lognu(rng)), k = uk(rng), xi = uk(rng), t = ut(rng);
        const double exact = kelvin_exponent(nu, k, xi, t);
        const double quad = oracle::kelvin_exponent_simpson(nu, k, xi, t);
        if (quad > 0.0) worst = std::max(worst, std::abs(exact - quad) / quad);
    }
    return {worst <= 1e-10, fmt("max relative error %.3e over 1000 samples (limit 1e-10)", worst)};
}

Outcome inviscid_slope() {
    const auto r = linear_decay_study(LinearDecayStudy{});
    const double slope = r.velocity_fit.rate;
    return {std::abs(slope + 2.0) <= 0.3,
            fmt("||d_x grad phi|| slope %.3f (target -2 +- 0.3, r^2 %.4f); ||phi|| slope %.3f", slope,
                r.velocity_fit.r_squared, r.stream_fit.rate)};
}

Outcome lemma_inequalities() {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> lognu(-8.0, 0.0), logk(-4.0, 3.0), uxi(-1e3, 1e3), sign(-1.0, 1.0);
    int violations = 0;
    for (int n = 0; n < 10000; ++n) {
        MultiplierParams p;
        p.nu = std::pow(10.0, lognu(rng));
        const double k = std::copysign(std::pow(10.0, logk(rng)), sign(rng));
        if (!lemma21_check_m1(p, k, uxi(rng)).holds()) ++violations;
    }
    double worst = 0.0;
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    const double h = 1e-5;
    for (int n = 0; n < 1000; ++n) {
        const double k = u(rng), xi = u(rng);
        if (std::abs(k) < 0.05) continue;
        const double fd = k * (m2(k, xi + h) - m2(k, xi - h)) / (2 * h);
        worst = std::max(worst, std::abs(fd - m2_transport_derivative(k, xi)));
    }
    return {violations == 0 && worst <= 1e-6,
            fmt("%d violations in 10000 samples; M2 derivative max FD error %.2e (limit 1e-6)", violations, worst)};
}

Outcome upsilon_identity() {
    MultiplierParams p;
    p.kappa = 0.1;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ut(0.1, 10.0), uk(-3.0, 3.0), uxi(-10.0, 10.0);
    double worst = 0.0, smallest = INFINITY;
    const double h = 1e-4;
    for (int n = 0; n < 100; ++n) {
        const double t = ut(rng), k = uk(rng), xi = uxi(rng);
        const double dt = (m3(p, t + h, k, xi) - m3(p, t - h, k, xi)) / (2 * h);
        const double dxi = (m3(p, t, k, xi + h) - m3(p, t, k, xi - h)) / (2 * h);
        const double u = upsilon(p, t, k, xi);
        smallest = std::min(smallest, u);
        worst = std::max(worst, std::abs(-dt + k * dxi - u) / u);
    }
    return {worst <= 1e-4 && smallest > 0.0,
            fmt("max relative FD mismatch %.2e (limit 1e-4), min Upsilon %.3e", worst, smallest)};
}

Outcome brute_force_convolution() {
    double worst = 0.0;
    for (int n : {8, 16}) {
        const auto g = make_grid(n, n, 4 * pi, 2 * pi);
        const auto f = oracle::random_real_field(g, n / 2 - 1, n / 2 - 1, 1.0, 60 + n);
        for (double t : {0.0, 0.75, 3.0}) worst = std::max(worst, rel_diff(nonlinear_rhs(f, t), oracle::direct_convolution(f, t)));
    }
    return {worst <= 1e-10, fmt("max relative difference %.3e on 8x8 and 16x16 (limit 1e-10)", worst)};
}

Outcome temporal_order() {
    const auto g = make_grid(32, 32, 4 * pi, 2 * pi);
    auto w = oracle::random_real_field(g, 4, 4, 1.0, 70);
    double vmax = 0.0;
    for (double v : transform_inverse(w)) vmax = std::max(vmax, std::abs(v));
    w *= cplx(1.0 / vmax);  // O(1) vorticity so the nonlinear term dominates the error
    auto solve = [&](int steps) {
        MovingFrameState s{0.0, w};
        SolverConfig cfg;
        cfg.nu = 1e-2;
        cfg.dt = 1.0 / steps;
        for (int n = 0; n < steps; ++n) s = step(s, cfg);
        return s.f;
    };
    const auto ref = solve(1280);
    const double e1 = (solve(10) - ref).l2_norm(), e2 = (solve(20) - ref).l2_norm(), e3 = (solve(40) - ref).l2_norm();
    const double r1 = e1 / e2, r2 = e2 / e3;
    return {std::abs(r1 - 16.0) <= 2.0 && std::abs(r2 - 16.0) <= 2.0,
            fmt("error ratios %.2f (dt 0.1/0.05) and %.2f (dt 0.05/0.025), target 16 +- 2", r1, r2)};
}

Outcome quasilinear_identity() {
    const double nu = 1e-3;
    const auto g = make_grid(128, 256, 64 * pi, 2 * pi);
    InitialDataSpec spec;
    spec.amplitude = 1e-4;
    const auto w = make_initial_data(g, spec);
    SolverConfig cfg;
    cfg.nu = nu;
    cfg.t_max = 2.0 * std::pow(nu, -1.0 / 6.0);
    cfg.dt = default_dt(w, cfg);
    const auto full = run(w, cfg);
    cfg.mode = SolverMode::quasilinear;
    const auto quasi = run(w, cfg);
    const double err = rel_diff(full.final_state.f, quasi.final_state.f);
    return {err <= 1e-6 && !full.aborted && !quasi.aborted,
            fmt("relative difference %.3e at t = %.3f (limit 1e-6), %ld steps each", err, cfg.t_max, full.steps)};
}

Outcome toy_slopes() {
    auto fit = [](double beta) {
        std::vector<AmplificationReport> reports;
        bool inactive = true;
        for (int N : {8, 16, 32, 64}) {
            reports.push_back(run_amplification(toy_worst_case(N, 2.0, beta, 0.1)));
            inactive = inactive && reports.back().cutoff_inactive;
        }
        return std::make_pair(toy_slope(reports).slope, inactive);
    };
    const auto [s3, in3] = fit(1.0 / 3.0);
    const auto [s2, in2] = fit(0.5);
    const bool ok = std::abs(s3 - 0.4) <= 0.15 && s2 <= 0.15 && in3 && in2;
    return {ok, fmt("beta=1/3 slope %.3f (target 0.40 +- 0.15); beta=1/2 slope %.3f (target <= 0 +- 0.15)", s3, s2)};
}

Outcome bounded_growth() {
    const double nu = 1e-3;
    const auto g = make_grid(128, 512, 64 * pi, 2 * pi);
    InitialDataSpec spec;
    spec.amplitude = std::pow(nu, 0.4);
    const auto w = make_initial_data(g, spec);
    const auto p = MultiplierParams::third_threshold_preset(nu);
    SolverConfig cfg;
    cfg.nu = nu;
    cfg.t_max = 5.0 / std::cbrt(nu);
    cfg.dt = default_dt(w, cfg);
    RunOptions opt;
    opt.probe_interval = 0.1 / std::cbrt(nu);
    opt.probes = standard_probes(p);
    const auto traj = run(w, cfg, opt);
    const auto v = classify(make_run_record(traj));
    return {!traj.aborted && v.growth_factor <= 4.0,
            fmt("growth factor %.4f over [0, %.0f] (limit 4), smallness norm %.4f, %ld steps", v.growth_factor,
                cfg.t_max, smallness_norm(w), traj.steps)};
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_text_file(e.path());
    return files;
}

Outcome determinism_and_resume() {
    const fs::path root = fs::temp_directory_path() / "couette_acceptance_sweep";
    fs::remove_all(root);
    SweepConfig s;
    s.base.nx = 16;
    s.base.ny = 32;
    s.base.solver.dt = 0.05;
    s.base.solver.t_max = 1.0;
    s.base.probe_interval = 0.25;
    s.nus = {1e-2, 3e-3, 1e-3};
    s.amplitudes = {1e-3, 1e-2, 1e-1};
    run_campaign(s, {root / "a", 1, false, -1});
    run_campaign(s, {root / "b", 1, false, -1});
    run_campaign(s, {root / "c", 4, false, -1});
    const auto first = run_campaign(s, {root / "d", 2, false, 4});
    const auto resumed = run_campaign(s, {root / "d", 2, true, -1});
    const auto a = snapshot(root / "a"), b = snapshot(root / "b"), c = snapshot(root / "c"), d = snapshot(root / "d");
    fs::remove_all(root);
    const bool ok = a.size() == 9 * 2 + 2 && a == b && a == c && a == d && !first.complete && resumed.complete &&
                    resumed.reused_runs == 4;
    return {ok, fmt("%zu files; repeat %s, 4 threads %s, interrupted+resumed %s (reused %d)", a.size(),
                    a == b ? "identical" : "DIFFERENT", a == c ? "identical" : "DIFFERENT",
                    a == d ? "identical" : "DIFFERENT", resumed.reused_runs)};
}

}  // namespace

int main() {
    struct Criterion {
        std::string name;
        std::function<Outcome()> check;
        double time_limit;  ///< seconds
    };
    const std::vector<Criterion> criteria = {
        {"oracle equivalence", oracle_equivalence, 5.0},
        {"closed-form exponent", closed_form_exponent, INFINITY},
        {"inviscid damping slope", inviscid_slope, 10.0},
        {"multiplier inequalities", lemma_inequalities, INFINITY},
        {"Upsilon identity", upsilon_identity, INFINITY},
        {"brute-force convolution", brute_force_convolution, INFINITY},
        {"temporal order", temporal_order, INFINITY},
        {"quasi-linear identity", quasilinear_identity, 120.0},
        {"toy-model slopes", toy_slopes, 60.0},
        {"bounded weighted growth", bounded_growth, 600.0},
        {"determinism and resume", determinism_and_resume, INFINITY},
    };
    int failures = 0;
    for (std::size_t n = 0; n < criteria.size(); ++n) {
        const auto& c = criteria[n];
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string timing = fmt("[%.2f s", secs);
        if (std::isfinite(c.time_limit)) {
            timing += fmt(", limit %.0f s", c.time_limit);
            if (secs > c.time_limit) o.pass = false;
        }
        timing += "]";
        failures += !o.pass;
        std::printf("%s %2zu %-26s %s %s\n", o.pass ? "PASS" : "FAIL", n + 1, c.name.c_str(), o.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
    return failures ? 1 : 0;
}
