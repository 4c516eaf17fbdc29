// couette_lab: command-line front end for the Couette stability lab.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "couette.hpp"

namespace fs = std::filesystem;
using namespace couette;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    int threads = 1;
    std::uint64_t seed = 1;
    bool seed_given = false;
    bool resume = false;
};

void add_common(CLI::App* app, Common& c, bool with_config = true) {
    if (with_config) app->add_option("--config", c.config, "flat key = value config file");
    app->add_option("--out", c.out, "output directory")->capture_default_str();
    app->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option_function<std::uint64_t>(
        "--seed", [&c](std::uint64_t s) {
            c.seed = s;
            c.seed_given = true;
        }, "random seed");
    app->add_flag("--resume", c.resume, "reuse finished runs found under --out");
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------

int cmd_linear(const Common& c, double nu, const std::string& fit, double coef) {
    fs::create_directories(c.out);
    if (fit == "inviscid") {
        LinearDecayStudy study;
        study.nu = nu;
        const auto r = linear_decay_study(study);
        write_text_file(fs::path(c.out) / "linear_decay.csv", norms_csv({r.stream, r.velocity}));
        std::cout << "stream_function power-law slope on t in [" << study.t0 << ", " << study.t1
                  << "]: " << fmt(r.stream_fit.rate) << " (r^2 " << fmt(r.stream_fit.r_squared) << ")\n"
                  << "dx_velocity power-law slope: " << fmt(r.velocity_fit.rate) << " (r^2 "
                  << fmt(r.velocity_fit.r_squared) << ")\n"
                  << "slope " << fmt(r.stream_fit.rate) << "\n";
        return 0;
    }
    // enhanced: envelope check and exponential fit on the default data family
    const auto g = make_grid(32, 256, 4.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    InitialDataSpec spec;
    spec.seed = c.seed;
    const auto w = make_initial_data(g, spec);
    const double horizon = std::min(5.0 / std::cbrt(nu), 0.5 * g.xi_max() / g.k_max());
    std::vector<double> times;
    NormSeries series{{}, {}, "enstrophy_nonzero"};
    MultiplierParams p;
    p.nu = nu;
    for (int n = 0; n <= 64; ++n) {
        const double t = horizon * n / 64.0;
        times.push_back(t);
        series.times.push_back(t);
        series.values.push_back(norm_probe(kelvin_solve(w, nu, t), t, p, {NormKind::enstrophy_nonzero}));
    }
    const double ratio = enhanced_envelope_ratio(w, nu, coef, times);
    const auto f = fit_decay(series, horizon / 2.0, horizon, FitKind::exponential);
    write_text_file(fs::path(c.out) / "linear_enhanced.csv", norms_csv({series}));
    std::cout << "enhanced dissipation envelope (c = " << coef << ", C = " << fmt(enhanced_envelope_constant(coef))
              << "): max ratio " << fmt(ratio) << (ratio <= 1.0 ? " (holds)" : " (violated)") << "\n"
              << "exponential rate of nonzero enstrophy on second half: " << fmt(f.rate) << " (r^2 "
              << fmt(f.r_squared) << ")\n";
    return 0;
}

int cmd_solve(const Common& c, const std::string& mode) {
    if (c.config.empty()) throw ValidationError("solve: --config is required");
    auto cfg = run_config_from_entries(read_config_file(c.config));
    if (c.seed_given) cfg.data.seed = c.seed;
    if (!mode.empty()) cfg.solver.mode = solver_mode_from_string(mode);
    const auto r = execute_run(cfg, c.out, c.resume);
    std::cout << "run " << r.hash << ": " << to_string(r.verdict.classification) << ", growth factor "
              << fmt(r.verdict.growth_factor) << ", damping integral " << fmt(r.verdict.damping_integral) << ", "
              << r.steps << " steps to t = " << fmt(r.final_time) << (r.reused ? " (reused)" : "") << "\n"
              << "outputs in " << (fs::path(c.out) / "runs" / r.hash).string() << "\n";
    if (r.aborted) {
        std::cerr << "run aborted: " << r.abort_reason << "\n";
        return 2;
    }
    return 0;
}

int cmd_toy(const Common& c, std::vector<int> Ns, double beta, double eps, double xi, double x0) {
    std::vector<AmplificationReport> reports(Ns.size());
    detail::parallel_for(Ns.size(), c.threads,
                         [&](std::size_t i) { reports[i] = run_amplification(toy_worst_case(Ns[i], xi, beta, eps, x0)); });
    fs::create_directories(c.out);
    write_text_file(fs::path(c.out) / "toy.csv", toy_csv(reports));
    for (const auto& r : reports)
        std::cout << "N = " << r.N << ": nu " << fmt(r.nu) << ", A " << fmt(r.A) << ", localization "
                  << fmt(r.localization) << (r.cutoff_inactive ? "" : " (cutoff active)") << "\n";
    if (reports.size() >= 2) {
        const auto f = toy_slope(reports);
        std::cout << "log A vs log N slope " << fmt(f.slope) << " (predicted " << fmt(toy_predicted_slope(beta, eps))
                  << ", residual " << fmt(f.residual) << ")\n";
    }
    return 0;
}

int cmd_weights(const Common& c, bool check, int samples, double nu, double t) {
    fs::create_directories(c.out);
    MultiplierParams p;
    p.nu = nu;
    if (!c.config.empty()) {
        auto entries = read_config_file(c.config);
        RunConfig rc;
        apply_run_entries(rc, entries);
        p = rc.multiplier_params();
    }
    p.validate();
    if (check) {
        std::mt19937_64 rng(c.seed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        int passes = 0;
        std::ostringstream os;
        os.precision(17);
        os << "nu,k,xi,lhs,rhs,holds\n";
        for (int n = 0; n < samples; ++n) {
            MultiplierParams q = p;
            q.nu = std::pow(10.0, -8.0 + 7.0 * u(rng));
            const double k = (u(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -3.0 + 5.0 * u(rng));
            const double xi = (u(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, -3.0 + 6.0 * u(rng));
            const auto r = lemma21_check_m1(q, k, xi);
            passes += r.holds();
            os << q.nu << ',' << k << ',' << xi << ',' << r.lhs << ',' << r.rhs << ',' << (r.holds() ? 1 : 0) << '\n';
        }
        write_text_file(fs::path(c.out) / "lemma21_samples.csv", os.str());
        std::ostringstream report;
        report << "lower-bound check on k d_xi M1: " << passes << "/" << samples << " passes\n";
        write_text_file(fs::path(c.out) / "lemma21_report.txt", report.str());
        std::cout << report.str();
        return passes == samples ? 0 : 2;
    }
    std::ostringstream os;
    os.precision(12);
    os << "k,xi,t,M1,M2,M3,Upsilon\n";
    for (double k : {-2.0, -0.5, -0.1, 0.1, 0.5, 2.0})
        for (double xi : {-4.0, -1.0, 0.0, 1.0, 4.0})
            os << k << ',' << xi << ',' << t << ',' << m1(p, k, xi) << ',' << m2(k, xi) << ',' << m3(p, t, k, xi)
               << ',' << upsilon(p, t, k, xi) << '\n';
    write_text_file(fs::path(c.out) / "weights_table.csv", os.str());
    std::cout << os.str();
    return 0;
}

int cmd_sweep(const Common& c, int max_runs) {
    if (c.config.empty()) throw ValidationError("sweep: --config is required");
    auto sweep = sweep_config_from_entries(read_config_file(c.config));
    if (c.seed_given) sweep.base.data.seed = c.seed;
    CampaignOptions opt;
    opt.out_root = c.out;
    opt.threads = c.threads;
    opt.resume = c.resume;
    opt.run_budget = max_runs;
    const auto r = run_campaign(sweep, opt);
    std::cout << r.points.size() << " runs (" << r.executed_runs << " executed, " << r.reused_runs << " reused)\n";
    if (!r.complete) {
        std::cout << "run budget exhausted; rerun with --resume to continue\n";
        return 0;
    }
    for (const auto& t : r.thresholds)
        std::cout << "nu " << fmt(t.nu) << ": "
                  << (t.valid ? "a* = " + fmt(t.bisection.a_star) : "no threshold (" + t.error + ")") << "\n";
    if (r.beta)
        std::cout << "beta_hat " << fmt(r.beta->beta_hat) << " +- " << fmt(r.beta->band) << " (residual "
                  << fmt(r.beta->residual) << ")\n";
    if (r.monotone_violations)
        std::cout << r.monotone_violations << " amplitude-monotonicity violations flagged as grid artifacts\n";
    std::cout << "wrote " << (fs::path(c.out) / "sweep.csv").string() << "\n";
    return 0;
}

int cmd_norms(const Common& c, const std::vector<std::string>& inputs) {
    MultiplierParams base;
    if (!c.config.empty()) {
        auto entries = read_config_file(c.config);
        RunConfig rc;
        apply_run_entries(rc, entries);
        base = rc.weights;
    }
    std::vector<std::string> files;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            for (const auto& e : fs::directory_iterator(in))
                if (e.path().extension() == ".ctl") files.push_back(e.path().string());
        } else {
            files.push_back(in);
        }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError("norms: no checkpoint files given");
    std::vector<NormSeries> series;
    for (const auto& spec : standard_norm_specs()) series.push_back({{}, {}, spec.id()});
    for (const auto& f : files) {
        const auto ck = read_checkpoint(f);
        MultiplierParams p = base;
        p.nu = ck.nu;
        const auto specs = standard_norm_specs();
        for (std::size_t n = 0; n < specs.size(); ++n) {
            series[n].times.push_back(ck.t);
            series[n].values.push_back(norm_probe(ck.field, ck.t, p, specs[n]));
        }
    }
    fs::create_directories(c.out);
    const auto path = fs::path(c.out) / "norms_recomputed.csv";
    write_text_file(path, norms_csv(series));
    std::cout << "recomputed " << series.size() << " norms on " << files.size() << " checkpoints into "
              << path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pseudo-spectral lab for the stability of 2D Couette flow"};
    app.require_subcommand(1);
    Common common;

    auto* linear = app.add_subcommand("linear", "exact linear solutions and decay-rate fits");
    double lin_nu = 1e-3, lin_c = 0.05;
    std::string lin_fit = "inviscid";
    linear->add_option("--nu", lin_nu, "viscosity")->capture_default_str();
    linear->add_option("--fit", lin_fit, "inviscid | enhanced")
        ->check(CLI::IsMember({"inviscid", "enhanced"}))
        ->capture_default_str();
    linear->add_option("--c", lin_c, "envelope rate constant")->capture_default_str();
    add_common(linear, common, false);

    auto* solve = app.add_subcommand("solve", "single nonlinear or quasi-linear run");
    std::string solve_mode;
    solve->add_option("--mode", solve_mode, "full | linear_only | quasilinear (overrides config)");
    add_common(solve, common);

    auto* toy = app.add_subcommand("toy", "echo-cascade toy model amplification sweep");
    std::vector<int> toy_N{8, 16, 32, 64};
    double toy_beta = 1.0 / 3.0, toy_eps = 0.1, toy_xi = 2.0, toy_x0 = 1.0;
    toy->add_option("--N", toy_N, "dyadic shells")->capture_default_str();
    toy->add_option("--beta", toy_beta, "threshold exponent")->capture_default_str();
    toy->add_option("--eps", toy_eps, "low-frequency weight exponent")->capture_default_str();
    toy->add_option("--xi", toy_xi, "vertical frequency")->capture_default_str();
    toy->add_option("--x0", toy_x0, "nu^{1/3} N xi along the sweep")->capture_default_str();
    add_common(toy, common, false);

    auto* weights = app.add_subcommand("weights", "multiplier tables and inequality checks");
    bool check_lemma = false;
    int samples = 1000;
    double w_nu = 1e-3, w_t = 1.0;
    weights->add_flag("--check-lemma21", check_lemma, "sample the lower bound on k d_xi M1");
    weights->add_option("--samples", samples, "number of samples")->check(CLI::PositiveNumber)->capture_default_str();
    weights->add_option("--nu", w_nu, "viscosity for the table")->capture_default_str();
    weights->add_option("--t", w_t, "time for the table")->capture_default_str();
    add_common(weights, common);

    auto* sweep = app.add_subcommand("sweep", "threshold campaign over (nu, amplitude)");
    int max_runs = -1;
    sweep->add_option("--max-runs", max_runs, "stop after this many new runs (resume later)");
    add_common(sweep, common);

    auto* norms = app.add_subcommand("norms", "recompute norms from checkpoints");
    std::vector<std::string> inputs;
    norms->add_option("inputs", inputs, "checkpoint files or directories")->required();
    add_common(norms, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*linear) return cmd_linear(common, lin_nu, lin_fit, lin_c);
        if (*solve) return cmd_solve(common, solve_mode);
        if (*toy) return cmd_toy(common, toy_N, toy_beta, toy_eps, toy_xi, toy_x0);
        if (*weights) return cmd_weights(common, check_lemma, samples, w_nu, w_t);
        if (*sweep) return cmd_sweep(common, max_runs);
        if (*norms) return cmd_norms(common, inputs);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
