#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "couette/diagnostics.hpp"
#include "couette/initial_data.hpp"
#include "../oracles.hpp"

using namespace couette;
using std::numbers::pi;

namespace {

NormSeries synthetic(double (*fn)(double), double t0, double t1, int n) {
    NormSeries s;
    s.norm_id = "synthetic";
    for (int i = 0; i < n; ++i) {
        const double t = t0 + (t1 - t0) * i / (n - 1);
        s.times.push_back(t);
        s.values.push_back(fn(t));
    }
    return s;
}

MultiplierParams params(double nu, double c = 0.05, double eps = 0.4) {
    MultiplierParams p;
    p.nu = nu;
    p.c = c;
    p.eps = eps;
    return p;
}

}  // namespace

TEST(NormProbe, ZeroFieldGivesZero) {
    auto g = make_grid(16, 16, 4 * pi, 2 * pi);
    SpectralField f(g);
    for (const auto& spec : standard_norm_specs()) EXPECT_EQ(norm_probe(f, 2.0, params(1e-3), spec), 0.0) << spec.id();
}

TEST(NormProbe, TimeZeroIsPlainSobolevWeight) {
    auto g = make_grid(16, 16, 8 * pi, 2 * pi);
    auto f = oracle::random_real_field(g, 6, 6, 1.0, 40);
    const auto p = params(1e-3);
    const double plain = weighted_norm(f, [&](double k, double) {
                             return japanese_bracket(k) * inverse_bracket_pow(k, p.eps);
                         }).weighted;
    EXPECT_NEAR(norm_probe(f, 0.0, p, {NormKind::enhanced, RateKind::lambda}), plain, 1e-14 * plain);
    EXPECT_NEAR(norm_probe(f, 0.0, p, {NormKind::enhanced, RateKind::two_thirds}), plain, 1e-14 * plain);
}

TEST(NormProbe, SingleModeArithmetic) {
    // Unit cell (dk = dxi = 1), coefficient 1 at (k, xi) = (1, 0).
    auto g = make_grid(8, 8, 2 * pi, 2 * pi);
    SpectralField f(g);
    f.at_mode(1, 0) = 1.0;
    const auto p = params(1e-3, 0.05, 0.4);
    const double bracket = std::pow(2.0, 0.5) * std::pow(2.0, 0.2);
    EXPECT_NEAR(norm_probe(f, 0.0, p, {NormKind::enhanced}), bracket, 1e-14);
    // t = 3: e^{c nu^{1/3} t} with lambda(1) = 1 and D = 1 + 9.
    const double t = 3.0;
    EXPECT_NEAR(norm_probe(f, t, p, {NormKind::enhanced}), std::exp(0.05 * 0.1 * t) * bracket, 1e-13);
    EXPECT_NEAR(norm_probe(f, t, p, {NormKind::damping}), std::exp(0.05 * 0.1 * t) * bracket / std::sqrt(10.0), 1e-13);
    EXPECT_NEAR(norm_probe(f, t, p, {NormKind::dx_velocity}), 1.0 / std::sqrt(10.0), 1e-15);
    EXPECT_NEAR(norm_probe(f, t, p, {NormKind::stream_function}), 0.1, 1e-15);
    EXPECT_NEAR(norm_probe(f, t, p, {NormKind::enstrophy_nonzero}), 1.0, 1e-15);
    EXPECT_EQ(norm_probe(f, t, p, {NormKind::zero_mode}), 0.0);
}

TEST(NormProbe, StandardIds) {
    std::vector<std::string> ids;
    for (const auto& s : standard_norm_specs()) ids.push_back(s.id());
    EXPECT_EQ(ids.front(), "enhanced_lambda");
    EXPECT_EQ(ids[1], "enhanced_two_thirds");
    EXPECT_EQ(ids.back(), "zero_mode");
}

TEST(FitDecay, RecoversPlantedExponential) {
    auto s = synthetic([](double t) { return 2.0 * std::exp(-0.3 * t); }, 0.0, 20.0, 40);
    auto fit = fit_decay(s, 0.0, 20.0, FitKind::exponential);
    EXPECT_NEAR(fit.rate, -0.3, 1e-6);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
    EXPECT_EQ(fit.samples, 40u);
}

TEST(FitDecay, RecoversPlantedPower) {
    auto s = synthetic([](double t) { return 5.0 / (t * t); }, 1.0, 50.0, 30);
    EXPECT_NEAR(fit_decay(s, 1.0, 50.0, FitKind::power).rate, -2.0, 1e-6);
}

TEST(FitDecay, Errors) {
    auto s = synthetic([](double t) { return std::exp(-t); }, 0.0, 1.0, 7);
    EXPECT_THROW(fit_decay(s, 0.0, 1.0, FitKind::exponential), InsufficientData);
    auto z = synthetic([](double t) { return t - 0.5; }, 0.0, 1.0, 20);
    EXPECT_THROW(fit_decay(z, 0.0, 1.0, FitKind::exponential), ValidationError);
    auto w = synthetic([](double t) { return std::exp(-t); }, 0.0, 10.0, 20);
    EXPECT_THROW(fit_decay(w, 0.0, 2.0, FitKind::exponential), InsufficientData);
}

TEST(NormSeries, Validation) {
    NormSeries s{{0.0, 1.0}, {1.0}, "x"};
    EXPECT_THROW(s.validate(), ValidationError);
    s = {{0.0, 0.0}, {1.0, 1.0}, "x"};
    EXPECT_THROW(s.validate(), ValidationError);
    s = {{0.0, 1.0}, {1.0, NAN}, "x"};
    EXPECT_THROW(s.validate(), ValidationError);
    s = {{0.0, 1.0}, {1.0, 2.0}, "x"};
    EXPECT_NO_THROW(s.validate());
}

TEST(LinearDecay, StreamFunctionAndVelocityRates) {
    // Single k column, Gaussian in xi: ||phi|| ~ t^{-2}; ||d_x grad phi|| ~ t^{-1}
    // because the xi-integrated column norm carries one power of t less than
    // the pointwise symbol.
    LinearDecayStudy study;
    const auto r = linear_decay_study(study);
    EXPECT_NEAR(r.stream_fit.rate, -2.0, 0.3);
    EXPECT_GT(r.stream_fit.r_squared, 0.99);
    EXPECT_NEAR(r.velocity_fit.rate, -1.0, 0.3);
    EXPECT_EQ(r.stream.size(), 64u);
}

TEST(LinearDecay, EnhancedEnvelopeHolds) {
    auto g = make_grid(16, 512, 16 * pi, 2 * pi);
    InitialDataSpec spec;
    spec.amplitude = 1.0;
    const auto w = make_initial_data(g, spec);
    std::vector<double> times;
    for (int n = 0; n <= 40; ++n) times.push_back(n * 2.5);
    EXPECT_LE(enhanced_envelope_ratio(w, 1e-3, 0.05, times), 1.0);
    EXPECT_LE(enhanced_envelope_ratio(w, 1e-3, 1.0 / 12.0 - 1e-3, times), 1.0);
}

TEST(LinearDecay, WeightedNormNearlyNonincreasing) {
    // Linear trajectories at c <= c0: the weighted norm may rise by at most the
    // short-time allowance exp(4/3 c^{3/2}) and is otherwise nonincreasing.
    auto g = make_grid(16, 512, 16 * pi, 2 * pi);
    InitialDataSpec spec;
    spec.amplitude = 1.0;
    const auto w = make_initial_data(g, spec);
    for (double c : {0.05, 1.0 / 12.0 - 1e-3}) {
        const auto p = params(1e-3, c);
        double prev = norm_probe(w, 0.0, p, {NormKind::enhanced});
        const double first = prev;
        double running_min = prev;
        double worst_rise = 0.0;
        for (double t = 0.5; t <= 100.0; t += 0.5) {
            const double v = norm_probe(kelvin_solve(w, p.nu, t), t, p, {NormKind::enhanced});
            worst_rise = std::max(worst_rise, v / running_min);
            running_min = std::min(running_min, v);
            prev = v;
        }
        EXPECT_LE(worst_rise, enhanced_envelope_constant(c)) << "c = " << c;
        EXPECT_LT(prev, first);
    }
}

TEST(Classify, EmptyRecordIsInconclusive) {
    RunRecord rec;
    EXPECT_EQ(classify(rec).classification, Classification::inconclusive);
}

TEST(Classify, Bands) {
    RunRecord rec;
    rec.weighted = {{0, 1, 2, 3}, {1.0, 1.5, 1.2, 1.1}, "enhanced_lambda"};
    rec.enstrophy = {{0, 1, 2, 3}, {1.0, 0.9, 0.8, 0.7}, "enstrophy_nonzero"};
    auto v = classify(rec);
    EXPECT_EQ(v.classification, Classification::stable);
    EXPECT_DOUBLE_EQ(v.growth_factor, 1.5);

    rec.weighted.values[1] = 10.0;
    EXPECT_EQ(classify(rec).classification, Classification::inconclusive);
    rec.weighted.values[1] = 100.0;
    EXPECT_EQ(classify(rec).classification, Classification::transitioned);

    rec.weighted.values[1] = 1.5;
    rec.enstrophy.values[3] = 0.85;
    EXPECT_EQ(classify(rec).classification, Classification::inconclusive);

    rec.enstrophy.values[3] = 0.7;
    rec.aborted = true;
    EXPECT_EQ(classify(rec).classification, Classification::inconclusive);
    rec.blew_up = true;
    EXPECT_EQ(classify(rec).classification, Classification::transitioned);

    ClassifyThresholds th;
    th.G = 1.2;
    th.G_hi = 1.4;
    rec.aborted = rec.blew_up = false;
    EXPECT_EQ(classify(rec, th).classification, Classification::transitioned);
}

TEST(Classify, DampingIntegralTrapezoid) {
    NormSeries s{{0.0, 1.0, 3.0}, {1.0, 2.0, 0.0}, "damping_lambda"};
    EXPECT_DOUBLE_EQ(damping_integral(s), 0.5 * (1 + 4) + 1.0 * (4 + 0));
}

TEST(Classify, LinearRunIsStable) {
    auto g = make_grid(16, 128, 8 * pi, 2 * pi);
    InitialDataSpec spec;
    spec.amplitude = 1e-2;
    const auto w = make_initial_data(g, spec);
    SolverConfig cfg;
    cfg.nu = 1e-3;
    cfg.dt = 0.1;
    cfg.t_max = 8.0;
    cfg.mode = SolverMode::linear_only;
    RunOptions opt;
    opt.probe_interval = 0.5;
    opt.probes = standard_probes(params(1e-3, 1.0 / 12.0 - 1e-3));
    const auto traj = run(w, cfg, opt);
    const auto v = classify(make_run_record(traj));
    EXPECT_EQ(v.classification, Classification::stable);
    EXPECT_LE(v.growth_factor, enhanced_envelope_constant(1.0 / 12.0 - 1e-3));
    EXPECT_GT(v.damping_integral, 0.0);
}

TEST(Classify, LargeDataGrowthIsCappedByWeightContrast) {
    // The nonzero-mode enstrophy cannot exceed the initial enstrophy when the
    // data have no k = 0 part, so the weighted norm grows at most by the
    // contrast of the weight over the grid times exp(c nu^{1/3} t).
    auto g = make_grid(32, 64, 4 * pi, 2 * pi);
    InitialDataSpec spec;
    spec.amplitude = 1e3;
    const auto w = make_initial_data(g, spec);
    const auto p = params(1e-3);
    SolverConfig cfg;
    cfg.nu = p.nu;
    cfg.t_max = 2.0;
    cfg.dt = default_dt(w, cfg);
    RunOptions opt;
    opt.probe_interval = 0.25;
    opt.probes = standard_probes(p);
    const auto traj = run(w, cfg, opt);
    ASSERT_FALSE(traj.aborted);
    double wmin = INFINITY, wmax = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        if (g.kmode(i) == 0 || g.kmode(i) == g.nx / 2) continue;
        const double v = japanese_bracket(g.k(i)) * inverse_bracket_pow(g.k(i), p.eps);
        wmin = std::min(wmin, v);
        wmax = std::max(wmax, v);
    }
    const double cap = wmax / wmin * std::exp(p.c * std::cbrt(p.nu) * cfg.t_max);
    const auto v = classify(make_run_record(traj));
    EXPECT_LE(v.growth_factor, cap);
    EXPECT_NE(v.classification, Classification::transitioned);
    const auto e = series_from(traj, "enstrophy_nonzero");
    EXPECT_LE(e.values.back(), e.values.front() * (1 + 1e-8));
}

TEST(NormsCsv, Format) {
    NormSeries s{{0.0, 0.5}, {1.0, 0.25}, "enhanced_lambda"};
    EXPECT_EQ(norms_csv({s}), "time,value,norm_id\n0,1,enhanced_lambda\n0.5,0.25,enhanced_lambda\n");
}
