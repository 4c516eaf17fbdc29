#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "couette/toy_model.hpp"

using namespace couette;

namespace {

ToyConfig small_config(int N = 8) { return toy_worst_case(N, 2.0, 1.0 / 3.0, 0.1); }

std::vector<AmplificationReport> family(double beta, double eps) {
    std::vector<AmplificationReport> out;
    for (int N : {8, 16, 32, 64}) out.push_back(run_amplification(toy_worst_case(N, 2.0, beta, eps)));
    return out;
}

}  // namespace

TEST(ToyGrid, SymmetricSixteenPerOctave) {
    auto g = toy_log_grid(0.25, 4.0);
    ASSERT_EQ(g.size() % 2, 0u);
    const std::size_t half = g.size() / 2;
    EXPECT_EQ(half, 4u * 16u + 1u);
    for (std::size_t n = 0; n < half; ++n) EXPECT_DOUBLE_EQ(g[n], -g[g.size() - 1 - n]);
    EXPECT_DOUBLE_EQ(g[half], 0.25);
    EXPECT_DOUBLE_EQ(g.back(), 4.0);
    EXPECT_NEAR(g[half + 1] / g[half], std::exp2(1.0 / 16.0), 1e-15);
    EXPECT_THROW(toy_log_grid(1.0, 0.5), ValidationError);
}

TEST(ToyConfig, WorstCaseFamilyKeepsCutoffFixed) {
    for (int N : {8, 16, 32, 64}) {
        auto cfg = toy_worst_case(N, 2.0, 0.5, 0.1);
        EXPECT_NEAR(std::cbrt(cfg.nu) * N * 2.0, 1.0, 1e-12);
        EXPECT_NEAR(cfg.cutoff_exponent(), 0.05, 1e-12);
        EXPECT_TRUE(cfg.cutoff_inactive());
        EXPECT_NO_THROW(cfg.validate());
        for (double k : cfg.k_grid) {
            EXPECT_GE(k, 1.0);
            EXPECT_LE(k, 2.0);
        }
    }
    auto bad = small_config();
    bad.l_grid.clear();
    EXPECT_THROW(bad.validate(), ValidationError);
    bad = small_config();
    bad.nu = 0.0;
    EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(ToyCoupling, ZeroWithoutXiModes) {
    auto cfg = small_config();
    auto s = toy_initial_state(cfg);
    std::fill(s.f_xi.begin(), s.f_xi.end(), 0.0);
    const auto pairs = toy_pairs(cfg);
    const auto w = detail::toy_quadrature_weights(cfg.l_grid);
    for (double t : {0.0, 5.0, 16.0}) {
        s.t = t;
        for (double v : toy_coupling(s, cfg, pairs, w)) EXPECT_EQ(v, 0.0);
    }
    s.t = 3.0;
    auto d = toy_rhs(s, cfg);
    for (double v : d.f_xi) EXPECT_EQ(v, 0.0);
}

TEST(ToyCoupling, KernelPeaksAtOrrTime) {
    auto cfg = small_config();
    const auto pairs = toy_pairs(cfg);
    const auto w = detail::toy_quadrature_weights(cfg.l_grid);
    // Seed one positive bin and find the time of the largest transfer into it.
    ToyState s = toy_initial_state(cfg);
    std::fill(s.f_xi.begin(), s.f_xi.end(), 0.0);
    const std::size_t b = cfg.l_grid.size() / 2 + 10;
    s.f_xi[b] = 1.0;
    const double l = cfg.l_grid[b];
    std::size_t probe = 0;
    for (const auto& p : pairs)
        if (p.l_index == b) {
            probe = p.k_index;
            break;
        }
    double best_t = -1.0, best = -1.0;
    for (double t = 0.0; t <= 3.0 * cfg.xi / l; t += 1e-3) {
        s.t = t;
        const double v = toy_coupling(s, cfg, pairs, w)[probe];
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    EXPECT_NEAR(best_t, cfg.xi / l, 1e-3);
}

TEST(ToyCoupling, SingleBinHandQuadrature) {
    auto cfg = small_config();
    const auto pairs = toy_pairs(cfg);
    const auto w = detail::toy_quadrature_weights(cfg.l_grid);
    ToyState s = toy_initial_state(cfg);
    std::fill(s.f_xi.begin(), s.f_xi.end(), 0.0);
    std::fill(s.f_zero.begin(), s.f_zero.end(), 1.0);
    const std::size_t b = cfg.l_grid.size() / 2 + 20;  // interior bin of the positive branch
    const double l = cfg.l_grid[b], amp = 0.7, t = 4.0;
    s.f_xi[b] = amp;
    s.t = t;
    const auto out = toy_coupling(s, cfg, pairs, w);
    // Interior log-trapezoid weight of a bin on a 2^{1/16} ladder is l ln 2 / 16.
    const double wb = l * std::log(2.0) / 16.0;
    for (std::size_t a = 0; a < cfg.l_grid.size(); ++a) {
        const double m = cfg.l_grid[a] - l;
        double expected = 0.0;
        if (m >= cfg.output_lo && m <= cfg.output_hi)
            expected = m * wb * cfg.xi * amp / (l * l + (cfg.xi - l * t) * (cfg.xi - l * t));
        EXPECT_NEAR(out[a], expected, 1e-14 * std::max(1.0, std::abs(expected))) << a;
    }
}

TEST(ToyRhs, ZeroModeDecaysViscously) {
    auto cfg = small_config();
    auto s = toy_initial_state(cfg);
    auto d = toy_rhs(s, cfg);
    const auto pairs = toy_pairs(cfg);
    EXPECT_EQ(d.t, 1.0);
    for (std::size_t p = 0; p < pairs.size(); ++p)
        EXPECT_DOUBLE_EQ(d.f_zero[p], -cfg.nu * pairs[p].m * pairs[p].m * s.f_zero[p]);
}

TEST(ToyAmplification, ThirdPowerSlope) {
    const auto reports = family(1.0 / 3.0, 0.1);
    for (const auto& r : reports) EXPECT_TRUE(r.cutoff_inactive);
    const auto fit = toy_slope(reports);
    EXPECT_NEAR(fit.slope, 0.5 - 0.1, 0.15);
    EXPECT_NEAR(toy_predicted_slope(1.0 / 3.0, 0.1), 0.4, 1e-15);
}

TEST(ToyAmplification, HalfPowerSlopeNonpositive) {
    const auto reports = family(0.5, 0.1);
    const auto fit = toy_slope(reports);
    EXPECT_LE(fit.slope, 0.15);
    EXPECT_NEAR(toy_predicted_slope(0.5, 0.1), -0.1, 1e-15);
}

TEST(ToyAmplification, TransferLocalizedNearOrrTimes) {
    for (int N : {8, 32}) {
        const auto r = run_amplification(toy_worst_case(N, 2.0, 1.0 / 3.0, 0.1));
        EXPECT_GE(r.localization, 0.8) << "N = " << N;
        EXPECT_GT(r.A, 0.0);
    }
}

TEST(ToyAmplification, VanishingViscosityLimit) {
    // With beta = 0 the seeds do not depend on nu, so A converges as nu -> 0;
    // with beta = 1/3 it scales exactly like nu^{1/3} in the same limit.
    auto at = [](double nu, double beta) {
        auto cfg = toy_worst_case(8, 2.0, beta, 0.1);
        cfg.nu = nu;
        cfg.dt = 0.05;
        return run_amplification(cfg).A;
    };
    const double a1 = at(1e-9, 0.0), a2 = at(1e-10, 0.0);
    EXPECT_NEAR(a1 / a2, 1.0, 1e-3);
    const double b1 = at(1e-9, 1.0 / 3.0), b2 = at(1e-12, 1.0 / 3.0);
    EXPECT_NEAR(b1 / b2, 10.0, 1e-2);
}

TEST(ToySlope, NeedsDistinctShells) {
    EXPECT_THROW(toy_slope({}), InsufficientData);
    AmplificationReport a;
    a.N = 8;
    a.A = 1.0;
    EXPECT_THROW(toy_slope({a, a}), InsufficientData);
    AmplificationReport b = a;
    b.N = 16;
    b.A = 2.0;
    EXPECT_NEAR(toy_slope({a, b}).slope, 1.0, 1e-14);
}

TEST(ToyCsv, HeaderAndRows) {
    AmplificationReport r;
    r.N = 8;
    r.A = 1.5;
    const auto csv = toy_csv({r});
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "N,nu,beta,eps,A,final_mass,localization,cutoff_exponent,cutoff_inactive");
    EXPECT_NE(csv.find("\n8,"), std::string::npos);
}
