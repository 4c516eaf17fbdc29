#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>

#include "couette/errors.hpp"
#include "couette/multiplier_weights.hpp"
#include "couette/spectral_domain.hpp"

namespace couette {

/// || <k,xi>^6 <1/k>^4 w ||_{L2} + || <k,xi>^5 <1/k>^4 w ||_{L1}, the smallness
/// norm of the nu^{1/3+} result. The k = 0 column is excluded: <1/k> is
/// unbounded there and the data families below vanish on it.
inline double smallness_norm(const SpectralField& w) {
    const auto& g = w.grid();
    SpectralField w6(g), w5(g);
    for (int i = 0; i < g.nx; ++i) {
        if (g.kmode(i) == 0) continue;
        const double k = g.k(i);
        const double low = std::pow(inverse_bracket_pow(k, 1.0), 4.0);
        for (int j = 0; j < g.ny; ++j) {
            const double xi = g.xi(j);
            const double b2 = 1.0 + k * k + xi * xi;
            w6(i, j) = w(i, j) * (b2 * b2 * b2 * low);
            w5(i, j) = w(i, j) * (b2 * b2 * std::sqrt(b2) * low);
        }
    }
    const auto phys = transform_inverse(w5);
    double l1 = 0.0;
    for (double v : phys) l1 += std::abs(v);
    l1 *= g.dx() * g.dy();
    return w6.l2_norm() + l1;
}

/// || <k>^m <1/k>^eps w ||_{L2} over k != 0, the smallness norm of the nu^{1/2} result.
inline double half_threshold_norm(const SpectralField& w, double m, double eps) {
    return weighted_norm(w, [&](double k, double) {
               return std::pow(japanese_bracket(k), m) * inverse_bracket_pow(k, eps);
           }).weighted;
}

/// Parameters of the default initial-data family
///   w(k, xi) = a * <k>^-6 <1/k>^-4 <xi>^-6 * exp(-(k/sk)^2/2 - (xi/sx)^2/2) * e^{i theta},
/// normalized so that smallness_norm(w) = amplitude. Phases are drawn from the
/// seed and paired so the field is real; k = 0 and Nyquist lines are empty.
struct InitialDataSpec {
    double amplitude = 1e-3;
    std::uint64_t seed = 1;
    double sigma_k = 1.0;
    double sigma_xi = 4.0;
    bool random_phase = true;
};

inline SpectralField make_initial_data(const FrequencyGrid& g, const InitialDataSpec& spec) {
    if (!(spec.amplitude >= 0.0)) throw ValidationError("initial data: amplitude must be >= 0");
    if (!(spec.sigma_k > 0.0 && spec.sigma_xi > 0.0)) throw ValidationError("initial data: widths must be > 0");
    SpectralField w(g);
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            const int pi_ = (g.nx - i) % g.nx, pj = (g.ny - j) % g.ny;
            // Visit each conjugate pair once, from its lexicographically smaller member.
            if (std::make_pair(i, j) > std::make_pair(pi_, pj)) continue;
            const int mk = g.kmode(i), mx = g.ximode(j);
            if (mk == 0 || mk == g.nx / 2 || mx == g.ny / 2) continue;
            const double k = g.k(i), xi = g.xi(j);
            const double profile = std::pow(japanese_bracket(k), -6.0) * std::pow(inverse_bracket_pow(k, 1.0), -4.0) *
                                   std::pow(japanese_bracket(xi), -6.0) *
                                   std::exp(-0.5 * (k * k / (spec.sigma_k * spec.sigma_k) +
                                                    xi * xi / (spec.sigma_xi * spec.sigma_xi)));
            const double theta = spec.random_phase ? phase(rng) : 0.0;
            const cplx c = std::polar(profile, theta);
            w(i, j) = c;
            w(pi_, pj) = std::conj(c);
        }
    }
    const double norm = smallness_norm(w);
    if (norm > 0.0) w *= cplx(spec.amplitude / norm);
    return w;
}

/// Data concentrated on the k-columns +-k_mode with a Gaussian profile in xi
/// centred at 0: w(+-k, xi) = amplitude * exp(-xi^2 / (2 sigma^2)).
inline SpectralField make_single_k_gaussian(const FrequencyGrid& g, int k_mode, double sigma_xi,
                                            double amplitude = 1.0) {
    if (k_mode <= 0 || k_mode >= g.nx / 2) throw ValidationError("single-k data: k_mode out of range");
    SpectralField w(g);
    for (int j = 0; j < g.ny; ++j) {
        if (g.ximode(j) == g.ny / 2) continue;
        const double xi = g.xi(j);
        const double v = amplitude * std::exp(-0.5 * xi * xi / (sigma_xi * sigma_xi));
        w.at_mode(k_mode, g.ximode(j)) = v;
        w.at_mode(-k_mode, -g.ximode(j)) = v;
    }
    return w;
}

}  // namespace couette
