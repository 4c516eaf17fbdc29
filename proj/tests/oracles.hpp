#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the solver kernels they are compared against.

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "couette/spectral_domain.hpp"

namespace oracle {

using couette::cplx;
using couette::FrequencyGrid;
using couette::SpectralField;

/// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double s = f(a) + f(b);
    for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

/// nu * int_0^t k^2 + (xi + k s)^2 ds by Simpson, the integrand written out
/// in the laboratory form.
inline double kelvin_exponent_simpson(double nu, double k, double xi, double t, int panels = 10000) {
    return nu * simpson([&](double s) { return k * k + (xi + k * s) * (xi + k * s); }, 0.0, t, panels);
}

/// nu int_s^t k^2 + (xi - k tau)^2 dtau expanded by hand (moving-frame labels).
inline double viscous_exponent(double nu, double k, double xi, double s, double t) {
    return nu * ((t - s) * (k * k + xi * xi) - k * xi * (t * t - s * s) + k * k * (t * t * t - s * s * s) / 3.0);
}

/// |m| < fraction * n / 2, with the Nyquist line always dropped.
inline bool kept(int m, int n, double fraction) {
    if (2 * std::abs(m) == n) return false;
    return std::abs(m) < fraction * n / 2.0 - 1e-9;
}

/// Direct O(N^4) evaluation of the moving-frame advection term
///   N(k, xi) = -(dk dxi / 2 pi) sum (eta (k-l) - l (xi-eta)) / (l^2 + (eta - l t)^2)
///                                  f(l, eta) f(k-l, xi-eta)
/// over dealiased inputs, evaluated on dealiased outputs.
inline SpectralField direct_convolution(const SpectralField& f, double t, double fraction = 2.0 / 3.0) {
    const auto& g = f.grid();
    SpectralField out(g);
    const double pref = -g.dk() * g.dxi() / (2.0 * std::numbers::pi);
    const int hx = g.nx / 2, hy = g.ny / 2;
    for (int mk = -hx + 1; mk < hx; ++mk)
        for (int mx = -hy + 1; mx < hy; ++mx) {
            if (!kept(mk, g.nx, fraction) || !kept(mx, g.ny, fraction)) continue;
            const double k = mk * g.dk(), xi = mx * g.dxi();
            cplx acc = 0.0;
            for (int ml = -hx + 1; ml < hx; ++ml)
                for (int me = -hy + 1; me < hy; ++me) {
                    const int rk = mk - ml, re = mx - me;
                    if (!kept(ml, g.nx, fraction) || !kept(me, g.ny, fraction)) continue;
                    if (!kept(rk, g.nx, fraction) || !kept(re, g.ny, fraction)) continue;
                    const double l = ml * g.dk(), eta = me * g.dxi();
                    const double d = l * l + (eta - l * t) * (eta - l * t);
                    if (d == 0.0) continue;
                    const double num = eta * (k - l) - l * (xi - eta);
                    acc += num / d * f.at_mode(ml, me) * f.at_mode(rk, re);
                }
            out.at_mode(mk, mx) = pref * acc;
        }
    return out;
}

/// Random real field supported on |mk| <= kmax, |mx| <= xmax (Nyquist and
/// the zero mode excluded), coefficients of size ~ scale.
inline SpectralField random_real_field(const FrequencyGrid& g, int kmax, int xmax, double scale, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n(0.0, scale);
    SpectralField f(g);
    for (int mk = -kmax; mk <= kmax; ++mk)
        for (int mx = -xmax; mx <= xmax; ++mx) {
            if (mk == 0 && mx == 0) continue;
            if (std::make_pair(mk, mx) < std::make_pair(-mk, -mx)) continue;
            const cplx c(n(rng), n(rng));
            f.at_mode(mk, mx) = c;
            f.at_mode(-mk, -mx) = std::conj(c);
        }
    return f;
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

}  // namespace oracle
