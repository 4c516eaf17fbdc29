#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "couette/errors.hpp"
#include "couette/quadrature.hpp"
#include "couette/spectral_domain.hpp"

namespace couette {

/// Scalar knobs shared by every weight: viscosity, decay constant c, the
/// low-frequency exponent eps, the M3 regularity kappa, threshold excess delta
/// and the linear decay constant c0.
struct MultiplierParams {
    double nu = 1e-3;
    double c = 0.05;
    double eps = 0.4;
    double kappa = 0.1;
    double delta = 0.1;
    double c0 = 1.0 / 12.0 - 1e-3;

    /// Admissible point for the Sobolev-type nu^{1/2} result: eps = 0.4, c = 0.05.
    static MultiplierParams half_threshold_preset(double nu) {
        return {nu, 0.05, 0.4, 0.1, 0.1, 1.0 / 12.0 - 1e-3};
    }
    /// Admissible point for the nu^{1/3 + delta} result:
    /// delta = 0.1, eps = 0.46, kappa = 0.02 < 2 eps / (1 - delta) - 1.
    static MultiplierParams third_threshold_preset(double nu) {
        return {nu, 0.05, 0.46, 0.02, 0.1, 1.0 / 12.0 - 1e-3};
    }

    /// The quasi-linear regime additionally needs (1 - delta)/2 < eps and
    /// kappa < 2 eps / (1 - delta) - 1.
    void validate(bool quasilinear_regime = false) const {
        if (!(nu > 0.0 && nu <= 1.0)) throw ValidationError("MultiplierParams: nu must lie in (0, 1]");
        if (!(c > 0.0)) throw ValidationError("MultiplierParams: c must be positive");
        if (!(eps > 0.0 && eps < 0.5)) throw ValidationError("MultiplierParams: eps must lie in (0, 1/2)");
        if (!(kappa > 0.0)) throw ValidationError("MultiplierParams: kappa must be positive");
        if (!(delta > 0.0)) throw ValidationError("MultiplierParams: delta must be positive");
        if (!(c0 > 0.0 && c0 < 1.0 / 12.0)) throw ValidationError("MultiplierParams: c0 must lie in (0, 1/12)");
        if (quasilinear_regime) {
            if (!(eps > 0.5 * (1.0 - delta)))
                throw ValidationError("MultiplierParams: quasi-linear regime needs eps > (1 - delta)/2");
            if (!(kappa < 2.0 * eps / (1.0 - delta) - 1.0))
                throw ValidationError("MultiplierParams: quasi-linear regime needs kappa < 2 eps/(1 - delta) - 1");
        }
    }
};

enum class WeightKind { M1, M2, M3, Upsilon, lambda, bracket_k, inv_bracket_k_eps, exp_rate };

inline constexpr std::array<std::string_view, 8> kWeightKindNames = {
    "M1", "M2", "M3", "Upsilon", "lambda", "bracket_k", "inv_bracket_k_eps", "exp_rate"};

inline std::string_view to_string(WeightKind w) { return kWeightKindNames[static_cast<int>(w)]; }

inline WeightKind weight_kind_from_string(std::string_view s) {
    for (std::size_t n = 0; n < kWeightKindNames.size(); ++n)
        if (kWeightKindNames[n] == s) return static_cast<WeightKind>(n);
    throw ValidationError("unknown weight kind '" + std::string(s) + "'");
}

/// <a> = (1 + a^2)^{1/2}.
inline double japanese_bracket(double a) { return std::sqrt(1.0 + a * a); }

/// <1/k>^eps, written to stay finite for tiny |k| until the true overflow.
inline double inverse_bracket_pow(double k, double eps) {
    return std::pow(1.0 + 1.0 / (k * k), 0.5 * eps);
}

inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

// ---------------------------------------------------------------------------
// Enhanced dissipation and inviscid damping multipliers.

inline double m1(const MultiplierParams& p, double k, double xi) {
    if (k == 0.0) throw ValidationError("m1: undefined at k = 0");
    return std::atan(std::cbrt(p.nu) / std::cbrt(std::abs(k)) * sgn(k) * xi) + std::numbers::pi / 2.0;
}

inline double m2(double k, double xi) {
    if (k == 0.0) throw ValidationError("m2: undefined at k = 0");
    return std::atan(xi / k) + std::numbers::pi / 2.0;
}

/// k d/dxi M1 = nu^{1/3}|k|^{2/3} / (1 + nu^{2/3}|k|^{-2/3} xi^2).
inline double m1_transport_derivative(const MultiplierParams& p, double k, double xi) {
    if (k == 0.0) throw ValidationError("m1: undefined at k = 0");
    const double ak = std::abs(k);
    const double a = std::pow(p.nu, 2.0 / 3.0) / std::pow(ak, 2.0 / 3.0) * xi * xi;
    return std::cbrt(p.nu) * std::pow(ak, 2.0 / 3.0) / (1.0 + a);
}

/// k d/dxi M2 = k^2 / (k^2 + xi^2).
inline double m2_transport_derivative(double k, double xi) {
    if (k == 0.0) throw ValidationError("m2: undefined at k = 0");
    return k * k / (k * k + xi * xi);
}

struct InequalityPair {
    double lhs;
    double rhs;
    bool holds() const { return lhs >= rhs; }
};

/// k d/dxi M1 against its lower bound (1/4) nu^{1/3}|k|^{2/3} - (1/2) nu xi^2.
inline InequalityPair lemma21_check_m1(const MultiplierParams& p, double k, double xi) {
    const double lhs = m1_transport_derivative(p, k, xi);
    const double rhs = 0.25 * std::cbrt(p.nu) * std::pow(std::abs(k), 2.0 / 3.0) - 0.5 * p.nu * xi * xi;
    return {lhs, rhs};
}

/// lambda(k) = min(1, |k|^{2/3}).
inline double lambda_rate(double k) { return std::min(1.0, std::pow(std::abs(k), 2.0 / 3.0)); }

// ---------------------------------------------------------------------------
// Echo-cascade multiplier M3 and its transport derivative Upsilon.
//
// Both are integrals over l in R. The line is cut at l = -1, 0, 1; the inner
// pieces use l = +-s^{1/kappa}, which turns the |l|^{kappa-1} endpoint
// behaviour into a smooth integrand, and the outer pieces use l = +-1/s so
// the tails become integrals over (0, 1]. Within each piece the images of the
// |k - l| kink (l = k) and of the arctan resonance (l = k + xi/t) are used as
// breakpoints.

namespace detail {

struct EchoKernelPoint {
    double weight;    ///< <1/l>^{-1-kappa} |l|^{-2} times the Jacobian, or the analogous factor
    double a_over_b;  ///< (xi + t(k - l)) / (1 + |k - l| + |l|)
};

enum class EchoQuantity { m3, upsilon };

// Integrand of M3 or Upsilon in the substituted variable s for one piece.
// piece: 0 -> l = -1/s, 1 -> l = -s^{1/kappa}, 2 -> l = s^{1/kappa}, 3 -> l = 1/s.
inline double echo_integrand(EchoQuantity q, int piece, double s, double t, double k, double xi,
                             double kappa) {
    const double sign = piece < 2 ? -1.0 : 1.0;
    const double damp_exp = -0.5 * (1.0 + kappa);
    if (piece == 1 || piece == 2) {
        const double l = sign * std::pow(s, 1.0 / kappa);
        const double damp = std::pow(1.0 + l * l, damp_exp);
        const double b = 1.0 + std::abs(k - l) + std::abs(l);
        const double a = xi + t * (k - l);
        if (q == EchoQuantity::m3)
            return damp / kappa * (sign * std::atan(a / b) + std::numbers::pi / 2.0);
        return damp / kappa * std::abs(l) * b / (b * b + a * a);
    }
    // l = sign / s: multiply numerator and denominator by s to stay finite as s -> 0.
    const double damp = std::pow(1.0 + s * s, damp_exp);
    const double bs = s + std::abs(k * s - sign) + 1.0;
    const double as = xi * s + t * (k * s - sign);
    if (q == EchoQuantity::m3) return damp * (sign * std::atan(as / bs) + std::numbers::pi / 2.0);
    return damp * bs / (bs * bs + as * as);
}

// Image in piece-local s of a point l on the real line, or -1 if outside.
inline double echo_piece_coordinate(int piece, double l, double kappa) {
    switch (piece) {
        case 0: return l < -1.0 ? -1.0 / l : -1.0;
        case 1: return (l < 0.0 && l > -1.0) ? std::pow(-l, kappa) : -1.0;
        case 2: return (l > 0.0 && l < 1.0) ? std::pow(l, kappa) : -1.0;
        default: return l > 1.0 ? 1.0 / l : -1.0;
    }
}

inline QuadratureResult echo_integral(EchoQuantity q, double t, double k, double xi, double kappa,
                                      double rel_tol) {
    std::vector<double> special{k};
    if (t > 0.0) {
        const double centre = k + xi / t;
        special.push_back(centre);
        // Resonance half-width in l is about (1 + |k - l| + |l|) / t.
        const double width = (1.0 + std::abs(xi / t) + std::abs(centre)) / t;
        special.push_back(centre - width);
        special.push_back(centre + width);
    }
    QuadratureResult total;
    total.converged = true;
    for (int piece = 0; piece < 4; ++piece) {
        std::vector<double> cuts;
        for (double l : special)
            if (double s = echo_piece_coordinate(piece, l, kappa); s > 0.0 && s < 1.0) cuts.push_back(s);
        auto f = [&](double s) { return echo_integrand(q, piece, s, t, k, xi, kappa); };
        auto r = integrate_adaptive(f, 0.0, 1.0, rel_tol, 0.0, cuts);
        total.value += r.value;
        total.error_estimate += r.error_estimate;
        total.evaluations += r.evaluations;
        total.converged = total.converged && r.converged;
    }
    return total;
}

}  // namespace detail

inline constexpr double kEchoDefaultTolerance = 1e-12;

/// M3(t, k, xi) = int <1/l>^{-1-kappa} |l|^{-2} (sgn(l) atan((xi + t(k-l)) /
/// (1 + |k-l| + |l|)) + pi/2) dl, with the quadrature report.
inline QuadratureResult m3_report(const MultiplierParams& p, double t, double k, double xi,
                                  double rel_tol = kEchoDefaultTolerance) {
    if (!(p.kappa > 0.0)) throw ValidationError("m3: kappa must be positive");
    return detail::echo_integral(detail::EchoQuantity::m3, t, k, xi, p.kappa, rel_tol);
}

inline double m3(const MultiplierParams& p, double t, double k, double xi,
                 double rel_tol = kEchoDefaultTolerance) {
    if (!(t >= 0.0)) throw ValidationError("m3: t must be >= 0");
    auto r = m3_report(p, t, k, xi, rel_tol);
    if (!r.converged)
        throw QuadratureError("m3: quadrature did not converge", r.error_estimate / std::abs(r.value));
    return r.value;
}

/// Upsilon = (-d_t + k d_xi) M3 =
///   int <1/l>^{-1-kappa} |l|^{-1} B / (B^2 + (xi + t(k-l))^2) dl, B = 1 + |k-l| + |l|.
inline QuadratureResult upsilon_report(const MultiplierParams& p, double t, double k, double xi,
                                       double rel_tol = kEchoDefaultTolerance) {
    if (!(p.kappa > 0.0)) throw ValidationError("upsilon: kappa must be positive");
    return detail::echo_integral(detail::EchoQuantity::upsilon, t, k, xi, p.kappa, rel_tol);
}

inline double upsilon(const MultiplierParams& p, double t, double k, double xi,
                      double rel_tol = kEchoDefaultTolerance) {
    if (!(t >= 0.0)) throw ValidationError("upsilon: t must be >= 0");
    auto r = upsilon_report(p, t, k, xi, rel_tol);
    if (!r.converged)
        throw QuadratureError("upsilon: quadrature did not converge", r.error_estimate / std::abs(r.value));
    return r.value;
}

/// Upper bound of M3: C_kappa = pi int <1/l>^{-1-kappa} |l|^{-2} dl = pi B(kappa/2, 1/2).
inline double c_kappa(double kappa) {
    if (!(kappa > 0.0)) throw ValidationError("c_kappa: kappa must be positive");
    return std::numbers::pi * std::beta(0.5 * kappa, 0.5);
}

/// Total ghost weight 1 + M1 + M2, which lies in [1, 1 + 2 pi].
inline double m_total(const MultiplierParams& p, double k, double xi) { return 1.0 + m1(p, k, xi) + m2(k, xi); }

/// Pointwise value of any weight kind.
inline double weight_value(WeightKind kind, const MultiplierParams& p, double t, double k, double xi) {
    switch (kind) {
        case WeightKind::M1: return m1(p, k, xi);
        case WeightKind::M2: return m2(k, xi);
        case WeightKind::M3: return m3(p, t, k, xi);
        case WeightKind::Upsilon: return upsilon(p, t, k, xi);
        case WeightKind::lambda: return lambda_rate(k);
        case WeightKind::bracket_k: return japanese_bracket(k);
        case WeightKind::inv_bracket_k_eps: return inverse_bracket_pow(k, p.eps);
        case WeightKind::exp_rate: return std::exp(p.c * std::cbrt(p.nu) * lambda_rate(k) * t);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Weighted norms on spectral fields.

enum class RateKind { lambda, two_thirds };

inline const char* to_string(RateKind r) { return r == RateKind::lambda ? "lambda" : "two_thirds"; }

inline double rate_value(RateKind r, double k) {
    return r == RateKind::lambda ? lambda_rate(k) : std::pow(std::abs(k), 2.0 / 3.0);
}

struct WeightedNorm {
    double weighted = 0.0;   ///< over k != 0 modes
    double zero_mode = 0.0;  ///< unweighted L2 norm of the k = 0 column
};

inline constexpr double kWeightOverflow = 1e300;

/// L2 norm with weight w(k, xi) over k != 0 plus the plain k = 0 column norm.
/// Throws WeightOverflow if any weight exceeds 1e300.
template <class Weight>
WeightedNorm weighted_norm(const SpectralField& field, Weight&& weight) {
    const auto& g = field.grid();
    double s = 0.0, s0 = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        if (g.kmode(i) == 0) {
            for (int j = 0; j < g.ny; ++j) s0 += std::norm(field(i, j));
            continue;
        }
        const double k = g.k(i);
        for (int j = 0; j < g.ny; ++j) {
            const double w = weight(k, g.xi(j));
            if (!(w <= kWeightOverflow))
                throw WeightOverflow("weighted norm: per-mode weight overflow at mode (" + std::to_string(g.kmode(i)) +
                                         ", " + std::to_string(g.ximode(j)) + ")",
                                     i, j);
            s += std::norm(field(i, j)) * w * w;
        }
    }
    const double cell = g.dk() * g.dxi();
    return {std::sqrt(s * cell), std::sqrt(s0 * cell)};
}

/// || e^{c nu^{1/3} rate(k) t} <k>^m <1/k>^eps f ||, k != 0.
inline WeightedNorm weight_theorem_norm(const SpectralField& field, const MultiplierParams& p, double t,
                                        RateKind rate, double m = 1.0) {
    const double cnu = p.c * std::cbrt(p.nu);
    return weighted_norm(field, [&](double k, double) {
        return std::exp(cnu * rate_value(rate, k) * t) * std::pow(japanese_bracket(k), m) *
               inverse_bracket_pow(k, p.eps);
    });
}

}  // namespace couette
