#pragma once

#include <cmath>
#include <string>

#include "couette/errors.hpp"
#include "couette/spectral_domain.hpp"

namespace couette {

/// nu * integral_0^t k^2 + (xi + k (t - s))^2 ds in closed form,
/// nu * [(k^2 + xi^2) t + k xi t^2 + k^2 t^3 / 3], with xi the laboratory
/// frequency at time t.
inline double kelvin_exponent(double nu, double k, double xi, double t) {
    return nu * ((k * k + xi * xi) * t + k * xi * t * t + k * k * t * t * t / 3.0);
}

/// integral_a^b k^2 + (xi - k s)^2 ds for a sheared-frame label xi, factored
/// so that short intervals late in a run do not cancel catastrophically.
/// Equals (kelvin_exponent(1, k, -xi, b) - kelvin_exponent(1, k, -xi, a)).
inline double kelvin_increment(double k, double xi, double a, double b) {
    const double h = b - a;
    return h * (k * k + xi * xi - xi * k * (a + b) + k * k * (a * a + a * b + b * b) / 3.0);
}

enum class ShiftPolicy { abort, truncate };

inline const char* to_string(ShiftPolicy p) { return p == ShiftPolicy::abort ? "abort" : "truncate"; }

struct KelvinSolution {
    SpectralField field;
    double truncated_mass = 0.0;  ///< L2 mass squared removed under ShiftPolicy::truncate
    int truncated_columns = 0;
};

/// Exact solution of the linearized problem. The field is carried in sheared
/// labels: the coefficient at (k, xi) is the laboratory coefficient at
/// frequency xi - k t, so the frequency shift is a relabelling and only the
/// viscous factor exp(-nu * integral) is applied to the numbers.
///
/// A k column whose shift |k| t exceeds half the resolved xi band is treated
/// as off grid; it aborts or is zeroed per policy (zero columns never trip).
inline KelvinSolution kelvin_solve_report(const SpectralField& omega_in, double nu, double t,
                                          ShiftPolicy policy = ShiftPolicy::abort) {
    if (!(t >= 0.0)) throw ValidationError("kelvin_solve: t must be >= 0");
    if (!(nu >= 0.0)) throw ValidationError("kelvin_solve: nu must be >= 0");
    const auto& grid = omega_in.grid();
    KelvinSolution out{SpectralField(grid), 0.0, 0};
    const double band = 0.5 * grid.xi_max();
    for (int i = 0; i < grid.nx; ++i) {
        const double k = grid.k(i);
        if (std::abs(k) * t > band) {
            double mass = 0.0;
            for (int j = 0; j < grid.ny; ++j) mass += std::norm(omega_in(i, j));
            if (mass == 0.0) continue;
            if (policy == ShiftPolicy::abort)
                throw OffGridShift("kelvin_solve: shift |k|t = " + std::to_string(std::abs(k) * t) +
                                       " leaves the resolved band at k index " + std::to_string(i),
                                   i);
            out.truncated_mass += mass * grid.dk() * grid.dxi();
            ++out.truncated_columns;
            continue;
        }
        for (int j = 0; j < grid.ny; ++j) {
            const double xi = grid.xi(j);
            out.field(i, j) = omega_in(i, j) * std::exp(-nu * kelvin_increment(k, xi, 0.0, t));
        }
    }
    return out;
}

inline SpectralField kelvin_solve(const SpectralField& omega_in, double nu, double t,
                                  ShiftPolicy policy = ShiftPolicy::abort) {
    return kelvin_solve_report(omega_in, nu, t, policy).field;
}

/// Relabel a sheared-frame field into laboratory frequencies (xi -> xi - k t)
/// by an exact index shift. Needs k t to be a whole number of dxi steps for
/// every k; modes pushed outside the index range abort or are dropped.
inline SpectralField shift_to_lab_frame(const SpectralField& f, double t,
                                        ShiftPolicy policy = ShiftPolicy::abort) {
    const auto& grid = f.grid();
    SpectralField out(grid);
    const double steps_per_k = grid.dk() * t / grid.dxi();
    for (int i = 0; i < grid.nx; ++i) {
        const double exact = grid.kmode(i) * steps_per_k;
        const double rounded = std::round(exact);
        if (std::abs(exact - rounded) > 1e-9)
            throw OffGridShift("shift_to_lab_frame: k t is not a multiple of dxi", i);
        const long shift = static_cast<long>(rounded);
        for (int j = 0; j < grid.ny; ++j) {
            const cplx c = f(i, j);
            const long m = grid.ximode(j) - shift;
            if (m <= -grid.ny / 2 || m > grid.ny / 2) {
                if (c != cplx(0.0) && policy == ShiftPolicy::abort)
                    throw OffGridShift("shift_to_lab_frame: mode leaves the grid", i);
                continue;
            }
            out(i, FrequencyGrid::index_of(static_cast<int>(m), grid.ny)) = c;
        }
    }
    return out;
}

enum class EnvelopeKind { enhanced_dissipation, inviscid_damping };

/// C * exp(-c nu^{1/3} |k|^{2/3} t).
inline double envelope_enhanced(double nu, double c, double k, double t, double C = 1.0) {
    return C * std::exp(-c * std::cbrt(nu) * std::pow(std::abs(k), 2.0 / 3.0) * t);
}

/// C <t>^{-2} (1 + k^2 + (xi + k t)^2) / k^4 * exp(-c nu^{1/3} |k|^{2/3} t), xi the
/// laboratory frequency. Bounds |phi_hat| / |omega_in_hat| of the Kelvin solution.
inline double envelope_inviscid(double nu, double c, double k, double xi, double t, double C = 1.0) {
    if (k == 0.0) throw ValidationError("envelope_inviscid: k = 0 has no inviscid damping");
    const double shifted = xi + k * t;
    const double k2 = k * k;
    return C / (1.0 + t * t) * (1.0 + k2 + shifted * shifted) / (k2 * k2) *
           envelope_enhanced(nu, c, k, t);
}

/// Smallest C for which |kelvin factor| <= C exp(-c nu^{1/3}|k|^{2/3} t) is
/// guaranteed from the cubic part of the exponent alone:
/// max_y (c y - y^3/12) = (4/3) c^{3/2}.
inline double enhanced_envelope_constant(double c) { return std::exp(4.0 / 3.0 * std::pow(c, 1.5)); }

/// Same for the stream-function envelope: (1 + t^2) k^4 <= 3 (k^2 + xi^2)(1 + k^2 + (xi + k t)^2).
inline double inviscid_envelope_constant(double c) { return 3.0 * enhanced_envelope_constant(c); }

struct LinearEnvelope {
    EnvelopeKind kind = EnvelopeKind::enhanced_dissipation;
    double c = 0.05;
    double C = 1.0;

    double operator()(double nu, double k, double xi, double t) const {
        return kind == EnvelopeKind::enhanced_dissipation ? envelope_enhanced(nu, c, k, t, C)
                                                          : envelope_inviscid(nu, c, k, xi, t, C);
    }
};

}  // namespace couette
