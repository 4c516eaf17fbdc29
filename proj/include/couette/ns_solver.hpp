#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "couette/errors.hpp"
#include "couette/linear_oracle.hpp"
#include "couette/spectral_domain.hpp"

namespace couette {

/// 2/3-style truncation: keeps signed modes with |m| < fraction * n / 2 in
/// each direction. Nyquist modes are always removed.
struct DealiasMask {
    int keep_k = 0;
    int keep_xi = 0;

    DealiasMask() = default;
    DealiasMask(const FrequencyGrid& grid, double fraction)
        : keep_k(cutoff(grid.nx, fraction)), keep_xi(cutoff(grid.ny, fraction)) {}

    static int cutoff(int n, double fraction) {
        // Largest integer strictly below fraction * n / 2.
        return static_cast<int>(std::ceil(fraction * n / 2.0 - 1e-9)) - 1;
    }

    bool keeps(const FrequencyGrid& g, int i, int j) const {
        return std::abs(g.kmode(i)) <= keep_k && std::abs(g.ximode(j)) <= keep_xi;
    }

    SpectralField apply(const SpectralField& f) const {
        SpectralField out(f);
        const auto& g = f.grid();
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j)
                if (!keeps(g, i, j)) out(i, j) = 0.0;
        return out;
    }
};

enum class SolverMode { full, linear_only, quasilinear };

inline const char* to_string(SolverMode m) {
    switch (m) {
        case SolverMode::full: return "full";
        case SolverMode::linear_only: return "linear_only";
        case SolverMode::quasilinear: return "quasilinear";
    }
    return "?";
}

inline SolverMode solver_mode_from_string(const std::string& s) {
    if (s == "full") return SolverMode::full;
    if (s == "linear_only" || s == "linear") return SolverMode::linear_only;
    if (s == "quasilinear") return SolverMode::quasilinear;
    throw ValidationError("unknown solver mode '" + s + "'");
}

struct SolverConfig {
    double nu = 1e-3;
    double dt = 1e-2;
    double t_max = 1.0;
    double dealias = 2.0 / 3.0;
    SolverMode mode = SolverMode::full;
    ShiftPolicy shift_policy = ShiftPolicy::abort;
    double cfl_limit = 0.5;

    /// Checks the scalar ranges and the no-remap condition
    /// t_max * max|k| <= xi_max / 2 on the given grid.
    void validate(const FrequencyGrid& grid) const {
        if (!(nu >= 0.0) || !std::isfinite(nu)) throw ValidationError("SolverConfig: nu must be >= 0");
        if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("SolverConfig: dt must be > 0");
        if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ValidationError("SolverConfig: t_max must be >= 0");
        if (!(dealias > 0.0 && dealias <= 1.0)) throw ValidationError("SolverConfig: dealias must lie in (0, 1]");
        if (!(cfl_limit > 0.0)) throw ValidationError("SolverConfig: cfl_limit must be > 0");
        if (t_max * grid.k_max() > 0.5 * grid.xi_max() * (1.0 + 1e-12))
            throw ValidationError("SolverConfig: t_max * k_max = " + std::to_string(t_max * grid.k_max()) +
                                  " exceeds xi_max / 2 = " + std::to_string(0.5 * grid.xi_max()) +
                                  "; enlarge ny or shrink ly");
    }
};

struct MovingFrameState {
    double t = 0.0;
    SpectralField f;
};

/// omega = omega_L + omega_NL with omega_L always taken from the exact linear
/// solution of omega_in; omega_NL starts at zero.
struct QuasiState {
    double t = 0.0;
    SpectralField omega_in;
    SpectralField omega_L;
    SpectralField omega_NL;

    static QuasiState start(const SpectralField& omega_in) {
        return {0.0, omega_in, omega_in, SpectralField(omega_in.grid())};
    }
    SpectralField total() const { return omega_L + omega_NL; }
};

/// Which of the four interaction terms of the omega_NL equation are active:
/// u^L.grad omega^L (source), u^L.grad omega^NL (transport),
/// u^NL.grad omega^L (reaction), u^NL.grad omega^NL (nonlinear).
struct QuasiTerms {
    bool source = true;
    bool transport = true;
    bool reaction = true;
    bool nonlinear = true;
    static QuasiTerms source_only() { return {true, false, false, false}; }
};

namespace detail {

/// grad_perp(-Delta_L)^{-1} a packed as u1 + i u2 before the inverse transform.
inline std::vector<cplx> physical_velocity_packed(const SpectralField& a, double t) {
    const auto& g = a.grid();
    SpectralField packed(g);
    for (int i = 0; i < g.nx; ++i) {
        const double k = g.k(i);
        for (int j = 0; j < g.ny; ++j) {
            const double s = g.xi(j) - k * t;
            const double d = k * k + s * s;
            if (d == 0.0) continue;
            const cplx c = a(i, j);
            // u1 = i s/d c, u2 = -i k/d c; packed = u1 + i u2 = (i s + k) c / d
            packed(i, j) = cplx(k / d, s / d) * c;
        }
    }
    return transform_inverse_complex(packed);
}

/// (dz b, (dy - t dz) b) packed as g1 + i g2.
inline std::vector<cplx> physical_gradient_packed(const SpectralField& b, double t) {
    const auto& g = b.grid();
    SpectralField packed(g);
    for (int i = 0; i < g.nx; ++i) {
        const double k = g.k(i);
        for (int j = 0; j < g.ny; ++j) {
            const double s = g.xi(j) - k * t;
            // g1 = i k c, g2 = i s c; packed = g1 + i g2 = (i k - s) c
            packed(i, j) = cplx(-s, k) * b(i, j);
        }
    }
    return transform_inverse_complex(packed);
}

struct AdvectionPair {
    int velocity_source;
    int gradient_source;
};

/// Sum over pairs of V(sources[a]) . grad_L(sources[b]) on dealiased inputs,
/// dealiased on output. Optionally reports max |V| over the summed velocity.
inline SpectralField advection_sum(const std::vector<const SpectralField*>& sources,
                                   const std::vector<AdvectionPair>& pairs, double t, const DealiasMask& mask,
                                   double* max_velocity = nullptr) {
    const auto& g = sources.front()->grid();
    const std::size_t n = g.size();
    std::vector<SpectralField> masked;
    masked.reserve(sources.size());
    for (const auto* s : sources) masked.push_back(mask.apply(*s));

    std::map<int, std::vector<cplx>> vel, grad;
    for (const auto& p : pairs) {
        if (!vel.count(p.velocity_source)) vel[p.velocity_source] = physical_velocity_packed(masked[p.velocity_source], t);
        if (!grad.count(p.gradient_source)) grad[p.gradient_source] = physical_gradient_packed(masked[p.gradient_source], t);
    }
    std::vector<cplx> product(n, cplx(0.0));
    for (const auto& p : pairs) {
        const auto& v = vel[p.velocity_source];
        const auto& gr = grad[p.gradient_source];
        for (std::size_t q = 0; q < n; ++q)
            product[q] += v[q].real() * gr[q].real() + v[q].imag() * gr[q].imag();
    }
    if (max_velocity) {
        double vmax = 0.0;
        for (std::size_t q = 0; q < n; ++q) {
            cplx total(0.0);
            for (const auto& [idx, v] : vel) total += v[q];
            vmax = std::max(vmax, std::abs(cplx(total.real(), total.imag())));
        }
        *max_velocity = vmax;
    }
    detail::fft2d_inplace(product, g.nx, g.ny, FFTW_FORWARD);
    const double scale = g.lx * g.ly / (2.0 * std::numbers::pi * static_cast<double>(n));
    SpectralField out(g);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j)
            if (mask.keeps(g, i, j)) out(i, j) = product[g.flat(i, j)] * scale;
    return out;
}

}  // namespace detail

/// Right-hand side of the sheared vorticity equation without the viscous
/// part, grad_perp(-Delta_L)^{-1} f . grad f, evaluated pseudo-spectrally on
/// dealiased input with a dealiased result.
inline SpectralField nonlinear_rhs(const SpectralField& f, double t, const DealiasMask& mask,
                                   double* max_velocity = nullptr) {
    return detail::advection_sum({&f}, {{0, 0}}, t, mask, max_velocity);
}

inline SpectralField nonlinear_rhs(const SpectralField& f, double t, double dealias = 2.0 / 3.0) {
    return nonlinear_rhs(f, t, DealiasMask(f.grid(), dealias));
}

/// Per-mode viscous propagators over [t, t + h/2], [t + h/2, t + h] and [t, t + h].
struct ViscousFactors {
    std::vector<double> first_half, second_half, full;

    ViscousFactors(const FrequencyGrid& g, double nu, double t, double h) {
        const std::size_t n = g.size();
        first_half.resize(n);
        second_half.resize(n);
        full.resize(n);
        const double tm = t + 0.5 * h, te = t + h;
        for (int i = 0; i < g.nx; ++i) {
            const double k = g.k(i);
            for (int j = 0; j < g.ny; ++j) {
                const double xi = g.xi(j);
                const std::size_t q = g.flat(i, j);
                first_half[q] = std::exp(-nu * kelvin_increment(k, xi, t, tm));
                second_half[q] = std::exp(-nu * kelvin_increment(k, xi, tm, te));
                full[q] = std::exp(-nu * kelvin_increment(k, xi, t, te));
            }
        }
    }
};

namespace detail {

inline void scale_by(SpectralField& f, const std::vector<double>& factor) {
    auto c = f.coeffs();
    for (std::size_t q = 0; q < c.size(); ++q) c[q] *= factor[q];
}

// out = factor * (a + s * b)
inline SpectralField propagate_sum(const std::vector<double>& factor, const SpectralField& a, double s,
                                   const SpectralField& b) {
    SpectralField out(a.grid());
    auto o = out.coeffs();
    auto ac = a.coeffs();
    auto bc = b.coeffs();
    for (std::size_t q = 0; q < o.size(); ++q) o[q] = factor[q] * (ac[q] + s * bc[q]);
    return out;
}

// a += s * b
inline void add_scaled(SpectralField& a, double s, const SpectralField& b) {
    auto ac = a.coeffs();
    auto bc = b.coeffs();
    for (std::size_t q = 0; q < ac.size(); ++q) ac[q] += s * bc[q];
}

inline void check_cfl(double vmax, const FrequencyGrid& g, double h, double limit) {
    const double spacing = std::min(g.dx(), g.dy());
    const double ratio = vmax * h / spacing;
    if (ratio > limit) {
        const double suggested = 0.9 * limit * spacing / vmax;
        throw StepRejected("step: CFL number " + std::to_string(ratio) + " exceeds " + std::to_string(limit) +
                               "; suggested dt " + std::to_string(suggested),
                           suggested);
    }
}

// Integrating-factor RK4 (Lawson): the viscous symbol is integrated exactly
// over each stage interval, the remaining right-hand side by classical RK4.
template <class Rhs>
SpectralField ifrk4(const SpectralField& y, double t, double h, double nu, Rhs&& rhs) {
    const auto& g = y.grid();
    const ViscousFactors e(g, nu, t, h);
    const SpectralField k1 = rhs(y, t, true);
    const SpectralField y2 = propagate_sum(e.first_half, y, 0.5 * h, k1);
    const SpectralField k2 = rhs(y2, t + 0.5 * h, false);
    SpectralField y3 = y;
    scale_by(y3, e.first_half);
    add_scaled(y3, 0.5 * h, k2);
    const SpectralField k3 = rhs(y3, t + 0.5 * h, false);
    SpectralField y4 = y;
    scale_by(y4, e.full);
    SpectralField k3p = k3;
    scale_by(k3p, e.second_half);
    add_scaled(y4, h, k3p);
    const SpectralField k4 = rhs(y4, t + h, false);

    SpectralField out(g);
    auto o = out.coeffs();
    auto yc = y.coeffs();
    auto c1 = k1.coeffs(), c2 = k2.coeffs(), c3 = k3.coeffs(), c4 = k4.coeffs();
    for (std::size_t q = 0; q < o.size(); ++q)
        o[q] = e.full[q] * yc[q] +
               h / 6.0 * (e.full[q] * c1[q] + 2.0 * e.second_half[q] * (c2[q] + c3[q]) + c4[q]);
    return out;
}

}  // namespace detail

/// Advance one step of size config.dt from state.t. In linear_only mode this
/// is the exact viscous propagator; otherwise integrating-factor RK4.
/// Throws StepRejected if the CFL number exceeds config.cfl_limit.
inline MovingFrameState step(const MovingFrameState& state, const SolverConfig& config) {
    const double h = config.dt;
    const auto& g = state.f.grid();
    if (config.mode == SolverMode::linear_only) {
        const ViscousFactors e(g, config.nu, state.t, h);
        SpectralField next = state.f;
        detail::scale_by(next, e.full);
        return {state.t + h, std::move(next)};
    }
    const DealiasMask mask(g, config.dealias);
    auto rhs = [&](const SpectralField& y, double t, bool first) {
        if (!first) return nonlinear_rhs(y, t, mask);
        double vmax = 0.0;
        auto r = nonlinear_rhs(y, t, mask, &vmax);
        detail::check_cfl(vmax, g, h, config.cfl_limit);
        return r;
    };
    return {state.t + h, detail::ifrk4(state.f, state.t, h, config.nu, rhs)};
}

/// Advance omega_NL one step; omega_L is re-evaluated from omega_in at every
/// stage time by kelvin_solve and never time-stepped.
inline QuasiState step_quasilinear(const QuasiState& state, const SolverConfig& config,
                                   QuasiTerms terms = {}) {
    const double h = config.dt;
    const auto& g = state.omega_in.grid();
    const DealiasMask mask(g, config.dealias);
    std::vector<detail::AdvectionPair> pairs;
    // source index 0 = omega_L, 1 = omega_NL
    if (terms.source) pairs.push_back({0, 0});
    if (terms.transport) pairs.push_back({0, 1});
    if (terms.reaction) pairs.push_back({1, 0});
    if (terms.nonlinear) pairs.push_back({1, 1});

    auto linear_at = [&](double t) { return kelvin_solve(state.omega_in, config.nu, t, config.shift_policy); };
    auto rhs = [&](const SpectralField& nl, double t, bool first) {
        if (pairs.empty()) return SpectralField(g);
        const SpectralField lin = (t == state.t) ? state.omega_L : linear_at(t);
        double vmax = 0.0;
        auto r = detail::advection_sum({&lin, &nl}, pairs, t, mask, first ? &vmax : nullptr);
        if (first) detail::check_cfl(vmax, g, h, config.cfl_limit);
        return r;
    };
    QuasiState next;
    next.t = state.t + h;
    next.omega_in = state.omega_in;
    next.omega_NL = detail::ifrk4(state.omega_NL, state.t, h, config.nu, rhs);
    next.omega_L = linear_at(next.t);
    return next;
}

// ---------------------------------------------------------------------------
// Trajectories.

/// A scalar observable sampled at probe times.
struct Probe {
    std::string name;
    std::function<double(const SpectralField& f, double t)> eval;
};

struct RunOptions {
    double probe_interval = 0.0;  ///< <= 0 probes only at t = 0 and t = t_max
    std::vector<Probe> probes;
    bool keep_snapshots = false;
    /// Called at every probe time, e.g. for checkpoints.
    std::function<void(const MovingFrameState&)> on_probe;
};

struct Trajectory {
    std::vector<double> times;
    std::map<std::string, std::vector<double>> series;
    std::vector<SpectralField> snapshots;
    MovingFrameState final_state;
    std::optional<QuasiState> final_quasi;
    long steps = 0;
    bool aborted = false;
    bool blew_up = false;  ///< aborted by CFL rejection or non-finite values
    std::string abort_reason;
    double truncated_mass = 0.0;
};

/// Time step default: min(0.5 * CFL bound, 0.01 nu^{-1/3}), the CFL bound
/// evaluated on the initial velocity.
inline double default_dt(const SpectralField& initial, const SolverConfig& config) {
    const auto& g = initial.grid();
    double vmax = 0.0;
    nonlinear_rhs(initial, 0.0, DealiasMask(g, config.dealias), &vmax);
    double dt = std::numeric_limits<double>::infinity();
    if (vmax > 0.0) dt = 0.5 * config.cfl_limit * std::min(g.dx(), g.dy()) / vmax;
    if (config.nu > 0.0) dt = std::min(dt, 0.01 / std::cbrt(config.nu));
    if (!std::isfinite(dt)) dt = 0.1;
    return dt;
}

/// Integrate to config.t_max, sampling probes at multiples of
/// options.probe_interval (the step is shortened so probe times are hit
/// exactly). Numerical failures end the run early with aborted = true.
inline Trajectory run(const SpectralField& initial, const SolverConfig& config, const RunOptions& options = {}) {
    config.validate(initial.grid());
    Trajectory traj;
    MovingFrameState state{0.0, initial};
    std::optional<QuasiState> quasi;
    if (config.mode == SolverMode::quasilinear) quasi = QuasiState::start(initial);

    auto record = [&](const MovingFrameState& s) {
        traj.times.push_back(s.t);
        for (const auto& p : options.probes) traj.series[p.name].push_back(p.eval(s.f, s.t));
        if (options.keep_snapshots) traj.snapshots.push_back(s.f);
        if (options.on_probe) options.on_probe(s);
    };
    record(state);

    std::vector<double> marks;
    if (options.probe_interval > 0.0) {
        const long count = static_cast<long>(std::floor(config.t_max / options.probe_interval * (1.0 + 1e-12)));
        for (long n = 1; n <= count; ++n) marks.push_back(n * options.probe_interval);
    }
    if (config.t_max > 0.0 && (marks.empty() || marks.back() < config.t_max * (1.0 - 1e-12)))
        marks.push_back(config.t_max);
    if (!marks.empty()) marks.back() = std::min(marks.back(), config.t_max);

    double t_prev = 0.0;
    try {
        for (double mark : marks) {
            const double span = mark - t_prev;
            const long nsub = std::max(1L, static_cast<long>(std::ceil(span / config.dt - 1e-9)));
            SolverConfig local = config;
            local.dt = span / static_cast<double>(nsub);
            for (long n = 0; n < nsub; ++n) {
                if (quasi) {
                    const double t0 = quasi->t;
                    *quasi = step_quasilinear(*quasi, local);
                    if (n + 1 == nsub) quasi->t = mark;
                    else quasi->t = t0 + local.dt;
                    state.t = quasi->t;
                } else {
                    state = step(state, local);
                    if (n + 1 == nsub) state.t = mark;
                }
                ++traj.steps;
            }
            if (quasi) state.f = quasi->total();
            if (!state.f.all_finite()) throw NumericalError("run: non-finite coefficients at t = " + std::to_string(mark));
            t_prev = mark;
            record(state);
        }
    } catch (const OffGridShift& e) {
        traj.aborted = true;
        traj.abort_reason = e.what();
    } catch (const NumericalError& e) {
        traj.aborted = true;
        traj.blew_up = true;
        traj.abort_reason = e.what();
    }
    traj.final_state = state;
    traj.final_quasi = quasi;
    return traj;
}

}  // namespace couette
