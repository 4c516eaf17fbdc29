#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "couette/errors.hpp"
#include "couette/initial_data.hpp"
#include "couette/linear_oracle.hpp"
#include "couette/multiplier_weights.hpp"
#include "couette/ns_solver.hpp"
#include "couette/spectral_domain.hpp"

namespace couette {

/// Time-stamped values of one norm.
struct NormSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::string norm_id;

    void validate() const {
        if (times.size() != values.size()) throw ValidationError("NormSeries: length mismatch");
        for (std::size_t n = 1; n < times.size(); ++n)
            if (!(times[n] > times[n - 1])) throw ValidationError("NormSeries: times not strictly increasing");
        for (double v : values)
            if (!std::isfinite(v)) throw ValidationError("NormSeries: non-finite value");
    }
    std::size_t size() const { return times.size(); }
};

enum class NormKind {
    enhanced,           ///< e^{c nu^{1/3} rate t} <k>^m <1/k>^eps omega
    damping,            ///< the same weight on d_x u
    dx_velocity,        ///< || d_x grad phi ||, unweighted
    stream_function,    ///< || phi || over k != 0
    enstrophy_nonzero,  ///< || omega || over k != 0
    zero_mode,          ///< || omega || on k = 0
};

inline const char* to_string(NormKind k) {
    switch (k) {
        case NormKind::enhanced: return "enhanced";
        case NormKind::damping: return "damping";
        case NormKind::dx_velocity: return "dx_velocity";
        case NormKind::stream_function: return "stream_function";
        case NormKind::enstrophy_nonzero: return "enstrophy_nonzero";
        case NormKind::zero_mode: return "zero_mode";
    }
    return "?";
}

struct NormSpec {
    NormKind kind = NormKind::enhanced;
    RateKind rate = RateKind::lambda;
    double m = 1.0;

    bool weighted() const { return kind == NormKind::enhanced || kind == NormKind::damping; }
    std::string id() const {
        std::string s = to_string(kind);
        if (weighted()) s += std::string("_") + to_string(rate);
        return s;
    }
};

/// Evaluates one norm of the sheared-frame field f at time t.
inline double norm_probe(const SpectralField& f, double t, const MultiplierParams& p, const NormSpec& spec) {
    switch (spec.kind) {
        case NormKind::enhanced: return weight_theorem_norm(f, p, t, spec.rate, spec.m).weighted;
        case NormKind::damping: {
            // |symbol of d_x grad (-Delta_L)^{-1}| = |k| / sqrt(k^2 + (xi - k t)^2)
            const auto du = f.mapped([&](double k, double xi) {
                const double d = -laplacian_moving_symbol(k, xi, t);
                return d > 0.0 ? cplx(std::abs(k) / std::sqrt(d)) : cplx(0.0);
            });
            return weight_theorem_norm(du, p, t, spec.rate, spec.m).weighted;
        }
        case NormKind::dx_velocity:
            return weighted_norm(f, [&](double k, double xi) {
                       return std::abs(k) / std::sqrt(-laplacian_moving_symbol(k, xi, t));
                   }).weighted;
        case NormKind::stream_function:
            return weighted_norm(f, [&](double k, double xi) { return 1.0 / -laplacian_moving_symbol(k, xi, t); })
                .weighted;
        case NormKind::enstrophy_nonzero: return weighted_norm(f, [](double, double) { return 1.0; }).weighted;
        case NormKind::zero_mode: return weighted_norm(f, [](double, double) { return 1.0; }).zero_mode;
    }
    return 0.0;
}

inline Probe make_norm_probe(const MultiplierParams& p, const NormSpec& spec) {
    return {spec.id(), [p, spec](const SpectralField& f, double t) { return norm_probe(f, t, p, spec); }};
}

/// Both weight families of each theorem norm plus the unweighted observables.
inline std::vector<NormSpec> standard_norm_specs() {
    return {
        {NormKind::enhanced, RateKind::lambda},    {NormKind::enhanced, RateKind::two_thirds},
        {NormKind::damping, RateKind::lambda},     {NormKind::damping, RateKind::two_thirds},
        {NormKind::dx_velocity},                   {NormKind::stream_function},
        {NormKind::enstrophy_nonzero},             {NormKind::zero_mode},
    };
}

inline std::vector<Probe> standard_probes(const MultiplierParams& p) {
    std::vector<Probe> out;
    for (const auto& s : standard_norm_specs()) out.push_back(make_norm_probe(p, s));
    return out;
}

inline NormSeries series_from(const Trajectory& traj, const std::string& id) {
    const auto it = traj.series.find(id);
    if (it == traj.series.end()) throw ValidationError("no probe series named '" + id + "'");
    NormSeries s{traj.times, it->second, id};
    s.times.resize(std::min(s.times.size(), s.values.size()));
    return s;
}

// ---------------------------------------------------------------------------
// Fits.

enum class FitKind { exponential, power };

struct DecayFit {
    double rate = 0.0;  ///< slope of log(value) against t or log t
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t samples = 0;
};

struct LeastSquares {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double residual_rms = 0.0;
    double slope_stderr = 0.0;
};

inline LeastSquares least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    if (x.size() < 2) throw InsufficientData("least squares: need at least two points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InsufficientData("least squares: abscissae are all equal");
    LeastSquares f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        ss += e * e;
    }
    f.r_squared = syy > 0.0 ? 1.0 - ss / syy : 1.0;
    f.residual_rms = std::sqrt(ss / n);
    f.slope_stderr = x.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
    return f;
}

/// Least-squares decay rate of the samples with t in [t0, t1].
inline DecayFit fit_decay(const NormSeries& s, double t0, double t1, FitKind kind) {
    std::vector<double> x, y;
    for (std::size_t n = 0; n < s.size(); ++n) {
        const double t = s.times[n];
        if (t < t0 * (1.0 - 1e-12) || t > t1 * (1.0 + 1e-12)) continue;
        if (!(s.values[n] > 0.0)) throw ValidationError("fit_decay: nonpositive value at t = " + std::to_string(t));
        if (kind == FitKind::power && !(t > 0.0)) throw ValidationError("fit_decay: power fit needs t > 0");
        x.push_back(kind == FitKind::power ? std::log(t) : t);
        y.push_back(std::log(s.values[n]));
    }
    if (x.size() < 8) throw InsufficientData("fit_decay: " + std::to_string(x.size()) + " samples in window, need 8");
    const auto ls = least_squares(x, y);
    return {ls.slope, ls.intercept, ls.r_squared, x.size()};
}

// ---------------------------------------------------------------------------
// Classification.

enum class Classification { stable, transitioned, inconclusive };

inline const char* to_string(Classification c) {
    switch (c) {
        case Classification::stable: return "stable";
        case Classification::transitioned: return "transitioned";
        case Classification::inconclusive: return "inconclusive";
    }
    return "?";
}

struct StabilityVerdict {
    Classification classification = Classification::inconclusive;
    double growth_factor = 0.0;
    double damping_integral = 0.0;
    bool enstrophy_tail_nonincreasing = false;
};

struct ClassifyThresholds {
    double G = 4.0;
    double G_hi = 100.0;
    double tail_fraction = 0.25;
};

/// What classify needs from a run.
struct RunRecord {
    NormSeries weighted;   ///< the enhanced-dissipation norm
    NormSeries enstrophy;  ///< unweighted nonzero-mode norm
    NormSeries damping;    ///< damping-norm integrand, may be empty
    bool aborted = false;
    bool blew_up = false;
};

inline RunRecord make_run_record(const Trajectory& traj, RateKind rate = RateKind::lambda) {
    RunRecord r;
    r.weighted = series_from(traj, NormSpec{NormKind::enhanced, rate}.id());
    r.enstrophy = series_from(traj, NormSpec{NormKind::enstrophy_nonzero}.id());
    const auto id = NormSpec{NormKind::damping, rate}.id();
    if (traj.series.count(id)) r.damping = series_from(traj, id);
    r.aborted = traj.aborted;
    r.blew_up = traj.blew_up;
    return r;
}

/// Trapezoid rule for int ||...||^2 dt over the probe times.
inline double damping_integral(const NormSeries& s) {
    double acc = 0.0;
    for (std::size_t n = 1; n < s.size(); ++n)
        acc += 0.5 * (s.times[n] - s.times[n - 1]) * (s.values[n] * s.values[n] + s.values[n - 1] * s.values[n - 1]);
    return acc;
}

/// Stable: growth <= G and the enstrophy is nonincreasing over the final
/// tail_fraction of the probe times. Transitioned: growth >= G_hi, or the run
/// blew up. Otherwise inconclusive.
inline StabilityVerdict classify(const RunRecord& rec, const ClassifyThresholds& th = {}) {
    StabilityVerdict v;
    if (!rec.damping.values.empty()) v.damping_integral = damping_integral(rec.damping);
    const auto& w = rec.weighted.values;
    if (w.empty()) return v;
    const double w0 = w.front();
    double peak = 0.0;
    for (double x : w) peak = std::max(peak, x);
    v.growth_factor = w0 > 0.0 ? peak / w0 : (peak > 0.0 ? INFINITY : 1.0);

    const auto& e = rec.enstrophy;
    bool tail_ok = e.size() >= 2;
    if (tail_ok) {
        const double t_end = e.times.back();
        const double t_start = t_end - th.tail_fraction * (t_end - e.times.front());
        for (std::size_t n = 1; n < e.size(); ++n)
            if (e.times[n] > t_start && e.values[n] > e.values[n - 1]) tail_ok = false;
    }
    v.enstrophy_tail_nonincreasing = tail_ok;

    if (rec.blew_up || v.growth_factor >= th.G_hi) v.classification = Classification::transitioned;
    else if (!rec.aborted && v.growth_factor <= th.G && tail_ok) v.classification = Classification::stable;
    return v;
}

// ---------------------------------------------------------------------------
// Linear decay study: Kelvin solution of single-k data, Gaussian in xi.

struct LinearDecayStudy {
    double nu = 1e-3;
    int nx = 8;
    int ny = 2048;
    double lx = 64.0 * std::numbers::pi;  ///< k = 2 pi / lx = 1/32
    double ly = 400.0 * std::numbers::pi;
    double sigma_xi = 0.05;
    double t0 = 5.0;
    double t1 = 50.0;
    int samples = 64;  ///< log-spaced in [t0, t1]
};

struct LinearDecayReport {
    NormSeries velocity;  ///< || d_x grad phi ||
    NormSeries stream;    ///< || phi ||
    DecayFit velocity_fit;
    DecayFit stream_fit;
};

inline LinearDecayReport linear_decay_study(const LinearDecayStudy& s) {
    const auto g = make_grid(s.nx, s.ny, s.lx, s.ly);
    const auto w = make_single_k_gaussian(g, 1, s.sigma_xi);
    MultiplierParams p;
    p.nu = s.nu;
    LinearDecayReport r;
    r.velocity.norm_id = NormSpec{NormKind::dx_velocity}.id();
    r.stream.norm_id = NormSpec{NormKind::stream_function}.id();
    for (int n = 0; n < s.samples; ++n) {
        const double t = s.t0 * std::pow(s.t1 / s.t0, static_cast<double>(n) / (s.samples - 1));
        const auto f = kelvin_solve(w, s.nu, t, ShiftPolicy::abort);
        r.velocity.times.push_back(t);
        r.velocity.values.push_back(norm_probe(f, t, p, {NormKind::dx_velocity}));
        r.stream.times.push_back(t);
        r.stream.values.push_back(norm_probe(f, t, p, {NormKind::stream_function}));
    }
    r.velocity_fit = fit_decay(r.velocity, s.t0, s.t1, FitKind::power);
    r.stream_fit = fit_decay(r.stream, s.t0, s.t1, FitKind::power);
    return r;
}

/// Largest ratio, over k columns and sample times, of the column norm of the
/// Kelvin solution to C_c e^{-c nu^{1/3}|k|^{2/3} t} times its initial value,
/// with C_c = enhanced_envelope_constant(c). Values <= 1 mean the envelope holds.
inline double enhanced_envelope_ratio(const SpectralField& w, double nu, double c, const std::vector<double>& times) {
    const auto& g = w.grid();
    const double C = enhanced_envelope_constant(c);
    double worst = 0.0;
    std::vector<double> initial(g.nx, 0.0);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) initial[i] += std::norm(w(i, j));
    for (double t : times) {
        const auto f = kelvin_solve(w, nu, t, ShiftPolicy::truncate);
        for (int i = 0; i < g.nx; ++i) {
            if (g.kmode(i) == 0 || initial[i] == 0.0) continue;
            double col = 0.0;
            for (int j = 0; j < g.ny; ++j) col += std::norm(f(i, j));
            worst = std::max(worst, std::sqrt(col / initial[i]) / envelope_enhanced(nu, c, g.k(i), t, C));
        }
    }
    return worst;
}

/// CSV with columns time,value,norm_id.
inline std::string norms_csv(const std::vector<NormSeries>& series) {
    std::ostringstream os;
    os.precision(17);
    os << "time,value,norm_id\n";
    for (const auto& s : series)
        for (std::size_t n = 0; n < s.size(); ++n) os << s.times[n] << ',' << s.values[n] << ',' << s.norm_id << '\n';
    return os.str();
}

}  // namespace couette
