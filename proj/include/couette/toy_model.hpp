#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "couette/errors.hpp"

namespace couette {

/// Echo-cascade toy model at fixed vertical frequency xi:
///
///   d/dt f(k) = -nu (k^2 + (xi - k t)^2) f(k)
///               + int xi (k - l) / (l^2 + (xi - l t)^2) f(l) g(k - l) dl,
///   d/dt g(m) = -nu m^2 g(m),
///
/// with f(l) = f(t, l, xi) and g(m) = f(t, m, 0). Both live on a symmetric
/// log-spaced grid; g is stored on the (k, l) pair table so that k - l need
/// not be a grid point.
struct ToyConfig {
    double xi = 2.0;
    std::vector<double> l_grid;  ///< sorted, mirrored log grid
    std::vector<double> k_grid;  ///< output frequencies, a subset of l_grid
    double nu = 1e-6;
    double beta = 1.0 / 3.0;
    double eps = 0.1;
    double c = 0.05;
    double t_max = 100.0;
    double dt = 0.1;
    int N = 8;                   ///< dyadic shell of the seeded |l| in [1/N, 2/N]
    double output_lo = 1.0;      ///< output band and support of g(., 0)
    double output_hi = 2.0;
    double window = 5.0;         ///< half-width of the Orr window for localization

    void validate() const {
        if (l_grid.empty() || k_grid.empty()) throw ValidationError("toy: empty grid");
        if (!std::is_sorted(l_grid.begin(), l_grid.end()) || !std::is_sorted(k_grid.begin(), k_grid.end()))
            throw ValidationError("toy: grids must be sorted");
        if (!(xi > 0.0)) throw ValidationError("toy: xi must be > 0");
        if (!(nu > 0.0) || !(dt > 0.0) || !(t_max > 0.0)) throw ValidationError("toy: nu, dt, t_max must be > 0");
        if (N < 1) throw ValidationError("toy: N must be >= 1");
    }

    /// c nu^{1/3} N xi, the exponent of the dissipative cutoff at t = N xi.
    double cutoff_exponent() const { return c * std::cbrt(nu) * N * xi; }
    bool cutoff_inactive() const { return cutoff_exponent() <= 0.2; }
};

/// +-2^{j/per_octave} covering [lo, hi].
inline std::vector<double> toy_log_grid(double lo, double hi, int per_octave = 16) {
    if (!(lo > 0.0 && hi > lo) || per_octave < 1) throw ValidationError("toy: bad log grid bounds");
    const int j0 = static_cast<int>(std::floor(per_octave * std::log2(lo) + 1e-9));
    const int j1 = static_cast<int>(std::ceil(per_octave * std::log2(hi) - 1e-9));
    std::vector<double> pos;
    for (int j = j0; j <= j1; ++j) pos.push_back(std::exp2(static_cast<double>(j) / per_octave));
    std::vector<double> grid;
    for (auto it = pos.rbegin(); it != pos.rend(); ++it) grid.push_back(-*it);
    grid.insert(grid.end(), pos.begin(), pos.end());
    return grid;
}

/// Worst-case configuration for shell N: nu = (x0 / (N xi))^3 keeps
/// nu^{1/3} N xi = x0 fixed, so the cutoff stays inactive for every N and the
/// amplification follows N^{3/2 - eps - 3 beta}.
inline ToyConfig toy_worst_case(int N, double xi, double beta, double eps, double x0 = 1.0, double c = 0.05) {
    ToyConfig cfg;
    cfg.N = N;
    cfg.xi = xi;
    cfg.beta = beta;
    cfg.eps = eps;
    cfg.c = c;
    cfg.nu = std::pow(x0 / (N * xi), 3.0);
    cfg.l_grid = toy_log_grid(1.0 / (2.0 * N), 2.0 * cfg.output_hi);
    for (double l : cfg.l_grid)
        if (l >= cfg.output_lo && l <= cfg.output_hi) cfg.k_grid.push_back(l);
    cfg.t_max = N * xi + 50.0;
    cfg.dt = 0.1 * std::min(1.0, 1.0 / (100.0 * std::cbrt(cfg.nu)));
    return cfg;
}

/// Pairs (k, l) of l_grid indices with k - l in the support of g.
struct ToyPair {
    std::size_t k_index;
    std::size_t l_index;
    double m;  ///< k - l
};

inline std::vector<ToyPair> toy_pairs(const ToyConfig& cfg) {
    std::vector<ToyPair> pairs;
    const std::size_t n = cfg.l_grid.size();
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double m = cfg.l_grid[a] - cfg.l_grid[b];
            if (m >= cfg.output_lo && m <= cfg.output_hi) pairs.push_back({a, b, m});
        }
    return pairs;
}

struct ToyState {
    double t = 0.0;
    std::vector<double> f_xi;    ///< f(t, l, xi) on l_grid
    std::vector<double> f_zero;  ///< f(t, k - l, 0) on toy_pairs(cfg)
};

namespace detail {

/// Trapezoid weights in log|l| on each sign branch, so that
/// int h(l) dl ~ sum_n w_n h(l_n).
inline std::vector<double> toy_quadrature_weights(const std::vector<double>& grid) {
    std::vector<double> w(grid.size(), 0.0);
    for (std::size_t n = 0; n + 1 < grid.size(); ++n) {
        const double a = grid[n], b = grid[n + 1];
        if ((a > 0.0) != (b > 0.0)) continue;
        const double du = std::abs(std::log(std::abs(b)) - std::log(std::abs(a)));
        w[n] += 0.5 * du * std::abs(a);
        w[n + 1] += 0.5 * du * std::abs(b);
    }
    return w;
}

inline std::size_t toy_k_index(const ToyConfig& cfg, double k) {
    const auto it = std::lower_bound(cfg.l_grid.begin(), cfg.l_grid.end(), k * (1.0 - 1e-12));
    if (it == cfg.l_grid.end() || std::abs(*it - k) > 1e-12 * std::abs(k))
        throw ValidationError("toy: k_grid value is not on l_grid");
    return static_cast<std::size_t>(it - cfg.l_grid.begin());
}

}  // namespace detail

/// Seeds of the worst-case cascade: f(0, l, xi) = nu^beta N^{1/2-eps} on
/// l in [1/N, 2/N], g(0, m) = nu^beta on m in [output_lo, output_hi].
inline ToyState toy_initial_state(const ToyConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.l_grid.size();
    ToyState s;
    s.f_xi.assign(n, 0.0);
    const double amp = std::pow(cfg.nu, cfg.beta);
    const double lo = 1.0 / cfg.N, hi = 2.0 / cfg.N;
    for (std::size_t a = 0; a < n; ++a) {
        const double l = cfg.l_grid[a];
        if (l >= lo * (1.0 - 1e-12) && l <= hi * (1.0 + 1e-12)) s.f_xi[a] = amp * std::pow(cfg.N, 0.5 - cfg.eps);
    }
    s.f_zero.assign(toy_pairs(cfg).size(), amp);
    return s;
}

/// Coupling integral int xi (k - l) / (l^2 + (xi - l t)^2) f(l) g(k - l) dl
/// for every k on l_grid.
inline std::vector<double> toy_coupling(const ToyState& s, const ToyConfig& cfg, const std::vector<ToyPair>& pairs,
                                        const std::vector<double>& weights) {
    const std::size_t n = cfg.l_grid.size();
    std::vector<double> src(n);
    for (std::size_t b = 0; b < n; ++b) {
        const double l = cfg.l_grid[b];
        const double shift = cfg.xi - l * s.t;
        src[b] = weights[b] * cfg.xi * s.f_xi[b] / (l * l + shift * shift);
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t p = 0; p < pairs.size(); ++p)
        out[pairs[p].k_index] += pairs[p].m * src[pairs[p].l_index] * s.f_zero[p];
    return out;
}

namespace detail {

inline void toy_check_state(const ToyState& s, const ToyConfig& cfg, const std::vector<ToyPair>& pairs) {
    if (s.f_xi.size() != cfg.l_grid.size() || s.f_zero.size() != pairs.size())
        throw ValidationError("toy: state does not match grid");
}

/// d/dt of f_xi only; coupling receives the integral term.
inline std::vector<double> toy_rhs_xi(const ToyState& s, const ToyConfig& cfg, const std::vector<ToyPair>& pairs,
                                      const std::vector<double>& weights, std::vector<double>& coupling) {
    coupling = toy_coupling(s, cfg, pairs, weights);
    std::vector<double> d = coupling;
    for (std::size_t a = 0; a < d.size(); ++a) {
        const double k = cfg.l_grid[a];
        const double shift = cfg.xi - k * s.t;
        d[a] -= cfg.nu * (k * k + shift * shift) * s.f_xi[a];
    }
    return d;
}

}  // namespace detail

/// Time derivative of the full state (t component is 1).
inline ToyState toy_rhs(const ToyState& s, const ToyConfig& cfg) {
    const auto pairs = toy_pairs(cfg);
    detail::toy_check_state(s, cfg, pairs);
    ToyState d;
    d.t = 1.0;
    std::vector<double> coupling;
    d.f_xi = detail::toy_rhs_xi(s, cfg, pairs, detail::toy_quadrature_weights(cfg.l_grid), coupling);
    d.f_zero.resize(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) d.f_zero[p] = -cfg.nu * pairs[p].m * pairs[p].m * s.f_zero[p];
    return d;
}

struct AmplificationReport {
    int N = 0;
    double nu = 0.0;
    double beta = 0.0;
    double eps = 0.0;
    double xi = 0.0;
    double A = 0.0;             ///< || int_0^T coupling dt ||_{L2(k in band)} / nu^beta
    double final_mass = 0.0;    ///< || f(T, k, xi) ||_{L2(k in band)} / nu^beta
    double localization = 0.0;  ///< share of transfer from seeded l inside |t - xi/l| <= window
    double cutoff_exponent = 0.0;
    bool cutoff_inactive = false;
    long steps = 0;
};

/// RK4 integration of the toy model from the worst-case seeds. The frozen
/// zero mode is advanced with its exact decay factor.
inline AmplificationReport run_amplification(const ToyConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.l_grid.size();
    const auto weights = detail::toy_quadrature_weights(cfg.l_grid);
    const auto pairs = toy_pairs(cfg);
    std::vector<std::size_t> out_idx;
    for (double k : cfg.k_grid) out_idx.push_back(detail::toy_k_index(cfg, k));
    std::vector<char> is_out(n, 0);
    for (std::size_t a : out_idx) is_out[a] = 1;

    ToyState s = toy_initial_state(cfg);
    std::vector<double> transferred(n, 0.0);

    // Transfer rate from seeded l bins into the output band, split by Orr window.
    std::vector<char> seeded(n, 0);
    for (std::size_t b = 0; b < n; ++b) seeded[b] = s.f_xi[b] != 0.0;
    auto seeded_rates = [&](const ToyState& st, double& inside, double& total) {
        inside = total = 0.0;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto& pr = pairs[p];
            if (!seeded[pr.l_index] || !is_out[pr.k_index]) continue;
            const double l = cfg.l_grid[pr.l_index];
            const double shift = cfg.xi - l * st.t;
            const double r = weights[pr.k_index] * weights[pr.l_index] * cfg.xi *
                             std::abs(pr.m * st.f_xi[pr.l_index] * st.f_zero[p]) / (l * l + shift * shift);
            total += r;
            if (std::abs(st.t - cfg.xi / l) <= cfg.window) inside += r;
        }
    };

    const long nsteps = std::max(1L, static_cast<long>(std::ceil(cfg.t_max / cfg.dt - 1e-9)));
    const double h = cfg.t_max / static_cast<double>(nsteps);
    std::vector<double> half(pairs.size()), full(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        half[p] = std::exp(-0.5 * h * cfg.nu * pairs[p].m * pairs[p].m);
        full[p] = half[p] * half[p];
    }

    double in_prev, tot_prev;
    seeded_rates(s, in_prev, tot_prev);
    double in_acc = 0.0, tot_acc = 0.0;
    ToyState y = s;
    std::vector<double> c1, c2, c3, c4;
    for (long step = 0; step < nsteps; ++step) {
        const auto k1 = detail::toy_rhs_xi(s, cfg, pairs, weights, c1);
        y.t = s.t + 0.5 * h;
        for (std::size_t p = 0; p < pairs.size(); ++p) y.f_zero[p] = s.f_zero[p] * half[p];
        for (std::size_t i = 0; i < n; ++i) y.f_xi[i] = s.f_xi[i] + 0.5 * h * k1[i];
        const auto k2 = detail::toy_rhs_xi(y, cfg, pairs, weights, c2);
        for (std::size_t i = 0; i < n; ++i) y.f_xi[i] = s.f_xi[i] + 0.5 * h * k2[i];
        const auto k3 = detail::toy_rhs_xi(y, cfg, pairs, weights, c3);
        y.t = s.t + h;
        for (std::size_t p = 0; p < pairs.size(); ++p) y.f_zero[p] = s.f_zero[p] * full[p];
        for (std::size_t i = 0; i < n; ++i) y.f_xi[i] = s.f_xi[i] + h * k3[i];
        const auto k4 = detail::toy_rhs_xi(y, cfg, pairs, weights, c4);
        // The time integral of the coupling uses the same RK4 weights.
        for (std::size_t a : out_idx) transferred[a] += h / 6.0 * (c1[a] + 2.0 * c2[a] + 2.0 * c3[a] + c4[a]);
        for (std::size_t i = 0; i < n; ++i) s.f_xi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        s.f_zero = y.f_zero;
        s.t = (step + 1 == nsteps) ? cfg.t_max : s.t + h;
        double in_now, tot_now;
        seeded_rates(s, in_now, tot_now);
        in_acc += 0.5 * h * (in_prev + in_now);
        tot_acc += 0.5 * h * (tot_prev + tot_now);
        in_prev = in_now;
        tot_prev = tot_now;
    }

    AmplificationReport r;
    r.N = cfg.N;
    r.nu = cfg.nu;
    r.beta = cfg.beta;
    r.eps = cfg.eps;
    r.xi = cfg.xi;
    r.steps = nsteps;
    const double scale = std::pow(cfg.nu, cfg.beta);
    double a2 = 0.0, m2 = 0.0;
    for (std::size_t a : out_idx) {
        a2 += weights[a] * transferred[a] * transferred[a];
        m2 += weights[a] * s.f_xi[a] * s.f_xi[a];
    }
    r.A = std::sqrt(a2) / scale;
    r.final_mass = std::sqrt(m2) / scale;
    r.localization = tot_acc > 0.0 ? in_acc / tot_acc : 0.0;
    r.cutoff_exponent = cfg.cutoff_exponent();
    r.cutoff_inactive = cfg.cutoff_inactive();
    return r;
}

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  ///< RMS residual of the log-log fit
};

/// Least squares of log A against log N.
inline SlopeFit toy_slope(const std::vector<AmplificationReport>& reports) {
    if (reports.size() < 2) throw InsufficientData("toy slope: need at least two N values");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(reports.size());
    for (const auto& r : reports) {
        if (!(r.A > 0.0)) throw InsufficientData("toy slope: nonpositive amplification");
        const double x = std::log(static_cast<double>(r.N)), y = std::log(r.A);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    SlopeFit f;
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw InsufficientData("toy slope: all N equal");
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0.0;
    for (const auto& r : reports) {
        const double e = std::log(r.A) - f.intercept - f.slope * std::log(static_cast<double>(r.N));
        ss += e * e;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

/// Predicted log-log slope of A in N along the worst-case family.
inline double toy_predicted_slope(double beta, double eps) { return 1.5 - eps - 3.0 * beta; }

inline std::string toy_csv(const std::vector<AmplificationReport>& reports) {
    std::ostringstream os;
    os.precision(17);
    os << "N,nu,beta,eps,A,final_mass,localization,cutoff_exponent,cutoff_inactive\n";
    for (const auto& r : reports)
        os << r.N << ',' << r.nu << ',' << r.beta << ',' << r.eps << ',' << r.A << ',' << r.final_mass << ','
           << r.localization << ',' << r.cutoff_exponent << ',' << (r.cutoff_inactive ? 1 : 0) << '\n';
    return os.str();
}

}  // namespace couette
