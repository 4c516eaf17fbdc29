#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace couette {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
    bool converged = false;
};

namespace detail {

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
inline constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod21(F& f, double a, double b) {
    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(centre);
    double res_k = fc * kWgk[10];
    double res_g = 0.0;
    for (int j = 0; j < 10; ++j) {
        const double dx = half * kXgk[j];
        const double s = f(centre - dx) + f(centre + dx);
        res_k += kWgk[j] * s;
        if (j % 2 == 1) res_g += kWg[j / 2] * s;
    }
    const double value = res_k * half;
    const double err = std::abs((res_k - res_g) * half);
    return {a, b, value, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod quadrature over [a, b] with optional
/// interior breakpoints. Bisects the panel with the largest error estimate
/// until the total estimate meets max(abs_tol, rel_tol * |value|).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double rel_tol, double abs_tol = 0.0,
                                    std::span<const double> breakpoints = {},
                                    int max_panels = 4000) {
    std::vector<double> cuts{a};
    for (double p : breakpoints)
        if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<detail::Panel> heap;
    QuadratureResult r;
    double total = 0.0, total_err = 0.0;
    for (std::size_t n = 0; n + 1 < cuts.size(); ++n) {
        if (cuts[n + 1] <= cuts[n]) continue;
        auto p = detail::gauss_kronrod21(f, cuts[n], cuts[n + 1]);
        r.evaluations += 21;
        total += p.value;
        total_err += p.error;
        heap.push(p);
    }
    constexpr double kRoundoff = 50.0 * std::numeric_limits<double>::epsilon();
    while (!heap.empty()) {
        const double target = std::max({abs_tol, rel_tol * std::abs(total), kRoundoff * std::abs(total)});
        if (total_err <= target) {
            r.converged = true;
            break;
        }
        if (static_cast<int>(heap.size()) >= max_panels) break;
        auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) break;
        heap.pop();
        auto left = detail::gauss_kronrod21(f, worst.a, mid);
        auto right = detail::gauss_kronrod21(f, mid, worst.b);
        r.evaluations += 42;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum from the panels so that the running updates do not leave drift.
    double sum = 0.0, err = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    r.value = sum;
    r.error_estimate = err;
    if (!r.converged) r.converged = err <= std::max(abs_tol, rel_tol * std::abs(sum));
    return r;
}

}  // namespace couette
