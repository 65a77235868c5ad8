#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include "radot/errors.hpp"

namespace radot {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
};

namespace detail {

// Gauss-Kronrod 7-15 panel. Returns the K15 estimate; err is a conservative
// bound derived from the G7/K15 discrepancy.
template <class F>
double gk15(const F& f, double a, double b, double& err) {
    // abscissa, Gauss-7 weight, Kronrod-15 weight
    static const double nw[8][3] = {
        {0.000000000000000, 0.417959183673469, 0.209482141084728},
        {0.405845151377397, 0.381830050505119, 0.190350578064785},
        {0.741531185599394, 0.279705391489277, 0.140653259715525},
        {0.949107912342759, 0.129484966168870, 0.063092092629979},
        {0.207784955007898, 0.0,               0.204432940075298},
        {0.586087235467691, 0.0,               0.169004726639267},
        {0.864864423359769, 0.0,               0.104790010322250},
        {0.991455371120813, 0.0,               0.022935322010529}};

    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    double y0 = f(mid);
    double g7 = nw[0][1] * y0;
    double k15 = nw[0][2] * y0;
    double abs15 = nw[0][2] * std::fabs(y0);
    for (int i = 1; i < 8; ++i) {
        double dx = half * nw[i][0];
        double yl = f(mid - dx);
        double yr = f(mid + dx);
        g7 += nw[i][1] * (yl + yr);
        k15 += nw[i][2] * (yl + yr);
        abs15 += nw[i][2] * (std::fabs(yl) + std::fabs(yr));
    }
    g7 *= half;
    k15 *= half;
    abs15 *= std::fabs(half);

    double diff = std::fabs(k15 - g7);
    // standard QUADPACK-style error heuristic
    if (abs15 > 0.0 && diff > 0.0) {
        double scaled = std::pow(200.0 * diff / abs15, 1.5);
        err = abs15 * std::min(1.0, scaled);
    } else {
        err = diff;
    }
    return k15;
}

struct QuadInterval {
    double a, b, value, error;
    bool operator<(const QuadInterval& o) const { return error < o.error; }
};

} // namespace detail

/// Globally adaptive quadrature of f over [a, b]. Worst-error interval is
/// bisected until the accumulated error estimate satisfies
/// max(abs_tol, rel_tol * |integral|) or the interval budget runs out.
/// Optional breakpoints force initial subdivisions (integrand kinks).
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b,
                              double rel_tol = 1e-10, double abs_tol = 0.0,
                              int max_intervals = 4000,
                              std::span<const double> breakpoints = {}) {
    QuadResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }

    std::vector<double> nodes;
    nodes.push_back(a);
    for (double x : breakpoints)
        if (x > a && x < b) nodes.push_back(x);
    nodes.push_back(b);
    std::sort(nodes.begin(), nodes.end());

    std::priority_queue<detail::QuadInterval> heap;
    double total = 0.0, total_err = 0.0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        detail::QuadInterval iv;
        iv.a = nodes[k];
        iv.b = nodes[k + 1];
        iv.value = detail::gk15(f, iv.a, iv.b, iv.error);
        total += iv.value;
        total_err += iv.error;
        heap.push(iv);
    }

    int n = static_cast<int>(heap.size());
    while (total_err > std::max(abs_tol, rel_tol * std::fabs(total)) &&
           n < max_intervals) {
        detail::QuadInterval worst = heap.top();
        heap.pop();
        double mid = 0.5 * (worst.a + worst.b);
        if (mid <= worst.a || mid >= worst.b) {
            // interval at floating-point resolution, cannot split further
            total_err -= worst.error;
            continue;
        }
        detail::QuadInterval left{worst.a, mid, 0.0, 0.0};
        detail::QuadInterval right{mid, worst.b, 0.0, 0.0};
        left.value = detail::gk15(f, left.a, left.b, left.error);
        right.value = detail::gk15(f, right.a, right.b, right.error);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++n;
    }

    res.value = total;
    res.error = total_err;
    res.converged =
        total_err <= std::max(abs_tol, rel_tol * std::fabs(total)) ||
        total_err <= 1e-14 * std::fabs(total) + 1e-300;
    return res;
}

/// Convenience wrapper that throws when the error target is missed.
template <class F>
double integrate(const F& f, double a, double b, double rel_tol = 1e-10,
                 double abs_tol = 0.0, std::span<const double> breakpoints = {},
                 int max_intervals = 4000) {
    QuadResult r = integrate_adaptive(f, a, b, rel_tol, abs_tol, max_intervals,
                                      breakpoints);
    if (!r.converged)
        throw ConvergenceError("quadrature did not converge on [" +
                               std::to_string(a) + ", " + std::to_string(b) +
                               "], error estimate " + std::to_string(r.error));
    return r.value;
}

} // namespace radot
