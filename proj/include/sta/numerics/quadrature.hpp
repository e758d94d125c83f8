#pragma once

#include <cmath>
#include <limits>

#include "sta/errors.hpp"

namespace sta::numerics {

namespace detail {

template <class F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15.0 * tol) {
        return left + right + diff / 15.0;
    }
    return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `abs_tol`.
/// The interval is pre-split into `initial_panels` pieces so that integrands with
/// structure narrower than (b-a)/2 are not missed by the first error estimate.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double abs_tol = 1e-10,
                        int initial_panels = 8, int max_depth = 50) {
    if (a == b) return 0.0;
    if (initial_panels < 1) initial_panels = 1;
    const double h = (b - a) / initial_panels;
    double total = 0.0;
    double fa = f(a);
    for (int i = 0; i < initial_panels; ++i) {
        const double lo = a + i * h;
        const double hi = (i + 1 == initial_panels) ? b : a + (i + 1) * h;
        const double fm = f(0.5 * (lo + hi));
        const double fb = f(hi);
        const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += detail::simpson_recurse(f, lo, hi, fa, fm, fb, whole, abs_tol / initial_panels,
                                         max_depth);
        fa = fb;
    }
    return total;
}

}  // namespace sta::numerics
