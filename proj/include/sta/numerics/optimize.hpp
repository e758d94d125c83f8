#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>
#include <algorithm>

#include "sta/errors.hpp"

namespace sta::numerics {

struct Minimum {
    double x;
    double value;
};

/// Golden-section search for a minimum of f on [a, b]; stops when the bracket
/// is narrower than `x_tol`.
template <class F>
Minimum golden_section(const F& f, double a, double b, double x_tol = 1e-12) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (std::abs(b - a) > x_tol) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

/// Global minimum of f on [a, b]: dense sampling on `samples` points, then
/// golden-section refinement inside the neighbourhood of the best sample.
template <class F>
Minimum dense_minimum(const F& f, double a, double b, std::size_t samples = 2001) {
    if (samples < 3) samples = 3;
    const double h = (b - a) / static_cast<double>(samples - 1);
    std::size_t best = 0;
    double best_val = f(a);
    for (std::size_t i = 1; i < samples; ++i) {
        const double v = f(a + h * static_cast<double>(i));
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double lo = std::max(a, a + h * (static_cast<double>(best) - 1.0));
    const double hi = std::min(b, a + h * (static_cast<double>(best) + 1.0));
    Minimum refined = golden_section(f, lo, hi, 1e-12 * std::max(1.0, std::abs(b - a)));
    if (refined.value < best_val) return refined;
    return {a + h * static_cast<double>(best), best_val};
}

/// Ordinary least-squares line y = intercept + slope * x.
struct LineFit {
    double slope;
    double intercept;
    double r_squared;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidParameter("fit_line: need at least two (x, y) pairs of equal length");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidParameter("fit_line: x values are all equal");
    const double slope = sxy / sxx;
    const double r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return {slope, my - slope * mx, r2};
}

/// Power law y = A x^k fitted by least squares on (log x, log y); returns the
/// line in log space (slope is the exponent k).
inline LineFit fit_power_law(std::span<const double> x, std::span<const double> y) {
    std::vector<double> lx, ly;
    lx.reserve(x.size());
    ly.reserve(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw InvalidParameter("fit_power_law: all samples must be strictly positive");
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_line(lx, ly);
}

}  // namespace sta::numerics
