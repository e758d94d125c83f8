#pragma once

// Super-adiabatic frequency ramps for the driven harmonic oscillator.
//
// The scaling factor b(t) is the degree-5 polynomial that takes b from 1 to
// gamma with vanishing first and second derivatives at both ends. The
// frequency that realises it is obtained by inverting the Ermakov equation
//
//     b'' + omega^2(t) b = omega_start^2 / b^3,
//
// i.e. omega^2(t) = omega_start^2 / b^4 - b'' / b. Short ramps make omega^2
// negative somewhere (the trap turns into a barrier); cutoff_time() finds the
// shortest duration for which that never happens.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sta/errors.hpp"
#include "sta/numerics/ode.hpp"
#include "sta/numerics/optimize.hpp"
#include "sta/numerics/quadrature.hpp"
#include "sta/params.hpp"

namespace sta::protocol {

struct ScalingSample {
    double b;
    double bdot;
    double bddot;
};

struct TrajectoryPoint {
    double t;
    double b;
    double bdot;
    double bddot;
    double omega_sq;
    double eta;
};

namespace detail {

inline double checked_time(const StrokeSpec& spec, double t) {
    const double tau = spec.tau();
    // tolerate roundoff from t = i * tau / n style grids
    if (t < 0.0 && t > -1e-14 * tau) return 0.0;
    if (t > tau && t < tau * (1.0 + 1e-14)) return tau;
    if (!(t >= 0.0 && t <= tau)) {
        throw DomainError("time " + std::to_string(t) + " outside stroke [0, " +
                          std::to_string(tau) + "]");
    }
    return t;
}

// b(s) and its derivatives with respect to s = t / tau.
inline ScalingSample polynomial_in_s(double gamma, double s) {
    const double g = gamma - 1.0;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const double b = 1.0 + g * s3 * (10.0 + s * (-15.0 + 6.0 * s));
    const double db = g * 30.0 * s2 * (1.0 - s) * (1.0 - s);
    const double d2b = g * 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    return {b, db, d2b};
}

inline double omega_sq_in_s(double omega_start, double gamma, double tau, double s) {
    const ScalingSample p = polynomial_in_s(gamma, s);
    const double b2 = p.b * p.b;
    return omega_start * omega_start / (b2 * b2) - p.bddot / (tau * tau * p.b);
}

}  // namespace detail

/// Polynomial scaling factor and its analytic first and second time derivatives.
inline ScalingSample scaling_factor(const StrokeSpec& spec, double t) {
    t = detail::checked_time(spec, t);
    const double tau = spec.tau();
    const ScalingSample p = detail::polynomial_in_s(spec.gamma(), t / tau);
    return {p.b, p.bdot / tau, p.bddot / (tau * tau)};
}

/// Engineered omega^2(t); negative values mean the trap is inverted at t.
inline double frequency_squared(const StrokeSpec& spec, double t) {
    const ScalingSample s = scaling_factor(spec, t);
    const double w0 = spec.omega_start();
    const double b2 = s.b * s.b;
    return w0 * w0 / (b2 * b2) - s.bddot / s.b;
}

/// eta(t) = int_0^t dt' / b^2(t').
inline double eta(const StrokeSpec& spec, double t, double abs_tol = 1e-10) {
    t = detail::checked_time(spec, t);
    if (spec.gamma() == 1.0) return t;
    const double tau = spec.tau();
    const double gamma = spec.gamma();
    auto inv_b2 = [&](double tp) {
        const double b = detail::polynomial_in_s(gamma, tp / tau).b;
        return 1.0 / (b * b);
    };
    return numerics::adaptive_simpson(inv_b2, 0.0, t, abs_tol);
}

inline TrajectoryPoint trajectory_point(const StrokeSpec& spec, double t) {
    t = detail::checked_time(spec, t);
    const ScalingSample s = scaling_factor(spec, t);
    return {t, s.b, s.bdot, s.bddot, frequency_squared(spec, t), eta(spec, t)};
}

/// Uniform sampling t_i = i * tau / (n - 1); eta accumulated segment by segment.
inline std::vector<TrajectoryPoint> sample_trajectory(const StrokeSpec& spec, std::size_t n) {
    if (n < 2) throw InvalidParameter("sample_trajectory: need at least 2 samples");
    std::vector<TrajectoryPoint> out;
    out.reserve(n);
    const double tau = spec.tau();
    const double gamma = spec.gamma();
    auto inv_b2 = [&](double tp) {
        const double b = detail::polynomial_in_s(gamma, tp / tau).b;
        return 1.0 / (b * b);
    };
    double acc = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (i + 1 == n) ? tau : tau * static_cast<double>(i) / static_cast<double>(n - 1);
        if (i > 0) {
            acc += numerics::adaptive_simpson(inv_b2, prev, t, 1e-10 / static_cast<double>(n), 2);
        }
        prev = t;
        const ScalingSample s = scaling_factor(spec, t);
        out.push_back({t, s.b, s.bdot, s.bddot, frequency_squared(spec, t), acc});
    }
    return out;
}

/// b_ad(t) = (omega_start^2 / omega^2(t))^(1/4), the scaling of an ideally slow ramp.
inline double adiabatic_scaling(const StrokeSpec& spec, double t) {
    const double w2 = frequency_squared(spec, t);
    if (!(w2 > 0.0)) {
        throw InvertedTrapError("adiabatic_scaling: omega^2(t) = " + std::to_string(w2) +
                                " <= 0 at t = " + std::to_string(t));
    }
    const double w0 = spec.omega_start();
    return std::pow(w0 * w0 / w2, 0.25);
}

struct ErmakovSample {
    double t;
    double b;
    double bdot;
    double bddot;  // right-hand side of the Ermakov equation at (t, b)
};

/// Forward integration of b'' = omega_start^2 / b^3 - omega^2(t) b from (b0, bdot0)
/// over [0, tau]. Returns every accepted step; `sample_times` are hit exactly.
template <class OmegaSq>
std::vector<ErmakovSample> ermakov_forward(const StrokeSpec& spec, const OmegaSq& omega_sq_fn,
                                           double b0 = 1.0, double bdot0 = 0.0,
                                           numerics::StepControl ctrl = {},
                                           std::span<const double> sample_times = {}) {
    if (!(b0 > 0.0)) throw DomainError("ermakov_forward: b0 must be > 0");
    const double w0sq = spec.omega_start() * spec.omega_start();
    auto accel = [&](double t, double b) {
        const double b3 = b * b * b;
        return w0sq / b3 - omega_sq_fn(t) * b;
    };
    auto rhs = [&](double t, const Eigen::Vector2d& y) {
        if (!(y[0] > 0.0)) return Eigen::Vector2d(NAN, NAN);
        return Eigen::Vector2d(y[1], accel(t, y[0]));
    };
    std::vector<ErmakovSample> out;
    out.push_back({0.0, b0, bdot0, accel(0.0, b0)});
    auto record = [&](double t, const Eigen::Vector2d& y) {
        out.push_back({t, y[0], y[1], accel(t, y[0])});
    };
    numerics::dopri5<Eigen::Vector2d>(rhs, 0.0, Eigen::Vector2d(b0, bdot0), spec.tau(), ctrl,
                                      sample_times, record);
    return out;
}

/// Minimum of omega^2 over the stroke for a ramp of duration tau.
inline double min_frequency_squared(double omega_start, double omega_end, double tau,
                                    std::size_t samples = 2001) {
    const double gamma = std::sqrt(omega_start / omega_end);
    auto w2 = [&](double s) { return detail::omega_sq_in_s(omega_start, gamma, tau, s); };
    return numerics::dense_minimum(w2, 0.0, 1.0, samples).value;
}

/// Shortest stroke duration for which omega^2(t) >= 0 throughout, by bisection
/// on tau inside [1e-3, 1e3] / omega_start. The returned value is the upper end
/// of the final bracket, so the trap is never inverted at the returned tau.
inline double cutoff_time(double omega_start, double omega_end, double rel_precision = 1e-7) {
    if (!(omega_start > 0.0) || !(omega_end > 0.0)) {
        throw InvalidParameter("cutoff_time: frequencies must be > 0");
    }
    if (omega_start == omega_end) {
        throw InvalidParameter("cutoff_time: omega_start == omega_end, no ramp to time");
    }
    double lo = 1e-3 / omega_start;
    double hi = 1e3 / omega_start;
    if (min_frequency_squared(omega_start, omega_end, lo) >= 0.0) {
        throw BracketError("cutoff_time: trap never inverts for tau >= 1e-3/omega_start; "
                           "cut-off lies below the search bracket");
    }
    if (min_frequency_squared(omega_start, omega_end, hi) < 0.0) {
        throw BracketError("cutoff_time: trap still inverted at tau = 1e3/omega_start");
    }
    while ((hi - lo) > rel_precision * hi) {
        const double mid = 0.5 * (lo + hi);
        if (min_frequency_squared(omega_start, omega_end, mid) >= 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

inline double cutoff_time(const StrokeSpec& spec) {
    return cutoff_time(spec.omega_start(), spec.omega_end());
}

}  // namespace sta::protocol
