#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "sta/errors.hpp"

namespace sta::numerics {

struct StepControl {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double initial_step = 0.0;  // 0 picks a step from the interval length
    double min_step = 1e-13;    // relative to the interval length
    std::size_t max_steps = 50'000'000;
};

struct IntegrationStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
};

namespace detail {

template <class State>
double scaled_error(const State& err, const State& y0, const State& y1, double atol, double rtol) {
    auto scale = atol + rtol * y0.array().abs().max(y1.array().abs());
    return (err.array().abs() / scale).maxCoeff();
}

}  // namespace detail

/// Dormand-Prince 5(4) integrator with FSAL and local extrapolation.
///
/// `State` is any Eigen dense type. `rhs(t, y)` returns dy/dt. Steps are
/// clipped so that every time in `stops` (sorted, inside (t0, t1]) is hit
/// exactly; `on_step(t, y)` is called after each accepted step. Returns y(t1).
template <class State, class Rhs, class OnStep>
State dopri5(const Rhs& rhs, double t0, State y, double t1, const StepControl& ctrl,
             std::span<const double> stops, OnStep&& on_step, IntegrationStats* stats = nullptr) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    const double span = t1 - t0;
    if (!(span > 0.0)) return y;
    const double h_min = ctrl.min_step * span;
    double h = ctrl.initial_step > 0.0 ? ctrl.initial_step : span * 1e-3;

    std::size_t next_stop = 0;
    while (next_stop < stops.size() && stops[next_stop] <= t0) ++next_stop;

    double t = t0;
    State k1 = rhs(t, y);
    IntegrationStats local;
    while (t < t1) {
        if (local.accepted + local.rejected >= ctrl.max_steps) {
            throw IntegrationError("dopri5: step budget exhausted at t=" + std::to_string(t));
        }
        double target = t1;
        if (next_stop < stops.size()) target = std::min(target, stops[next_stop]);
        bool clipped = false;
        double step = h;
        if (t + step >= target) {
            step = target - t;
            clipped = true;
        }
        if (step < h_min && !clipped) {
            throw IntegrationError("dopri5: step size underflow at t=" + std::to_string(t));
        }

        const State k2 = rhs(t + c2 * step, State(y + step * (a21 * k1)));
        const State k3 = rhs(t + c3 * step, State(y + step * (a31 * k1 + a32 * k2)));
        const State k4 = rhs(t + c4 * step, State(y + step * (a41 * k1 + a42 * k2 + a43 * k3)));
        const State k5 =
            rhs(t + c5 * step, State(y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const State k6 = rhs(
            t + step, State(y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        State y_new = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = rhs(t + step, y_new);
        const State err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double en = detail::scaled_error(err, y, y_new, ctrl.abs_tol, ctrl.rel_tol);
        if (!std::isfinite(en)) {
            ++local.rejected;
            h = 0.25 * step;
            if (h < h_min) throw IntegrationError("dopri5: non-finite state at t=" + std::to_string(t));
            continue;
        }
        const double factor = std::clamp(0.9 * std::pow(std::max(en, 1e-300), -0.2), 0.2, 5.0);
        if (en <= 1.0) {
            t = clipped ? target : t + step;
            y = std::move(y_new);
            k1 = k7;
            ++local.accepted;
            if (clipped && next_stop < stops.size() && target == stops[next_stop]) ++next_stop;
            on_step(t, static_cast<const State&>(y));
            // a clipped step says nothing about the natural step size
            if (!clipped) h = step * factor;
        } else {
            ++local.rejected;
            h = step * std::max(factor, 0.1);
            if (h < h_min) {
                throw IntegrationError("dopri5: step size underflow at t=" + std::to_string(t));
            }
        }
    }
    if (stats) *stats = local;
    return y;
}

}  // namespace sta::numerics
