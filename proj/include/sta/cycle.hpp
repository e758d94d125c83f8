#pragma once

// Quantum Otto cycle built from two super-adiabatic strokes and two
// instantaneous isochores:
//
//   1. expansion omega0 -> omega_f from the hot Gibbs state (beta_hot, omega0)
//   2. cold isochore at omega_f, full thermalisation to (beta_cold, omega_f)
//   3. compression omega_f -> omega0
//   4. hot isochore at omega0, back to (beta_hot, omega0)
//
// Signs follow the working medium: w < 0 is work done by it, q > 0 heat taken in.

#include <cmath>
#include <optional>
#include <string>

#include "sta/errors.hpp"
#include "sta/gaussian.hpp"
#include "sta/numerics/quadrature.hpp"
#include "sta/params.hpp"
#include "sta/protocol.hpp"
#include "sta/workstats.hpp"

namespace sta::cycle {

struct CycleSpec {
    double omega0 = 1.0;
    double omega_f = 1.0 / 16.0;
    double beta_hot = 1.0;
    double beta_cold = 20.0;
    double tau1 = 10.0;
    double tau3 = 10.0;
    double tau2 = 0.0;
    double tau4 = 0.0;

    StrokeSpec expansion() const { return StrokeSpec(omega0, omega_f, tau1); }
    StrokeSpec compression() const { return StrokeSpec(omega_f, omega0, tau3); }

    /// Cut-off time shared by both strokes (compression is the time mirror of
    /// expansion); zero for the degenerate cycle omega_f == omega0.
    double tau_c() const { return workstats::stroke_cutoff(expansion()); }

    void validate() const {
        if (!(omega_f > 0.0)) throw InvalidParameter("CycleSpec: omega_f must be > 0");
        if (!(omega0 >= omega_f)) throw InvalidParameter("CycleSpec: need omega0 >= omega_f");
        if (!(beta_hot > 0.0)) throw InvalidParameter("CycleSpec: beta_hot must be > 0");
        if (!(beta_cold > beta_hot)) throw InvalidParameter("CycleSpec: need beta_cold > beta_hot");
        if (!(tau1 > 0.0) || !(tau3 > 0.0)) {
            throw InvalidParameter("CycleSpec: stroke durations must be > 0");
        }
        if (!(tau2 >= 0.0) || !(tau4 >= 0.0)) {
            throw InvalidParameter("CycleSpec: isochore durations must be >= 0");
        }
        const double tc = tau_c();
        if (tau1 < tc || tau3 < tc) {
            throw CutoffViolationError("CycleSpec: stroke durations must be >= tau_c = " +
                                       std::to_string(tc));
        }
    }
};

/// Power bound from the driven-system speed limit, for tau1 == tau3 == tau.
struct QslBound {
    double e_tau_raw = 0.0;  // tau^-1 int <H(t)> dt
    double e_tau = 0.0;      // tau^-1 int (<H(t)> - hbar omega(t) / 2) dt
    double de_tau = 0.0;     // tau^-1 int sqrt(Var H(t)) dt
    double bures_angle = 0.0;
    double bound = 0.0;
    bool unbounded = false;  // L = 0, no finite bound
};

struct CycleReport {
    double w1 = 0.0;
    double w3 = 0.0;
    double q2 = 0.0;
    double q4 = 0.0;
    double net_work = 0.0;  // w1 + w3
    double efficiency = 0.0;
    double power = 0.0;
    double otto_efficiency_closed_form = 0.0;
    double carnot_efficiency = 0.0;
    double first_law_residual = 0.0;
    double tau_c = 0.0;
    bool engine = false;
    std::optional<QslBound> qsl;
};

/// Heat absorbed while the medium fully thermalises with `bath` at fixed frequency `omega`.
inline double isochore_heat(const gaussian::GaussianState& state_in,
                            const gaussian::GibbsReference& bath, double omega,
                            const OscillatorParams& params) {
    bath.validate();
    if (!(omega > 0.0)) throw InvalidParameter("isochore_heat: omega must be > 0");
    if (std::abs(bath.omega_ref - omega) > 1e-12 * omega) {
        throw InvalidParameter("isochore_heat: bath frequency differs from the isochore frequency");
    }
    const auto out = gaussian::thermal_state(bath, params);
    return gaussian::mean_energy(out, omega, params) -
           gaussian::mean_energy(state_in, omega, params);
}

/// <W>_ad,1 + <W>_ad,3 in closed form.
inline double sum_adiabatic_work(const CycleSpec& c, const OscillatorParams& params) {
    const double h = params.hbar;
    return 0.5 * h * (c.omega0 - c.omega_f) *
           (gaussian::coth(0.5 * c.beta_cold * h * c.omega_f) -
            gaussian::coth(0.5 * c.beta_hot * h * c.omega0));
}

/// Time averages of the energy and its spread along the expansion stroke, and
/// the bound -(w1 + w3) max{E_tau, dE_tau} / (hbar L).
inline QslBound qsl_power_bound(const CycleSpec& c, const OscillatorParams& params) {
    c.validate();
    if (c.tau1 != c.tau3) {
        throw InvalidParameter("qsl_power_bound: needs equal stroke durations tau1 == tau3");
    }
    const OscillatorParams hot = params.with_beta(c.beta_hot);
    const StrokeSpec stroke = c.expansion();
    const double tau = stroke.tau();
    const auto rho0 = gaussian::thermal_state(hot, c.omega0);

    auto state_at = [&](double t) {
        return gaussian::evolve_scaling(rho0, protocol::trajectory_point(stroke, t), c.omega0, hot);
    };
    auto energy = [&](double t) {
        return gaussian::mean_energy_sq(state_at(t), protocol::frequency_squared(stroke, t), hot);
    };
    auto ground = [&](double t) {
        return 0.5 * params.hbar * workstats::detail::instantaneous_omega(stroke, t);
    };
    auto spread = [&](double t) {
        return std::sqrt(
            gaussian::energy_variance_sq(state_at(t), protocol::frequency_squared(stroke, t), hot));
    };

    QslBound q;
    q.e_tau_raw = numerics::adaptive_simpson(energy, 0.0, tau, 1e-10, 16) / tau;
    q.e_tau = q.e_tau_raw - numerics::adaptive_simpson(ground, 0.0, tau, 1e-10, 16) / tau;
    q.de_tau = numerics::adaptive_simpson(spread, 0.0, tau, 1e-10, 16) / tau;
    q.bures_angle = gaussian::bures_angle(gaussian::thermal_state(hot, c.omega_f), rho0);
    if (q.bures_angle == 0.0) {
        q.unbounded = true;
        return q;
    }
    const double net = sum_adiabatic_work(c, params);
    q.bound = -net * std::max(q.e_tau, q.de_tau) / (params.hbar * q.bures_angle);
    return q;
}

inline CycleReport run_superadiabatic_cycle(const CycleSpec& c, const OscillatorParams& params) {
    params.validate();
    c.validate();
    const OscillatorParams hot = params.with_beta(c.beta_hot);
    const OscillatorParams cold = params.with_beta(c.beta_cold);

    CycleReport r;
    r.tau_c = c.tau_c();

    const StrokeSpec s1 = c.expansion();
    r.w1 = workstats::mean_work_sta(hot, s1, s1.tau());
    const auto after1 =
        workstats::detail::evolved_state(hot, s1, protocol::trajectory_point(s1, s1.tau()));
    r.q2 = isochore_heat(after1, {c.beta_cold, c.omega_f}, c.omega_f, params);

    const StrokeSpec s3 = c.compression();
    r.w3 = workstats::mean_work_sta(cold, s3, s3.tau());
    const auto after3 =
        workstats::detail::evolved_state(cold, s3, protocol::trajectory_point(s3, s3.tau()));
    r.q4 = isochore_heat(after3, {c.beta_hot, c.omega0}, c.omega0, params);

    r.net_work = r.w1 + r.w3;
    r.engine = r.net_work < 0.0;
    r.efficiency = (r.q4 != 0.0 ? -r.net_work / r.q4 : 0.0) + 0.0;  // no -0
    r.power = -r.net_work / (c.tau1 + c.tau2 + c.tau3 + c.tau4) + 0.0;
    r.otto_efficiency_closed_form = 1.0 - c.omega_f / c.omega0;
    r.carnot_efficiency = 1.0 - c.beta_hot / c.beta_cold;
    r.first_law_residual = r.w1 + r.w3 + r.q2 + r.q4;
    if (c.tau1 == c.tau3) r.qsl = qsl_power_bound(c, params);
    return r;
}

}  // namespace sta::cycle
