#pragma once

// Work statistics along a single super-adiabatic stroke, started from the
// Gibbs state at (params.beta, spec.omega_start()).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sta/errors.hpp"
#include "sta/gaussian.hpp"
#include "sta/numerics/optimize.hpp"
#include "sta/numerics/quadrature.hpp"
#include "sta/params.hpp"
#include "sta/protocol.hpp"

namespace sta::workstats {

struct WorkRecord {
    double t = 0.0;
    double mean_w = 0.0;
    double mean_w_ad = 0.0;
    double std_w = 0.0;
    double delta_w = 0.0;
    double dS_irr = 0.0;
    double rel_ent_t = 0.0;    // S(rho_t || rho_t^eq)
    double rel_ent_ad = 0.0;   // S(rho_t^ad || rho_t^eq)
    double rel_ent_alt = 0.0;  // S(rho_t || rho_t^ad)
};

struct DissipationSweep {
    double tau_c = 0.0;
    std::vector<double> tau_values;
    std::vector<double> avg_delta_w;
    double fitted_exponent = 0.0;
    double r_squared = 0.0;
};

struct DeltaWDecomposition {
    double via_equilibrium;  // (S(rho_t||eq) - S(ad||eq)) / beta
    double via_adiabatic;    // S(rho_t||ad) / beta_t
    double rel_ent_t;
    double rel_ent_ad;
    double rel_ent_alt;
};

namespace detail {

inline double thermal_coth(const OscillatorParams& params, const StrokeSpec& spec) {
    return gaussian::coth(0.5 * params.beta * params.hbar * spec.omega_start());
}

// omega(t) for adiabatic references; roundoff-level negative omega^2 at a
// touching minimum (tau == tau_c) is treated as zero.
inline double instantaneous_omega(const StrokeSpec& spec, double t) {
    const double w2 = protocol::frequency_squared(spec, t);
    const double floor = -1e-12 * spec.omega_start() * spec.omega_start();
    if (w2 < floor || std::isnan(w2)) {
        throw InvertedTrapError("omega^2(t) = " + std::to_string(w2) + " < 0 at t = " +
                                std::to_string(t) + "; adiabatic eigenenergies undefined");
    }
    return std::sqrt(std::max(w2, 0.0));
}

inline double strictly_positive_omega(const StrokeSpec& spec, double t) {
    const double w = instantaneous_omega(spec, t);
    if (!(w > 0.0)) {
        throw InvertedTrapError("omega(t) = 0 at t = " + std::to_string(t));
    }
    return w;
}

inline gaussian::GaussianState evolved_state(const OscillatorParams& params,
                                             const StrokeSpec& spec,
                                             const protocol::TrajectoryPoint& point) {
    const auto rho0 = gaussian::thermal_state(params, spec.omega_start());
    return gaussian::evolve_scaling(rho0, point, spec.omega_start(), params);
}

}  // namespace detail

/// Mean work along the shortcut in closed form.
inline double mean_work_sta(const OscillatorParams& params, const StrokeSpec& spec, double t) {
    const auto s = protocol::scaling_factor(spec, t);
    const double w2 = protocol::frequency_squared(spec, t);
    const double w0 = spec.omega_start();
    const double bracket =
        (s.bdot * s.bdot + w2 * s.b * s.b + w0 * w0 / (s.b * s.b)) / (2.0 * w0) - w0;
    return 0.5 * params.hbar * bracket * detail::thermal_coth(params, spec);
}

/// Mean work of the ideally slow process reaching the same frequency omega(t).
inline double mean_work_adiabatic(const OscillatorParams& params, const StrokeSpec& spec,
                                  double t) {
    const double w = detail::instantaneous_omega(spec, t);
    return 0.5 * params.hbar * (w - spec.omega_start()) * detail::thermal_coth(params, spec);
}

/// Two-point-measurement standard deviation of the work. With rho_0 diagonal
/// in H(0), <W^2> = <(H_H(t) - H(0))^2>, so Var W is the Wick variance of the
/// quadratic form S^T A_t S - A_0.
inline double work_std(const OscillatorParams& params, const StrokeSpec& spec, double t) {
    const auto point = protocol::trajectory_point(spec, t);
    const auto rho0 = gaussian::thermal_state(params, spec.omega_start());
    const gaussian::Mat2 S = gaussian::symplectic_map(point, spec.omega_start(), params.mass);
    const gaussian::Mat2 At = gaussian::hamiltonian_form(point.omega_sq, params.mass);
    const gaussian::Mat2 A0 =
        gaussian::hamiltonian_form(spec.omega_start() * spec.omega_start(), params.mass);
    const gaussian::Mat2 D = S.transpose() * At * S - A0;
    return std::sqrt(std::max(0.0, gaussian::quadratic_covariance(D, D, rho0)));
}

/// Nonequilibrium deviation from the adiabatic mean work.
inline double delta_w(const OscillatorParams& params, const StrokeSpec& spec, double t) {
    return mean_work_sta(params, spec, t) - mean_work_adiabatic(params, spec, t);
}

/// delta W from relative entropies, both with the fictitious equilibrium
/// reference (beta, omega(t)) and with the adiabatic reference (beta_t, omega(t)).
inline DeltaWDecomposition delta_w_via_relative_entropies(const OscillatorParams& params,
                                                          const StrokeSpec& spec, double t) {
    const auto point = protocol::trajectory_point(spec, t);
    const double wt = detail::strictly_positive_omega(spec, t);
    const auto rho_t = detail::evolved_state(params, spec, point);
    const gaussian::GibbsReference eq{params.beta, wt};
    const auto adiabatic = gaussian::AdiabaticReference::make(params.beta, spec.omega_start(), wt);
    const gaussian::GibbsReference ad = adiabatic.at(wt);
    const auto rho_ad = gaussian::thermal_state(ad, params);

    DeltaWDecomposition out{};
    out.rel_ent_t = gaussian::relative_entropy_to_gibbs(rho_t, eq, params);
    out.rel_ent_ad = gaussian::relative_entropy_to_gibbs(rho_ad, eq, params);
    out.rel_ent_alt = gaussian::relative_entropy_to_gibbs(rho_t, ad, params);
    out.via_equilibrium = (out.rel_ent_t - out.rel_ent_ad) / params.beta;
    out.via_adiabatic = out.rel_ent_alt / adiabatic.beta_t;
    return out;
}

/// Free-energy change F(beta, omega(t)) - F(beta, omega_start).
inline double free_energy_change(const OscillatorParams& params, const StrokeSpec& spec,
                                 double t) {
    const double wt = detail::strictly_positive_omega(spec, t);
    return gaussian::free_energy(params.beta, wt, params) -
           gaussian::free_energy(params.beta, spec.omega_start(), params);
}

/// Irreversible entropy beta (<W> - Delta F).
inline double irreversible_entropy(const OscillatorParams& params, const StrokeSpec& spec,
                                   double t) {
    return params.beta * (mean_work_sta(params, spec, t) - free_energy_change(params, spec, t));
}

inline WorkRecord work_record(const OscillatorParams& params, const StrokeSpec& spec, double t) {
    WorkRecord r;
    r.t = t;
    r.mean_w = mean_work_sta(params, spec, t);
    r.mean_w_ad = mean_work_adiabatic(params, spec, t);
    r.std_w = work_std(params, spec, t);
    r.delta_w = r.mean_w - r.mean_w_ad;
    r.dS_irr = irreversible_entropy(params, spec, t);
    const auto dec = delta_w_via_relative_entropies(params, spec, t);
    r.rel_ent_t = dec.rel_ent_t;
    r.rel_ent_ad = dec.rel_ent_ad;
    r.rel_ent_alt = dec.rel_ent_alt;
    return r;
}

/// Cut-off time of the stroke; zero when no ramp is needed.
inline double stroke_cutoff(const StrokeSpec& spec) {
    if (spec.omega_start() == spec.omega_end()) return 0.0;
    return protocol::cutoff_time(spec);
}

namespace detail {

inline double avg_delta_w_unchecked(const OscillatorParams& params, const StrokeSpec& spec) {
    if (spec.omega_start() == spec.omega_end()) return 0.0;
    auto integrand = [&](double t) { return delta_w(params, spec, t); };
    return numerics::adaptive_simpson(integrand, 0.0, spec.tau(), 1e-10, 16) / spec.tau();
}

}  // namespace detail

/// Time-averaged dissipated work tau^-1 int_0^tau delta W dt.
inline double avg_delta_w(const OscillatorParams& params, const StrokeSpec& spec) {
    const double tau_c = stroke_cutoff(spec);
    if (spec.tau() < tau_c) {
        throw CutoffViolationError("avg_delta_w: tau = " + std::to_string(spec.tau()) +
                                   " below cut-off tau_c = " + std::to_string(tau_c));
    }
    return detail::avg_delta_w_unchecked(params, spec);
}

/// tau_i = lo * (hi / lo)^(i / (n - 1)).
inline std::vector<double> geometric_taus(double lo, double hi, std::size_t n) {
    if (n < 2 || !(lo > 0.0) || !(hi > lo)) {
        throw InvalidParameter("geometric_taus: need n >= 2 and 0 < lo < hi");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
    }
    out.back() = hi;
    return out;
}

/// <delta W> over a list of durations for strokes omega_start -> omega_start / gamma^2,
/// with a least-squares power-law fit of log <delta W> against log tau.
inline DissipationSweep sweep_avg_delta_w(const OscillatorParams& params, double omega_start,
                                          double gamma, std::vector<double> tau_list) {
    if (tau_list.size() < 2) throw InvalidParameter("sweep_avg_delta_w: need >= 2 durations");
    std::sort(tau_list.begin(), tau_list.end());
    for (std::size_t i = 1; i < tau_list.size(); ++i) {
        if (!(tau_list[i] > tau_list[i - 1])) {
            throw InvalidParameter("sweep_avg_delta_w: durations must be distinct");
        }
    }
    const StrokeSpec base = StrokeSpec::from_gamma(omega_start, gamma, tau_list.front());
    DissipationSweep sweep;
    sweep.tau_c = stroke_cutoff(base);
    if (tau_list.front() < sweep.tau_c) {
        throw CutoffViolationError("sweep_avg_delta_w: tau = " + std::to_string(tau_list.front()) +
                                   " below cut-off tau_c = " + std::to_string(sweep.tau_c));
    }
    sweep.tau_values = tau_list;
    sweep.avg_delta_w.reserve(tau_list.size());
    for (double tau : tau_list) {
        sweep.avg_delta_w.push_back(detail::avg_delta_w_unchecked(params, base.with_tau(tau)));
    }
    if (gamma != 1.0) {
        const auto fit = numerics::fit_power_law(sweep.tau_values, sweep.avg_delta_w);
        sweep.fitted_exponent = fit.slope;
        sweep.r_squared = fit.r_squared;
    }
    return sweep;
}

}  // namespace sta::workstats
