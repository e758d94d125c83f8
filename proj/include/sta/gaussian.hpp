#pragma once

// Zero-mean single-mode Gaussian states and the functionals the engine needs.
//
// A state is the symmetrised covariance matrix V of r = (x, p):
//   V_ij = <{r_i, r_j}> / 2.
// Quadratic observables Q = r^T A r (A symmetric) then have
//   <Q> = tr(A V),
//   <{Q_A, Q_B}> / 2 - <Q_A><Q_B> = 2 tr(A V B V) + (hbar^2 / 2) tr(A J B J),
// with J the symplectic form; this Wick rule is all the dynamics ever needs.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "sta/errors.hpp"
#include "sta/params.hpp"
#include "sta/protocol.hpp"

namespace sta::gaussian {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPurityTolerance = 1e-9;

class GaussianState {
  public:
    explicit GaussianState(const Mat2& cov, double hbar = 1.0) : cov_(cov), hbar_(hbar) {
        if (!(hbar > 0.0)) throw InvalidParameter("GaussianState: hbar must be > 0");
        const double scale = std::max(std::abs(cov(0, 1)), std::abs(cov(1, 0)));
        if (std::abs(cov(0, 1) - cov(1, 0)) > 1e-12 * std::max(1.0, scale)) {
            throw UnphysicalStateError("GaussianState: covariance not symmetric");
        }
        cov_(1, 0) = cov_(0, 1);
        if (!(cov_(0, 0) > 0.0) || !(cov_.determinant() > 0.0)) {
            throw UnphysicalStateError("GaussianState: covariance not positive definite");
        }
        if (symplectic_eigenvalue_raw() < 0.5 - kPurityTolerance) {
            throw UnphysicalStateError("GaussianState: uncertainty relation violated, nu = " +
                                       std::to_string(symplectic_eigenvalue_raw()));
        }
    }

    const Mat2& cov() const { return cov_; }
    Vec2 mean() const { return Vec2::Zero(); }
    double hbar() const { return hbar_; }
    double var_x() const { return cov_(0, 0); }
    double var_p() const { return cov_(1, 1); }
    double cov_xp() const { return cov_(0, 1); }

    /// nu = sqrt(det V) / hbar, clamped to 1/2 within the purity tolerance.
    double symplectic_eigenvalue() const { return std::max(0.5, symplectic_eigenvalue_raw()); }

  private:
    double symplectic_eigenvalue_raw() const { return std::sqrt(cov_.determinant()) / hbar_; }

    Mat2 cov_;
    double hbar_;
};

/// Gibbs state exp(-beta_ref H(omega_ref)) / Z used as a reference.
struct GibbsReference {
    double beta_ref;
    double omega_ref;

    void validate() const {
        if (!(beta_ref > 0.0)) throw InvalidParameter("GibbsReference: beta_ref must be > 0");
        if (!(omega_ref > 0.0)) throw InvalidParameter("GibbsReference: omega_ref must be > 0");
    }
};

/// Inverse temperature that keeps Gibbs populations fixed while the frequency
/// moves from omega_start to omega_t: beta_t * omega_t = beta0 * omega_start.
struct AdiabaticReference {
    double beta_t;

    static AdiabaticReference make(double beta0, double omega_start, double omega_t) {
        if (!(omega_t > 0.0)) {
            throw InvertedTrapError("AdiabaticReference: omega(t) must be > 0");
        }
        return {beta0 * omega_start / omega_t};
    }

    GibbsReference at(double omega_t) const { return {beta_t, omega_t}; }
};

inline double coth(double x) { return 1.0 / std::tanh(x); }

/// ln(2 sinh(x / 2)) without overflow for large x.
inline double log_two_sinh_half(double x) {
    if (!(x > 0.0)) throw InvalidParameter("log_two_sinh_half: argument must be > 0");
    return 0.5 * x + std::log1p(-std::exp(-x));
}

inline GaussianState thermal_state(const OscillatorParams& params, double omega) {
    if (!(omega > 0.0)) throw InvalidParameter("thermal_state: omega must be > 0");
    const double c = coth(0.5 * params.beta * params.hbar * omega);
    Mat2 cov;
    cov << params.hbar * c / (2.0 * params.mass * omega), 0.0, 0.0,
        params.hbar * params.mass * omega * c / 2.0;
    return GaussianState(cov, params.hbar);
}

inline GaussianState thermal_state(const GibbsReference& ref, const OscillatorParams& params) {
    ref.validate();
    return thermal_state(params.with_beta(ref.beta_ref), ref.omega_ref);
}

/// Heisenberg map r(t) = S r(0) for a ramp started at omega_start, built from the
/// classical solutions u = b cos(omega_start eta), v = b sin(omega_start eta).
inline Mat2 symplectic_map(const protocol::TrajectoryPoint& point, double omega_start,
                           double mass) {
    if (!(point.b > 0.0)) throw DomainError("symplectic_map: scaling factor must be > 0");
    const double phase = omega_start * point.eta;
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    const double u = point.b * c;
    const double v = point.b * s;
    const double udot = point.bdot * c - (omega_start / point.b) * s;
    const double vdot = point.bdot * s + (omega_start / point.b) * c;
    Mat2 S;
    S << u, v / (mass * omega_start), mass * udot, vdot / omega_start;
    return S;
}

inline GaussianState evolve_scaling(const GaussianState& state0,
                                    const protocol::TrajectoryPoint& point, double omega_start,
                                    const OscillatorParams& params) {
    const Mat2 S = symplectic_map(point, omega_start, params.mass);
    const Mat2 cov = S * state0.cov() * S.transpose();
    return GaussianState(0.5 * (cov + cov.transpose()), state0.hbar());
}

/// Quadratic-form matrix A of H = p^2/2m + m omega^2 x^2 / 2 = r^T A r.
inline Mat2 hamiltonian_form(double omega_sq, double mass) {
    Mat2 A;
    A << 0.5 * mass * omega_sq, 0.0, 0.0, 0.5 / mass;
    return A;
}

inline Mat2 symplectic_form() {
    Mat2 J;
    J << 0.0, 1.0, -1.0, 0.0;
    return J;
}

inline double quadratic_mean(const Mat2& A, const GaussianState& state) {
    return (A * state.cov()).trace();
}

/// Symmetrised covariance <{Q_A, Q_B}>/2 - <Q_A><Q_B> of two quadratic forms.
inline double quadratic_covariance(const Mat2& A, const Mat2& B, const GaussianState& state) {
    const Mat2& V = state.cov();
    const Mat2 J = symplectic_form();
    const double hbar = state.hbar();
    return 2.0 * (A * V * B * V).trace() + 0.5 * hbar * hbar * (A * J * B * J).trace();
}

inline double mean_energy_sq(const GaussianState& state, double omega_sq,
                             const OscillatorParams& params) {
    return state.var_p() / (2.0 * params.mass) + 0.5 * params.mass * omega_sq * state.var_x();
}

inline double mean_energy(const GaussianState& state, double omega,
                          const OscillatorParams& params) {
    return mean_energy_sq(state, omega * omega, params);
}

/// Var(H) for H with frequency^2 omega_sq (may be negative for an inverted trap).
inline double energy_variance_sq(const GaussianState& state, double omega_sq,
                                 const OscillatorParams& params) {
    const Mat2 A = hamiltonian_form(omega_sq, params.mass);
    return std::max(0.0, quadratic_covariance(A, A, state));
}

inline double energy_variance(const GaussianState& state, double omega,
                              const OscillatorParams& params) {
    return energy_variance_sq(state, omega * omega, params);
}

inline double partition_function(double beta, double omega, const OscillatorParams& params) {
    return std::exp(-log_two_sinh_half(beta * params.hbar * omega));
}

inline double free_energy(double beta, double omega, const OscillatorParams& params) {
    if (!(beta > 0.0)) throw InvalidParameter("free_energy: beta must be > 0");
    return log_two_sinh_half(beta * params.hbar * omega) / beta;
}

inline double von_neumann_entropy(const GaussianState& state) {
    const double nu = state.symplectic_eigenvalue();
    const double plus = nu + 0.5;
    const double minus = nu - 0.5;
    double s = plus * std::log(plus);
    if (minus > 0.0) s -= minus * std::log(minus);
    return s;
}

/// S(rho || rho_G) = beta_ref <H_ref> - S(rho) + ln Z_ref.
inline double relative_entropy_to_gibbs(const GaussianState& state, const GibbsReference& ref,
                                        const OscillatorParams& params) {
    ref.validate();
    const double energy = mean_energy(state, ref.omega_ref, params);
    return ref.beta_ref * energy - von_neumann_entropy(state) -
           log_two_sinh_half(ref.beta_ref * params.hbar * ref.omega_ref);
}

/// Uhlmann fidelity of two zero-mean single-mode Gaussian states.
inline double gaussian_fidelity(const GaussianState& a, const GaussianState& b) {
    const double hbar = a.hbar();
    const Mat2 sa = 2.0 * a.cov() / hbar;
    const Mat2 sb = 2.0 * b.cov() / hbar;
    const double big_delta = (sa + sb).determinant();
    const double small_delta = std::max(0.0, (sa.determinant() - 1.0) * (sb.determinant() - 1.0));
    // 2 / (sqrt(D + d) - sqrt(d)), rationalised
    double f = 2.0 * (std::sqrt(big_delta + small_delta) + std::sqrt(small_delta)) / big_delta;
    if (!(f >= 0.0) || f > 1.0 + 1e-12) {
        throw NumericalConsistencyError("gaussian_fidelity: F = " + std::to_string(f) +
                                        " outside [0, 1]");
    }
    return std::min(f, 1.0);
}

/// Bures angle arccos(sqrt(F)) in [0, pi/2].
inline double bures_angle(const GaussianState& a, const GaussianState& b) {
    return std::acos(std::sqrt(gaussian_fidelity(a, b)));
}

}  // namespace sta::gaussian
