#pragma once

#include <cmath>
#include <string>

#include "sta/errors.hpp"

namespace sta {

/// Oscillator constants in natural units. `beta` is the inverse temperature
/// of the bath that prepares the initial Gibbs state.
struct OscillatorParams {
    double mass = 1.0;
    double hbar = 1.0;
    double omega0 = 1.0;
    double beta = 1.0;

    void validate() const {
        if (!(mass > 0.0)) throw InvalidParameter("OscillatorParams: mass must be > 0");
        if (!(hbar > 0.0)) throw InvalidParameter("OscillatorParams: hbar must be > 0");
        if (!(omega0 > 0.0)) throw InvalidParameter("OscillatorParams: omega0 must be > 0");
        if (!(beta > 0.0)) throw InvalidParameter("OscillatorParams: beta must be > 0");
    }

    OscillatorParams with_beta(double b) const {
        OscillatorParams p = *this;
        p.beta = b;
        return p;
    }
};

/// One frequency ramp omega_start -> omega_end over a duration tau.
/// gamma = sqrt(omega_start / omega_end) is the target value of the scaling factor.
class StrokeSpec {
  public:
    StrokeSpec(double omega_start, double omega_end, double tau)
        : omega_start_(omega_start), omega_end_(omega_end), tau_(tau) {
        if (!(omega_start > 0.0)) throw InvalidParameter("StrokeSpec: omega_start must be > 0");
        if (!(omega_end > 0.0)) throw InvalidParameter("StrokeSpec: omega_end must be > 0");
        if (!(tau > 0.0)) throw InvalidParameter("StrokeSpec: tau must be > 0");
        gamma_ = std::sqrt(omega_start / omega_end);
    }

    /// Stroke that drives the scaling factor from 1 to `gamma`, starting at `omega_start`.
    static StrokeSpec from_gamma(double omega_start, double gamma, double tau) {
        if (!(gamma > 0.0)) throw InvalidParameter("StrokeSpec: gamma must be > 0");
        return StrokeSpec(omega_start, omega_start / (gamma * gamma), tau);
    }

    double omega_start() const { return omega_start_; }
    double omega_end() const { return omega_end_; }
    double tau() const { return tau_; }
    double gamma() const { return gamma_; }
    bool is_expansion() const { return gamma_ > 1.0; }

    StrokeSpec with_tau(double tau) const { return StrokeSpec(omega_start_, omega_end_, tau); }

  private:
    double omega_start_;
    double omega_end_;
    double tau_;
    double gamma_;
};

}  // namespace sta
