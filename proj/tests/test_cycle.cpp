#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "sta/cycle.hpp"
#include "sta/fock_oracle.hpp"

namespace cy = sta::cycle;
using sta::OscillatorParams;

namespace {

double coth(double x) { return 1.0 / std::tanh(x); }

cy::CycleSpec default_cycle() { return cy::CycleSpec{}; }

}  // namespace

TEST(Cycle, DefaultEngineReachesOttoEfficiency) {
    const OscillatorParams p;
    const auto r = cy::run_superadiabatic_cycle(default_cycle(), p);
    EXPECT_TRUE(r.engine);
    EXPECT_NEAR(r.efficiency, 0.9375, 1e-10);
    EXPECT_DOUBLE_EQ(r.otto_efficiency_closed_form, 0.9375);
    EXPECT_NEAR(r.first_law_residual, 0.0, 1e-10);
    EXPECT_LT(r.efficiency, r.carnot_efficiency);
    EXPECT_NEAR(r.w1, 0.5 * (1.0 / 16.0 - 1.0) * coth(0.5), 1e-12);
    EXPECT_NEAR(r.w3, 0.5 * (1.0 - 1.0 / 16.0) * coth(0.5 * 20.0 / 16.0), 1e-12);
    EXPECT_NEAR(r.power, -(r.w1 + r.w3) / 20.0, 1e-15);
}

TEST(Cycle, HeatsMatchPopulationBookkeeping) {
    const OscillatorParams p;
    const auto c = default_cycle();
    const auto r = cy::run_superadiabatic_cycle(c, p);
    const double wf = c.omega_f;
    EXPECT_NEAR(r.q2, 0.5 * wf * (coth(0.5 * c.beta_cold * wf) - coth(0.5 * c.beta_hot)), 1e-12);
    EXPECT_NEAR(r.q4, 0.5 * (coth(0.5 * c.beta_hot) - coth(0.5 * c.beta_cold * wf)), 1e-12);
}

TEST(Cycle, SummedAdiabaticWorkMatchesStrokes) {
    const OscillatorParams p;
    for (double bc : {20.0, 30.0, 100.0}) {
        auto c = default_cycle();
        c.beta_cold = bc;
        const auto r = cy::run_superadiabatic_cycle(c, p);
        EXPECT_NEAR(cy::sum_adiabatic_work(c, p), r.w1 + r.w3, 1e-12) << bc;
    }
    auto balanced = default_cycle();
    balanced.beta_cold = 16.0;  // beta_c omega_f = beta omega0
    EXPECT_NEAR(cy::sum_adiabatic_work(balanced, p), 0.0, 1e-15);
}

TEST(Cycle, EngineConditionSign) {
    const OscillatorParams p;
    for (double bc : {2.0, 10.0, 15.0, 17.0, 40.0}) {
        auto c = default_cycle();
        c.beta_cold = bc;
        const auto r = cy::run_superadiabatic_cycle(c, p);
        // net extraction exactly when coth(beta_c omega_f / 2) < coth(beta omega0 / 2)
        EXPECT_EQ(r.engine, coth(0.5 * bc * c.omega_f) < coth(0.5 * c.beta_hot)) << bc;
        EXPECT_NEAR(r.first_law_residual, 0.0, 1e-10);
    }
}

TEST(Cycle, EfficiencyIndependentOfDurations) {
    const OscillatorParams p;
    const double tc = default_cycle().tau_c();
    for (double t1 : {tc, 2 * tc, 10.0}) {
        for (double t3 : {tc, 2 * tc, 10.0}) {
            auto c = default_cycle();
            c.tau1 = t1;
            c.tau3 = t3;
            const auto r = cy::run_superadiabatic_cycle(c, p);
            EXPECT_NEAR(r.efficiency, 1.0 - c.omega_f / c.omega0, 1e-10);
        }
    }
}

TEST(Cycle, NeverBeatsCarnotWhileRunningAsEngine) {
    const OscillatorParams p;
    for (double wf : {0.05, 1.0 / 16.0, 0.25, 0.5}) {
        for (double bc : {2.0, 5.0, 20.0, 80.0}) {
            auto c = default_cycle();
            c.omega_f = wf;
            c.beta_cold = bc;
            c.tau1 = c.tau3 = 2.0 * c.tau_c();
            const auto r = cy::run_superadiabatic_cycle(c, p);
            if (r.engine) {
                EXPECT_GE(r.efficiency, 0.0);
                EXPECT_LE(r.efficiency, r.carnot_efficiency);
            }
        }
    }
}

TEST(Cycle, DegenerateCycle) {
    const OscillatorParams p;
    auto c = default_cycle();
    c.omega_f = 1.0;
    const auto r = cy::run_superadiabatic_cycle(c, p);
    EXPECT_EQ(r.efficiency, 0.0);
    EXPECT_FALSE(std::signbit(r.efficiency));
    EXPECT_NEAR(r.w1 + r.w3, 0.0, 1e-15);
    EXPECT_FALSE(r.engine);
    ASSERT_TRUE(r.qsl.has_value());
    EXPECT_TRUE(r.qsl->unbounded);
}

TEST(Cycle, IsochoreLengthsOnlyDilutePower) {
    const OscillatorParams p;
    auto c = default_cycle();
    const auto base = cy::run_superadiabatic_cycle(c, p);
    c.tau2 = c.tau4 = 5.0;
    const auto slow = cy::run_superadiabatic_cycle(c, p);
    EXPECT_NEAR(slow.power, base.power * 20.0 / 30.0, 1e-15);
    EXPECT_EQ(slow.efficiency, base.efficiency);
}

TEST(Cycle, Validation) {
    const OscillatorParams p;
    auto c = default_cycle();
    c.tau1 = 5.0;
    EXPECT_THROW(cy::run_superadiabatic_cycle(c, p), sta::CutoffViolationError);
    c = default_cycle();
    c.beta_cold = 0.5;
    EXPECT_THROW(cy::run_superadiabatic_cycle(c, p), sta::InvalidParameter);
    c = default_cycle();
    c.omega_f = 2.0;
    EXPECT_THROW(cy::run_superadiabatic_cycle(c, p), sta::InvalidParameter);
    c = default_cycle();
    c.tau2 = -1.0;
    EXPECT_THROW(cy::run_superadiabatic_cycle(c, p), sta::InvalidParameter);
    c = default_cycle();
    c.tau3 = 12.0;
    EXPECT_FALSE(cy::run_superadiabatic_cycle(c, p).qsl.has_value());
    EXPECT_THROW(cy::qsl_power_bound(c, p), sta::InvalidParameter);
}

TEST(Isochore, ThermalInputExchangesNoHeat) {
    const OscillatorParams p;
    const auto s = sta::gaussian::thermal_state(p.with_beta(3.0), 0.5);
    EXPECT_NEAR(cy::isochore_heat(s, {3.0, 0.5}, 0.5, p), 0.0, 1e-15);
    EXPECT_THROW(cy::isochore_heat(s, {3.0, 0.4}, 0.5, p), sta::InvalidParameter);
}

TEST(SpeedLimit, BoundExceedsPowerAcrossSweep) {
    const OscillatorParams p;
    const double tc = default_cycle().tau_c();
    for (double tau : {tc, 1.5 * tc, 10.0, 20.0, 40.0}) {
        for (double bc : {20.0, 50.0, 200.0}) {
            auto c = default_cycle();
            c.tau1 = c.tau3 = tau;
            c.beta_cold = bc;
            const auto r = cy::run_superadiabatic_cycle(c, p);
            ASSERT_TRUE(r.qsl.has_value());
            EXPECT_FALSE(r.qsl->unbounded);
            EXPECT_GE(r.qsl->bound, r.power) << tau << " " << bc;
            EXPECT_GT(r.qsl->e_tau_raw, r.qsl->e_tau);
            EXPECT_GT(r.qsl->e_tau, 0.0);
        }
    }
}

TEST(SpeedLimit, PowerDecreasesWithStrokeDuration) {
    const OscillatorParams p;
    double prev = 1e300;
    const double tc = default_cycle().tau_c();
    for (double tau : {tc, 12.0, 16.0, 32.0, 64.0}) {
        auto c = default_cycle();
        c.tau1 = c.tau3 = tau;
        const double power = cy::run_superadiabatic_cycle(c, p).power;
        EXPECT_LE(power, prev);
        prev = power;
    }
}

TEST(SpeedLimit, BuresAngleAgreesWithFockFidelity) {
    const OscillatorParams p;
    const auto q = cy::qsl_power_bound(default_cycle(), p);
    const double f = sta::fock::uhlmann_fidelity_gibbs(1.0, 1.0 / 16.0, 1.0, 1.0, sta::fock::FockConfig{}, p);
    EXPECT_NEAR(std::cos(q.bures_angle) * std::cos(q.bures_angle), f, 1e-8);
}
