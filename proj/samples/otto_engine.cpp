// Walks through one super-adiabatic Otto cycle: cut-off time, the work
// statistics of the expansion stroke, and the cycle bookkeeping.

#include <cstdio>

#include "sta/cycle.hpp"
#include "sta/protocol.hpp"
#include "sta/workstats.hpp"

int main() {
    sta::OscillatorParams params;  // hbar = m = omega0 = 1, beta = 1
    const double gamma = 4.0;     // omega_f = omega0 / 16

    const double tau_c = sta::protocol::cutoff_time(1.0, 1.0 / (gamma * gamma));
    std::printf("cut-off time tau_c = %.6f\n", tau_c);

    const auto stroke = sta::StrokeSpec::from_gamma(1.0, gamma, 10.0);
    std::printf("%6s %12s %12s %12s %12s\n", "t", "<W>", "<W>_ad", "std W", "delta W");
    for (int i = 0; i <= 10; ++i) {
        const double t = stroke.tau() * i / 10.0;
        const auto r = sta::workstats::work_record(params, stroke, t);
        std::printf("%6.2f %12.6f %12.6f %12.6f %12.3e\n", t, r.mean_w, r.mean_w_ad, r.std_w,
                    r.delta_w);
    }

    sta::cycle::CycleSpec c;  // omega_f = 1/16, beta_c = 20, tau1 = tau3 = 10
    const auto report = sta::cycle::run_superadiabatic_cycle(c, params);
    std::printf("\nw1 = %.6f  w3 = %.6f  q2 = %.6f  q4 = %.6f\n", report.w1, report.w3, report.q2,
                report.q4);
    std::printf("efficiency = %.10f (Otto %.10f, Carnot %.4f)\n", report.efficiency,
                report.otto_efficiency_closed_form, report.carnot_efficiency);
    std::printf("power = %.6f  speed-limit bound = %.6f\n", report.power, report.qsl->bound);
    return 0;
}
