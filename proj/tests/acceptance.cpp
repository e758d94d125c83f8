// Acceptance harness: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sta/cycle.hpp"
#include "sta/fock_oracle.hpp"
#include "sta/gaussian.hpp"
#include "sta/protocol.hpp"
#include "sta/workstats.hpp"

namespace fs = std::filesystem;
namespace ws = sta::workstats;
using sta::OscillatorParams;
using sta::StrokeSpec;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d (%s): %s\n", pass ? "PASS" : "FAIL", id, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

template <class Fn>
void guarded(int id, const std::string& name, Fn fn) {
    try {
        fn();
    } catch (const std::exception& e) {
        report(id, name, false, std::string("exception: ") + e.what());
    }
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "sta_otto_acceptance";
    fs::create_directories(dir);
    return dir;
}

int run_exe(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd =
        std::string(STA_OTTO_EXE) + " " + args + " > " + stdout_file.string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// shared with criterion 9
double worst_row_defect = 0.0;
double worst_parity = 0.0;
double worst_normalization = 0.0;
double most_negative_entropy = 0.0;

void note_entropies(double a, double b, double c) {
    most_negative_entropy = std::min({most_negative_entropy, a, b, c});
}

void criterion1() {
    double sup = 0.0;
    for (double tau : {10.0, 20.0}) {
        const auto spec = StrokeSpec::from_gamma(1.0, 4.0, tau);
        auto w2 = [&](double t) { return sta::protocol::frequency_squared(spec, t); };
        const auto traj = sta::protocol::ermakov_forward(spec, w2);
        for (const auto& s : traj) {
            sup = std::max(sup, std::abs(s.b - sta::protocol::scaling_factor(spec, s.t).b));
        }
    }
    report(1, "protocol round-trip", sup <= 1e-8, fmt("sup |b_ode - b_poly| = %.3e (tol 1e-8)", sup));
}

void criterion2() {
    double worst_dw = 0.0;
    double worst_p = 0.0;
    for (double gamma : {2.0, 4.0}) {
        const double tc = sta::protocol::cutoff_time(1.0, 1.0 / (gamma * gamma));
        for (double beta : {0.5, 1.0, 2.0}) {
            const OscillatorParams p = OscillatorParams{}.with_beta(beta);
            for (double tau : {tc, 2.0 * tc, 10.0}) {
                const auto spec = StrokeSpec::from_gamma(1.0, gamma, tau);
                worst_dw = std::max(worst_dw, std::abs(ws::delta_w(p, spec, tau)));
                const sta::fock::StrokeOracle oracle(p, spec, {tau});
                const auto tm = oracle.transitions(0);
                for (Eigen::Index n = 0; n < tm.p.rows(); ++n) {
                    for (Eigen::Index k = 0; k < tm.p.cols(); ++k) {
                        worst_p = std::max(worst_p, std::abs(tm.p(n, k) - (n == k ? 1.0 : 0.0)));
                    }
                }
                worst_row_defect = std::max(worst_row_defect, tm.max_row_defect());
                worst_parity = std::max(worst_parity, tm.max_parity_violation());
                const auto d = oracle.work_distribution(0);
                worst_normalization =
                    std::max(worst_normalization, std::abs(d.total_probability() - 1.0));
                const auto e = oracle.entropies(0);
                note_entropies(e.rel_ent_t, e.rel_ent_ad, e.rel_ent_alt);
            }
        }
    }
    report(2, "frictionless endpoint", worst_dw <= 1e-8 && worst_p <= 1e-6,
           fmt("max |dW(tau)| = %.3e (tol 1e-8), ", worst_dw) +
               fmt("max |p_nk - delta_nk| = %.3e (tol 1e-6) over 18 strokes", worst_p));
}

void criterion3() {
    const OscillatorParams p;
    const auto spec = StrokeSpec::from_gamma(1.0, 4.0, 10.0);
    const double exact = 0.5 * (1.0 / 16.0 - 1.0) / std::tanh(0.5);
    const double gauss = ws::mean_work_sta(p, spec, 10.0);
    const double fock = sta::fock::moment(sta::fock::work_distribution(p, spec, 10.0), 1);
    const double e = std::max(rel(gauss, exact), rel(fock, exact));
    report(3, "closed-form mean work", e <= 1e-4,
           fmt("exact %.10f, ", exact) + fmt("gaussian %.10f, ", gauss) + fmt("fock %.10f, ", fock) +
               fmt("max rel err %.3e (tol 1e-4)", e));
}

void criterion4() {
    const OscillatorParams p;
    bool pass = true;
    std::string detail;
    for (double gamma : {2.0, 4.0}) {
        const double tc = sta::protocol::cutoff_time(1.0, 1.0 / (gamma * gamma));
        const auto sweep =
            ws::sweep_avg_delta_w(p, 1.0, gamma, ws::geometric_taus(2.0 * tc, 20.0 * tc, 16));
        pass = pass && sweep.fitted_exponent >= -1.15 && sweep.fitted_exponent <= -0.85;
        detail += fmt("gamma=%.0f: ", gamma) + fmt("exponent %.4f", sweep.fitted_exponent) +
                  fmt(" (R^2 %.5f); ", sweep.r_squared);
    }
    report(4, "dissipated-work power law", pass, detail + "band [-1.15, -0.85]");
}

void criterion5() {
    const OscillatorParams p;
    const auto spec = StrokeSpec::from_gamma(1.0, 4.0, 10.0);
    double worst_irr = 0.0;
    double worst_dw = 0.0;
    for (int i = 1; i <= 10; ++i) {
        const double t = spec.tau() * i / 11.0;
        const auto r = ws::work_record(p, spec, t);
        const auto dec = ws::delta_w_via_relative_entropies(p, spec, t);
        worst_irr = std::max(worst_irr, std::abs(r.dS_irr - r.rel_ent_t));
        worst_dw = std::max({worst_dw, std::abs(dec.via_equilibrium - r.delta_w),
                             std::abs(dec.via_adiabatic - r.delta_w),
                             std::abs(dec.via_adiabatic - dec.via_equilibrium)});
        note_entropies(r.rel_ent_t, r.rel_ent_ad, r.rel_ent_alt);
    }
    report(5, "entropy identities", worst_irr <= 1e-8 && worst_dw <= 1e-6,
           fmt("max |dS_irr - S(rho_t||eq)| = %.3e (tol 1e-8), ", worst_irr) +
               fmt("max spread of three dW forms = %.3e (tol 1e-6)", worst_dw));
}

void criterion6() {
    namespace cy = sta::cycle;
    const OscillatorParams p;
    const cy::CycleSpec base;
    const double closed = 1.0 - base.omega_f / base.omega0;
    const double tc = base.tau_c();
    double worst_eff = 0.0, worst_first_law = 0.0, worst_sum = 0.0;
    for (double t1 : {tc, 2.0 * tc, 10.0}) {
        for (double t3 : {tc, 2.0 * tc, 10.0}) {
            cy::CycleSpec c = base;
            c.tau1 = t1;
            c.tau3 = t3;
            const auto r = cy::run_superadiabatic_cycle(c, p);
            worst_eff = std::max(worst_eff, std::abs(r.efficiency - closed));
            worst_first_law = std::max(worst_first_law, std::abs(r.first_law_residual));
            worst_sum = std::max(worst_sum, std::abs(cy::sum_adiabatic_work(c, p) - (r.w1 + r.w3)));
        }
    }
    double worst_carnot = -1.0;
    int engines = 0;
    for (double wf : {1.0 / 64.0, 1.0 / 16.0, 0.25, 0.5}) {
        for (double bc : {2.0, 5.0, 20.0, 50.0, 200.0}) {
            cy::CycleSpec c = base;
            c.omega_f = wf;
            c.beta_cold = bc;
            c.tau1 = c.tau3 = 2.0 * c.tau_c();
            const auto r = cy::run_superadiabatic_cycle(c, p);
            worst_first_law = std::max(worst_first_law, std::abs(r.first_law_residual));
            if (!r.engine) continue;
            ++engines;
            worst_carnot = std::max(worst_carnot, r.efficiency - r.carnot_efficiency);
        }
    }
    const bool pass = worst_eff <= 1e-10 && worst_first_law <= 1e-10 && worst_sum <= 1e-12 &&
                      worst_carnot <= 0.0 && engines > 0;
    report(6, "cycle closed form", pass,
           fmt("max |eta - (1 - omega_f/omega0)| = %.3e over 3x3 grid (tol 1e-10), ", worst_eff) +
               fmt("max first-law residual %.3e (tol 1e-10), ", worst_first_law) +
               fmt("summed-work mismatch %.3e (tol 1e-12), ", worst_sum) +
               fmt("max eta - eta_Carnot = %.4f ", worst_carnot) +
               fmt("over %.0f engine points", engines));
}

void criterion7() {
    namespace cy = sta::cycle;
    const OscillatorParams p;
    const cy::CycleSpec base;
    const double tc = base.tau_c();
    const std::vector<double> taus = {tc, 1.5 * tc, 10.0, 20.0, 40.0};
    const std::vector<double> betas = {20.0, 30.0, 50.0, 100.0, 200.0};
    double min_margin = 1e300;
    double worst_fid = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        for (std::size_t j = 0; j < betas.size(); ++j) {
            cy::CycleSpec c = base;
            c.tau1 = c.tau3 = taus[i];
            c.beta_cold = betas[j];
            const auto r = cy::run_superadiabatic_cycle(c, p);
            if (!r.qsl || r.qsl->unbounded) {
                min_margin = -1.0;
                continue;
            }
            min_margin = std::min(min_margin, r.qsl->bound - r.power);
            const bool corner = (i == 0 || i + 1 == taus.size()) && (j == 0 || j + 1 == betas.size());
            if (corner) {
                const double g = std::pow(std::cos(r.qsl->bures_angle), 2);
                const double f = sta::fock::uhlmann_fidelity_gibbs(
                    c.beta_hot, c.omega_f, c.beta_hot, c.omega0, sta::fock::FockConfig{}, p);
                worst_fid = std::max(worst_fid, std::abs(g - f));
            }
        }
    }
    report(7, "speed-limit bound", min_margin >= 0.0 && worst_fid <= 1e-6,
           fmt("min (bound - power) over 5x5 sweep = %.4e, ", min_margin) +
               fmt("max |F_gauss - F_fock| at corners = %.3e (tol 1e-6)", worst_fid));
}

void criterion8() {
    const fs::path out = scratch_dir() / "oracle_check.csv";
    const int status = run_exe("oracle-check", out);
    const OscillatorParams p;
    const auto spec = StrokeSpec::from_gamma(1.0, 4.0, 10.0);
    const std::vector<double> times = {2.5, 5.0, 7.5, 10.0};
    const sta::fock::StrokeOracle small(p, spec, times, sta::fock::FockConfig::fixed(200));
    const sta::fock::StrokeOracle large(p, spec, times, sta::fock::FockConfig::fixed(400));
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto a = small.work_distribution(i);
        const auto b = large.work_distribution(i);
        const double ma = sta::fock::moment(a, 1), mb = sta::fock::moment(b, 1);
        const double sa = std::sqrt(sta::fock::moment(a, 2) - ma * ma);
        const double sb = std::sqrt(sta::fock::moment(b, 2) - mb * mb);
        worst = std::max({worst, rel(ma, mb), rel(sa, sb)});
    }
    report(8, "oracle equivalence", status == 0 && worst < 1e-6,
           fmt("oracle-check exit %.0f, ", status) +
               fmt("max rel change of <W>, Delta W from N=200 to N=400 = %.3e (tol 1e-6)", worst));
}

void criterion9() {
    // Fock invariants along the default stroke, on top of those gathered in criterion 2
    const OscillatorParams p;
    const auto spec = StrokeSpec::from_gamma(1.0, 4.0, 10.0);
    std::vector<double> times;
    for (int i = 0; i <= 10; ++i) times.push_back(i);
    const sta::fock::StrokeOracle oracle(p, spec, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto tm = oracle.transitions(i);
        worst_row_defect = std::max(worst_row_defect, tm.max_row_defect());
        worst_parity = std::max(worst_parity, tm.max_parity_violation());
        worst_normalization = std::max(
            worst_normalization, std::abs(oracle.work_distribution(i).total_probability() - 1.0));
        const auto e = oracle.entropies(i);
        note_entropies(e.rel_ent_t, e.rel_ent_ad, e.rel_ent_alt);
    }
    for (double beta : {0.5, 1.0, 2.0}) {
        for (double gamma : {2.0, 4.0}) {
            const auto s = StrokeSpec::from_gamma(1.0, gamma, 10.0);
            for (int i = 1; i <= 10; ++i) {
                const auto r = ws::work_record(p.with_beta(beta), s, i);
                note_entropies(r.rel_ent_t, r.rel_ent_ad, r.rel_ent_alt);
            }
        }
    }

    const fs::path dir = scratch_dir();
    bool deterministic = true;
    const std::vector<std::string> commands = {"stroke", "stroke --format json", "sweep-tau",
                                               "cycle", "cutoff --gamma 2",
                                               "oracle-check --gamma 2 --samples 5"};
    for (const auto& cmd : commands) {
        const int s1 = run_exe(cmd, dir / "run1.out");
        const int s2 = run_exe(cmd, dir / "run2.out");
        deterministic = deterministic && s1 == 0 && s2 == 0 &&
                        slurp(dir / "run1.out") == slurp(dir / "run2.out");
    }
    // entropies are nonnegative up to roundoff in the log-sum terms
    const bool pass = worst_row_defect <= 1e-8 && worst_parity <= 1e-10 &&
                      worst_normalization <= 1e-8 && most_negative_entropy >= -1e-10 &&
                      deterministic;
    report(9, "structural invariants", pass,
           fmt("row defect %.3e (tol 1e-8), ", worst_row_defect) +
               fmt("parity %.3e (tol 1e-10), ", worst_parity) +
               fmt("normalization %.3e (tol 1e-8), ", worst_normalization) +
               fmt("min relative entropy %.3e, ", most_negative_entropy) +
               "CLI reruns " + (deterministic ? "byte-identical" : "differ"));
}

}  // namespace

int main() {
    guarded(1, "protocol round-trip", criterion1);
    guarded(2, "frictionless endpoint", criterion2);
    guarded(3, "closed-form mean work", criterion3);
    guarded(4, "dissipated-work power law", criterion4);
    guarded(5, "entropy identities", criterion5);
    guarded(6, "cycle closed form", criterion6);
    guarded(7, "speed-limit bound", criterion7);
    guarded(8, "oracle equivalence", criterion8);
    guarded(9, "structural invariants", criterion9);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
