#pragma once

// Command implementations behind the sta_otto executable. Each command renders
// its whole output into a string so runs are byte-deterministic and testable
// without a process boundary.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sta/cycle.hpp"
#include "sta/errors.hpp"
#include "sta/fock_oracle.hpp"
#include "sta/params.hpp"
#include "sta/protocol.hpp"
#include "sta/workstats.hpp"

namespace sta::cli {

using json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr double kOracleTolerance = 1e-4;

enum ExitCode : int {
    kOk = 0,
    kInvalidInput = 1,
    kNumericalFailure = 2,
    kAcceptanceFailure = 3,
};

/// Raised for malformed command lines and config files.
class UsageError : public Error {
  public:
    explicit UsageError(const std::string& msg) : Error(msg) {}
};

/// Settings shared by all commands. Unset optionals take command defaults.
struct RunConfig {
    std::string command;
    std::optional<double> gamma;
    std::optional<double> omega_f;
    double tau = 10.0;
    std::optional<double> tau_min;
    std::optional<double> tau_max;
    int tau_points = 16;
    double beta = 1.0;
    double beta_cold = 20.0;
    std::optional<int> fock_dim;
    std::optional<int> samples;
    std::string out;
    std::string format = "csv";

    /// Ramp target: gamma and omega_f describe the same thing, so setting
    /// either one replaces both.
    void set_gamma(double g) {
        gamma = g;
        omega_f.reset();
    }
    void set_omega_f(double w) {
        omega_f = w;
        gamma.reset();
    }

    double omega0() const { return 1.0; }

    double resolved_gamma() const {
        if (gamma && omega_f) {
            const double from_w = std::sqrt(omega0() / *omega_f);
            if (std::abs(from_w - *gamma) > 1e-12 * *gamma) {
                throw InvalidParameter("gamma and omega_f disagree: gamma = " + std::to_string(*gamma) +
                                       ", sqrt(omega0 / omega_f) = " + std::to_string(from_w));
            }
        }
        if (omega_f) {
            if (!(std::isfinite(*omega_f) && *omega_f > 0.0)) {
                throw InvalidParameter("omega_f must be finite and > 0");
            }
            return std::sqrt(omega0() / *omega_f);
        }
        const double g = gamma.value_or(4.0);
        if (!(std::isfinite(g) && g > 0.0)) throw InvalidParameter("gamma must be finite and > 0");
        return g;
    }

    double resolved_omega_f() const {
        if (omega_f && !gamma) return *omega_f;
        const double g = resolved_gamma();
        return omega0() / (g * g);
    }

    int resolved_samples() const {
        const int def = command == "oracle-check" ? 11 : 101;
        return samples.value_or(def);
    }

    OscillatorParams params() const {
        OscillatorParams p;
        p.omega0 = omega0();
        p.beta = beta;
        p.validate();
        return p;
    }

    StrokeSpec stroke() const { return StrokeSpec(omega0(), resolved_omega_f(), tau); }

    fock::FockConfig fock_config() const {
        if (fock_dim) {
            if (*fock_dim < 16) throw InvalidParameter("fock_dim must be >= 16");
            return fock::FockConfig::fixed(static_cast<std::size_t>(*fock_dim));
        }
        return fock::FockConfig{};
    }

    void validate() const {
        if (format != "csv" && format != "json") {
            throw InvalidParameter("format must be csv or json, got '" + format + "'");
        }
        auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!positive(tau)) throw InvalidParameter("tau must be finite and > 0");
        if (!positive(beta)) throw InvalidParameter("beta must be finite and > 0");
        if (!positive(beta_cold)) throw InvalidParameter("beta_cold must be finite and > 0");
        if (tau_min && !positive(*tau_min)) throw InvalidParameter("tau_min must be finite and > 0");
        if (tau_max && !positive(*tau_max)) throw InvalidParameter("tau_max must be finite and > 0");
        if (resolved_samples() < 2) throw InvalidParameter("samples must be >= 2");
        if (tau_points < 2) throw InvalidParameter("tau_points must be >= 2");
        resolved_gamma();
    }

    /// Flat JSON config: keys are the long flag names with '_' for '-'.
    void apply_json(const json& doc) {
        if (!doc.is_object()) throw UsageError("config file must hold a flat JSON object");
        auto number = [&](const std::string& key) {
            const json& v = doc.at(key);
            if (!v.is_number()) throw UsageError("config key '" + key + "' must be a number");
            return v.get<double>();
        };
        auto integer = [&](const std::string& key) {
            const json& v = doc.at(key);
            if (!v.is_number_integer()) throw UsageError("config key '" + key + "' must be an integer");
            return v.get<int>();
        };
        auto text = [&](const std::string& key) {
            const json& v = doc.at(key);
            if (!v.is_string()) throw UsageError("config key '" + key + "' must be a string");
            return v.get<std::string>();
        };
        const bool has_gamma = doc.contains("gamma");
        const bool has_omega_f = doc.contains("omega_f");
        for (const auto& [key, value] : doc.items()) {
            if (key == "gamma") {
                if (has_omega_f) gamma = number(key); else set_gamma(number(key));
            } else if (key == "omega_f") {
                if (has_gamma) omega_f = number(key); else set_omega_f(number(key));
            } else if (key == "tau") {
                tau = number(key);
            } else if (key == "tau_min") {
                tau_min = number(key);
            } else if (key == "tau_max") {
                tau_max = number(key);
            } else if (key == "tau_points") {
                tau_points = integer(key);
            } else if (key == "beta") {
                beta = number(key);
            } else if (key == "beta_cold") {
                beta_cold = number(key);
            } else if (key == "fock_dim") {
                fock_dim = integer(key);
            } else if (key == "samples") {
                samples = integer(key);
            } else if (key == "out") {
                out = text(key);
            } else if (key == "format") {
                format = text(key);
            } else {
                throw UsageError("unknown config key '" + key + "'");
            }
        }
    }

    json echo() const {
        json j;
        j["command"] = command;
        j["gamma"] = resolved_gamma();
        j["omega0"] = omega0();
        j["omega_f"] = resolved_omega_f();
        j["tau"] = tau;
        j["tau_min"] = tau_min ? json(*tau_min) : json(nullptr);
        j["tau_max"] = tau_max ? json(*tau_max) : json(nullptr);
        j["tau_points"] = tau_points;
        j["beta"] = beta;
        j["beta_cold"] = beta_cold;
        j["fock_dim"] = fock_dim ? json(*fock_dim) : json(nullptr);
        j["samples"] = resolved_samples();
        j["format"] = format;
        j["out"] = out;
        return j;
    }
};

inline RunConfig load_config_file(const std::string& path, RunConfig base = {}) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("config file '" + path + "': " + e.what());
    }
    base.apply_json(doc);
    return base;
}

namespace detail {

/// 17 significant digits; negative zero is written as 0.
inline std::string num(double v) {
    if (v == 0.0) return "0";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

inline std::string csv_header(const RunConfig& cfg) {
    std::string s = "# sta_otto format-version " + std::to_string(kFormatVersion) + "\n";
    s += "# command " + cfg.command + "\n";
    s += "# config " + cfg.echo().dump() + "\n";
    return s;
}

inline std::string render_table(const RunConfig& cfg, const Table& t,
                                const std::optional<json>& summary = std::nullopt) {
    if (cfg.format == "json") {
        json j;
        j["format_version"] = kFormatVersion;
        j["config"] = cfg.echo();
        j["columns"] = t.columns;
        j["rows"] = t.rows;
        if (summary) j["summary"] = *summary;
        return j.dump(2) + "\n";
    }
    std::string s = csv_header(cfg);
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
        if (i) s += ',';
        s += t.columns[i];
    }
    s += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) s += ',';
            s += num(row[i]);
        }
        s += '\n';
    }
    if (summary) s += "# summary " + summary->dump() + "\n";
    return s;
}

inline std::vector<double> uniform_times(double tau, int n) {
    std::vector<double> ts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ts[static_cast<std::size_t>(i)] = tau * i / (n - 1);
    ts.back() = tau;
    return ts;
}

inline void require_above_cutoff(const StrokeSpec& spec) {
    const double tc = workstats::stroke_cutoff(spec);
    if (spec.tau() < tc) {
        throw CutoffViolationError("tau = " + num(spec.tau()) + " is below the cut-off tau_c = " +
                                   num(tc) + "; the trap would invert");
    }
}

inline double discrepancy(double gauss, double fock) {
    return std::abs(gauss - fock) / std::max(std::abs(gauss), 1.0);
}

}  // namespace detail

struct Output {
    std::string text;
    int status = kOk;
};

inline Output cmd_stroke(const RunConfig& cfg) {
    const OscillatorParams params = cfg.params();
    const StrokeSpec spec = cfg.stroke();
    detail::require_above_cutoff(spec);
    detail::Table t;
    t.columns = {"t",      "b",     "bdot",    "omega_sq", "mean_w", "mean_w_ad", "std_w",
                 "delta_w", "rel_ent_t_over_beta", "rel_ent_ad_over_beta"};
    for (double time : detail::uniform_times(spec.tau(), cfg.resolved_samples())) {
        const auto p = protocol::trajectory_point(spec, time);
        const auto r = workstats::work_record(params, spec, time);
        t.rows.push_back({time, p.b, p.bdot, p.omega_sq, r.mean_w, r.mean_w_ad, r.std_w, r.delta_w,
                          r.rel_ent_t / params.beta, r.rel_ent_ad / params.beta});
    }
    return {detail::render_table(cfg, t), kOk};
}

inline Output cmd_sweep_tau(const RunConfig& cfg) {
    const OscillatorParams params = cfg.params();
    const double gamma = cfg.resolved_gamma();
    if (gamma == 1.0) throw InvalidParameter("sweep-tau needs gamma != 1");
    const double tau_c = protocol::cutoff_time(cfg.omega0(), cfg.resolved_omega_f());
    const double lo = cfg.tau_min.value_or(2.0 * tau_c);
    const double hi = cfg.tau_max.value_or(20.0 * tau_c);
    if (lo < tau_c) {
        throw CutoffViolationError("tau_min = " + detail::num(lo) + " is below the cut-off tau_c = " +
                                   detail::num(tau_c));
    }
    const auto taus = workstats::geometric_taus(lo, hi, static_cast<std::size_t>(cfg.tau_points));
    const auto sweep = workstats::sweep_avg_delta_w(params, cfg.omega0(), gamma, taus);
    detail::Table t;
    t.columns = {"tau", "avg_delta_w"};
    for (std::size_t i = 0; i < sweep.tau_values.size(); ++i) {
        t.rows.push_back({sweep.tau_values[i], sweep.avg_delta_w[i]});
    }
    json summary;
    summary["tau_c"] = sweep.tau_c;
    summary["fitted_exponent"] = sweep.fitted_exponent;
    summary["r_squared"] = sweep.r_squared;
    return {detail::render_table(cfg, t, summary), kOk};
}

inline json cycle_json(const cycle::CycleReport& r) {
    json j;
    j["w1"] = r.w1;
    j["w3"] = r.w3;
    j["q2"] = r.q2;
    j["q4"] = r.q4;
    j["net_work"] = r.net_work;
    j["efficiency"] = r.efficiency;
    j["otto_efficiency_closed_form"] = r.otto_efficiency_closed_form;
    j["carnot_efficiency"] = r.carnot_efficiency;
    j["power"] = r.power;
    j["first_law_residual"] = r.first_law_residual;
    j["tau_c"] = r.tau_c;
    j["engine"] = r.engine;
    if (r.qsl) {
        j["qsl_bound"] = r.qsl->unbounded ? json(nullptr) : json(r.qsl->bound);
        j["qsl_unbounded"] = r.qsl->unbounded;
        j["e_tau"] = r.qsl->e_tau;
        j["e_tau_raw"] = r.qsl->e_tau_raw;
        j["de_tau"] = r.qsl->de_tau;
        j["bures_angle"] = r.qsl->bures_angle;
    }
    return j;
}

inline Output cmd_cycle(const RunConfig& cfg) {
    cycle::CycleSpec c;
    c.omega0 = cfg.omega0();
    c.omega_f = cfg.resolved_omega_f();
    c.beta_hot = cfg.beta;
    c.beta_cold = cfg.beta_cold;
    c.tau1 = cfg.tau;
    c.tau3 = cfg.tau;
    const auto report = cycle::run_superadiabatic_cycle(c, cfg.params());
    const json j = cycle_json(report);
    if (cfg.format == "json") {
        json doc;
        doc["format_version"] = kFormatVersion;
        doc["config"] = cfg.echo();
        doc["report"] = j;
        return {doc.dump(2) + "\n", kOk};
    }
    std::string s = detail::csv_header(cfg) + "quantity,value\n";
    for (const auto& [key, value] : j.items()) {
        s += key + ',';
        if (value.is_boolean()) {
            s += value.get<bool>() ? "1" : "0";
        } else if (value.is_null()) {
            s += "inf";
        } else {
            s += detail::num(value.get<double>());
        }
        s += '\n';
    }
    return {s, kOk};
}

inline Output cmd_cutoff(const RunConfig& cfg) {
    const double tau_c = protocol::cutoff_time(cfg.omega0(), cfg.resolved_omega_f());
    detail::Table t;
    t.columns = {"gamma", "omega_f", "tau_c"};
    t.rows.push_back({cfg.resolved_gamma(), cfg.resolved_omega_f(), tau_c});
    return {detail::render_table(cfg, t), kOk};
}

inline Output cmd_oracle_check(const RunConfig& cfg) {
    const OscillatorParams params = cfg.params();
    const StrokeSpec spec = cfg.stroke();
    detail::require_above_cutoff(spec);
    const auto times = detail::uniform_times(spec.tau(), cfg.resolved_samples());
    std::optional<fock::StrokeOracle> oracle;
    try {
        oracle.emplace(params, spec, times, cfg.fock_config());
    } catch (const TruncationError& e) {
        throw TruncationError(
            std::string("oracle-check: Fock oracle cannot resolve <W>, Delta W and the relative "
                        "entropies: ") + e.what());
    }

    const std::vector<std::string> names = {"mean_w", "std_w", "rel_ent_t", "rel_ent_ad",
                                            "rel_ent_alt"};
    std::vector<double> worst(names.size(), 0.0);
    detail::Table t;
    t.columns = {"t"};
    for (const auto& n : names) {
        t.columns.push_back(n + "_gauss");
        t.columns.push_back(n + "_fock");
    }
    t.columns.push_back("max_rel_discrepancy");
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto r = workstats::work_record(params, spec, times[i]);
        const auto dist = oracle->work_distribution(i);
        const double m1 = fock::moment(dist, 1);
        const double m2 = fock::moment(dist, 2);
        const auto ent = oracle->entropies(i);
        const double gauss[] = {r.mean_w, r.std_w, r.rel_ent_t, r.rel_ent_ad, r.rel_ent_alt};
        const double fk[] = {m1, std::sqrt(std::max(0.0, m2 - m1 * m1)), ent.rel_ent_t,
                             ent.rel_ent_ad, ent.rel_ent_alt};
        std::vector<double> row = {times[i]};
        double row_worst = 0.0;
        for (std::size_t q = 0; q < names.size(); ++q) {
            row.push_back(gauss[q]);
            row.push_back(fk[q]);
            const double d = detail::discrepancy(gauss[q], fk[q]);
            worst[q] = std::max(worst[q], d);
            row_worst = std::max(row_worst, d);
        }
        row.push_back(row_worst);
        t.rows.push_back(std::move(row));
    }
    json summary;
    summary["fock_dim"] = oracle->dim();
    summary["tolerance"] = kOracleTolerance;
    bool pass = true;
    for (std::size_t q = 0; q < names.size(); ++q) {
        summary["max_rel_discrepancy"][names[q]] = worst[q];
        pass = pass && worst[q] < kOracleTolerance;
    }
    summary["pass"] = pass;
    return {detail::render_table(cfg, t, summary), pass ? kOk : kAcceptanceFailure};
}

inline Output execute(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.command == "stroke") return cmd_stroke(cfg);
    if (cfg.command == "sweep-tau") return cmd_sweep_tau(cfg);
    if (cfg.command == "cycle") return cmd_cycle(cfg);
    if (cfg.command == "cutoff") return cmd_cutoff(cfg);
    if (cfg.command == "oracle-check") return cmd_oracle_check(cfg);
    throw UsageError("unknown command '" + cfg.command + "'");
}

/// Exit status for an error raised by a command.
inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const InvalidParameter*>(&e) ||
        dynamic_cast<const DomainError*>(&e) || dynamic_cast<const CutoffViolationError*>(&e) ||
        dynamic_cast<const BracketError*>(&e)) {
        return kInvalidInput;
    }
    return kNumericalFailure;
}

/// Runs `cfg`, writing the result to cfg.out (or `out`) and errors to `err`.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    Output result;
    try {
        result = execute(cfg);
    } catch (const std::exception& e) {
        err << "sta_otto " << cfg.command << ": " << e.what() << '\n';
        return exit_code_for(e);
    }
    if (cfg.out.empty()) {
        out << result.text;
    } else {
        std::ofstream f(cfg.out, std::ios::binary);
        if (!f) {
            err << "sta_otto: cannot write '" << cfg.out << "'\n";
            return kInvalidInput;
        }
        f << result.text;
    }
    if (result.status == kAcceptanceFailure) {
        err << "sta_otto oracle-check: discrepancy above " << kOracleTolerance << '\n';
    }
    return result.status;
}

}  // namespace sta::cli
