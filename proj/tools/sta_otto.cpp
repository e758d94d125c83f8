// sta_otto: super-adiabatic quantum Otto engine data generator.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sta/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Super-adiabatic quantum Otto engine: strokes, sweeps, cycles, oracle checks"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    double gamma = 0.0, omega_f = 0.0, tau = 0.0, tau_min = 0.0, tau_max = 0.0;
    double beta = 0.0, beta_cold = 0.0;
    int tau_points = 0, fock_dim = 0, samples = 0;
    std::string out, format, config_path;

    auto* o_gamma = app.add_option("--gamma", gamma, "Scaling target sqrt(omega0/omega_f) (default 4)");
    auto* o_omega_f = app.add_option("--omega-f", omega_f, "Final frequency in units of omega0");
    auto* o_tau = app.add_option("--tau", tau, "Stroke duration (default 10)");
    auto* o_tau_min = app.add_option("--tau-min", tau_min, "Sweep start (default 2 tau_c)");
    auto* o_tau_max = app.add_option("--tau-max", tau_max, "Sweep end (default 20 tau_c)");
    auto* o_tau_points = app.add_option("--tau-points", tau_points, "Sweep points (default 16)");
    auto* o_beta = app.add_option("--beta", beta, "Inverse temperature of the hot bath (default 1)");
    auto* o_beta_cold = app.add_option("--beta-cold", beta_cold, "Cold-bath inverse temperature (default 20)");
    auto* o_fock_dim = app.add_option("--fock-dim", fock_dim, "Fixed Fock dimension (disables escalation)");
    auto* o_samples = app.add_option("--samples", samples, "Time samples (stroke 101, oracle-check 11)");
    auto* o_out = app.add_option("--out", out, "Output file (default stdout)");
    auto* o_format = app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--config", config_path, "Flat JSON config file; flags take precedence");

    const char* commands[][2] = {
        {"stroke", "Time series along one expansion stroke"},
        {"sweep-tau", "Time-averaged dissipated work against stroke duration"},
        {"cycle", "Four-stroke Otto cycle report"},
        {"cutoff", "Shortest stroke duration that keeps the trap confining"},
        {"oracle-check", "Compare the Gaussian path with the Fock-basis oracle"},
    };
    for (const auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return sta::cli::kInvalidInput;
    }

    sta::cli::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = sta::cli::load_config_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "sta_otto: " << e.what() << '\n';
        return sta::cli::kInvalidInput;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (*o_gamma && *o_omega_f) {
        cfg.gamma = gamma;
        cfg.omega_f = omega_f;
    } else if (*o_gamma) {
        cfg.set_gamma(gamma);
    } else if (*o_omega_f) {
        cfg.set_omega_f(omega_f);
    }
    if (*o_tau) cfg.tau = tau;
    if (*o_tau_min) cfg.tau_min = tau_min;
    if (*o_tau_max) cfg.tau_max = tau_max;
    if (*o_tau_points) cfg.tau_points = tau_points;
    if (*o_beta) cfg.beta = beta;
    if (*o_beta_cold) cfg.beta_cold = beta_cold;
    if (*o_fock_dim) cfg.fock_dim = fock_dim;
    if (*o_samples) cfg.samples = samples;
    if (*o_out) cfg.out = out;
    if (*o_format) cfg.format = format;

    return sta::cli::run(cfg, std::cout, std::cerr);
}
