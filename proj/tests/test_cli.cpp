#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "sta/cli.hpp"

namespace cli = sta::cli;
namespace fs = std::filesystem;

namespace {

cli::RunConfig command(const std::string& name) {
    cli::RunConfig c;
    c.command = name;
    return c;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<double> fields(const std::string& line) {
    std::vector<double> out;
    std::istringstream in(line);
    for (std::string f; std::getline(in, f, ',');) out.push_back(std::stod(f));
    return out;
}

int run_exe(const std::string& args) {
    const std::string cmd = std::string(STA_OTTO_EXE) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "sta_otto_cli_tests";
    fs::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST(CliStroke, DefaultRunHasVersionedHeaderAndFrictionlessEnd) {
    const auto out = cli::execute(command("stroke"));
    ASSERT_EQ(out.status, cli::kOk);
    const auto ls = lines(out.text);
    EXPECT_EQ(ls[0], "# sta_otto format-version 1");
    EXPECT_EQ(ls[1], "# command stroke");
    EXPECT_EQ(ls[2].rfind("# config {", 0), 0u);
    EXPECT_EQ(ls[3], "t,b,bdot,omega_sq,mean_w,mean_w_ad,std_w,delta_w,rel_ent_t_over_beta,rel_ent_ad_over_beta");
    ASSERT_EQ(ls.size(), 4u + 101u);
    const auto first = fields(ls[4]);
    for (std::size_t i : {4u, 5u, 6u, 7u}) EXPECT_EQ(first[i], 0.0);
    const auto last = fields(ls.back());
    EXPECT_EQ(last[0], 10.0);
    EXPECT_LT(std::abs(last[7]), 1e-8);
    for (const auto& l : std::vector<std::string>(ls.begin() + 4, ls.end())) {
        for (double v : fields(l)) EXPECT_TRUE(std::isfinite(v));
    }
}

TEST(CliStroke, SeventeenSignificantDigits) {
    auto c = command("stroke");
    c.samples = 3;
    const auto ls = lines(cli::execute(c).text);
    EXPECT_NE(ls.back().find("-1.0143531626899935"), std::string::npos);
}

TEST(CliStroke, ByteDeterministic) {
    auto c = command("stroke");
    c.samples = 21;
    EXPECT_EQ(cli::execute(c).text, cli::execute(c).text);
    c.format = "json";
    EXPECT_EQ(cli::execute(c).text, cli::execute(c).text);
    const auto j = nlohmann::json::parse(cli::execute(c).text);
    EXPECT_EQ(j["format_version"], 1);
    EXPECT_EQ(j["rows"].size(), 21u);
}

TEST(CliStroke, BelowCutoffIsInvalidInput) {
    auto c = command("stroke");
    c.tau = 5.0;
    std::ostringstream out, err;
    EXPECT_EQ(cli::run(c, out, err), cli::kInvalidInput);
    EXPECT_NE(err.str().find("cut-off"), std::string::npos);
}

TEST(CliSweep, SummaryCarriesCutoffAndFit) {
    auto c = command("sweep-tau");
    c.tau_points = 5;
    const auto ls = lines(cli::execute(c).text);
    ASSERT_EQ(ls.back().rfind("# summary ", 0), 0u);
    const auto summary = nlohmann::json::parse(ls.back().substr(10));
    EXPECT_NEAR(summary["tau_c"].get<double>(), sta::protocol::cutoff_time(1.0, 1.0 / 16.0), 1e-12);
    EXPECT_TRUE(summary.contains("fitted_exponent"));
    EXPECT_GT(summary["r_squared"].get<double>(), 0.99);
    EXPECT_EQ(ls.size(), 3u + 1u + 5u + 1u);
    EXPECT_NEAR(fields(ls[4])[0], 2.0 * summary["tau_c"].get<double>(), 1e-9);
}

TEST(CliSweep, NearlyFlatRampStillFits) {
    auto c = command("sweep-tau");
    c.set_gamma(1.01);
    c.tau_points = 4;
    const auto ls = lines(cli::execute(c).text);
    const auto summary = nlohmann::json::parse(ls.back().substr(10));
    EXPECT_LT(summary["fitted_exponent"].get<double>(), -1.5);
    EXPECT_GT(fields(ls[4])[1], 0.0);
}

TEST(CliSweep, RangeBelowCutoffRejected) {
    auto c = command("sweep-tau");
    c.tau_min = 1.0;
    std::ostringstream out, err;
    EXPECT_EQ(cli::run(c, out, err), cli::kInvalidInput);
}

TEST(CliCycle, JsonReport) {
    auto c = command("cycle");
    c.format = "json";
    const auto j = nlohmann::json::parse(cli::execute(c).text);
    const auto& r = j["report"];
    EXPECT_NEAR(r["efficiency"].get<double>(), 0.9375, 1e-10);
    EXPECT_NEAR(r["first_law_residual"].get<double>(), 0.0, 1e-10);
    EXPECT_TRUE(r["engine"].get<bool>());
    EXPECT_GE(r["qsl_bound"].get<double>(), r["power"].get<double>());
}

TEST(CliCycle, DegenerateCycleFlagsUnboundedSpeedLimit) {
    auto c = command("cycle");
    c.set_omega_f(1.0);
    c.format = "json";
    const auto r = nlohmann::json::parse(cli::execute(c).text)["report"];
    EXPECT_EQ(r["efficiency"].get<double>(), 0.0);
    EXPECT_TRUE(r["qsl_unbounded"].get<bool>());
    EXPECT_TRUE(r["qsl_bound"].is_null());
    c.format = "csv";
    EXPECT_NE(cli::execute(c).text.find("qsl_unbounded,1"), std::string::npos);
}

TEST(CliCutoff, MatchesLibrary) {
    auto c = command("cutoff");
    c.set_gamma(2.0);
    const auto ls = lines(cli::execute(c).text);
    EXPECT_EQ(ls[3], "gamma,omega_f,tau_c");
    EXPECT_NEAR(fields(ls[4])[2], sta::protocol::cutoff_time(1.0, 0.25), 1e-15);
}

TEST(CliOracle, ForcedTruncationIsNumericalFailure) {
    auto c = command("oracle-check");
    c.fock_dim = 16;
    c.samples = 3;
    std::ostringstream out, err;
    EXPECT_EQ(cli::run(c, out, err), cli::kNumericalFailure);
    EXPECT_NE(err.str().find("cannot resolve <W>"), std::string::npos);
}

TEST(CliOracle, SmallGammaPasses) {
    auto c = command("oracle-check");
    c.set_gamma(2.0);
    c.samples = 4;
    const auto out = cli::execute(c);
    EXPECT_EQ(out.status, cli::kOk);
    const auto ls = lines(out.text);
    const auto summary = nlohmann::json::parse(ls.back().substr(10));
    EXPECT_TRUE(summary["pass"].get<bool>());
    // t = 0 row: both paths agree to rounding
    EXPECT_LT(fields(ls[4]).back(), 1e-12);
}

TEST(CliConfig, FlagsOverrideFileOverridesDefaults) {
    const auto path = scratch("cfg.json");
    {
        std::ofstream f(path);
        f << R"({"tau": 12.5, "omega_f": 0.25, "beta": 2.0, "samples": 5})";
    }
    auto c = cli::load_config_file(path.string());
    EXPECT_EQ(c.tau, 12.5);
    EXPECT_DOUBLE_EQ(c.resolved_gamma(), 2.0);
    EXPECT_EQ(c.beta, 2.0);
    EXPECT_EQ(c.beta_cold, 20.0);  // untouched default

    const auto out = scratch("stroke.csv");
    ASSERT_EQ(run_exe("stroke --config " + path.string() + " --tau 15 --out " + out.string()), 0);
    std::ifstream in(out);
    std::stringstream text;
    text << in.rdbuf();
    const auto ls = lines(text.str());
    const auto echo = nlohmann::json::parse(ls[2].substr(9));
    EXPECT_EQ(echo["tau"], 15.0);
    EXPECT_EQ(echo["beta"], 2.0);
    EXPECT_EQ(echo["gamma"], 2.0);
    EXPECT_EQ(ls.size(), 4u + 5u);

    // a flag for the ramp target replaces the file's other spelling of it
    ASSERT_EQ(run_exe("cutoff --config " + path.string() + " --gamma 4 --out " + out.string()), 0);
    std::ifstream in2(out);
    std::stringstream text2;
    text2 << in2.rdbuf();
    EXPECT_NE(text2.str().find("\"omega_f\":0.0625"), std::string::npos);
}

TEST(CliConfig, BadFilesAreInvalidInput) {
    const auto bad = scratch("bad.json");
    {
        std::ofstream f(bad);
        f << R"({"tau": "long"})";
    }
    EXPECT_THROW(cli::load_config_file(bad.string()), cli::UsageError);
    {
        std::ofstream f(bad);
        f << R"({"colour": 3})";
    }
    EXPECT_THROW(cli::load_config_file(bad.string()), cli::UsageError);
    EXPECT_THROW(cli::load_config_file(scratch("missing.json").string()), cli::UsageError);
    EXPECT_EQ(run_exe("stroke --config " + bad.string()), 1);
}

TEST(CliConfig, InconsistentRampTargetRejected) {
    auto c = command("cutoff");
    c.gamma = 4.0;
    c.omega_f = 0.25;
    EXPECT_THROW(cli::execute(c), sta::InvalidParameter);
}

TEST(CliExe, ExitCodes) {
    EXPECT_EQ(run_exe("cutoff"), 0);
    EXPECT_EQ(run_exe("stroke --tau -1"), 1);
    EXPECT_EQ(run_exe("stroke --samples 1"), 1);
    EXPECT_EQ(run_exe("stroke --format xml"), 1);
    EXPECT_EQ(run_exe("launch"), 1);
    EXPECT_EQ(run_exe(""), 1);
    EXPECT_EQ(run_exe("cutoff --omega-f 1"), 1);
    EXPECT_EQ(run_exe("oracle-check --fock-dim 16 --samples 3"), 2);
    EXPECT_EQ(run_exe("--help"), 0);
}

TEST(CliExe, OutputFilesAreByteIdentical) {
    const auto a = scratch("a.csv");
    const auto b = scratch("b.csv");
    ASSERT_EQ(run_exe("cycle --out " + a.string()), 0);
    ASSERT_EQ(run_exe("cycle --out " + b.string()), 0);
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    // only the echoed output path differs
    std::string ta = sa.str(), tb = sb.str();
    const auto pa = ta.find(a.string());
    ASSERT_NE(pa, std::string::npos);
    ta.replace(pa, a.string().size(), b.string());
    EXPECT_EQ(ta, tb);
}
