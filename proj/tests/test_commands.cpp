#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "twpa/commands.hpp"
#include "twpa/config.hpp"
#include "twpa/errors.hpp"

using namespace twpa;
using Catch::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::vector<std::vector<double>> parse_csv(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            header = true;
            continue;
        }
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            row.push_back(cell.empty() ? std::nan("") : std::strtod(cell.c_str(), nullptr));
        }
        rows.push_back(row);
    }
    return rows;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("twpa_unit_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(TWPA_CLI_PATH) + " " + args + " --quiet 2>/dev/null").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("profiles set the chain size", "[config]") {
    CHECK(config::defaults(config::Profile::Ci).chain.n_cells == 100);
    CHECK(config::defaults(config::Profile::Full).chain.n_cells == 700);
    CHECK(config::profile_from_string("full") == config::Profile::Full);
    CHECK_THROWS_AS(config::profile_from_string("fast"), ConfigError);
}

TEST_CASE("config overlay and validation", "[config]") {
    const auto cfg = config::parse(json::parse(R"({"master_seed": 9, "chain": {"n_cells": 30},
                                                  "flux_sweep": {"flux": {"values": [0.4, 0.5]}}})"),
                                   config::Profile::Ci);
    CHECK(cfg.master_seed == 9);
    CHECK(cfg.chain.n_cells == 30);
    CHECK(cfg.flux_sweep.flux.resolve() == std::vector<double>{0.4, 0.5});
    // Without an explicit chain seed the disorder follows the master seed.
    CHECK(cfg.chain_seed() == 9);
    CHECK(cfg.resolved_chain().rng_seed == 9);
    const auto pinned = config::parse(json::parse(R"({"master_seed": 9, "chain": {"rng_seed": 4}})"),
                                      config::Profile::Ci);
    CHECK(pinned.chain_seed() == 4);

    auto rejects = [](const char* text, const char* fragment) {
        try {
            (void)config::parse(json::parse(text), config::Profile::Ci);
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find(fragment) != std::string::npos);
            return;
        }
        FAIL("accepted " << text);
    };
    rejects(R"({"chian": {}})", "chian");
    rejects(R"({"chain": {"n_cell": 30}})", "chain.n_cell");
    rejects(R"({"flux_sweep": {"flux": {"start": 0.3, "stop": 0.7, "points": 0}}})", "empty grid");
    rejects(R"({"chain": {"n_cells": "many"}})", "n_cells");
    rejects(R"({"chain": {"r": 0.4}})", "r");
    rejects(R"({"profile": "full"})", "profile");
    rejects(R"({"sms": {"n_rep": 1}})", "n_rep");
}

TEST_CASE("config hash tracks results, not locations", "[config]") {
    auto cfg = config::defaults(config::Profile::Ci);
    const std::string h = config::config_hash(cfg);
    CHECK(h.size() == 16);
    cfg.output_dir = "/elsewhere";
    cfg.threads = 3;
    CHECK(config::config_hash(cfg) == h);
    cfg.master_seed = 2;
    CHECK(config::config_hash(cfg) != h);
    const auto round = config::parse(config::to_json(config::defaults(config::Profile::Ci)),
                                     config::Profile::Ci);
    CHECK(config::config_hash(round) == h);
}

TEST_CASE("derived seeds are distinct", "[config]") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        seen.insert(config::derive_seed(1, i));
    }
    seen.insert(config::derive_seed(2, 0));
    CHECK(seen.size() == 1001);
    CHECK(config::derive_seed(5, 3) == config::derive_seed(5, 3));
}

TEST_CASE("coeffs table is antisymmetric in beta", "[commands]") {
    auto cfg = config::defaults(config::Profile::Ci);
    const cli::Output out = cli::cmd_coeffs(cfg);
    REQUIRE(out.is_csv());
    CHECK(out.csv.rfind("# twpa-coeffs v1 config=" + config::config_hash(cfg), 0) == 0);
    CHECK(out.csv.find("flux,alpha_tilde,beta,gamma,phi_star,inductance\n") != std::string::npos);
    const auto rows = parse_csv(out.csv);
    REQUIRE(rows.size() == 401);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& a = rows[i];
        const auto& b = rows[rows.size() - 1 - i];
        CHECK(a[0] == Approx(-b[0]).margin(1e-12));
        CHECK(std::abs(a[2] + b[2]) < 1e-10);
        CHECK(std::abs(a[3] - b[3]) < 1e-10);
    }
    // Two sign changes of gamma per flux quantum over four quanta.
    CHECK(out.meta.at("gamma_zero_crossings").size() == 8);
    CHECK(out.meta.at("beta_extrema").size() == 8);
}

TEST_CASE("unknown commands are configuration errors", "[commands]") {
    CHECK_THROWS_AS(cli::run_command("explode", config::defaults(config::Profile::Ci)), ConfigError);
    CHECK(cli::command_names().size() == 8);
}

TEST_CASE("single-mode squeezing pipeline", "[commands]") {
    auto cfg = config::parse(json::parse(R"({"sms": {"n_rep": 200000, "phase": {"values": [0.0, 3.141592653589793]}}})"),
                             config::Profile::Ci);
    const cli::Output out = cli::cmd_sms(cfg);
    const json& pts = out.json.at("points");
    REQUIRE(pts.size() == 2);
    for (const auto& p : pts) {
        CHECK(p.at("s_min_db").get<double>() == Approx(-3.0103).margin(5.0 * p.at("s_x_stat_db").get<double>() + 0.05));
        CHECK(p.at("gain_systematic").size() == 2);
    }
    // Pump phase pi rotates the squeezed axis by pi/2.
    CHECK(pts[0].at("s_x_db").get<double>() < 0.0);
    CHECK(pts[1].at("s_p_db").get<double>() < 0.0);
    CHECK(cli::cmd_sms(cfg).primary() == out.primary());
}

TEST_CASE("two-mode pipeline recovers E_N", "[commands]") {
    auto cfg = config::parse(json::parse(R"({"tms": {"n_rep": 200000, "r": {"values": [0.0, 0.5]}}})"),
                             config::Profile::Ci);
    const json pts = cli::cmd_tms(cfg).json.at("points");
    REQUIRE(pts.size() == 2);
    CHECK(pts[1].at("e_n_exact").get<double>() == Approx(1.0).margin(1e-12));
    CHECK(pts[1].at("e_n").get<double>() == Approx(1.0).margin(5.0 * pts[1].at("e_n_stat").get<double>()));
    CHECK(pts[0].at("e_n_exact").get<double>() == 0.0);
}

TEST_CASE("synthetic SNTJ fit command reports truth next to the fit", "[commands]") {
    auto cfg = config::parse(json::parse(R"({"sntj_fit": {"synthetic_points": 20001}})"), config::Profile::Ci);
    const json fits = cli::cmd_sntj_fit(cfg).json.at("fits");
    REQUIRE(fits.size() == 6);
    for (const auto& f : fits) {
        CHECK(f.at("g_sys_db").get<double>() == Approx(f.at("truth").at("g_sys_db").get<double>()).margin(0.1));
    }
}

TEST_CASE("normalization and attenuation commands", "[commands]") {
    auto cfg = config::parse(json::parse(R"({"normalize": {"eta": 0.9}})"), config::Profile::Ci);
    const json n = cli::cmd_normalize(cfg).json;
    CHECK(n.at("upsilon").get<double>() == Approx(190705.39963206803).epsilon(1e-12));
    CHECK(n.at("eta_from_chain") == false);
    CHECK(n.at("upsilon_gain_plus_1db").get<double>() < n.at("upsilon").get<double>());

    cfg = config::parse(json::parse(R"({"attenuation": {"eta_db": -0.5, "s21_off_db": 2.0}})"), config::Profile::Ci);
    CHECK(cli::cmd_attenuation(cfg).json.at("a_in_db").get<double>() == Approx(2.0 + 0.5 - 61.7).margin(1e-12));
}

TEST_CASE("command line exit codes", "[cli]") {
    const fs::path dir = scratch("exit");
    {
        std::ofstream(dir / "bad.json") << R"({"chain": {"n_cell": 3}})";
        std::ofstream(dir / "empty.json") << R"({"coeffs": {"flux": {"values": []}}})";
        std::ofstream(dir / "broken.json") << "{";
    }
    CHECK(run_cli("coeffs --out " + (dir / "ok").string()) == 0);
    CHECK(run_cli("coeffs --config " + (dir / "bad.json").string() + " --out " + (dir / "x").string()) == 2);
    CHECK(run_cli("coeffs --config " + (dir / "empty.json").string() + " --out " + (dir / "x").string()) == 2);
    CHECK(run_cli("coeffs --config " + (dir / "broken.json").string() + " --out " + (dir / "x").string()) == 2);
    CHECK(run_cli("coeffs --profile huge --out " + (dir / "x").string()) == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(fs::exists(dir / "ok" / "result.csv"));
    const json meta = json::parse(slurp(dir / "ok" / "meta.json"));
    CHECK(meta.at("command") == "coeffs");
    CHECK(meta.at("schema_version") == 1);
    CHECK(meta.at("master_seed") == 1);
    CHECK(meta.contains("git_revision"));
    CHECK(meta.at("config_hash") == config::config_hash(config::defaults(config::Profile::Ci)));
}

TEST_CASE("re-runs are byte identical", "[cli]") {
    const fs::path dir = scratch("rerun");
    {
        std::ofstream(dir / "c.json") << R"({"sms": {"n_rep": 5000, "phase": {"values": [0.3]}},
                                            "tms": {"n_rep": 5000, "r": {"values": [0.5]}},
                                            "sntj_fit": {"synthetic_points": 2001}})";
    }
    for (const std::string cmd : {"coeffs", "sms", "tms", "sntj-fit", "normalize", "attenuation"}) {
        const std::string cfg = " --config " + (dir / "c.json").string();
        REQUIRE(run_cli(cmd + cfg + " --seed 3 --out " + (dir / (cmd + "_a")).string()) == 0);
        REQUIRE(run_cli(cmd + cfg + " --seed 3 --out " + (dir / (cmd + "_b")).string()) == 0);
        const std::string name = cmd == "coeffs" ? "result.csv" : "result.json";
        INFO(cmd);
        CHECK(slurp(dir / (cmd + "_a") / name) == slurp(dir / (cmd + "_b") / name));
        CHECK(slurp(dir / (cmd + "_a") / "meta.json") == slurp(dir / (cmd + "_b") / "meta.json"));
    }
    REQUIRE(run_cli("sms --config " + (dir / "c.json").string() + " --seed 4 --out " + (dir / "sms_c").string()) == 0);
    CHECK(slurp(dir / "sms_a" / "result.json") != slurp(dir / "sms_c" / "result.json"));
}
