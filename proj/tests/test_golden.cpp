#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "twpa/commands.hpp"
#include "twpa/config.hpp"

using namespace twpa;

namespace {

struct Table {
    std::vector<std::string> preamble;  // comment and column lines
    std::vector<std::vector<std::string>> cells;
};

Table split_table(std::istream& in) {
    Table t;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#' || t.preamble.size() < 2) {
            t.preamble.push_back(line);
            continue;
        }
        std::vector<std::string> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(cell);
        if (line.back() == ',') row.emplace_back();
        t.cells.push_back(row);
    }
    return t;
}

Table golden(const std::string& name) {
    std::ifstream f(std::string(TWPA_GOLDEN_DIR) + "/" + name + ".csv");
    REQUIRE(f.good());
    return split_table(f);
}

// Numbers agree to `abs_tol` + `rel_tol` |x|; values below `floor` only need
// to stay below it (they are rounding residue, not signal).
void compare(const Table& expected, const std::string& actual_text, double abs_tol, double rel_tol,
             double floor = -INFINITY) {
    std::istringstream in(actual_text);
    const Table actual = split_table(in);
    REQUIRE(actual.preamble == expected.preamble);
    REQUIRE(actual.cells.size() == expected.cells.size());
    for (std::size_t i = 0; i < actual.cells.size(); ++i) {
        REQUIRE(actual.cells[i].size() == expected.cells[i].size());
        for (std::size_t j = 0; j < actual.cells[i].size(); ++j) {
            const std::string& a = actual.cells[i][j];
            const std::string& e = expected.cells[i][j];
            char* end = nullptr;
            const double x = std::strtod(e.c_str(), &end);
            if (e.empty() || *end != '\0') {
                CHECK(a == e);
                continue;
            }
            const double y = std::strtod(a.c_str(), nullptr);
            INFO("row " << i << " column " << j << ": golden " << e << ", now " << a);
            if (x < floor) {
                CHECK(y < floor);
            } else {
                CHECK(std::abs(y - x) <= abs_tol + rel_tol * std::abs(x));
            }
        }
    }
}

}  // namespace

TEST_CASE("coefficient table matches the stored golden", "[golden]") {
    const auto cfg = config::defaults(config::Profile::Ci);
    compare(golden("coeffs"), cli::cmd_coeffs(cfg).csv, 1e-15, 1e-11);
}

TEST_CASE("flux sweep matches the stored golden", "[golden][slow]") {
    const auto cfg = config::defaults(config::Profile::Ci);
    compare(golden("flux-sweep"), cli::cmd_flux_sweep(cfg).csv, 1e-3, 0.0, -300.0);
}

TEST_CASE("gain versus pump phase matches the stored golden", "[golden][slow]") {
    const auto cfg = config::defaults(config::Profile::Ci);
    compare(golden("gain-phase"), cli::cmd_gain_phase(cfg).csv, 1e-4, 0.0);
}
