#include "twpa/gaussian_io.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "twpa/errors.hpp"

namespace twpa::gaussian {

namespace {
std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, sep)) {
        out.push_back(item);
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw FormatError("line " + std::to_string(line) + ": bad number '" + s + "'");
    }
    return v;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, int dim) {
    Eigen::MatrixXd m(dim, dim);
    if (!j.is_array() || static_cast<int>(j.size()) != dim) {
        throw FormatError("matrix must be a " + std::to_string(dim) + "x" + std::to_string(dim) +
                          " nested array");
    }
    for (int i = 0; i < dim; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != dim) {
            throw FormatError("ragged matrix row");
        }
        for (int k = 0; k < dim; ++k) {
            m(i, k) = j[i][k].get<double>();
        }
    }
    return m;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            row.push_back(m(i, k));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}
}  // namespace

void write_quadrature_csv(std::ostream& out, const std::vector<QuadratureBatch>& batches,
                          double normalization_factor) {
    if (batches.empty()) {
        throw FormatError("nothing to write");
    }
    const auto& labels = batches.front().mode_labels();
    const bool normalized = batches.front().normalized();
    for (const auto& b : batches) {
        if (b.mode_labels() != labels || b.normalized() != normalized) {
            throw FormatError("batches in one file must share modes and normalization state");
        }
    }
    out << "# twpa-quadratures v1\n# modes=";
    for (std::size_t m = 0; m < labels.size(); ++m) {
        out << (m ? "," : "") << labels[m];
    }
    out << "\n# normalized=" << (normalized ? "true" : "false")
        << "\n# normalization_factor=" << normalization_factor
        << "\nrep_index,mode,x,p,pump_state\n";
    out.precision(17);
    for (const auto& b : batches) {
        const std::string state = to_string(b.pump_state());
        for (Eigen::Index i = 0; i < b.n_rep(); ++i) {
            for (std::size_t m = 0; m < labels.size(); ++m) {
                const auto c = static_cast<Eigen::Index>(2 * m);
                out << i << ',' << labels[m] << ',' << b.records()(i, c) << ','
                    << b.records()(i, c + 1) << ',' << state << '\n';
            }
        }
    }
}

QuadratureFile read_quadrature_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> labels;
    std::optional<bool> normalized;
    QuadratureFile file;
    bool header_seen = false;

    // rows[state][rep] -> (x, p) per mode
    std::map<PumpState, std::map<long, std::vector<std::pair<double, double>>>> rows;
    std::map<PumpState, std::map<long, std::vector<bool>>> seen;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                continue;
            }
            const std::string key = line.substr(1, eq - 1);
            const std::string value = line.substr(eq + 1);
            const auto k = key.substr(key.find_first_not_of(' '));
            if (k == "modes") {
                labels = split(value, ',');
            } else if (k == "normalized") {
                normalized = value == "true";
            } else if (k == "normalization_factor") {
                file.normalization_factor = parse_double(value, lineno);
            }
            continue;
        }
        if (!header_seen) {
            if (line != "rep_index,mode,x,p,pump_state") {
                throw FormatError("line " + std::to_string(lineno) + ": unexpected column header");
            }
            header_seen = true;
            continue;
        }
        if (labels.empty() || !normalized) {
            throw FormatError("missing '# modes=' or '# normalized=' metadata before data");
        }
        const auto fields = split(line, ',');
        if (fields.size() != 5) {
            throw FormatError("line " + std::to_string(lineno) + ": expected 5 fields");
        }
        const long rep = static_cast<long>(parse_double(fields[0], lineno));
        const auto it = std::find(labels.begin(), labels.end(), fields[1]);
        if (it == labels.end()) {
            throw FormatError("line " + std::to_string(lineno) + ": unknown mode '" + fields[1] + "'");
        }
        const auto mode = static_cast<std::size_t>(it - labels.begin());
        const PumpState state = pump_state_from_string(fields[4]);
        auto& slot = rows[state][rep];
        auto& flags = seen[state][rep];
        slot.resize(labels.size());
        flags.resize(labels.size(), false);
        if (flags[mode]) {
            throw FormatError("line " + std::to_string(lineno) + ": duplicate (rep, mode)");
        }
        flags[mode] = true;
        slot[mode] = {parse_double(fields[2], lineno), parse_double(fields[3], lineno)};
    }
    if (!header_seen) {
        throw FormatError("no column header found");
    }

    for (const auto& [state, reps] : rows) {
        Eigen::MatrixXd records(static_cast<Eigen::Index>(reps.size()),
                                static_cast<Eigen::Index>(2 * labels.size()));
        Eigen::Index i = 0;
        for (const auto& [rep, values] : reps) {
            for (std::size_t m = 0; m < labels.size(); ++m) {
                if (!seen.at(state).at(rep)[m]) {
                    throw FormatError("repetition " + std::to_string(rep) + " lacks mode " +
                                      labels[m]);
                }
                records(i, static_cast<Eigen::Index>(2 * m)) = values[m].first;
                records(i, static_cast<Eigen::Index>(2 * m + 1)) = values[m].second;
            }
            ++i;
        }
        file.batches.emplace_back(labels, std::move(records), state, *normalized);
    }
    return file;
}

nlohmann::json to_json(const CovMatrix& sigma) {
    return {{"dim", sigma.dim()},
            {"entries", matrix_to_json(sigma.entries)},
            {"uncertainty", matrix_to_json(sigma.uncertainty)},
            {"systematic", matrix_to_json(sigma.systematic)},
            {"physical", is_physical(sigma)}};
}

CovMatrix covariance_from_json(const nlohmann::json& j) {
    const int dim = j.at("dim").get<int>();
    if (dim != 2 && dim != 4) {
        throw FormatError("dim must be 2 or 4");
    }
    CovMatrix c(matrix_from_json(j.at("entries"), dim));
    if (j.contains("uncertainty")) {
        c.uncertainty = matrix_from_json(j.at("uncertainty"), dim);
    }
    if (j.contains("systematic")) {
        c.systematic = matrix_from_json(j.at("systematic"), dim);
    }
    return c;
}

}  // namespace twpa::gaussian
