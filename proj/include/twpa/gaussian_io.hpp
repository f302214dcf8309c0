#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "twpa/gaussian.hpp"

namespace twpa::gaussian {

// Quadrature record CSV, schema v1:
//
//   # twpa-quadratures v1
//   # modes=signal,idler
//   # normalized=true
//   # normalization_factor=1
//   rep_index,mode,x,p,pump_state
//   0,signal,0.12,-0.40,ON
//   0,idler,0.03,0.51,ON
//   ...
//
// One row per (repetition, mode). A file may hold both pump states; each
// becomes its own batch. normalization_factor is informational when
// normalized=true and is the factor still to apply when normalized=false.

struct QuadratureFile {
    std::vector<QuadratureBatch> batches;
    double normalization_factor = 1.0;
};

void write_quadrature_csv(std::ostream& out, const std::vector<QuadratureBatch>& batches,
                          double normalization_factor = 1.0);
[[nodiscard]] QuadratureFile read_quadrature_csv(std::istream& in);

/// {"dim", "entries", "uncertainty", "systematic", "physical"}.
[[nodiscard]] nlohmann::json to_json(const CovMatrix& sigma);
[[nodiscard]] CovMatrix covariance_from_json(const nlohmann::json& j);

}  // namespace twpa::gaussian
