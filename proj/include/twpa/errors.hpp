#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twpa {

/// Base of all library errors. Carries a short machine-readable kind.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define TWPA_DEFINE_ERROR(Name)                                              \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name, what) {}       \
    }

// snail-model
TWPA_DEFINE_ERROR(NoConvergence);
// circuit-sim
TWPA_DEFINE_ERROR(WindowTooShort);
TWPA_DEFINE_ERROR(InvalidDrive);
TWPA_DEFINE_ERROR(InvalidChain);
// gaussian-state
TWPA_DEFINE_ERROR(NotNormalized);
TWPA_DEFINE_ERROR(DegenerateBatch);
TWPA_DEFINE_ERROR(DimensionMismatch);
TWPA_DEFINE_ERROR(NonPositiveVariance);
TWPA_DEFINE_ERROR(NotPSD);
TWPA_DEFINE_ERROR(FormatError);
// calibration
TWPA_DEFINE_ERROR(FitDivergence);
TWPA_DEFINE_ERROR(IllConditioned);
// cli
TWPA_DEFINE_ERROR(ConfigError);

#undef TWPA_DEFINE_ERROR

/// Raised when the per-step Newton solve of the transient integrator fails.
class NewtonDivergence : public Error {
public:
    NewtonDivergence(std::size_t step, const std::string& what)
        : Error("NewtonDivergence", "step " + std::to_string(step) + ": " + what), step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// Raised when the partially transposed covariance has no real symplectic spectrum.
class ComplexEigenvalue : public Error {
public:
    ComplexEigenvalue(double violation, const std::string& what)
        : Error("ComplexEigenvalue", what), violation_(violation) {}

    /// 4 det(sigma) - Delta^2, i.e. how far the discriminant went negative.
    [[nodiscard]] double violation() const noexcept { return violation_; }

private:
    double violation_;
};

}  // namespace twpa
