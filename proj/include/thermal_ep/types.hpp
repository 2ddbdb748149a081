// Core value types shared by every module: dense complex matrices, the Fock
// cutoff, mode labels and the exception hierarchy.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace tep {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// ------------------------------------------------------------------ errors

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user input: parameters, configs, dimensions.
class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// xi = g^2 + gamma_a gamma_b vanishes; the displacement is undefined.
class SingularTransformError : public Error {
public:
    using Error::Error;
};

// Omega = 0: the supermode rotation degenerates at the exceptional point.
class EpSingularityError : public Error {
public:
    using Error::Error;
};

// Denominator of the drive constant chi vanishes.
class PoleError : public Error {
public:
    using Error::Error;
};

// Failures of the numerical kernels (eigensolver, exponential, trajectories).
class NumericalError : public Error {
public:
    using Error::Error;
};

class TruncationGuardError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// --------------------------------------------------------------- FockCutoff

// Number of Fock levels kept per mode (levels 0..levels-1).
class FockCutoff {
public:
    static constexpr int kDefault = 8;

    constexpr FockCutoff() = default;
    explicit FockCutoff(int levels) : levels_(levels) {
        if (levels < 2) {
            throw ConfigError("FockCutoff: need at least 2 levels per mode, got " +
                              std::to_string(levels));
        }
    }

    [[nodiscard]] constexpr int levels() const noexcept { return levels_; }
    // Dimension of the two-mode Hilbert space.
    [[nodiscard]] constexpr int dim() const noexcept { return levels_ * levels_; }
    // Two-mode basis index, mode-A-major.
    [[nodiscard]] constexpr int index(int n_a, int n_b) const noexcept { return n_a * levels_ + n_b; }
    [[nodiscard]] constexpr int occupation_a(int index) const noexcept { return index / levels_; }
    [[nodiscard]] constexpr int occupation_b(int index) const noexcept { return index % levels_; }

    friend constexpr bool operator==(FockCutoff, FockCutoff) = default;

private:
    int levels_ = kDefault;
};

enum class Mode { A, B };

}  // namespace tep
