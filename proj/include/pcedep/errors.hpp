#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcedep {

/// Base of every failure caused by numerics rather than bad input.
/// The CLI maps these to exit code 1.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operation not available for the given family, density or dimension.
class Unsupported : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Gram-Schmidt moment matrix is numerically rank deficient.
class IllPosedOrthogonalization : public NumericError {
public:
    IllPosedOrthogonalization(std::size_t basis_index, double ratio)
        : NumericError("ill-posed orthogonalization: |R(n,n)|/|R(0,0)| = " +
                       std::to_string(ratio) + " at basis index " +
                       std::to_string(basis_index)),
          basis_index_(basis_index) {}

    [[nodiscard]] std::size_t basis_index() const noexcept { return basis_index_; }

private:
    std::size_t basis_index_;
};

class NotPositiveDefinite : public NumericError {
public:
    using NumericError::NumericError;
};

/// Target correlation cannot be produced by any Gaussian copula with the given marginals.
class InfeasibleCorrelation : public NumericError {
public:
    using NumericError::NumericError;
};

/// Truncated LU met a vanishing pivot before the requested number of points.
class UnisolvenceFailure : public NumericError {
public:
    UnisolvenceFailure(std::size_t step, double pivot)
        : NumericError("unisolvence failure: pivot " + std::to_string(pivot) +
                       " at step " + std::to_string(step)),
          step_(step) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class ConvergenceFailure : public NumericError {
public:
    ConvergenceFailure(const std::string& what, double residual)
        : NumericError(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class IntegrationBlowup : public NumericError {
public:
    using NumericError::NumericError;
};

class SamplingEfficiencyError : public NumericError {
public:
    using NumericError::NumericError;
};

class DegenerateRule : public NumericError {
public:
    using NumericError::NumericError;
};

/// Point maps to an infinite coordinate (CDF exactly 0 or 1).
class BoundaryError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace pcedep
