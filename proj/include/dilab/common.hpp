#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dilab {

/// Coefficient vector of an element of the truncated ambient space.
using Coeffs = Eigen::VectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand sizes disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A precondition on the arguments does not hold.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Requested derivative order is not available from an operator or activation.
class OrderError : public Error {
public:
    using Error::Error;
};

/// Non-finite statistic, ill-conditioning or an iteration that did not converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what)
{
    if (got != want) {
        throw DimensionError(std::string(what) + ": expected dimension " + std::to_string(want) +
                             ", got " + std::to_string(got));
    }
}

} // namespace dilab
