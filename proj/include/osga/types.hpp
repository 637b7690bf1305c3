#ifndef OSGA_TYPES_HPP
#define OSGA_TYPES_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace osga {

/// Elements of every space are stored flat. Matrix-shaped elements use
/// row-major order, so the trace inner product is the flat dot product.
using Vector = Eigen::VectorXd;

/// Thrown when an element or operator does not match the expected shape.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a solver cannot start (e.g. infeasible starting point).
class InitializationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when a line search exhausts its reduction budget.
class StepFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Number of forward and adjoint linear operator applications.
struct OperatorCounts {
    std::size_t forward = 0;
    std::size_t adjoint = 0;

    OperatorCounts& operator+=(const OperatorCounts& other)
    {
        forward += other.forward;
        adjoint += other.adjoint;
        return *this;
    }
    friend OperatorCounts operator+(OperatorCounts a, const OperatorCounts& b) { return a += b; }
    friend bool operator==(const OperatorCounts&, const OperatorCounts&) = default;
};

} // namespace osga

#endif
