#ifndef OSGA_SOLVER_COMMON_HPP
#define OSGA_SOLVER_COMMON_HPP

#include "osga/types.hpp"

#include <chrono>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

namespace osga {

/// Stopping rules; any subset may be active, at least one must be.
struct Termination {
    std::optional<std::size_t> max_iterations;
    std::optional<double> max_seconds;
    std::optional<double> eta_tolerance; // OSGA only
    std::optional<double> psi_target;

    static Termination iterations(std::size_t n)
    {
        Termination t;
        t.max_iterations = n;
        return t;
    }

    void validate() const
    {
        if (!max_iterations && !max_seconds && !eta_tolerance && !psi_target)
            throw std::invalid_argument("termination needs at least one active criterion");
    }
};

/// One trace row as produced by a solver.
struct IterationRecord {
    std::size_t iteration = 0;
    double seconds = 0.0;
    double objective = 0.0; // OSGA reports its best value
    double eta = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN(); // step parameter or step size
    OperatorCounts ops;
};

/// Receives every record together with the point it describes.
using TraceSink = std::function<void(const IterationRecord&, const Vector&)>;

struct SolveResult {
    Vector x;
    double objective = 0.0;
    Vector best_x;
    double best_objective = 0.0;
    std::size_t iterations = 0;
    double seconds = 0.0;
    OperatorCounts ops;
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

namespace detail {

inline bool out_of_budget(const Termination& t, std::size_t iteration, double seconds, double objective)
{
    if (t.max_iterations && iteration >= *t.max_iterations)
        return true;
    if (t.max_seconds && seconds >= *t.max_seconds)
        return true;
    if (t.psi_target && objective <= *t.psi_target)
        return true;
    return false;
}

} // namespace detail

} // namespace osga

#endif
