#ifndef OSGA_OSGA_HPP
#define OSGA_OSGA_HPP

#include "osga/problems.hpp"
#include "osga/proxfun.hpp"
#include "osga/solver_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

namespace osga {

struct OsgaParams {
    double delta = 0.9;
    double alpha_max = 0.7;
    double kappa = 0.5;
    double kappa_prime = 0.5;
    double mu = 0.0;
    std::optional<double> psi_target;

    void validate() const
    {
        if (!(delta > 0.0 && delta < 1.0))
            throw std::invalid_argument("OSGA delta must lie in (0,1)");
        if (!(alpha_max > 0.0 && alpha_max < 1.0))
            throw std::invalid_argument("OSGA alpha_max must lie in (0,1)");
        if (!(kappa_prime > 0.0 && kappa_prime <= kappa))
            throw std::invalid_argument("OSGA needs 0 < kappa' <= kappa");
        if (!(mu >= 0.0))
            throw std::invalid_argument("OSGA mu must be >= 0");
    }
};

/// Live quantities of an OSGA run.
struct SolverState {
    Vector x_b;
    double psi_b = 0.0;
    Vector h;
    double gamma = 0.0;
    double eta = 0.0;
    Vector u;
    double alpha = 0.0;
    std::size_t iteration = 0;
    double seconds = 0.0;
    OperatorCounts ops;
    std::size_t fg_calls = 0;
    std::size_t f_calls = 0;
    bool target_reached = false;
};

inline SolverState osga_init(const CompositeProblem& p, const QuadraticProx& q, const OsgaParams& params,
                             const Vector& x0)
{
    params.validate();
    SolverState s;
    auto fg = nfo_fg(p, x0);
    s.ops += fg.counts;
    s.fg_calls = 1;
    if (!fg.feasible)
        throw InitializationError("OSGA starting point is infeasible");
    s.x_b = x0;
    s.psi_b = fg.value;
    s.alpha = params.alpha_max;
    if (params.psi_target && s.psi_b <= *params.psi_target) {
        s.target_reached = true;
        s.h = Vector::Zero(x0.size());
        s.u = x0;
        return s;
    }
    s.h = fg.subgradient - params.mu * q.gradient(s.x_b);
    s.gamma = s.psi_b - params.mu * q.value(s.x_b) - s.h.dot(s.x_b);
    auto sol = solve_subproblem(q, s.gamma - s.psi_b, s.h);
    s.u = std::move(sol.u);
    s.eta = sol.e - params.mu;
    return s;
}

/// Step-size controller. Accepts the candidate relaxation only when it
/// lowers eta; shrinks alpha by exp(-kappa) when progress falls short of
/// delta * alpha * eta, otherwise grows it up to alpha_max.
inline SolverState pus_update(SolverState s, double eta_bar, Vector h_bar, double gamma_bar, Vector u_bar,
                              const OsgaParams& params)
{
    if (!(s.eta > 0.0))
        return s;
    const double r = (s.eta - eta_bar) / (params.delta * s.alpha * s.eta);
    if (r < 1.0)
        s.alpha *= std::exp(-params.kappa);
    else
        s.alpha = std::min(s.alpha * std::exp(params.kappa_prime * (r - 1.0)), params.alpha_max);
    if (eta_bar < s.eta) {
        s.h = std::move(h_bar);
        s.gamma = gamma_bar;
        s.eta = eta_bar;
        s.u = std::move(u_bar);
    }
    return s;
}

inline SolverState osga_step(SolverState s, const CompositeProblem& p, const QuadraticProx& q,
                             const OsgaParams& params)
{
    const double mu = params.mu;

    Vector x = s.x_b + s.alpha * (s.u - s.x_b);
    auto fg = nfo_fg(p, x);
    s.ops += fg.counts;
    ++s.fg_calls;

    // An infeasible trial point leaves the relaxation untouched; the
    // repeated trial then yields no progress and PUS shrinks alpha.
    Vector h_bar = s.h;
    double gamma_bar = s.gamma;
    const double psi_x = value_or_infinity(fg);
    if (fg.feasible) {
        const Vector g = fg.subgradient - mu * q.gradient(x);
        h_bar = s.h + s.alpha * (g - s.h);
        gamma_bar = s.gamma + s.alpha * (psi_x - mu * q.value(x) - g.dot(x) - s.gamma);
    }

    // Ties keep the incumbent.
    const bool x_better = psi_x < s.psi_b;
    const double psi_b1 = x_better ? psi_x : s.psi_b;

    const auto sol1 = solve_subproblem(q, gamma_bar - psi_b1, h_bar);
    Vector x_prime = s.x_b + s.alpha * (sol1.u - s.x_b);
    auto f = nfo_f(p, x_prime);
    s.ops += f.counts;
    ++s.f_calls;
    const double psi_x_prime = value_or_infinity(f);

    double psi_bar;
    if (psi_x_prime < psi_b1) {
        psi_bar = psi_x_prime;
        s.x_b = std::move(x_prime);
    } else {
        psi_bar = psi_b1;
        if (x_better)
            s.x_b = std::move(x);
    }

    auto sol2 = solve_subproblem(q, gamma_bar - psi_bar, h_bar);
    const double eta_bar = sol2.e - mu;
    s.psi_b = psi_bar;

    if (params.psi_target && s.psi_b <= *params.psi_target) {
        s.target_reached = true;
        return s;
    }
    return pus_update(std::move(s), eta_bar, std::move(h_bar), gamma_bar, std::move(sol2.u), params);
}

/// Runs OSGA until a termination rule fires. The sink sees the initial
/// state as iteration 0 and then one record per iteration, each with the
/// current best point.
inline SolveResult osga_solve(const CompositeProblem& p, const QuadraticProx& q, OsgaParams params,
                              const Vector& x0, const Termination& termination, const TraceSink& sink = {})
{
    termination.validate();
    if (termination.psi_target)
        params.psi_target = params.psi_target ? std::max(*params.psi_target, *termination.psi_target)
                                              : *termination.psi_target;
    Stopwatch clock;
    SolverState s = osga_init(p, q, params, x0);
    s.seconds = clock.seconds();

    auto emit = [&] {
        if (sink) {
            IterationRecord rec;
            rec.iteration = s.iteration;
            rec.seconds = s.seconds;
            rec.objective = s.psi_b;
            rec.eta = s.eta;
            rec.alpha = s.alpha;
            rec.ops = s.ops;
            sink(rec, s.x_b);
        }
    };
    emit();

    while (!s.target_reached) {
        if (!(s.eta > 0.0))
            break; // exact certificate
        if (termination.eta_tolerance && s.eta <= *termination.eta_tolerance)
            break;
        if (detail::out_of_budget(termination, s.iteration, s.seconds, s.psi_b))
            break;
        s = osga_step(std::move(s), p, q, params);
        ++s.iteration;
        s.seconds = clock.seconds();
        emit();
    }

    SolveResult r;
    r.x = s.x_b;
    r.objective = s.psi_b;
    r.best_x = s.x_b;
    r.best_objective = s.psi_b;
    r.iterations = s.iteration;
    r.seconds = s.seconds;
    r.ops = s.ops;
    return r;
}

} // namespace osga

#endif
