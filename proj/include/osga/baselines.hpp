#ifndef OSGA_BASELINES_HPP
#define OSGA_BASELINES_HPP

#include "osga/problems.hpp"
#include "osga/solver_common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace osga {

// ---------------------------------------------------------------------------
// Proximal operators
// ---------------------------------------------------------------------------

inline Vector prox_soft_threshold(const Vector& y, double lambda)
{
    if (!(lambda >= 0.0))
        throw std::invalid_argument("soft threshold needs lambda >= 0");
    return y.unaryExpr([lambda](double v) {
        const double mag = std::max(std::abs(v) - lambda, 0.0);
        return v > 0.0 ? mag : -mag;
    });
}

/// argmin_x 1/2||x - y||^2 + lambda/2 ||x||^2.
inline Vector prox_l2sq(const Vector& y, double lambda)
{
    if (!(lambda >= 0.0))
        throw std::invalid_argument("l2 shrink needs lambda >= 0");
    return y / (1.0 + lambda);
}

namespace detail {

// Forward differences with zero difference across the last row/column.
inline void grad2d(const Vector& x, std::size_t m, std::size_t n, Vector& gv, Vector& gh)
{
    gv.setZero(x.size());
    gh.setZero(x.size());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto k = static_cast<Eigen::Index>(i * n + j);
            if (i + 1 < m)
                gv[k] = x[k + static_cast<Eigen::Index>(n)] - x[k];
            if (j + 1 < n)
                gh[k] = x[k + 1] - x[k];
        }
}

// Negative adjoint of grad2d.
inline Vector div2d(const Vector& pv, const Vector& ph, std::size_t m, std::size_t n)
{
    Vector d(pv.size());
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const auto k = static_cast<Eigen::Index>(i * n + j);
            double v = 0.0;
            if (i + 1 < m)
                v += pv[k];
            if (i > 0)
                v -= pv[k - static_cast<Eigen::Index>(n)];
            if (j + 1 < n)
                v += ph[k];
            if (j > 0)
                v -= ph[k - 1];
            d[k] = v;
        }
    return d;
}

} // namespace detail

/// Approximate argmin_X 1/2||X - Y||_F^2 + lambda ||X||_ITV by exactly
/// `chit` iterations of Chambolle's dual projection scheme started at p = 0.
inline Vector prox_tv_chambolle(const Vector& y, const Shape& shape, double lambda, std::size_t chit)
{
    if (!(lambda >= 0.0))
        throw std::invalid_argument("TV prox needs lambda >= 0");
    if (chit < 1)
        throw std::invalid_argument("TV prox needs at least one inner iteration");
    check_shape(shape, y, "prox_tv_chambolle");
    if (!shape.is_matrix())
        throw DimensionError("TV prox needs a matrix shape, got " + shape.to_string());
    if (lambda == 0.0)
        return y;

    constexpr double tau = 0.125;
    const std::size_t m = shape.rows();
    const std::size_t n = shape.cols();
    Vector pv = Vector::Zero(y.size());
    Vector ph = Vector::Zero(y.size());
    Vector gv, gh;
    const Vector y_scaled = y / lambda;
    for (std::size_t it = 0; it < chit; ++it) {
        const Vector d = detail::div2d(pv, ph, m, n) - y_scaled;
        detail::grad2d(d, m, n, gv, gh);
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            const double denom = 1.0 + tau * std::sqrt(gv[k] * gv[k] + gh[k] * gh[k]);
            pv[k] = (pv[k] + tau * gv[k]) / denom;
            ph[k] = (ph[k] + tau * gh[k]) / denom;
        }
    }
    return y - lambda * detail::div2d(pv, ph, m, n);
}

/// Proximal map of a simple regularizer applied to the identity.
class ProxOperator {
public:
    struct SoftThreshold {
        double lambda;
    };
    struct L2sqShrink {
        double lambda;
    };
    struct TvChambolle {
        double lambda;
        std::size_t chit;
        Shape shape;
    };
    using Variant = std::variant<SoftThreshold, L2sqShrink, TvChambolle>;

    static ProxOperator soft_threshold(double lambda) { return ProxOperator(SoftThreshold{lambda}); }
    static ProxOperator l2sq_shrink(double lambda) { return ProxOperator(L2sqShrink{lambda}); }
    static ProxOperator tv_chambolle(double lambda, std::size_t chit, const Shape& shape)
    {
        if (chit < 1)
            throw std::invalid_argument("chit must be >= 1");
        return ProxOperator(TvChambolle{lambda, chit, shape});
    }

    const Variant& variant() const { return variant_; }

    /// prox of step * phi at y.
    Vector apply(const Vector& y, double step) const
    {
        return std::visit(
            [&](const auto& p) -> Vector {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, SoftThreshold>)
                    return prox_soft_threshold(y, step * p.lambda);
                else if constexpr (std::is_same_v<T, L2sqShrink>)
                    return prox_l2sq(y, step * p.lambda);
                else
                    return prox_tv_chambolle(y, p.shape, step * p.lambda, p.chit);
            },
            variant_);
    }

    /// phi(x).
    double value(const Vector& x) const
    {
        return std::visit(
            [&](const auto& p) -> double {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, SoftThreshold>)
                    return p.lambda * x.lpNorm<1>();
                else if constexpr (std::is_same_v<T, L2sqShrink>)
                    return 0.5 * p.lambda * x.squaredNorm();
                else
                    return p.lambda * itv_value(x, p.shape);
            },
            variant_);
    }

private:
    explicit ProxOperator(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

/// Smooth part handled by gradients, simple part handled by its prox.
struct ProximalProblem {
    CompositeProblem smooth;
    ProxOperator prox;
};

/// Splits a composite problem for forward-backward solvers: exactly one
/// regularizer acting through the identity becomes the prox; all other
/// terms must be smooth (quadratic losses or l2sq regularizers).
inline ProximalProblem split_for_prox(const CompositeProblem& p, std::size_t chit = 5)
{
    std::vector<CompositeProblem::SmoothEntry> smooth = p.smooth_terms();
    std::optional<ProxOperator> prox;
    // Prefer a nonsmooth regularizer for the prox slot.
    std::optional<std::size_t> pick;
    for (std::size_t j = 0; j < p.reg_terms().size(); ++j) {
        const auto& r = p.reg_terms()[j];
        if (!r.op.is_identity())
            continue;
        const bool nonsmooth = !std::holds_alternative<Regularizer::L2sq>(r.reg.variant());
        if (!pick || nonsmooth)
            pick = j;
        if (nonsmooth)
            break;
    }
    if (!pick)
        throw std::invalid_argument("forward-backward split needs a regularizer acting through the identity");
    for (std::size_t j = 0; j < p.reg_terms().size(); ++j) {
        const auto& r = p.reg_terms()[j];
        if (j == *pick) {
            std::visit(
                [&](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, Regularizer::L1>)
                        prox = ProxOperator::soft_threshold(v.lambda);
                    else if constexpr (std::is_same_v<T, Regularizer::L2sq>)
                        prox = ProxOperator::l2sq_shrink(v.lambda);
                    else if constexpr (std::is_same_v<T, Regularizer::Itv>)
                        prox = ProxOperator::tv_chambolle(v.lambda, chit, r.op.codomain());
                    else
                        throw std::invalid_argument("no proximal map available for this regularizer");
                },
                r.reg.variant());
        } else if (const auto* l2 = std::get_if<Regularizer::L2sq>(&r.reg.variant())) {
            smooth.push_back({SmoothTerm::scaled_l2sq(l2->lambda), r.op});
        } else {
            throw std::invalid_argument("forward-backward split supports a single nonsmooth regularizer");
        }
    }
    if (smooth.empty())
        throw std::invalid_argument("forward-backward split needs a smooth term");
    return {CompositeProblem(p.domain(), std::move(smooth), {}, p.policy()), *prox};
}

/// max_i ||a_i||^2 over the columns of A.
inline double max_column_norm_sq(const Eigen::MatrixXd& a) { return a.colwise().squaredNorm().maxCoeff(); }

/// a_{k+1} = (1 + sqrt(4 a_k^2 + 1)) / 2.
inline double next_momentum(double a) { return 0.5 * (1.0 + std::sqrt(4.0 * a * a + 1.0)); }

namespace detail {

struct BestTracker {
    Vector x;
    double value = std::numeric_limits<double>::infinity();
    void offer(const Vector& candidate, double v)
    {
        if (v < value) {
            value = v;
            x = candidate;
        }
    }
};

inline void emit(const TraceSink& sink, std::size_t k, const Stopwatch& clock, double objective, double step,
                 const OperatorCounts& ops, const Vector& x)
{
    if (!sink)
        return;
    IterationRecord rec;
    rec.iteration = k;
    rec.seconds = clock.seconds();
    rec.objective = objective;
    rec.alpha = step;
    rec.ops = ops;
    sink(rec, x);
}

inline SolveResult finish(Vector x, double objective, BestTracker best, std::size_t k, const Stopwatch& clock,
                          const OperatorCounts& ops)
{
    SolveResult r;
    r.x = std::move(x);
    r.objective = objective;
    r.best_x = std::move(best.x);
    r.best_objective = best.value;
    r.iterations = k;
    r.seconds = clock.seconds();
    r.ops = ops;
    return r;
}

inline OracleResult feasible_or_throw(OracleResult r, const char* who)
{
    if (!r.feasible)
        throw std::runtime_error(std::string(who) + ": iterate left the feasible set");
    return r;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Solvers
// ---------------------------------------------------------------------------

/// Subgradient method with steps alpha0 / sqrt(k), k = 1, 2, ...
inline SolveResult nsdsg_solve(const CompositeProblem& p, const Vector& x0, double alpha0,
                               const Termination& termination, const TraceSink& sink = {})
{
    termination.validate();
    if (!(alpha0 > 0.0))
        throw std::invalid_argument("NSDSG needs alpha0 > 0");
    Stopwatch clock;
    OperatorCounts ops;
    Vector x = x0;
    auto fg = detail::feasible_or_throw(nfo_fg(p, x), "NSDSG");
    ops += fg.counts;
    detail::BestTracker best;
    best.offer(x, fg.value);
    double objective = fg.value;
    std::size_t k = 0;
    detail::emit(sink, k, clock, objective, 0.0, ops, x);
    while (!detail::out_of_budget(termination, k, clock.seconds(), best.value)) {
        ++k;
        const double step = alpha0 / std::sqrt(static_cast<double>(k));
        x -= step * fg.subgradient;
        fg = detail::feasible_or_throw(nfo_fg(p, x), "NSDSG");
        ops += fg.counts;
        objective = fg.value;
        best.offer(x, objective);
        detail::emit(sink, k, clock, objective, step, ops, x);
    }
    return detail::finish(std::move(x), objective, std::move(best), k, clock, ops);
}

/// Forward-backward iteration x+ = prox_{phi/L}(x - grad f(x) / L).
inline SolveResult pga_solve(const ProximalProblem& pp, double lipschitz, const Vector& x0,
                             const Termination& termination, const TraceSink& sink = {})
{
    termination.validate();
    if (!(lipschitz > 0.0))
        throw std::invalid_argument("PGA needs L > 0");
    Stopwatch clock;
    OperatorCounts ops;
    const double step = 1.0 / lipschitz;
    Vector x = x0;
    auto fg = nfo_fg(pp.smooth, x);
    ops += fg.counts;
    double objective = fg.value + pp.prox.value(x);
    detail::BestTracker best;
    best.offer(x, objective);
    std::size_t k = 0;
    detail::emit(sink, k, clock, objective, step, ops, x);
    while (!detail::out_of_budget(termination, k, clock.seconds(), best.value)) {
        ++k;
        x = pp.prox.apply(x - step * fg.subgradient, step);
        fg = nfo_fg(pp.smooth, x);
        ops += fg.counts;
        objective = fg.value + pp.prox.value(x);
        best.offer(x, objective);
        detail::emit(sink, k, clock, objective, step, ops, x);
    }
    return detail::finish(std::move(x), objective, std::move(best), k, clock, ops);
}

/// Accelerated forward-backward with the a-sequence started at a_0 = 1.
inline SolveResult fista_solve(const ProximalProblem& pp, double lipschitz, const Vector& x0,
                               const Termination& termination, const TraceSink& sink = {})
{
    termination.validate();
    if (!(lipschitz > 0.0))
        throw std::invalid_argument("FISTA needs L > 0");
    Stopwatch clock;
    OperatorCounts ops;
    const double step = 1.0 / lipschitz;
    Vector x = x0;
    Vector x_prev = x0;
    Vector y = x0;
    double a = 1.0;
    auto f0 = nfo_f(pp.smooth, x);
    ops += f0.counts;
    double objective = f0.value + pp.prox.value(x);
    detail::BestTracker best;
    best.offer(x, objective);
    std::size_t k = 0;
    detail::emit(sink, k, clock, objective, step, ops, x);
    while (!detail::out_of_budget(termination, k, clock.seconds(), best.value)) {
        ++k;
        auto g = nfo_g(pp.smooth, y);
        ops += g.counts;
        x = pp.prox.apply(y - step * g.subgradient, step);
        const double a_next = next_momentum(a);
        y = x + ((a - 1.0) / a_next) * (x - x_prev);
        x_prev = x;
        a = a_next;
        auto f = nfo_f(pp.smooth, x);
        ops += f.counts;
        objective = f.value + pp.prox.value(x);
        best.offer(x, objective);
        detail::emit(sink, k, clock, objective, step, ops, x);
    }
    return detail::finish(std::move(x), objective, std::move(best), k, clock, ops);
}

struct Nes83Options {
    double rho = 0.5;
    std::size_t max_reductions = 60;
};

/// Second point for the initial step estimate: a short move along -g(y0).
inline Vector nes83_default_z(const CompositeProblem& p, const Vector& y0)
{
    const auto g = nfo_g(p, y0);
    const double gn = g.subgradient.norm();
    if (gn == 0.0)
        return y0 + Vector::Constant(y0.size(), 1e-6);
    const double scale = 1e-4 * std::max(1.0, y0.norm()) / gn;
    return y0 - scale * g.subgradient;
}

/// Nesterov's 1983 scheme driven by subgradients, with a sufficient-decrease
/// backtracking on the step (shrink by rho while the test fails).
inline SolveResult nes83_solve(const CompositeProblem& p, const Vector& y0, const Vector& z,
                               const Termination& termination, const Nes83Options& opt = {},
                               const TraceSink& sink = {})
{
    termination.validate();
    if (!(opt.rho > 0.0 && opt.rho < 1.0))
        throw std::invalid_argument("NES83 needs rho in (0,1)");
    Stopwatch clock;
    OperatorCounts ops;

    auto fy = detail::feasible_or_throw(nfo_fg(p, y0), "NES83");
    ops += fy.counts;
    auto gz = nfo_g(p, z);
    ops += gz.counts;
    const double dz = (y0 - z).norm();
    const double dg = (fy.subgradient - gz.subgradient).norm();
    if (dz == 0.0 || dg == 0.0)
        throw std::invalid_argument("NES83 needs z != y0 and g(z) != g(y0)");
    double alpha = dz / dg;

    double a = 0.0;
    Vector x_prev = y0;
    Vector x = y0;
    Vector y = y0;
    double objective = fy.value;
    detail::BestTracker best;
    best.offer(y0, objective);
    std::size_t k = 0;
    detail::emit(sink, k, clock, objective, alpha, ops, x);

    while (!detail::out_of_budget(termination, k, clock.seconds(), best.value)) {
        const Vector& g = fy.subgradient;
        const double gg = g.squaredNorm();
        double trial_step = alpha;
        Vector trial = y - trial_step * g;
        auto ft = nfo_f(p, trial);
        ops += ft.counts;
        std::size_t reductions = 0;
        // A few ulps of slack so rounding noise near a minimizer is not read as failure.
        const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(fy.value);
        while (value_or_infinity(ft) > fy.value - 0.5 * trial_step * gg + slack) {
            if (++reductions > opt.max_reductions)
                throw StepFailure("NES83 line search failed at iteration " + std::to_string(k + 1));
            trial_step *= opt.rho;
            trial = y - trial_step * g;
            ft = nfo_f(p, trial);
            ops += ft.counts;
        }
        ++k;
        x_prev = std::move(x);
        x = std::move(trial);
        objective = ft.value;
        alpha = trial_step;
        best.offer(x, objective);

        const double a_next = next_momentum(a);
        y = x + ((a - 1.0) / a_next) * (x - x_prev);
        a = a_next;
        fy = detail::feasible_or_throw(nfo_fg(p, y), "NES83");
        ops += fy.counts;
        detail::emit(sink, k, clock, objective, alpha, ops, x);
    }
    return detail::finish(std::move(x), objective, std::move(best), k, clock, ops);
}

inline SolveResult nes83_solve(const CompositeProblem& p, const Vector& y0, const Termination& termination,
                               const Nes83Options& opt = {}, const TraceSink& sink = {})
{
    return nes83_solve(p, y0, nes83_default_z(p, y0), termination, opt, sink);
}

} // namespace osga

#endif
