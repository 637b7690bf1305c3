#ifndef OSGA_PROBLEMS_HPP
#define OSGA_PROBLEMS_HPP

#include "osga/linop.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace osga {

// ---------------------------------------------------------------------------
// Total variation semi-norms on row-major m x n matrices.
//
// Interior cells (i < m-1, j < n-1) couple the vertical and horizontal
// forward differences; the last column contributes vertical differences
// and the last row horizontal ones. This is the forward-difference gradient
// with a zero difference across the image border.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_tv_shape(const Shape& shape)
{
    if (!shape.is_matrix() || shape.rows() < 2 || shape.cols() < 2)
        throw DimensionError("total variation needs a matrix with at least 2 rows and 2 columns, got "
                             + shape.to_string());
}

inline double sign_or(double v, double at_zero) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : at_zero); }

} // namespace detail

inline double itv_value(const Vector& x, const Shape& shape)
{
    detail::check_tv_shape(shape);
    check_shape(shape, x, "itv_value");
    const auto m = static_cast<Eigen::Index>(shape.rows());
    const auto n = static_cast<Eigen::Index>(shape.cols());
    auto at = [&](Eigen::Index i, Eigen::Index j) { return x[i * n + j]; };
    double total = 0.0;
    for (Eigen::Index i = 0; i + 1 < m; ++i)
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            const double dv = at(i + 1, j) - at(i, j);
            const double dh = at(i, j + 1) - at(i, j);
            total += std::sqrt(dv * dv + dh * dh);
        }
    for (Eigen::Index i = 0; i + 1 < m; ++i)
        total += std::abs(at(i + 1, n - 1) - at(i, n - 1));
    for (Eigen::Index j = 0; j + 1 < n; ++j)
        total += std::abs(at(m - 1, j + 1) - at(m - 1, j));
    return total;
}

/// Subgradient of the isotropic TV. Interior cells with a zero gradient and
/// zero boundary differences contribute nothing.
inline Vector itv_subgradient(const Vector& x, const Shape& shape)
{
    detail::check_tv_shape(shape);
    check_shape(shape, x, "itv_subgradient");
    const auto m = static_cast<Eigen::Index>(shape.rows());
    const auto n = static_cast<Eigen::Index>(shape.cols());
    auto at = [&](Eigen::Index i, Eigen::Index j) { return x[i * n + j]; };
    Vector g = Vector::Zero(x.size());
    auto acc = [&](Eigen::Index i, Eigen::Index j) -> double& { return g[i * n + j]; };
    for (Eigen::Index i = 0; i + 1 < m; ++i)
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            const double dv = at(i + 1, j) - at(i, j);
            const double dh = at(i, j + 1) - at(i, j);
            const double r = std::sqrt(dv * dv + dh * dh);
            if (r == 0.0)
                continue;
            acc(i + 1, j) += dv / r;
            acc(i, j + 1) += dh / r;
            acc(i, j) -= (dv + dh) / r;
        }
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
        const double s = detail::sign_or(at(i + 1, n - 1) - at(i, n - 1), 0.0);
        acc(i + 1, n - 1) += s;
        acc(i, n - 1) -= s;
    }
    for (Eigen::Index j = 0; j + 1 < n; ++j) {
        const double s = detail::sign_or(at(m - 1, j + 1) - at(m - 1, j), 0.0);
        acc(m - 1, j + 1) += s;
        acc(m - 1, j) -= s;
    }
    return g;
}

inline double atv_value(const Vector& x, const Shape& shape)
{
    detail::check_tv_shape(shape);
    check_shape(shape, x, "atv_value");
    const auto m = static_cast<Eigen::Index>(shape.rows());
    const auto n = static_cast<Eigen::Index>(shape.cols());
    auto at = [&](Eigen::Index i, Eigen::Index j) { return x[i * n + j]; };
    double total = 0.0;
    for (Eigen::Index i = 0; i + 1 < m; ++i)
        for (Eigen::Index j = 0; j + 1 < n; ++j)
            total += std::abs(at(i + 1, j) - at(i, j)) + std::abs(at(i, j + 1) - at(i, j));
    for (Eigen::Index i = 0; i + 1 < m; ++i)
        total += std::abs(at(i + 1, n - 1) - at(i, n - 1));
    for (Eigen::Index j = 0; j + 1 < n; ++j)
        total += std::abs(at(m - 1, j + 1) - at(m - 1, j));
    return total;
}

inline Vector atv_subgradient(const Vector& x, const Shape& shape)
{
    detail::check_tv_shape(shape);
    check_shape(shape, x, "atv_subgradient");
    const auto m = static_cast<Eigen::Index>(shape.rows());
    const auto n = static_cast<Eigen::Index>(shape.cols());
    auto at = [&](Eigen::Index i, Eigen::Index j) { return x[i * n + j]; };
    Vector g = Vector::Zero(x.size());
    auto diff = [&](Eigen::Index i0, Eigen::Index j0, Eigen::Index i1, Eigen::Index j1) {
        const double s = detail::sign_or(at(i1, j1) - at(i0, j0), 0.0);
        g[i1 * n + j1] += s;
        g[i0 * n + j0] -= s;
    };
    for (Eigen::Index i = 0; i + 1 < m; ++i)
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            diff(i, j, i + 1, j);
            diff(i, j, i, j + 1);
        }
    for (Eigen::Index i = 0; i + 1 < m; ++i)
        diff(i, n - 1, i + 1, n - 1);
    for (Eigen::Index j = 0; j + 1 < n; ++j)
        diff(m - 1, j, m - 1, j + 1);
    return g;
}

// ---------------------------------------------------------------------------
// Terms
// ---------------------------------------------------------------------------

/// Smooth loss f_i applied to A_i x.
class SmoothTerm {
public:
    struct QuadraticLoss {
        Vector target; // f(v) = 1/2 ||v - target||^2
    };
    struct ScaledL2sq {
        double lambda; // f(v) = lambda/2 ||v||^2
    };
    using Variant = std::variant<QuadraticLoss, ScaledL2sq>;

    static SmoothTerm quadratic_loss(Vector target) { return SmoothTerm(QuadraticLoss{std::move(target)}); }
    static SmoothTerm scaled_l2sq(double lambda)
    {
        if (!(lambda >= 0.0))
            throw std::invalid_argument("scaled_l2sq coefficient must be >= 0");
        return SmoothTerm(ScaledL2sq{lambda});
    }

    const Variant& variant() const { return variant_; }

    double value(const Vector& v) const
    {
        if (const auto* q = std::get_if<QuadraticLoss>(&variant_))
            return 0.5 * (v - q->target).squaredNorm();
        return 0.5 * std::get<ScaledL2sq>(variant_).lambda * v.squaredNorm();
    }

    Vector gradient(const Vector& v) const
    {
        if (const auto* q = std::get_if<QuadraticLoss>(&variant_))
            return v - q->target;
        return std::get<ScaledL2sq>(variant_).lambda * v;
    }

    /// Required size of the argument, if the term fixes one.
    std::optional<std::size_t> argument_size() const
    {
        if (const auto* q = std::get_if<QuadraticLoss>(&variant_))
            return static_cast<std::size_t>(q->target.size());
        return std::nullopt;
    }

private:
    explicit SmoothTerm(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

/// Selection rules at points of non-differentiability.
struct SubgradientPolicy {
    /// Value used for d|t|/dt at t = 0; must lie in [-1, 1].
    double l1_at_zero = 0.0;
};

/// Regularizer phi_j applied to W_j x.
class Regularizer {
public:
    struct L1 {
        double lambda;
    };
    struct L2sq {
        double lambda; // lambda/2 ||w||^2
    };
    struct Itv {
        double lambda;
    };
    struct Atv {
        double lambda;
    };
    struct Indicator {
        std::optional<std::pair<double, double>> box; // none = whole space
    };
    using Variant = std::variant<L1, L2sq, Itv, Atv, Indicator>;

    static Regularizer l1(double lambda) { return Regularizer(L1{checked(lambda)}); }
    static Regularizer l2sq(double lambda) { return Regularizer(L2sq{checked(lambda)}); }
    static Regularizer itv(double lambda) { return Regularizer(Itv{checked(lambda)}); }
    static Regularizer atv(double lambda) { return Regularizer(Atv{checked(lambda)}); }
    static Regularizer indicator() { return Regularizer(Indicator{}); }
    static Regularizer indicator_box(double lower, double upper)
    {
        if (!(lower <= upper))
            throw std::invalid_argument("indicator box needs lower <= upper");
        return Regularizer(Indicator{std::make_pair(lower, upper)});
    }

    const Variant& variant() const { return variant_; }

    bool needs_matrix() const
    {
        return std::holds_alternative<Itv>(variant_) || std::holds_alternative<Atv>(variant_);
    }

    /// Value at w, or nullopt when w violates an indicator constraint.
    std::optional<double> value(const Vector& w, const Shape& shape) const
    {
        return std::visit(
            [&](const auto& r) -> std::optional<double> {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, L1>)
                    return r.lambda * w.template lpNorm<1>();
                else if constexpr (std::is_same_v<T, L2sq>)
                    return 0.5 * r.lambda * w.squaredNorm();
                else if constexpr (std::is_same_v<T, Itv>)
                    return r.lambda * itv_value(w, shape);
                else if constexpr (std::is_same_v<T, Atv>)
                    return r.lambda * atv_value(w, shape);
                else {
                    if (r.box && (w.minCoeff() < r.box->first || w.maxCoeff() > r.box->second))
                        return std::nullopt;
                    return 0.0;
                }
            },
            variant_);
    }

    /// Subgradient at a feasible w.
    Vector subgradient(const Vector& w, const Shape& shape, const SubgradientPolicy& policy) const
    {
        return std::visit(
            [&](const auto& r) -> Vector {
                using T = std::decay_t<decltype(r)>;
                if constexpr (std::is_same_v<T, L1>)
                    return r.lambda * w.unaryExpr([&](double t) { return detail::sign_or(t, policy.l1_at_zero); });
                else if constexpr (std::is_same_v<T, L2sq>)
                    return r.lambda * w;
                else if constexpr (std::is_same_v<T, Itv>)
                    return r.lambda * itv_subgradient(w, shape);
                else if constexpr (std::is_same_v<T, Atv>)
                    return r.lambda * atv_subgradient(w, shape);
                else
                    return Vector::Zero(w.size());
            },
            variant_);
    }

private:
    static double checked(double lambda)
    {
        if (!(lambda >= 0.0))
            throw std::invalid_argument("regularization weight must be >= 0");
        return lambda;
    }
    explicit Regularizer(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

// ---------------------------------------------------------------------------
// Composite problem and first-order oracle
// ---------------------------------------------------------------------------

/// Psi(x) = sum_i f_i(A_i x) + sum_j phi_j(W_j x).
class CompositeProblem {
public:
    struct SmoothEntry {
        SmoothTerm term;
        LinearMap op;
    };
    struct RegEntry {
        Regularizer reg;
        LinearMap op;
    };

    CompositeProblem(Shape domain, std::vector<SmoothEntry> smooth, std::vector<RegEntry> regs,
                     SubgradientPolicy policy = {})
        : domain_(std::move(domain)), smooth_(std::move(smooth)), regs_(std::move(regs)), policy_(policy)
    {
        if (smooth_.empty() && regs_.empty())
            throw std::invalid_argument("composite problem needs at least one term");
        if (policy_.l1_at_zero < -1.0 || policy_.l1_at_zero > 1.0)
            throw std::invalid_argument("l1_at_zero must lie in [-1, 1]");
        for (const auto& s : smooth_) {
            check_domain(s.op);
            if (auto n = s.term.argument_size(); n && *n != s.op.codomain().size())
                throw DimensionError("smooth term target has " + std::to_string(*n)
                                     + " entries but its operator maps to " + s.op.codomain().to_string());
        }
        for (const auto& r : regs_) {
            check_domain(r.op);
            if (r.reg.needs_matrix() && !r.op.codomain().is_matrix())
                throw DimensionError("total variation regularizer needs a matrix-valued operator, got "
                                     + r.op.codomain().to_string());
        }
    }

    const Shape& domain() const { return domain_; }
    const std::vector<SmoothEntry>& smooth_terms() const { return smooth_; }
    const std::vector<RegEntry>& reg_terms() const { return regs_; }
    const SubgradientPolicy& policy() const { return policy_; }
    std::size_t term_count() const { return smooth_.size() + regs_.size(); }

private:
    void check_domain(const LinearMap& op) const
    {
        if (!(op.domain() == domain_))
            throw DimensionError("term operator domain " + op.domain().to_string()
                                 + " does not match problem domain " + domain_.to_string());
    }

    Shape domain_;
    std::vector<SmoothEntry> smooth_;
    std::vector<RegEntry> regs_;
    SubgradientPolicy policy_;
};

struct OracleResult {
    bool feasible = true;
    double value = 0.0; // meaningful only when feasible
    Vector subgradient; // empty unless requested and feasible
    OperatorCounts counts;
};

namespace detail {

inline OracleResult evaluate(const CompositeProblem& p, const Vector& x, bool want_value, bool want_gradient)
{
    check_shape(p.domain(), x, "oracle");
    OracleResult out;
    // Every operator is applied once; its image is reused for value and slope.
    std::vector<Vector> v(p.smooth_terms().size());
    std::vector<Vector> w(p.reg_terms().size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = p.smooth_terms()[i].op.apply(x);
    for (std::size_t j = 0; j < w.size(); ++j)
        w[j] = p.reg_terms()[j].op.apply(x);
    out.counts.forward = v.size() + w.size();

    double total = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        total += p.smooth_terms()[i].term.value(v[i]);
    for (std::size_t j = 0; j < w.size(); ++j) {
        const auto& entry = p.reg_terms()[j];
        const auto val = entry.reg.value(w[j], entry.op.codomain());
        if (!val) {
            out.feasible = false;
            return out;
        }
        total += *val;
    }
    if (want_value)
        out.value = total;

    if (want_gradient) {
        Vector g = Vector::Zero(x.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto& entry = p.smooth_terms()[i];
            g += entry.op.adjoint(entry.term.gradient(v[i]));
        }
        for (std::size_t j = 0; j < w.size(); ++j) {
            const auto& entry = p.reg_terms()[j];
            g += entry.op.adjoint(entry.reg.subgradient(w[j], entry.op.codomain(), p.policy()));
        }
        out.subgradient = std::move(g);
        out.counts.adjoint = v.size() + w.size();
    }
    return out;
}

} // namespace detail

/// Value and subgradient with one forward and one adjoint application per term.
inline OracleResult nfo_fg(const CompositeProblem& p, const Vector& x) { return detail::evaluate(p, x, true, true); }

/// Value only; no adjoint applications.
inline OracleResult nfo_f(const CompositeProblem& p, const Vector& x) { return detail::evaluate(p, x, true, false); }

/// Subgradient only.
inline OracleResult nfo_g(const CompositeProblem& p, const Vector& x) { return detail::evaluate(p, x, false, true); }

/// Infeasible points map to +infinity; used where an ordering is needed.
inline double value_or_infinity(const OracleResult& r)
{
    return r.feasible ? r.value : std::numeric_limits<double>::infinity();
}

} // namespace osga

#endif
