#ifndef OSGA_PROXFUN_HPP
#define OSGA_PROXFUN_HPP

#include "osga/linop.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>

namespace osga {

/// Q(z) = Q0 + sigma/2 * sum_k w_k (z_k - z0_k)^2, with unit weights when
/// no preconditioner is given. Matrix elements use the Frobenius form.
class QuadraticProx {
public:
    QuadraticProx(double q0, double sigma, Vector center, std::optional<Vector> weights = std::nullopt)
        : q0_(q0), sigma_(sigma), center_(std::move(center)), weights_(std::move(weights))
    {
        if (!(q0_ > 0.0))
            throw std::invalid_argument("prox offset Q0 must be positive");
        if (!(sigma_ > 0.0))
            throw std::invalid_argument("prox convexity parameter sigma must be positive");
        if (weights_) {
            if (weights_->size() != center_.size())
                throw DimensionError("prox weights and center differ in size");
            if (!(weights_->minCoeff() > 0.0))
                throw std::invalid_argument("prox preconditioner weights must be strictly positive");
        }
    }

    double q0() const { return q0_; }
    double sigma() const { return sigma_; }
    const Vector& center() const { return center_; }
    const std::optional<Vector>& weights() const { return weights_; }
    Eigen::Index size() const { return center_.size(); }

    double value(const Vector& z) const
    {
        check(z);
        const Vector d = z - center_;
        const double sq = weights_ ? d.cwiseProduct(*weights_).dot(d) : d.squaredNorm();
        return q0_ + 0.5 * sigma_ * sq;
    }

    Vector gradient(const Vector& z) const
    {
        check(z);
        Vector d = z - center_;
        if (weights_)
            d = d.cwiseProduct(*weights_);
        return sigma_ * d;
    }

    /// Squared dual norm sum_k h_k^2 / w_k.
    double dual_norm_sq(const Vector& h) const
    {
        check(h);
        return weights_ ? h.cwiseAbs2().cwiseQuotient(*weights_).sum() : h.squaredNorm();
    }

private:
    void check(const Vector& z) const
    {
        if (z.size() != center_.size())
            throw DimensionError("prox function expects " + std::to_string(center_.size()) + " entries, got "
                                 + std::to_string(z.size()));
    }

    double q0_;
    double sigma_;
    Vector center_;
    std::optional<Vector> weights_;
};

inline double q_value(const QuadraticProx& q, const Vector& z) { return q.value(z); }
inline Vector q_gradient(const QuadraticProx& q, const Vector& z) { return q.gradient(z); }

/// E(gamma, h) and its maximizer U(gamma, h).
struct SubproblemSolution {
    double e = 0.0;
    Vector u;
};

/// Computes e = sup_z -(gamma + <h,z>) / Q(z) and the point attaining it.
///
/// For h != 0 the maximizer is u = z0 - h / (e sigma w), and e is the
/// positive root of Q0 e^2 + beta1 e + beta2 = 0 with
/// beta1 = gamma + <h, z0>, beta2 = -||h||_*^2 / (2 sigma).
/// For h == 0 the supremum is max(0, -gamma / Q0), attained at z0 when
/// positive and approached at infinity otherwise (u = z0 is returned).
inline SubproblemSolution solve_subproblem(const QuadraticProx& q, double gamma, const Vector& h)
{
    const double hh = q.dual_norm_sq(h);
    if (hh == 0.0)
        return {std::max(0.0, -gamma / q.q0()), q.center()};

    const double beta1 = gamma + h.dot(q.center());
    const double beta2 = -hh / (2.0 * q.sigma());
    const double disc = beta1 * beta1 - 4.0 * q.q0() * beta2;
    const double root = std::sqrt(disc);
    // Pick the form without cancellation.
    const double e = beta1 > 0.0 ? (-2.0 * beta2) / (beta1 + root) : (-beta1 + root) / (2.0 * q.q0());

    Vector step = h / (e * q.sigma());
    if (q.weights())
        step = step.cwiseQuotient(*q.weights());
    return {e, q.center() - step};
}

/// Unit weights, sigma = 1, center x0 and Q0 = ||x0||_2 / 2 + machine epsilon.
inline QuadraticProx default_prox(const Vector& x0)
{
    return QuadraticProx(0.5 * x0.norm() + std::numeric_limits<double>::epsilon(), 1.0, x0);
}

/// Same as default_prox but with an explicit offset, e.g. an estimate of
/// ||x* - x0||^2 / 2.
inline QuadraticProx default_prox(const Vector& x0, double q0) { return QuadraticProx(q0, 1.0, x0); }

} // namespace osga

#endif
