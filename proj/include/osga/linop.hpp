#ifndef OSGA_LINOP_HPP
#define OSGA_LINOP_HPP

#include "osga/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace osga {

/// Shape of an element: a vector of length n or an m-by-n matrix.
class Shape {
public:
    enum class Kind { vector, matrix };

    static Shape vector(std::size_t n)
    {
        if (n == 0)
            throw DimensionError("vector shape must have length >= 1");
        return Shape(Kind::vector, n, 1);
    }

    static Shape matrix(std::size_t rows, std::size_t cols)
    {
        if (rows == 0 || cols == 0)
            throw DimensionError("matrix shape must have both dimensions >= 1");
        return Shape(Kind::matrix, rows, cols);
    }

    Kind kind() const { return kind_; }
    bool is_matrix() const { return kind_ == Kind::matrix; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return rows_ * cols_; }

    std::string to_string() const
    {
        std::ostringstream os;
        if (is_matrix())
            os << "matrix(" << rows_ << "x" << cols_ << ")";
        else
            os << "vector(" << rows_ << ")";
        return os.str();
    }

    friend bool operator==(const Shape&, const Shape&) = default;

private:
    Shape(Kind kind, std::size_t rows, std::size_t cols) : kind_(kind), rows_(rows), cols_(cols) {}

    Kind kind_;
    std::size_t rows_;
    std::size_t cols_;
};

inline void check_shape(const Shape& expected, const Vector& x, const char* what)
{
    if (static_cast<std::size_t>(x.size()) != expected.size()) {
        std::ostringstream os;
        os << what << ": expected an element of " << expected.to_string() << " (" << expected.size()
           << " entries), got " << x.size() << " entries";
        throw DimensionError(os.str());
    }
}

namespace detail {

// Index of p in the 2n-periodic even (half-sample symmetric) extension of [0, n).
inline std::size_t reflect_index(std::ptrdiff_t p, std::size_t n)
{
    const auto period = static_cast<std::ptrdiff_t>(2 * n);
    std::ptrdiff_t r = p % period;
    if (r < 0)
        r += period;
    if (r >= static_cast<std::ptrdiff_t>(n))
        r = period - 1 - r;
    return static_cast<std::size_t>(r);
}

// Uniform 1-D box filter of half-width k applied along one axis of a
// row-major rows x cols array. `stride` is the distance between neighbours
// along the filtered axis, `len` the axis length, `lines`/`line_stride`
// enumerate the independent lines.
inline void box_forward(const double* in, double* out, std::size_t len, std::size_t stride, std::size_t lines,
                        std::size_t line_stride, std::size_t k)
{
    const double w = 1.0 / static_cast<double>(2 * k + 1);
    const auto kk = static_cast<std::ptrdiff_t>(k);
    for (std::size_t line = 0; line < lines; ++line) {
        const double* src = in + line * line_stride;
        double* dst = out + line * line_stride;
        for (std::size_t i = 0; i < len; ++i) {
            double acc = 0.0;
            for (std::ptrdiff_t a = -kk; a <= kk; ++a)
                acc += src[reflect_index(static_cast<std::ptrdiff_t>(i) + a, len) * stride];
            dst[i * stride] = w * acc;
        }
    }
}

inline void box_adjoint(const double* in, double* out, std::size_t len, std::size_t stride, std::size_t lines,
                        std::size_t line_stride, std::size_t k)
{
    const double w = 1.0 / static_cast<double>(2 * k + 1);
    const auto kk = static_cast<std::ptrdiff_t>(k);
    for (std::size_t line = 0; line < lines; ++line) {
        const double* src = in + line * line_stride;
        double* dst = out + line * line_stride;
        for (std::size_t i = 0; i < len; ++i)
            dst[i * stride] = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            const double v = w * src[i * stride];
            for (std::ptrdiff_t a = -kk; a <= kk; ++a)
                dst[reflect_index(static_cast<std::ptrdiff_t>(i) + a, len) * stride] += v;
        }
    }
}

} // namespace detail

/// Immutable linear operator with an exact adjoint. Copies share the
/// underlying representation.
class LinearMap {
public:
    struct Dense {
        Eigen::MatrixXd entries;
    };
    struct Identity {};
    struct Diagonal {
        Vector weights;
    };
    struct Mask {
        std::vector<std::size_t> kept; // ascending flat indices into the domain
    };
    struct Blur2d {
        std::size_t half_width;
    };
    struct Composition {
        std::shared_ptr<const LinearMap> outer;
        std::shared_ptr<const LinearMap> inner;
    };
    struct Scaled {
        double factor;
        std::shared_ptr<const LinearMap> inner;
    };
    using Variant = std::variant<Dense, Identity, Diagonal, Mask, Blur2d, Composition, Scaled>;

    static LinearMap dense(Eigen::MatrixXd entries)
    {
        auto domain = Shape::vector(static_cast<std::size_t>(entries.cols()));
        auto codomain = Shape::vector(static_cast<std::size_t>(entries.rows()));
        return LinearMap(domain, codomain, Dense{std::move(entries)});
    }

    static LinearMap identity(const Shape& shape) { return LinearMap(shape, shape, Identity{}); }

    static LinearMap diagonal(Vector weights, const Shape& shape)
    {
        check_shape(shape, weights, "diagonal weights");
        return LinearMap(shape, shape, Diagonal{std::move(weights)});
    }

    static LinearMap diagonal(Vector weights)
    {
        auto shape = Shape::vector(static_cast<std::size_t>(weights.size()));
        return diagonal(std::move(weights), shape);
    }

    /// Keeps the entries flagged in `keep` (flat order of `domain`) and
    /// returns them as a vector.
    static LinearMap mask(const std::vector<bool>& keep, const Shape& domain)
    {
        if (keep.size() != domain.size())
            throw DimensionError("mask keep-pattern has " + std::to_string(keep.size())
                                 + " entries but the domain " + domain.to_string() + " has "
                                 + std::to_string(domain.size()));
        std::vector<std::size_t> kept;
        for (std::size_t i = 0; i < keep.size(); ++i)
            if (keep[i])
                kept.push_back(i);
        if (kept.empty())
            throw DimensionError("mask must keep at least one entry");
        auto codomain = Shape::vector(kept.size());
        return LinearMap(domain, codomain, Mask{std::move(kept)});
    }

    /// (2k+1)x(2k+1) uniform blur with half-sample symmetric boundary.
    static LinearMap blur2d(std::size_t rows, std::size_t cols, std::size_t half_width)
    {
        auto shape = Shape::matrix(rows, cols);
        return LinearMap(shape, shape, Blur2d{half_width});
    }

    static LinearMap compose(const LinearMap& outer, const LinearMap& inner)
    {
        if (!(inner.codomain() == outer.domain()))
            throw DimensionError("compose: inner codomain " + inner.codomain().to_string()
                                 + " does not match outer domain " + outer.domain().to_string());
        return LinearMap(inner.domain(), outer.codomain(),
                         Composition{std::make_shared<const LinearMap>(outer), std::make_shared<const LinearMap>(inner)});
    }

    static LinearMap scaled(double factor, const LinearMap& inner)
    {
        return LinearMap(inner.domain(), inner.codomain(), Scaled{factor, std::make_shared<const LinearMap>(inner)});
    }

    const Shape& domain() const { return node_->domain; }
    const Shape& codomain() const { return node_->codomain; }
    const Variant& variant() const { return node_->variant; }

    bool is_identity() const { return std::holds_alternative<Identity>(node_->variant); }

    /// Explicit entries for dense operators, nullptr otherwise.
    const Eigen::MatrixXd* dense_entries() const
    {
        const auto* d = std::get_if<Dense>(&node_->variant);
        return d ? &d->entries : nullptr;
    }

    Vector apply(const Vector& x) const
    {
        check_shape(domain(), x, "apply");
        return std::visit([&](const auto& v) { return forward(v, x); }, node_->variant);
    }

    Vector adjoint(const Vector& y) const
    {
        check_shape(codomain(), y, "adjoint");
        return std::visit([&](const auto& v) { return backward(v, y); }, node_->variant);
    }

    std::string describe() const
    {
        return std::visit(
            [](const auto& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, Dense>)
                    return "dense";
                else if constexpr (std::is_same_v<T, Identity>)
                    return "identity";
                else if constexpr (std::is_same_v<T, Diagonal>)
                    return "diagonal";
                else if constexpr (std::is_same_v<T, Mask>)
                    return "mask";
                else if constexpr (std::is_same_v<T, Blur2d>)
                    return "blur2d(k=" + std::to_string(v.half_width) + ")";
                else if constexpr (std::is_same_v<T, Composition>)
                    return v.outer->describe() + " o " + v.inner->describe();
                else
                    return "scaled(" + v.inner->describe() + ")";
            },
            node_->variant);
    }

private:
    struct Node {
        Shape domain;
        Shape codomain;
        Variant variant;
    };

    LinearMap(const Shape& domain, const Shape& codomain, Variant variant)
        : node_(std::make_shared<const Node>(Node{domain, codomain, std::move(variant)}))
    {
    }

    Vector forward(const Dense& d, const Vector& x) const { return d.entries * x; }
    Vector backward(const Dense& d, const Vector& y) const { return d.entries.transpose() * y; }

    Vector forward(const Identity&, const Vector& x) const { return x; }
    Vector backward(const Identity&, const Vector& y) const { return y; }

    Vector forward(const Diagonal& d, const Vector& x) const { return d.weights.cwiseProduct(x); }
    Vector backward(const Diagonal& d, const Vector& y) const { return d.weights.cwiseProduct(y); }

    Vector forward(const Mask& m, const Vector& x) const
    {
        Vector out(static_cast<Eigen::Index>(m.kept.size()));
        for (std::size_t i = 0; i < m.kept.size(); ++i)
            out[static_cast<Eigen::Index>(i)] = x[static_cast<Eigen::Index>(m.kept[i])];
        return out;
    }
    Vector backward(const Mask& m, const Vector& y) const
    {
        Vector out = Vector::Zero(static_cast<Eigen::Index>(domain().size()));
        for (std::size_t i = 0; i < m.kept.size(); ++i)
            out[static_cast<Eigen::Index>(m.kept[i])] = y[static_cast<Eigen::Index>(i)];
        return out;
    }

    // Separable: filter along columns (within each row), then along rows.
    Vector forward(const Blur2d& b, const Vector& x) const
    {
        const std::size_t rows = domain().rows();
        const std::size_t cols = domain().cols();
        Vector tmp(x.size());
        Vector out(x.size());
        detail::box_forward(x.data(), tmp.data(), cols, 1, rows, cols, b.half_width);
        detail::box_forward(tmp.data(), out.data(), rows, cols, cols, 1, b.half_width);
        return out;
    }
    Vector backward(const Blur2d& b, const Vector& y) const
    {
        const std::size_t rows = domain().rows();
        const std::size_t cols = domain().cols();
        Vector tmp(y.size());
        Vector out(y.size());
        detail::box_adjoint(y.data(), tmp.data(), rows, cols, cols, 1, b.half_width);
        detail::box_adjoint(tmp.data(), out.data(), cols, 1, rows, cols, b.half_width);
        return out;
    }

    Vector forward(const Composition& c, const Vector& x) const { return c.outer->apply(c.inner->apply(x)); }
    Vector backward(const Composition& c, const Vector& y) const { return c.inner->adjoint(c.outer->adjoint(y)); }

    Vector forward(const Scaled& s, const Vector& x) const { return s.factor * s.inner->apply(x); }
    Vector backward(const Scaled& s, const Vector& y) const { return s.factor * s.inner->adjoint(y); }

    std::shared_ptr<const Node> node_;
};

inline Vector apply(const LinearMap& op, const Vector& x) { return op.apply(x); }
inline Vector adjoint(const LinearMap& op, const Vector& y) { return op.adjoint(y); }
inline LinearMap compose(const LinearMap& outer, const LinearMap& inner) { return LinearMap::compose(outer, inner); }

/// Max over `trials` random pairs of |<Ax,y> - <x,A*y>| / (1 + |<Ax,y>|).
inline double adjoint_consistency(const LinearMap& op, std::size_t trials, std::uint64_t seed)
{
    if (trials == 0)
        throw std::invalid_argument("adjoint_consistency needs at least one trial");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    auto draw = [&](std::size_t n) {
        Vector v(static_cast<Eigen::Index>(n));
        for (auto& e : v)
            e = normal(rng);
        return v;
    };
    double worst = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const Vector x = draw(op.domain().size());
        const Vector y = draw(op.codomain().size());
        const double lhs = op.apply(x).dot(y);
        const double rhs = x.dot(op.adjoint(y));
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
    }
    return worst;
}

} // namespace osga

#endif
