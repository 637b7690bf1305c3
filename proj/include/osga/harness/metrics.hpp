#ifndef OSGA_HARNESS_METRICS_HPP
#define OSGA_HARNESS_METRICS_HPP

#include "osga/types.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace osga::harness {

namespace detail {
inline void same_size(const Vector& a, const Vector& b, const char* what)
{
    if (a.size() != b.size())
        throw DimensionError(std::string(what) + ": arguments differ in size");
}
} // namespace detail

/// 20 log10(||Y - X0|| / ||X - X0||), in dB.
inline double metric_isnr(const Vector& x, const Vector& observed, const Vector& clean)
{
    detail::same_size(x, clean, "isnr");
    detail::same_size(observed, clean, "isnr");
    const double den = (x - clean).norm();
    const double num = (observed - clean).norm();
    if (den == 0.0)
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(num / den);
}

enum class PsnrScale { unit, byte };

/// 20 log10(peak sqrt(mn) / ||X - X0||) with peak 1 (unit) or 255 (byte).
/// Returns +infinity when X equals X0.
inline double metric_psnr(const Vector& x, const Vector& clean, PsnrScale scale = PsnrScale::unit)
{
    detail::same_size(x, clean, "psnr");
    const double err = (x - clean).norm();
    if (err == 0.0)
        return std::numeric_limits<double>::infinity();
    const double peak = scale == PsnrScale::byte ? 255.0 : 1.0;
    return 20.0 * std::log10(peak * std::sqrt(static_cast<double>(x.size())) / err);
}

/// (1/n) ||x - x0||^2.
inline double metric_mse(const Vector& x, const Vector& clean)
{
    detail::same_size(x, clean, "mse");
    return (x - clean).squaredNorm() / static_cast<double>(x.size());
}

/// ||x - x*|| / ||x*|| (absolute distance when x* = 0).
inline double metric_rel1(const Vector& x, const Vector& reference)
{
    detail::same_size(x, reference, "rel1");
    const double scale = reference.norm();
    const double d = (x - reference).norm();
    return scale > 0.0 ? d / scale : d;
}

/// (f - f*) / (f0 - f*); 0 when f0 == f*.
inline double metric_rel2(double f, double f_star, double f0)
{
    const double den = f0 - f_star;
    return den > 0.0 ? (f - f_star) / den : 0.0;
}

} // namespace osga::harness

#endif
