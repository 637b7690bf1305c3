#ifndef OSGA_HARNESS_GENERATORS_HPP
#define OSGA_HARNESS_GENERATORS_HPP

#include "osga/linop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace osga::harness {

/// Entry pattern of a random system: dense, or each entry nonzero with
/// probability p.
struct Density {
    bool sparse = false;
    double p = 1.0;

    static Density dense() { return {false, 1.0}; }
    static Density sparse_with(double p) { return {true, p}; }
};

struct RandomSystem {
    LinearMap a;
    Vector y;
    Vector x0;
};

namespace detail {

inline Vector random_entries(std::size_t n, const Density& density, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    Vector v(static_cast<Eigen::Index>(n));
    for (auto& e : v) {
        if (density.sparse) {
            const bool keep = uniform(rng) < density.p;
            const double value = uniform(rng);
            e = keep ? value : 0.0;
        } else {
            e = uniform(rng);
        }
    }
    return v;
}

} // namespace detail

/// A (m x n), y (m) and x0 (n) with entries uniform on [0,1), optionally
/// thinned to the given density. Fully determined by the seed.
inline RandomSystem gen_random_system(std::size_t m, std::size_t n, const Density& density, std::uint64_t seed)
{
    if (m == 0 || n == 0)
        throw std::invalid_argument("random system needs m, n >= 1");
    if (density.sparse && !(density.p > 0.0 && density.p <= 1.0))
        throw std::invalid_argument("sparse density must lie in (0,1]");
    std::mt19937_64 rng(seed);
    // Fill column by column so the draw order matches Eigen's storage.
    Eigen::MatrixXd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    const Vector flat = detail::random_entries(m * n, density, rng);
    std::copy(flat.begin(), flat.end(), a.data());
    Vector y = detail::random_entries(m, density, rng);
    Vector x0 = detail::random_entries(n, density, rng);
    return {LinearMap::dense(std::move(a)), std::move(y), std::move(x0)};
}

/// Length-n vector with exactly k entries equal to +-1 at uniformly chosen
/// positions.
inline Vector gen_spike_signal(std::size_t n, std::size_t k, std::uint64_t seed)
{
    if (k > n)
        throw std::invalid_argument("spike count exceeds signal length");
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first k slots are a uniform sample.
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::bernoulli_distribution coin(0.5);
    Vector x = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < k; ++i)
        x[static_cast<Eigen::Index>(idx[i])] = coin(rng) ? 1.0 : -1.0;
    return x;
}

/// Gaussian m x n matrix with orthonormalized rows.
inline LinearMap gen_sensing_matrix(std::size_t m, std::size_t n, std::uint64_t seed)
{
    if (m == 0 || m > n)
        throw std::invalid_argument("sensing matrix needs 1 <= m <= n");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd g(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < g.size(); ++i)
        g.data()[i] = normal(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g.rows(), g.cols());
    return LinearMap::dense(q.transpose());
}

/// Additive white Gaussian noise, given either as a target SNR in dB
/// (relative to the measured signal power) or as a variance.
struct NoiseSpec {
    enum class Kind { none, snr_db, variance };
    Kind kind = Kind::none;
    double value = 0.0;

    static NoiseSpec none() { return {}; }
    static NoiseSpec snr(double db) { return {Kind::snr_db, db}; }
    static NoiseSpec var(double v) { return {Kind::variance, v}; }
};

inline Vector add_noise(const Vector& clean, const NoiseSpec& spec, std::uint64_t seed)
{
    double variance = 0.0;
    switch (spec.kind) {
    case NoiseSpec::Kind::none:
        return clean;
    case NoiseSpec::Kind::snr_db:
        if (std::isinf(spec.value) && spec.value > 0)
            return clean;
        variance = clean.squaredNorm() / static_cast<double>(clean.size()) / std::pow(10.0, spec.value / 10.0);
        break;
    case NoiseSpec::Kind::variance:
        if (!(spec.value >= 0.0))
            throw std::invalid_argument("noise variance must be >= 0");
        variance = spec.value;
        break;
    }
    if (variance == 0.0)
        return clean;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(variance));
    Vector out = clean;
    for (auto& e : out)
        e += normal(rng);
    return out;
}

/// Keep-pattern dropping round(fraction * size) uniformly chosen entries.
inline std::vector<bool> gen_missing_mask(std::size_t size, double fraction, std::uint64_t seed)
{
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw std::invalid_argument("missing fraction must lie in [0,1)");
    const auto drop = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(size)));
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::vector<bool> keep(size, true);
    for (std::size_t i = 0; i < drop; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, size - 1);
        std::swap(idx[i], idx[pick(rng)]);
        keep[idx[i]] = false;
    }
    return keep;
}

/// Piecewise-constant test image with values in [0,1] (row-major).
inline Vector gen_phantom(std::size_t rows, std::size_t cols)
{
    Vector img(static_cast<Eigen::Index>(rows * cols));
    const double h = static_cast<double>(rows);
    const double w = static_cast<double>(cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            const double r = (static_cast<double>(i) + 0.5) / h;
            const double c = (static_cast<double>(j) + 0.5) / w;
            double v = 0.1;
            const double er = (r - 0.5) / 0.42;
            const double ec = (c - 0.5) / 0.34;
            if (er * er + ec * ec <= 1.0)
                v = 0.45;
            const double dr = (r - 0.38) / 0.14;
            const double dc = (c - 0.4) / 0.1;
            if (dr * dr + dc * dc <= 1.0)
                v = 0.9;
            if (r > 0.58 && r < 0.78 && c > 0.48 && c < 0.68)
                v = 0.7;
            const double sr = (r - 0.68) / 0.06;
            const double sc = (c - 0.32) / 0.06;
            if (sr * sr + sc * sc <= 1.0)
                v = 0.0;
            if (r > 0.04 && r < 0.1 && c > 0.1 && c < 0.9)
                v = 1.0;
            img[static_cast<Eigen::Index>(i * cols + j)] = v;
        }
    return img;
}

} // namespace osga::harness

#endif
