#ifndef OSGA_HARNESS_PROFILE_HPP
#define OSGA_HARNESS_PROFILE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace osga::harness {

/// Dolan-More performance profile.
///
/// `table[s][p]` is the (positive, smaller-is-better) metric of solver s on
/// problem p; failures are +infinity. Returns rho[s][t], the fraction of
/// problems on which solver s is within a factor taus[t] of the best solver.
inline std::vector<std::vector<double>> performance_profile(const std::vector<std::vector<double>>& table,
                                                            const std::vector<double>& taus)
{
    if (table.empty() || table.front().empty())
        throw std::invalid_argument("performance profile needs at least one solver and one problem");
    const std::size_t problems = table.front().size();
    for (const auto& row : table)
        if (row.size() != problems)
            throw std::invalid_argument("performance profile table is ragged");

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(problems, inf);
    for (const auto& row : table)
        for (std::size_t p = 0; p < problems; ++p)
            best[p] = std::min(best[p], row[p]);

    std::vector<std::vector<double>> rho(table.size(), std::vector<double>(taus.size(), 0.0));
    for (std::size_t s = 0; s < table.size(); ++s) {
        std::vector<double> ratio(problems);
        for (std::size_t p = 0; p < problems; ++p) {
            const double v = table[s][p];
            if (!std::isfinite(v) || !std::isfinite(best[p]))
                ratio[p] = inf;
            else if (best[p] > 0.0)
                ratio[p] = v / best[p];
            else
                ratio[p] = v == best[p] ? 1.0 : inf; // best metric of exactly 0
        }
        for (std::size_t t = 0; t < taus.size(); ++t) {
            const auto hits = std::count_if(ratio.begin(), ratio.end(), [&](double r) { return r <= taus[t]; });
            rho[s][t] = static_cast<double>(hits) / static_cast<double>(problems);
        }
    }
    return rho;
}

inline std::vector<double> default_tau_grid()
{
    return {1.0, 1.0001, 1.001, 1.01, 1.05, 1.1, 1.25, 1.5, 2.0, 5.0, 10.0};
}

} // namespace osga::harness

#endif
