#ifndef OSGA_HARNESS_CHECKS_HPP
#define OSGA_HARNESS_CHECKS_HPP

#include "osga/harness/experiment.hpp"

#include <sstream>
#include <string>
#include <vector>

namespace osga::harness {

struct CheckResult {
    std::string name;
    bool ok = true;
    std::string detail;
};

namespace detail {

inline std::vector<LinearMap> sample_operators()
{
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    Eigen::MatrixXd m(4, 6);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = nd(rng);
    const auto img = Shape::matrix(6, 5);
    Vector w(30);
    for (Eigen::Index i = 0; i < w.size(); ++i)
        w[i] = nd(rng);
    std::vector<bool> keep(30);
    for (std::size_t i = 0; i < keep.size(); ++i)
        keep[i] = i % 3 != 0;
    const auto blur = LinearMap::blur2d(6, 5, 2);
    return {LinearMap::dense(m),
            LinearMap::identity(img),
            LinearMap::diagonal(w, img),
            LinearMap::mask(keep, img),
            blur,
            compose(LinearMap::mask(keep, img), blur),
            LinearMap::scaled(-2.5, blur)};
}

inline std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace detail

/// Quick invariant suite behind the `check` CLI command.
inline std::vector<CheckResult> run_checks()
{
    std::vector<CheckResult> out;

    {
        CheckResult r{"adjoint consistency of every operator variant", true, ""};
        double worst = 0.0;
        for (const auto& op : detail::sample_operators())
            worst = std::max(worst, adjoint_consistency(op, 20, 11));
        r.ok = worst <= 1e-10;
        r.detail = "max error " + detail::fmt(worst);
        out.push_back(r);
    }

    {
        CheckResult r{"NFO-FG applies each operator once forward and once adjoint", true, ""};
        auto sys = gen_random_system(20, 30, Density::dense(), 3);
        const auto dom = sys.a.domain();
        CompositeProblem p(dom, {{SmoothTerm::quadratic_loss(sys.y), sys.a}},
                           {{Regularizer::l1(1.0), LinearMap::identity(dom)},
                            {Regularizer::l2sq(0.5), LinearMap::scaled(2.0, LinearMap::identity(dom))}});
        const auto res = nfo_fg(p, sys.x0);
        r.ok = res.counts.forward == 3 && res.counts.adjoint == 3 && nfo_f(p, sys.x0).counts.adjoint == 0;
        r.detail = std::to_string(res.counts.forward) + " forward, " + std::to_string(res.counts.adjoint) + " adjoint";
        out.push_back(r);
    }

    {
        CheckResult r{"subproblem solution satisfies its defining equation", true, ""};
        std::mt19937_64 rng(5);
        std::normal_distribution<double> nd;
        std::uniform_real_distribution<double> ud(0.1, 2.0);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            Vector z0(5), w(5), h(5);
            for (int i = 0; i < 5; ++i) {
                z0[i] = nd(rng);
                w[i] = ud(rng);
                h[i] = nd(rng);
            }
            QuadraticProx q(ud(rng), ud(rng), z0, w);
            const double gamma = nd(rng);
            const auto s = solve_subproblem(q, gamma, h);
            const double e_implied = std::max(0.0, -(gamma + h.dot(s.u)) / q.value(s.u));
            worst = std::max(worst, std::abs(e_implied - s.e) / std::max(1.0, s.e));
        }
        r.ok = worst <= 1e-10;
        r.detail = "max relative residual " + detail::fmt(worst);
        out.push_back(r);
    }

    {
        CheckResult r{"OSGA best value and error factor are monotone", true, ""};
        ExperimentConfig c = preset_config("lasso_sparse");
        c.m = 60;
        c.n = 120;
        c.seed = 1;
        const auto inst = build_instance(c, 0);
        std::size_t violations = 0;
        double prev_obj = std::numeric_limits<double>::infinity();
        double prev_eta = std::numeric_limits<double>::infinity();
        TraceSink sink = [&](const IterationRecord& rec, const Vector&) {
            if (rec.objective > prev_obj || (rec.eta > prev_eta))
                ++violations;
            prev_obj = rec.objective;
            prev_eta = rec.eta;
        };
        osga_solve(inst.problem, default_prox(inst.x0), OsgaParams{}, inst.x0, Termination::iterations(300), sink);
        r.ok = violations == 0;
        r.detail = std::to_string(violations) + " violations in 300 iterations";
        out.push_back(r);
    }

    {
        CheckResult r{"performance profiles are monotone and bounded", true, ""};
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> ud(1.0, 3.0);
        std::vector<std::vector<double>> table(3, std::vector<double>(25));
        for (auto& row : table)
            for (auto& v : row)
                v = ud(rng);
        table[1][4] = std::numeric_limits<double>::infinity();
        const auto rho = performance_profile(table, default_tau_grid());
        for (const auto& curve : rho)
            for (std::size_t t = 0; t < curve.size(); ++t)
                if (curve[t] < 0.0 || curve[t] > 1.0 || (t > 0 && curve[t] < curve[t - 1]))
                    r.ok = false;
        out.push_back(r);
    }

    {
        CheckResult r{"generators are deterministic under a seed", true, ""};
        const auto a = gen_random_system(15, 10, Density::sparse_with(0.3), 42);
        const auto b = gen_random_system(15, 10, Density::sparse_with(0.3), 42);
        r.ok = *a.a.dense_entries() == *b.a.dense_entries() && a.y == b.y && a.x0 == b.x0 &&
               add_noise(a.y, NoiseSpec::snr(15), 1) == add_noise(b.y, NoiseSpec::snr(15), 1);
        out.push_back(r);
    }
    return out;
}

} // namespace osga::harness

#endif
