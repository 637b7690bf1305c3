#ifndef OSGA_HARNESS_EXPERIMENT_HPP
#define OSGA_HARNESS_EXPERIMENT_HPP

#include "osga/baselines.hpp"
#include "osga/harness/config.hpp"
#include "osga/harness/generators.hpp"
#include "osga/harness/metrics.hpp"
#include "osga/harness/pgm.hpp"
#include "osga/harness/profile.hpp"
#include "osga/osga.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace osga::harness {

/// One generated problem with everything the solvers and metrics need.
struct Instance {
    std::string name;
    CompositeProblem problem;
    Vector x0;
    double lipschitz = 1.0; // of the smooth part used by PGA/FISTA
    std::optional<Vector> truth;    // clean image or true signal
    std::optional<Vector> observed; // observation expressed in the domain (ISNR)
    bool image = false;
};

/// Deterministic stream seeds derived from the config seed (splitmix64).
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t instance, std::uint64_t stream)
{
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (instance * 16 + stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline Instance build_instance(const ExperimentConfig& c, std::size_t index)
{
    c.validate();
    const std::uint64_t seed = *c.seed;
    std::ostringstream name;
    name << "i" << std::setw(3) << std::setfill('0') << index;
    const double lambda = c.resolve_lambda();
    using Smooth = CompositeProblem::SmoothEntry;
    using Reg = CompositeProblem::RegEntry;

    if (is_random_system(c.family)) {
        const auto density = c.sparse ? Density::sparse_with(c.sparse_p) : Density::dense();
        auto sys = gen_random_system(c.m, c.n, density, derive_seed(seed, index, 0));
        const auto dom = sys.a.domain();
        const auto id = LinearMap::identity(dom);
        std::vector<Reg> regs;
        double smooth_extra = 0.0;
        switch (c.family) {
        case Family::tikhonov:
            regs.push_back({Regularizer::l2sq(lambda), id});
            break;
        case Family::lasso:
            regs.push_back({Regularizer::l1(lambda), id});
            break;
        default:
            regs.push_back({Regularizer::l1(lambda), id});
            regs.push_back({Regularizer::l2sq(c.lambda2), id});
            smooth_extra = c.lambda2;
            break;
        }
        const double lhat = max_column_norm_sq(*sys.a.dense_entries());
        Instance inst{name.str(),
                      CompositeProblem(dom, {Smooth{SmoothTerm::quadratic_loss(sys.y), sys.a}}, std::move(regs)),
                      sys.x0,
                      c.lipschitz ? *c.lipschitz : c.resolve_l_scale() * lhat + smooth_extra,
                      std::nullopt,
                      std::nullopt,
                      false};
        return inst;
    }

    if (c.family == Family::spike_recovery) {
        auto a = gen_sensing_matrix(c.m, c.n, derive_seed(seed, index, 0));
        Vector truth = gen_spike_signal(c.n, c.spikes, derive_seed(seed, index, 1));
        Vector y = add_noise(a.apply(truth), c.resolve_noise(), derive_seed(seed, index, 2));
        Vector aty = a.adjoint(y);
        const double reg = lambda * aty.lpNorm<Eigen::Infinity>();
        const auto dom = a.domain();
        Instance inst{name.str(),
                      CompositeProblem(dom, {Smooth{SmoothTerm::quadratic_loss(y), a}},
                                       {Reg{Regularizer::l1(reg), LinearMap::identity(dom)}}),
                      aty,
                      c.lipschitz ? *c.lipschitz : 1.0,
                      std::move(truth),
                      std::nullopt,
                      false};
        return inst;
    }

    // Imaging families.
    Vector clean;
    std::size_t rows = c.rows;
    std::size_t cols = c.cols;
    if (c.image.empty()) {
        clean = gen_phantom(rows, cols);
    } else {
        auto img = read_pgm_file(c.image);
        rows = img.rows;
        cols = img.cols;
        clean = std::move(img.pixels);
    }
    const auto dom = Shape::matrix(rows, cols);
    LinearMap forward = LinearMap::identity(dom);
    if (c.family == Family::tv_inpaint)
        forward = LinearMap::mask(gen_missing_mask(dom.size(), c.missing_fraction, derive_seed(seed, index, 0)), dom);
    else if (c.family == Family::tv_deblur)
        forward = LinearMap::blur2d(rows, cols, c.blur_halfwidth);
    Vector y = add_noise(forward.apply(clean), c.resolve_noise(), derive_seed(seed, index, 1));
    Vector observed = forward.adjoint(y);
    if (c.family == Family::tv_deblur)
        observed = y; // the blurred image itself
    Instance inst{name.str(),
                  CompositeProblem(dom, {Smooth{SmoothTerm::quadratic_loss(y), forward}},
                                   {Reg{Regularizer::itv(lambda), LinearMap::identity(dom)}}),
                  observed,
                  c.lipschitz ? *c.lipschitz : 1.0,
                  std::move(clean),
                  observed,
                  true};
    return inst;
}

/// Outcome of one (solver, instance) run, with the full trace.
struct RunOutcome {
    std::string solver;
    bool ok = true;
    std::string message;
    SolveResult result;
    std::vector<IterationRecord> records;
    std::vector<Vector> points;
};

inline Termination make_termination(const ExperimentConfig& c, std::size_t factor = 1)
{
    Termination t;
    if (c.max_iters)
        t.max_iterations = *c.max_iters * factor;
    if (c.max_seconds)
        t.max_seconds = *c.max_seconds * static_cast<double>(factor);
    return t;
}

inline RunOutcome run_solver(const std::string& solver, const Instance& inst, const ExperimentConfig& c,
                             const Termination& termination, bool keep_points = true)
{
    RunOutcome out;
    out.solver = solver;
    TraceSink sink = [&](const IterationRecord& rec, const Vector& x) {
        out.records.push_back(rec);
        if (keep_points)
            out.points.push_back(x);
    };
    try {
        if (solver == "osga") {
            OsgaParams params;
            params.mu = c.osga_mu;
            const auto q = c.osga_q0 ? default_prox(inst.x0, *c.osga_q0) : default_prox(inst.x0);
            out.result = osga_solve(inst.problem, q, params, inst.x0, termination, sink);
        } else if (solver == "nsdsg") {
            out.result = nsdsg_solve(inst.problem, inst.x0, c.resolve_nsdsg_alpha0(), termination, sink);
        } else if (solver == "pga") {
            out.result = pga_solve(split_for_prox(inst.problem, c.chit), inst.lipschitz, inst.x0, termination, sink);
        } else if (solver == "fista") {
            out.result = fista_solve(split_for_prox(inst.problem, c.chit), inst.lipschitz, inst.x0, termination, sink);
        } else if (solver == "nes83") {
            Nes83Options opt;
            opt.rho = c.nes83_rho;
            out.result = nes83_solve(inst.problem, inst.x0, termination, opt, sink);
        } else {
            throw std::invalid_argument("unknown solver '" + solver + "'");
        }
    } catch (const std::exception& e) {
        out.ok = false;
        out.message = e.what();
    }
    return out;
}

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

struct SummaryRow {
    std::string instance;
    std::string solver;
    bool ok = true;
    std::size_t iterations = 0;
    double final_objective = std::numeric_limits<double>::quiet_NaN();
    double best_objective = std::numeric_limits<double>::infinity();
    double isnr = std::numeric_limits<double>::quiet_NaN();
    double psnr = std::numeric_limits<double>::quiet_NaN();
    double mse = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
    OperatorCounts ops;
    double reference_objective = std::numeric_limits<double>::quiet_NaN();
    std::string reference_source;
    std::string message;
};

inline const char* summary_header()
{
    return "instance,solver,status,iterations,final_objective,best_objective,isnr,psnr,mse,wall_seconds,"
           "fwd_ops,adj_ops,reference_objective,reference_source,message";
}

inline const char* trace_header() { return "iteration,seconds,objective,rel1,rel2,isnr,psnr,mse,fwd_ops,adj_ops"; }

inline std::string csv_safe(std::string s)
{
    for (auto& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r')
            ch = ';';
    return s;
}

struct QualityMetrics {
    double isnr = std::numeric_limits<double>::quiet_NaN();
    double psnr = std::numeric_limits<double>::quiet_NaN();
    double mse = std::numeric_limits<double>::quiet_NaN();
};

inline QualityMetrics quality(const Instance& inst, const Vector& x)
{
    QualityMetrics q;
    if (inst.truth) {
        q.mse = metric_mse(x, *inst.truth);
        if (inst.image)
            q.psnr = metric_psnr(x, *inst.truth, PsnrScale::unit);
        if (inst.observed)
            q.isnr = metric_isnr(x, *inst.observed, *inst.truth);
    }
    return q;
}

struct ExperimentReport {
    std::vector<SummaryRow> rows;
    bool any_failure = false;
    std::vector<std::string> files;
};

/// Runs every configured solver on every generated instance and writes
/// trace_<instance>_<solver>.csv, summary.csv and profile.csv to out_dir.
inline ExperimentReport run_experiment(const ExperimentConfig& c, const std::filesystem::path& out_dir)
{
    c.validate();
    std::filesystem::create_directories(out_dir);
    ExperimentReport report;
    const auto termination = make_termination(c);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<std::vector<double>> table(c.solvers.size(), std::vector<double>(c.instances));
    for (std::size_t i = 0; i < c.instances; ++i) {
        const Instance inst = build_instance(c, i);
        std::vector<RunOutcome> runs;
        for (const auto& s : c.solvers)
            runs.push_back(run_solver(s, inst, c, termination));

        // Reference optimum: the best run extended, or any better recorded point.
        double f_star = std::numeric_limits<double>::infinity();
        Vector x_star;
        std::string source = "none";
        std::optional<std::size_t> best_run;
        for (std::size_t r = 0; r < runs.size(); ++r)
            if (runs[r].ok && (!best_run || runs[r].result.best_objective < runs[*best_run].result.best_objective))
                best_run = r;
        if (best_run && c.reference_factor > 0) {
            auto ext = run_solver(runs[*best_run].solver, inst, c, make_termination(c, c.reference_factor), false);
            if (ext.ok) {
                f_star = ext.result.best_objective;
                x_star = ext.result.best_x;
                source = ext.solver + " x" + std::to_string(c.reference_factor) + " (" +
                         std::to_string(ext.result.iterations) + " iterations)";
            }
        }
        for (const auto& run : runs)
            for (std::size_t k = 0; k < run.records.size(); ++k)
                if (run.records[k].objective < f_star) {
                    f_star = run.records[k].objective;
                    x_star = run.points[k];
                    source = run.solver + " trace iteration " + std::to_string(run.records[k].iteration);
                }

        for (std::size_t r = 0; r < runs.size(); ++r) {
            const auto& run = runs[r];
            const std::string fname = "trace_" + inst.name + "_" + run.solver + ".csv";
            std::ofstream trace(out_dir / fname);
            trace << trace_header() << "\n";
            const double f0 = run.records.empty() ? nan : run.records.front().objective;
            for (std::size_t k = 0; k < run.records.size(); ++k) {
                const auto& rec = run.records[k];
                const auto q = quality(inst, run.points[k]);
                trace << rec.iteration << ',' << format_number(c.record_time ? rec.seconds : 0.0) << ','
                      << format_number(rec.objective) << ','
                      << format_number(x_star.size() ? metric_rel1(run.points[k], x_star) : nan) << ','
                      << format_number(metric_rel2(rec.objective, f_star, f0)) << ',' << format_number(q.isnr)
                      << ',' << format_number(q.psnr) << ',' << format_number(q.mse) << ',' << rec.ops.forward
                      << ',' << rec.ops.adjoint << "\n";
            }
            report.files.push_back(fname);

            SummaryRow row;
            row.instance = inst.name;
            row.solver = run.solver;
            row.ok = run.ok;
            row.message = run.message;
            row.reference_objective = f_star;
            row.reference_source = source;
            if (!run.records.empty()) {
                row.best_objective = run.records.front().objective;
                for (const auto& rec : run.records)
                    row.best_objective = std::min(row.best_objective, rec.objective);
                row.final_objective = run.records.back().objective;
                row.iterations = run.records.back().iteration;
                row.ops = run.records.back().ops;
                row.wall_seconds = c.record_time ? run.records.back().seconds : 0.0;
                const auto q = quality(inst, run.points.back());
                row.isnr = q.isnr;
                row.psnr = q.psnr;
                row.mse = q.mse;
            }
            table[r][i] = run.ok ? row.best_objective : std::numeric_limits<double>::infinity();
            report.any_failure = report.any_failure || !run.ok;
            report.rows.push_back(std::move(row));
        }
    }

    {
        std::ofstream summary(out_dir / "summary.csv");
        summary << summary_header() << "\n";
        for (const auto& r : report.rows)
            summary << r.instance << ',' << r.solver << ',' << (r.ok ? "ok" : "failed") << ',' << r.iterations
                    << ',' << format_number(r.final_objective) << ',' << format_number(r.best_objective) << ','
                    << format_number(r.isnr) << ',' << format_number(r.psnr) << ',' << format_number(r.mse) << ','
                    << format_number(r.wall_seconds) << ',' << r.ops.forward << ',' << r.ops.adjoint << ','
                    << format_number(r.reference_objective) << ',' << csv_safe(r.reference_source) << ','
                    << csv_safe(r.message) << "\n";
        report.files.push_back("summary.csv");
    }
    {
        const auto taus = c.profile_taus.empty() ? default_tau_grid() : c.profile_taus;
        const auto rho = performance_profile(table, taus);
        std::ofstream profile(out_dir / "profile.csv");
        profile << "solver,tau,rho\n";
        for (std::size_t s = 0; s < c.solvers.size(); ++s)
            for (std::size_t t = 0; t < taus.size(); ++t)
                profile << c.solvers[s] << ',' << format_number(taus[t]) << ',' << format_number(rho[s][t]) << "\n";
        report.files.push_back("profile.csv");
    }
    return report;
}

} // namespace osga::harness

#endif
