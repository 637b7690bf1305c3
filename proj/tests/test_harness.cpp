#include "osga/harness/checks.hpp"
#include "osga/harness/experiment.hpp"

#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace osga;
using namespace osga::harness;

namespace {

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p)
{
    std::vector<std::vector<std::string>> rows;
    std::ifstream in(p);
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (!line.empty() && line.back() == ',')
            cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::filesystem::path scratch_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("osga_harness_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

ExperimentConfig small_lasso_config()
{
    auto c = parse_config_string("family = lasso\nm = 40\nn = 80\nlambda = 1\nmax_iters = 40\nseed = 7\n"
                                 "instances = 2\nreference_factor = 3\n");
    return c;
}

} // namespace

TEST(Generators, RandomSystemIsDeterministic)
{
    const auto a = gen_random_system(2, 3, Density::dense(), 99);
    const auto b = gen_random_system(2, 3, Density::dense(), 99);
    const auto c = gen_random_system(2, 3, Density::dense(), 100);
    EXPECT_EQ(*a.a.dense_entries(), *b.a.dense_entries());
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.x0, b.x0);
    EXPECT_NE(*a.a.dense_entries(), *c.a.dense_entries());
    const auto& m = *a.a.dense_entries();
    EXPECT_GE(m.minCoeff(), 0.0);
    EXPECT_LT(m.maxCoeff(), 1.0);
    EXPECT_THROW(gen_random_system(0, 3, Density::dense(), 1), std::invalid_argument);
}

TEST(Generators, SparseFractionConcentrates)
{
    const auto s = gen_random_system(1000, 1000, Density::sparse_with(0.05), 5);
    const auto& m = *s.a.dense_entries();
    const double frac = static_cast<double>((m.array() != 0.0).count()) / static_cast<double>(m.size());
    EXPECT_GE(frac, 0.04);
    EXPECT_LE(frac, 0.06);
}

TEST(Generators, SpikeSignal)
{
    EXPECT_EQ(gen_spike_signal(10, 0, 1), Vector::Zero(10));
    const Vector full = gen_spike_signal(12, 12, 2);
    EXPECT_EQ(full.cwiseAbs(), Vector::Ones(12));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Vector x = gen_spike_signal(200, 17, seed);
        EXPECT_EQ((x.array() != 0.0).count(), 17);
        EXPECT_EQ((x.cwiseAbs().array() == 1.0).count(), 17);
    }
    // Signs are fair: over many spikes the positive share is near one half.
    const Vector many = gen_spike_signal(20000, 10000, 3);
    EXPECT_NEAR(static_cast<double>((many.array() > 0.0).count()) / 10000.0, 0.5, 0.02);
    EXPECT_THROW(gen_spike_signal(5, 6, 1), std::invalid_argument);
}

TEST(Generators, SensingMatrixRowsOrthonormal)
{
    const auto a = gen_sensing_matrix(50, 100, 4);
    const auto& m = *a.dense_entries();
    EXPECT_LE((m * m.transpose() - Eigen::MatrixXd::Identity(50, 50)).cwiseAbs().maxCoeff(), 1e-10);
    const auto one = *gen_sensing_matrix(1, 7, 5).dense_entries();
    EXPECT_NEAR(one.norm(), 1.0, 1e-14);
    const auto sq = *gen_sensing_matrix(30, 30, 6).dense_entries();
    EXPECT_NEAR(std::abs(sq.determinant()), 1.0, 1e-8);
    EXPECT_THROW(gen_sensing_matrix(8, 7, 1), std::invalid_argument);
}

TEST(Generators, NoiseSnrAndVariance)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    Vector clean(100000);
    for (auto& v : clean)
        v = ud(rng);
    for (double db : {5.0, 15.0, 40.0}) {
        const Vector y = add_noise(clean, NoiseSpec::snr(db), 9);
        const double snr = 10.0 * std::log10(clean.squaredNorm() / (y - clean).squaredNorm());
        EXPECT_NEAR(snr, db, 0.5);
    }
    const Vector z = Vector::Zero(1000000);
    const Vector n = add_noise(z, NoiseSpec::var(1e-6), 10);
    EXPECT_NEAR(n.squaredNorm() / 1e6, 1e-6, 0.05e-6);
    EXPECT_EQ(add_noise(clean, NoiseSpec::var(0.0), 1), clean);
    EXPECT_EQ(add_noise(clean, NoiseSpec::snr(std::numeric_limits<double>::infinity()), 1), clean);
    EXPECT_EQ(add_noise(clean, NoiseSpec::none(), 1), clean);
    EXPECT_EQ(add_noise(clean, NoiseSpec::snr(10.0), 3), add_noise(clean, NoiseSpec::snr(10.0), 3));
}

TEST(Generators, MissingMaskDropsExactFraction)
{
    const auto keep = gen_missing_mask(1000, 0.4, 11);
    EXPECT_EQ(std::count(keep.begin(), keep.end(), false), 400);
    EXPECT_EQ(keep, gen_missing_mask(1000, 0.4, 11));
    EXPECT_THROW(gen_missing_mask(10, 1.0, 1), std::invalid_argument);
}

TEST(Generators, PhantomInUnitRange)
{
    const Vector p = gen_phantom(64, 64);
    EXPECT_GE(p.minCoeff(), 0.0);
    EXPECT_LE(p.maxCoeff(), 1.0);
    EXPECT_GT(itv_value(p, Shape::matrix(64, 64)), 0.0);
}

TEST(Metrics, Isnr)
{
    const Vector x0 = Vector::Zero(4);
    const Vector y = Vector::Constant(4, 1.0);
    EXPECT_EQ(metric_isnr(y, y, x0), 0.0);
    EXPECT_NEAR(metric_isnr(0.5 * y, y, x0), 20.0 * std::log10(2.0), 1e-12);
    EXPECT_NEAR(20.0 * std::log10(2.0), 6.0206, 1e-4);
    EXPECT_TRUE(std::isinf(metric_isnr(x0, y, x0)));
    EXPECT_THROW(metric_isnr(Vector::Zero(3), y, x0), DimensionError);
}

TEST(Metrics, Psnr)
{
    // ||X - X0|| = sqrt(mn)/10 gives 20 dB on the unit scale.
    const Vector x0 = Vector::Zero(100);
    const Vector x = Vector::Constant(100, 0.1);
    EXPECT_NEAR(metric_psnr(x, x0), 20.0, 1e-12);
    EXPECT_NEAR(metric_psnr(x, x0, PsnrScale::byte), 20.0 + 20.0 * std::log10(255.0), 1e-12);
    EXPECT_TRUE(std::isinf(metric_psnr(x0, x0)));
    EXPECT_GT(metric_psnr(0.5 * x, x0), metric_psnr(x, x0));
}

TEST(Metrics, MseAndRelatives)
{
    EXPECT_EQ(metric_mse(Vector::Ones(2), Vector::Zero(2)), 1.0);
    EXPECT_EQ(metric_mse(Vector::Ones(5), Vector::Ones(5)), 0.0);
    std::mt19937_64 rng(12);
    std::normal_distribution<double> nd;
    Vector a(50), b(50);
    double direct = 0.0;
    for (int i = 0; i < 50; ++i) {
        a[i] = nd(rng);
        b[i] = nd(rng);
        direct += (a[i] - b[i]) * (a[i] - b[i]);
    }
    EXPECT_NEAR(metric_mse(a, b), direct / 50.0, 1e-14);
    EXPECT_EQ(metric_rel1(Vector::Constant(2, 2.0), Vector::Constant(2, 1.0)), 1.0);
    EXPECT_EQ(metric_rel2(3.0, 1.0, 5.0), 0.5);
    EXPECT_EQ(metric_rel2(3.0, 3.0, 3.0), 0.0);
}

TEST(Profile, SingleSolverIsOne)
{
    const auto rho = performance_profile({{3.0, 1.0, 7.0}}, {1.0, 2.0, 10.0});
    EXPECT_EQ(rho[0], (std::vector<double>{1.0, 1.0, 1.0}));
}

TEST(Profile, WinShareAtTauOne)
{
    // Solver A wins 84 of 100 problems, B wins the other 16.
    std::vector<std::vector<double>> table(2, std::vector<double>(100));
    for (int p = 0; p < 100; ++p) {
        table[0][p] = p < 84 ? 1.0 : 2.0;
        table[1][p] = p < 84 ? 1.5 : 1.0;
    }
    const auto rho = performance_profile(table, {1.0, 1.5, 2.0});
    EXPECT_DOUBLE_EQ(rho[0][0], 0.84);
    EXPECT_DOUBLE_EQ(rho[1][0], 0.16);
    EXPECT_DOUBLE_EQ(rho[1][1], 1.0);
    EXPECT_DOUBLE_EQ(rho[0][2], 1.0);
}

TEST(Profile, PropertiesOnRandomTables)
{
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ud(0.5, 3.0);
    std::bernoulli_distribution fail(0.1);
    const auto taus = default_tau_grid();
    for (int t = 0; t < 50; ++t) {
        std::vector<std::vector<double>> table(4, std::vector<double>(25));
        std::vector<int> successes(4, 0);
        for (int s = 0; s < 4; ++s)
            for (int p = 0; p < 25; ++p) {
                // Rounded values so ties occur.
                table[s][p] = fail(rng) ? std::numeric_limits<double>::infinity() : std::round(ud(rng) * 4) / 4;
                successes[s] += std::isfinite(table[s][p]);
            }
        const auto rho = performance_profile(table, taus);
        double at_one = 0.0;
        for (int s = 0; s < 4; ++s) {
            at_one += rho[s][0];
            for (std::size_t k = 0; k < taus.size(); ++k) {
                EXPECT_GE(rho[s][k], 0.0);
                EXPECT_LE(rho[s][k], 1.0);
                if (k > 0) {
                    EXPECT_GE(rho[s][k], rho[s][k - 1]);
                }
            }
            EXPECT_DOUBLE_EQ(performance_profile(table, {1e12})[s][0], successes[s] / 25.0);
        }
        bool any_finite_problem = true;
        for (int p = 0; p < 25; ++p) {
            bool finite = false;
            for (int s = 0; s < 4; ++s)
                finite = finite || std::isfinite(table[s][p]);
            any_finite_problem = any_finite_problem && finite;
        }
        if (any_finite_problem) {
            EXPECT_GE(at_one, 1.0 - 1e-12);
        }
    }
}

TEST(Profile, RejectsEmptyAndRaggedTables)
{
    EXPECT_THROW(performance_profile({}, {1.0}), std::invalid_argument);
    EXPECT_THROW(performance_profile({{}}, {1.0}), std::invalid_argument);
    EXPECT_THROW(performance_profile({{1.0, 2.0}, {1.0}}, {1.0}), std::invalid_argument);
}

TEST(Pgm, RoundTripAndPlainFormat)
{
    GrayImage img;
    img.rows = 3;
    img.cols = 4;
    img.pixels.resize(12);
    for (int i = 0; i < 12; ++i)
        img.pixels[i] = i / 11.0;
    std::stringstream ss;
    write_pgm(ss, img);
    const auto back = read_pgm(ss);
    EXPECT_EQ(back.rows, 3u);
    EXPECT_EQ(back.cols, 4u);
    EXPECT_LE((back.pixels - img.pixels).cwiseAbs().maxCoeff(), 0.5 / 255.0 + 1e-12);

    std::stringstream plain("P2\n# comment\n2 2\n4\n0 1\n2 4\n");
    const auto p = read_pgm(plain);
    EXPECT_EQ(p.pixels[1], 0.25);
    EXPECT_EQ(p.pixels[3], 1.0);
    std::stringstream bad("P6\n1 1\n255\n");
    EXPECT_THROW(read_pgm(bad), std::runtime_error);
    std::stringstream truncated("P2\n2 2\n255\n1 2 3\n");
    EXPECT_THROW(read_pgm(truncated), std::runtime_error);
}

TEST(Config, ParseOverridesAndComments)
{
    const auto c = parse_config_string("# header\npreset = tv_deblur\nchit = 10  # inner\nsolvers = osga, fista\n"
                                       "noise = snr:30\nmax_iters = none\nmax_seconds = 2.5\nseed = 42\n");
    EXPECT_EQ(c.family, Family::tv_deblur);
    EXPECT_EQ(c.chit, 10u);
    EXPECT_EQ(c.solvers, (std::vector<std::string>{"osga", "fista"}));
    EXPECT_EQ(c.resolve_noise().kind, NoiseSpec::Kind::snr_db);
    EXPECT_EQ(c.resolve_noise().value, 30.0);
    EXPECT_FALSE(c.max_iters.has_value());
    EXPECT_EQ(*c.max_seconds, 2.5);
    EXPECT_EQ(*c.seed, 42u);
    EXPECT_NO_THROW(c.validate());
}

TEST(Config, Errors)
{
    EXPECT_THROW(parse_config_string("bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_string("m = -3\n"), ConfigError);
    EXPECT_THROW(parse_config_string("no equals sign\n"), ConfigError);
    EXPECT_THROW(parse_config_string("family = nope\n"), ConfigError);
    EXPECT_THROW(parse_config_string("preset = nope\n"), ConfigError);
    EXPECT_THROW(parse_config_string("family = lasso\n").validate(), ConfigError); // no seed
    EXPECT_THROW(parse_config_string("seed = 1\nlambda = -1\n").validate(), ConfigError);
    EXPECT_THROW(parse_config_string("seed = 1\nsolvers = osga, magic\n").validate(), ConfigError);
    EXPECT_THROW(parse_config_string("seed = 1\nm = 0\n").validate(), ConfigError);
    try {
        parse_config_string("seed = 1\n\nchit = x\n");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_config("/nonexistent/osga.cfg"), ConfigError);
}

TEST(Config, PresetsAndDefaults)
{
    for (const auto& name : preset_names())
        EXPECT_NO_THROW(preset_config(name).validate()) << name;
    const auto big = preset_config("full_lasso_dense");
    EXPECT_EQ(big.m, 5000u);
    EXPECT_EQ(big.n, 10000u);
    EXPECT_EQ(big.resolve_lambda(), 1.0);
    EXPECT_EQ(preset_config("tv_denoise").resolve_lambda(), 0.05);
    EXPECT_EQ(preset_config("tv_denoise").resolve_noise().value, 15.0);
    EXPECT_EQ(preset_config("spike_recovery").resolve_noise().kind, NoiseSpec::Kind::variance);
    EXPECT_EQ(preset_config("lasso_dense").resolve_l_scale(), 1e4);
    EXPECT_EQ(preset_config("lasso_sparse").resolve_l_scale(), 1e2);
    EXPECT_EQ(preset_config("lasso_dense").resolve_nsdsg_alpha0(), 1e-7);
    EXPECT_EQ(preset_config("lasso_sparse").resolve_nsdsg_alpha0(), 1e-4);
    EXPECT_EQ(preset_config("tv_inpaint").missing_fraction, 0.4);
    EXPECT_EQ(preset_config("tv_deblur").blur_halfwidth, 4u);
}

TEST(Instances, SeedsAndStartingPoints)
{
    EXPECT_EQ(derive_seed(1, 0, 0), derive_seed(1, 0, 0));
    EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 0, 1));
    EXPECT_NE(derive_seed(1, 0, 0), derive_seed(1, 1, 0));
    EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));

    auto c = preset_config("spike_recovery");
    c.m = 40;
    c.n = 80;
    c.spikes = 5;
    const auto inst = build_instance(c, 0);
    EXPECT_EQ((inst.truth->array() != 0.0).count(), 5);
    EXPECT_EQ(inst.lipschitz, 1.0);
    // The l1 weight is 0.1 ||A^T y||_inf and the start is A^T y.
    const auto& reg = inst.problem.reg_terms().front().reg.variant();
    EXPECT_DOUBLE_EQ(std::get<Regularizer::L1>(reg).lambda, 0.1 * inst.x0.lpNorm<Eigen::Infinity>());

    auto e = preset_config("elastic_net_dense");
    e.m = 10;
    e.n = 20;
    const auto en = build_instance(e, 0);
    EXPECT_DOUBLE_EQ(en.lipschitz, 1e4 * max_column_norm_sq(*en.problem.smooth_terms().front().op.dense_entries()) + 1.0);

    auto t = preset_config("tv_inpaint");
    t.rows = t.cols = 16;
    const auto ti = build_instance(t, 0);
    EXPECT_EQ(ti.x0.size(), 256);
    EXPECT_TRUE(ti.image);
}

TEST(RunExperiment, DeterministicBundle)
{
    const auto c = small_lasso_config();
    const auto d1 = scratch_dir("det1");
    const auto d2 = scratch_dir("det2");
    const auto r1 = run_experiment(c, d1);
    const auto r2 = run_experiment(c, d2);
    ASSERT_EQ(r1.files, r2.files);
    EXPECT_EQ(r1.files.size(), 2 * c.solvers.size() + 2);
    for (const auto& f : r1.files)
        EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
}

TEST(RunExperiment, SummaryAgreesWithTraces)
{
    const auto c = small_lasso_config();
    const auto dir = scratch_dir("summary");
    const auto report = run_experiment(c, dir);
    EXPECT_FALSE(report.any_failure);
    const auto summary = read_csv(dir / "summary.csv");
    ASSERT_EQ(summary.size(), 1 + c.instances * c.solvers.size());
    EXPECT_EQ(summary[0].size(), 15u);
    for (std::size_t r = 1; r < summary.size(); ++r) {
        const auto& row = summary[r];
        const auto trace = read_csv(dir / ("trace_" + row[0] + "_" + row[1] + ".csv"));
        ASSERT_GT(trace.size(), 1u);
        EXPECT_EQ(trace[0].size(), 10u);
        double best = std::numeric_limits<double>::infinity();
        std::uint64_t prev_fwd = 0;
        for (std::size_t k = 1; k < trace.size(); ++k) {
            best = std::min(best, std::stod(trace[k][2]));
            const auto fwd = std::stoull(trace[k][8]);
            EXPECT_GE(fwd, prev_fwd);
            prev_fwd = fwd;
            EXPECT_EQ(trace[k][1], "0");
        }
        EXPECT_EQ(std::stod(row[5]), best) << row[0] << " " << row[1];
        EXPECT_LE(std::stod(row[12]), best);
        EXPECT_NE(row[13], "none");
    }
}

TEST(RunExperiment, Rel2StaysInUnitIntervalForMonotoneSolver)
{
    auto c = small_lasso_config();
    c.solvers = {"osga", "pga"};
    const auto dir = scratch_dir("rel2");
    run_experiment(c, dir);
    for (const auto& inst : {"i000", "i001"}) {
        const auto trace = read_csv(dir / (std::string("trace_") + inst + "_osga.csv"));
        for (std::size_t k = 1; k < trace.size(); ++k) {
            const double rel2 = std::stod(trace[k][4]);
            EXPECT_GE(rel2, 0.0);
            EXPECT_LE(rel2, 1.0);
        }
    }
}

TEST(RunExperiment, SolverFailureIsRecordedNotFatal)
{
    auto c = small_lasso_config();
    c.instances = 1;
    c.solvers = {"osga", "nes83", "fista"};
    c.l_scale = 0.0; // FISTA rejects L = 0 at run time
    const auto dir = scratch_dir("failure");
    const auto report = run_experiment(c, dir);
    EXPECT_TRUE(report.any_failure);
    const auto summary = read_csv(dir / "summary.csv");
    ASSERT_EQ(summary.size(), 4u);
    EXPECT_EQ(summary[1][1], "osga");
    EXPECT_EQ(summary[1][2], "ok");
    EXPECT_EQ(summary[3][1], "fista");
    EXPECT_EQ(summary[3][2], "failed");
    EXPECT_FALSE(summary[3][14].empty());
    const auto profile = read_csv(dir / "profile.csv");
    EXPECT_EQ(profile.back()[0], "fista");
    EXPECT_EQ(profile.back()[2], "0");
}

TEST(RunExperiment, LassoSparseDeskPresetWithinBudget)
{
    const auto c = preset_config("lasso_sparse");
    const auto start = std::chrono::steady_clock::now();
    const auto report = run_experiment(c, scratch_dir("lasso_sparse"));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_FALSE(report.any_failure);
    EXPECT_LT(secs, 300.0);
}

TEST(Checks, AllPass)
{
    for (const auto& r : run_checks())
        EXPECT_TRUE(r.ok) << r.name << ": " << r.detail;
}
