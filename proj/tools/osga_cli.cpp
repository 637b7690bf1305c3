// Command-line driver: run experiment configs, rebuild profiles, run checks.

#include "osga/harness/checks.hpp"
#include "osga/harness/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

constexpr int exit_ok = 0;
constexpr int exit_solver_failure = 1;
constexpr int exit_config_error = 2;

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ','))
        fields.push_back(f);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

double parse_metric(const std::string& s)
{
    if (s == "inf")
        return std::numeric_limits<double>::infinity();
    if (s == "nan" || s.empty())
        return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

int profile_command(const std::string& path, const std::string& metric, const std::string& out_path)
{
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        return exit_config_error;
    }
    std::string line;
    std::getline(in, line);
    const auto header = split_csv_line(line);
    const auto col = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? std::string::npos : static_cast<std::size_t>(it - header.begin());
    };
    const auto mcol = col(metric);
    const auto icol = col("instance");
    const auto scol = col("solver");
    const auto stcol = col("status");
    if (mcol == std::string::npos || icol == std::string::npos || scol == std::string::npos) {
        std::cerr << "error: summary has no column '" << metric << "'\n";
        return exit_config_error;
    }

    std::vector<std::string> solvers;
    std::vector<std::string> instances;
    std::map<std::pair<std::string, std::string>, double> values;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() < header.size())
            continue;
        if (std::find(solvers.begin(), solvers.end(), f[scol]) == solvers.end())
            solvers.push_back(f[scol]);
        if (std::find(instances.begin(), instances.end(), f[icol]) == instances.end())
            instances.push_back(f[icol]);
        double v = parse_metric(f[mcol]);
        if ((stcol != std::string::npos && f[stcol] != "ok") || std::isnan(v))
            v = std::numeric_limits<double>::infinity();
        values[{f[scol], f[icol]}] = v;
    }
    if (solvers.empty()) {
        std::cerr << "error: summary has no rows\n";
        return exit_config_error;
    }

    std::vector<std::vector<double>> table(solvers.size(), std::vector<double>(instances.size()));
    for (std::size_t s = 0; s < solvers.size(); ++s)
        for (std::size_t p = 0; p < instances.size(); ++p) {
            const auto it = values.find({solvers[s], instances[p]});
            table[s][p] = it == values.end() ? std::numeric_limits<double>::infinity() : it->second;
        }
    const auto taus = osga::harness::default_tau_grid();
    const auto rho = osga::harness::performance_profile(table, taus);

    std::ofstream file;
    if (!out_path.empty())
        file.open(out_path);
    std::ostream& out = out_path.empty() ? std::cout : file;
    out << "solver,tau,rho\n";
    for (std::size_t s = 0; s < solvers.size(); ++s)
        for (std::size_t t = 0; t < taus.size(); ++t)
            out << solvers[s] << ',' << osga::harness::format_number(taus[t]) << ','
                << osga::harness::format_number(rho[s][t]) << "\n";
    return exit_ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"OSGA solver and experiment harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "results";
    std::optional<std::string> max_iters;
    std::optional<std::string> max_seconds;
    std::optional<std::string> solvers;
    auto* run = app.add_subcommand("run", "Run an experiment config and write CSV output");
    run->add_option("config", config_path, "Config file, or preset:<name>")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out-dir", out_dir, "Output directory")->capture_default_str();
    run->add_option("--max-iters", max_iters, "Iteration budget per solver (or none)");
    run->add_option("--max-seconds", max_seconds, "Wall-clock budget per solver (or none)");
    run->add_option("--solvers", solvers, "Comma-separated solver list");

    std::string summary_path;
    std::string metric = "best_objective";
    std::string profile_out;
    auto* profile = app.add_subcommand("profile", "Build a performance profile from a summary CSV");
    profile->add_option("summary", summary_path, "summary.csv from a previous run")->required();
    profile->add_option("--metric", metric, "Summary column to profile")->capture_default_str();
    profile->add_option("--out", profile_out, "Write the profile here instead of stdout");

    auto* check = app.add_subcommand("check", "Run the invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config_error;
    }

    using namespace osga::harness;
    if (*run) {
        ExperimentConfig cfg;
        try {
            const std::string prefix = "preset:";
            if (config_path.rfind(prefix, 0) == 0)
                cfg = preset_config(config_path.substr(prefix.size()));
            else
                cfg = load_config(config_path);
            if (seed)
                cfg.seed = *seed;
            if (max_iters)
                set_config_value(cfg, "max_iters", *max_iters);
            if (max_seconds)
                set_config_value(cfg, "max_seconds", *max_seconds);
            if (solvers)
                set_config_value(cfg, "solvers", *solvers);
            cfg.validate();
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return exit_config_error;
        }
        ExperimentReport report;
        try {
            report = run_experiment(cfg, out_dir);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return exit_config_error;
        }
        for (const auto& r : report.rows) {
            std::cout << r.instance << ' ' << r.solver << ": ";
            if (r.ok)
                std::cout << "best " << format_number(r.best_objective) << " after " << r.iterations
                          << " iterations\n";
            else
                std::cout << "FAILED (" << r.message << ")\n";
        }
        std::cout << "wrote " << report.files.size() << " files to " << out_dir << "\n";
        return report.any_failure ? exit_solver_failure : exit_ok;
    }
    if (*profile) {
        try {
            return profile_command(summary_path, metric, profile_out);
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return exit_config_error;
        }
    }
    if (*check) {
        bool all = true;
        for (const auto& r : run_checks()) {
            std::cout << (r.ok ? "ok    " : "FAIL  ") << r.name;
            if (!r.detail.empty())
                std::cout << " (" << r.detail << ")";
            std::cout << "\n";
            all = all && r.ok;
        }
        return all ? exit_ok : exit_solver_failure;
    }
    return exit_ok;
}
