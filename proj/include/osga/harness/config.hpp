#ifndef OSGA_HARNESS_CONFIG_HPP
#define OSGA_HARNESS_CONFIG_HPP

#include "osga/harness/generators.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace osga::harness {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Family { tikhonov, lasso, elastic_net, tv_denoise, tv_inpaint, tv_deblur, spike_recovery };

inline const char* family_name(Family f)
{
    switch (f) {
    case Family::tikhonov: return "tikhonov";
    case Family::lasso: return "lasso";
    case Family::elastic_net: return "elastic_net";
    case Family::tv_denoise: return "tv_denoise";
    case Family::tv_inpaint: return "tv_inpaint";
    case Family::tv_deblur: return "tv_deblur";
    case Family::spike_recovery: return "spike_recovery";
    }
    return "?";
}

inline bool is_imaging(Family f)
{
    return f == Family::tv_denoise || f == Family::tv_inpaint || f == Family::tv_deblur;
}

inline bool is_random_system(Family f)
{
    return f == Family::tikhonov || f == Family::lasso || f == Family::elastic_net;
}

inline const std::vector<std::string>& known_solvers()
{
    static const std::vector<std::string> names{"osga", "nsdsg", "pga", "fista", "nes83"};
    return names;
}

/// Everything needed to regenerate and rerun an experiment. Unset optionals
/// take family-specific defaults (see the resolve_* accessors).
struct ExperimentConfig {
    Family family = Family::lasso;
    std::size_t m = 500;
    std::size_t n = 1000;
    bool sparse = false;
    double sparse_p = 0.05;
    std::optional<double> lambda;
    double lambda2 = 0.0;
    std::size_t rows = 64;
    std::size_t cols = 64;
    std::string image; // PGM path; empty = synthetic phantom
    std::optional<NoiseSpec> noise;
    std::size_t spikes = 30;
    std::size_t blur_halfwidth = 4;
    double missing_fraction = 0.4;
    std::size_t chit = 5;
    std::vector<std::string> solvers = known_solvers();
    std::optional<std::size_t> max_iters = 500;
    std::optional<double> max_seconds;
    std::optional<std::uint64_t> seed;
    std::size_t instances = 1;
    std::optional<double> lipschitz;
    std::optional<double> l_scale;
    std::optional<double> nsdsg_alpha0;
    double nes83_rho = 0.5;
    std::optional<double> osga_q0;
    double osga_mu = 0.0;
    bool record_time = false;
    std::size_t reference_factor = 10;
    std::vector<double> profile_taus;

    /// Regularization weight: explicit value, or the family default
    /// (0.05 for TV families, 0.1 relative to ||A^T y||_inf for spikes, 1 otherwise).
    double resolve_lambda() const
    {
        if (lambda)
            return *lambda;
        if (is_imaging(family))
            return 0.05;
        if (family == Family::spike_recovery)
            return 0.1;
        return 1.0;
    }

    NoiseSpec resolve_noise() const
    {
        if (noise)
            return *noise;
        switch (family) {
        case Family::tv_denoise: return NoiseSpec::snr(15.0);
        case Family::tv_deblur: return NoiseSpec::snr(40.0);
        case Family::spike_recovery: return NoiseSpec::var(1e-6);
        default: return NoiseSpec::none();
        }
    }

    double resolve_l_scale() const
    {
        if (l_scale)
            return *l_scale;
        return sparse ? 1e2 : 1e4;
    }

    double resolve_nsdsg_alpha0() const
    {
        if (nsdsg_alpha0)
            return *nsdsg_alpha0;
        if (is_random_system(family))
            return sparse ? 1e-4 : 1e-7;
        return 1e-1;
    }

    void validate() const
    {
        if (!seed)
            throw ConfigError("config must set 'seed'");
        if (m == 0 || n == 0 || rows < 2 || cols < 2 || instances == 0)
            throw ConfigError("dimensions must be positive (images at least 2x2)");
        if (family == Family::spike_recovery && (m > n || spikes > n))
            throw ConfigError("spike recovery needs m <= n and spikes <= n");
        if (sparse && !(sparse_p > 0.0 && sparse_p <= 1.0))
            throw ConfigError("sparse_p must lie in (0,1]");
        if (resolve_lambda() < 0.0 || lambda2 < 0.0)
            throw ConfigError("regularization weights must be >= 0");
        if (chit == 0)
            throw ConfigError("chit must be >= 1");
        if (!(missing_fraction >= 0.0 && missing_fraction < 1.0))
            throw ConfigError("missing_fraction must lie in [0,1)");
        if (!max_iters && !max_seconds)
            throw ConfigError("set max_iters or max_seconds");
        if (solvers.empty())
            throw ConfigError("no solvers selected");
        for (const auto& s : solvers)
            if (std::find(known_solvers().begin(), known_solvers().end(), s) == known_solvers().end())
                throw ConfigError("unknown solver '" + s + "'");
        if (!(nes83_rho > 0.0 && nes83_rho < 1.0))
            throw ConfigError("nes83_rho must lie in (0,1)");
        if (lipschitz && !(*lipschitz > 0.0))
            throw ConfigError("lipschitz must be positive");
    }
};

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty())
            out.push_back(t);
    return out;
}

inline double to_double(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    }
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v)
{
    if (v.empty() || !std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
    try {
        return std::stoull(v);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': integer out of range");
    }
}

inline bool to_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "on" || v == "yes" || v == "1")
        return true;
    if (v == "false" || v == "off" || v == "no" || v == "0")
        return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + v + "'");
}

inline Family to_family(const std::string& v)
{
    for (auto f : {Family::tikhonov, Family::lasso, Family::elastic_net, Family::tv_denoise, Family::tv_inpaint,
                   Family::tv_deblur, Family::spike_recovery})
        if (v == family_name(f))
            return f;
    throw ConfigError("unknown family '" + v + "'");
}

inline NoiseSpec to_noise(const std::string& v)
{
    if (v == "none")
        return NoiseSpec::none();
    const auto colon = v.find(':');
    if (colon == std::string::npos)
        throw ConfigError("noise must be 'none', 'snr:<dB>' or 'var:<variance>'");
    const std::string kind = v.substr(0, colon);
    const double value = to_double("noise", v.substr(colon + 1));
    if (kind == "snr")
        return NoiseSpec::snr(value);
    if (kind == "var") {
        if (value < 0.0)
            throw ConfigError("noise variance must be >= 0");
        return NoiseSpec::var(value);
    }
    throw ConfigError("unknown noise kind '" + kind + "'");
}

} // namespace detail

/// Named configurations reproducing the experiment families at desk scale
/// (plus the full-size random-system setting).
inline ExperimentConfig preset_config(const std::string& name)
{
    ExperimentConfig c;
    c.seed = 1;
    auto random_system = [&](Family f, bool sparse, std::size_t m, std::size_t n) {
        c.family = f;
        c.sparse = sparse;
        c.m = m;
        c.n = n;
        c.lambda = 1.0;
    };
    if (name == "tikhonov_dense")
        random_system(Family::tikhonov, false, 500, 1000);
    else if (name == "tikhonov_sparse")
        random_system(Family::tikhonov, true, 500, 1000);
    else if (name == "lasso_dense")
        random_system(Family::lasso, false, 500, 1000);
    else if (name == "lasso_sparse")
        random_system(Family::lasso, true, 500, 1000);
    else if (name == "elastic_net_dense") {
        random_system(Family::elastic_net, false, 500, 1000);
        c.lambda2 = 1.0;
    } else if (name == "full_lasso_dense") {
        random_system(Family::lasso, false, 5000, 10000);
        c.max_iters.reset();
        c.max_seconds = 60.0;
    } else if (name == "full_tikhonov_dense") {
        random_system(Family::tikhonov, false, 5000, 10000);
        c.max_iters.reset();
        c.max_seconds = 60.0;
    } else if (name == "tv_denoise") {
        c.family = Family::tv_denoise;
        c.max_iters = 50;
    } else if (name == "tv_inpaint") {
        c.family = Family::tv_inpaint;
        c.max_iters = 100;
    } else if (name == "tv_deblur") {
        c.family = Family::tv_deblur;
        c.max_iters = 100;
    } else if (name == "spike_recovery") {
        c.family = Family::spike_recovery;
        c.m = 500;
        c.n = 1000;
        c.spikes = 30;
        c.max_iters = 200;
    } else
        throw ConfigError("unknown preset '" + name + "'");
    return c;
}

inline std::vector<std::string> preset_names()
{
    return {"tikhonov_dense", "tikhonov_sparse", "lasso_dense", "lasso_sparse", "elastic_net_dense",
            "full_lasso_dense", "full_tikhonov_dense", "tv_denoise", "tv_inpaint", "tv_deblur",
            "spike_recovery"};
}

/// Applies one key = value setting.
inline void set_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw)
{
    using namespace detail;
    const std::string v = trim(raw);
    auto size = [&] { return static_cast<std::size_t>(to_uint(key, v)); };
    if (key == "preset") {
        // Preserves nothing: a preset line should come first.
        c = preset_config(v);
    } else if (key == "family")
        c.family = to_family(v);
    else if (key == "m")
        c.m = size();
    else if (key == "n")
        c.n = size();
    else if (key == "density") {
        if (v == "dense")
            c.sparse = false;
        else if (v == "sparse")
            c.sparse = true;
        else
            throw ConfigError("density must be 'dense' or 'sparse'");
    } else if (key == "sparse_p")
        c.sparse_p = to_double(key, v);
    else if (key == "lambda")
        c.lambda = to_double(key, v);
    else if (key == "lambda2")
        c.lambda2 = to_double(key, v);
    else if (key == "rows")
        c.rows = size();
    else if (key == "cols")
        c.cols = size();
    else if (key == "image")
        c.image = v;
    else if (key == "noise")
        c.noise = to_noise(v);
    else if (key == "spikes")
        c.spikes = size();
    else if (key == "blur_halfwidth")
        c.blur_halfwidth = size();
    else if (key == "missing_fraction")
        c.missing_fraction = to_double(key, v);
    else if (key == "chit")
        c.chit = size();
    else if (key == "solvers")
        c.solvers = split_list(v);
    else if (key == "max_iters") {
        if (v == "none")
            c.max_iters.reset();
        else
            c.max_iters = size();
    } else if (key == "max_seconds") {
        if (v == "none")
            c.max_seconds.reset();
        else
            c.max_seconds = to_double(key, v);
    } else if (key == "seed")
        c.seed = to_uint(key, v);
    else if (key == "instances")
        c.instances = size();
    else if (key == "lipschitz")
        c.lipschitz = to_double(key, v);
    else if (key == "l_scale")
        c.l_scale = to_double(key, v);
    else if (key == "nsdsg_alpha0")
        c.nsdsg_alpha0 = to_double(key, v);
    else if (key == "nes83_rho")
        c.nes83_rho = to_double(key, v);
    else if (key == "osga_q0")
        c.osga_q0 = to_double(key, v);
    else if (key == "osga_mu")
        c.osga_mu = to_double(key, v);
    else if (key == "record_time")
        c.record_time = to_bool(key, v);
    else if (key == "reference_factor")
        c.reference_factor = size();
    else if (key == "profile_taus") {
        c.profile_taus.clear();
        for (const auto& t : split_list(v))
            c.profile_taus.push_back(to_double(key, t));
    } else
        throw ConfigError("unknown key '" + key + "'");
}

/// Parses the flat `key = value` format; '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& in)
{
    ExperimentConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        try {
            set_config_value(c, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

inline ExperimentConfig parse_config_string(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path + "'");
    return parse_config(in);
}

} // namespace osga::harness

#endif
