// Line-oriented `key = value` run configuration with `#` comments.  Parsing
// validates everything it can and reports every error with its line number
// rather than stopping at the first.
#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "thinfilm/grid.hpp"

namespace thinfilm {

struct ConfigError {
    int line = 0;
    std::string message;
};

struct RunConfig {
    std::string subcommand; // kernel | ibvp | cauchy | verify | convergence
    std::string out_dir;
    std::uint64_t seed = 12345;

    // grid block
    int dimension = 1;
    std::vector<double> extents{6.283185307179586};
    std::vector<int> points{64};
    Boundary boundary = Boundary::periodic;

    // g block
    std::string g_form = "zero"; // zero | cubic | power | truncated
    double g_c = 1.0;
    double g_alpha = 1.0;
    double g_theta_outer = 2.0;

    // u0 block
    std::string u0_kind = "bands"; // constant|bands|envelope|bump|step-pair|inverse-sqrt
    double u0_amplitude = 0.5;
    double u0_mean = 0.0;
    int u0_kmax = 3;
    double u0_decay = 1.0;
    double u0_width = 1.0;

    // time block
    double horizon = 0.5;
    int steps = 64;
    int windows = 1;
    bool allow_unsupported = false;
    std::vector<double> snapshot_times;

    // tolerances
    double tol_inner = 1e-10;
    int inner_max_iterations = 200;
    double tol_quad = 1e-12;
    double tol_wrap = 1e-8;
    double tol_duhamel = 1e-6;

    // picard block
    int picard_max_iterations = 30;
    int picard_time_samples = 32;
    int picard_quad_points = 16;

    // kernel block
    int kernel_dimension = 2;
    double kernel_eta_max = 20.0;
    int kernel_resolution = 512;

    // gronwall horizon constants
    double horizon_c1 = 1.0;
    double horizon_c2 = 1.0;
    int horizon_k = 0; // 0 = automatic

    // decay fit (cauchy)
    std::string decay_p = "inf";
    double decay_t_lo = 0.0; // 0 = auto from the horizon
    double decay_t_hi = 0.0;

    // verify block
    int verify_draws = 50;
    int verify_fields = 100;
    int verify_samples = 100;
    int verify_points = 12;

    // convergence block
    int conv_mode = 1;
    std::vector<int> conv_steps{64, 128, 256, 512, 1024};

    // every effective parameter, for the manifest echo
    std::vector<std::pair<std::string, std::string>> echo() const;
};

namespace detail {
inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

template <typename T>
bool parse_scalar(const std::string& text, T& out) {
    std::istringstream is(text);
    is >> out;
    if (is.fail()) return false;
    std::string rest;
    is >> rest;
    return rest.empty();
}

inline bool parse_bool(const std::string& text, bool& out) {
    if (text == "true" || text == "1") {
        out = true;
        return true;
    }
    if (text == "false" || text == "0") {
        out = false;
        return true;
    }
    return false;
}

template <typename T>
bool parse_list(const std::string& text, std::vector<T>& out) {
    std::istringstream is(text);
    std::vector<T> parsed;
    T v;
    while (is >> v) parsed.push_back(v);
    if (!is.eof()) return false;
    if (parsed.empty()) return false;
    out = std::move(parsed);
    return true;
}
} // namespace detail

struct ParseResult {
    std::optional<RunConfig> config;
    std::vector<ConfigError> errors;
    bool ok() const { return config.has_value() && errors.empty(); }
};

inline ParseResult parse_config(const std::string& text,
                                const std::string& subcommand) {
    ParseResult result;
    RunConfig cfg;
    cfg.subcommand = subcommand;
    auto fail = [&](int line, const std::string& msg) {
        result.errors.push_back({line, msg});
    };

    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            fail(lineno, "expected `key = value`");
            continue;
        }
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (value.empty()) {
            fail(lineno, "missing value for `" + key + "`");
            continue;
        }

        auto want_positive = [&](double v, const char* what) {
            if (!(v > 0.0)) fail(lineno, std::string(what) + " must be > 0");
        };

        if (key == "seed") {
            if (!detail::parse_scalar(value, cfg.seed)) fail(lineno, "bad seed");
        } else if (key == "grid.dimension") {
            if (!detail::parse_scalar(value, cfg.dimension) || cfg.dimension < 1 ||
                cfg.dimension > 3)
                fail(lineno, "grid.dimension must be 1, 2 or 3");
        } else if (key == "grid.extent") {
            if (!detail::parse_list(value, cfg.extents))
                fail(lineno, "grid.extent: list of reals");
            else
                for (double L : cfg.extents) want_positive(L, "grid.extent");
        } else if (key == "grid.points") {
            if (!detail::parse_list(value, cfg.points))
                fail(lineno, "grid.points: list of integers");
            else
                for (int n : cfg.points)
                    if (n < 8) fail(lineno, "grid.points must be >= 8 per axis");
        } else if (key == "grid.boundary") {
            if (value == "periodic")
                cfg.boundary = Boundary::periodic;
            else if (value == "neumann-box")
                cfg.boundary = Boundary::neumann_box;
            else
                fail(lineno, "grid.boundary: periodic | neumann-box");
        } else if (key == "g.form") {
            if (value != "zero" && value != "cubic" && value != "power" &&
                value != "truncated")
                fail(lineno, "g.form: zero | cubic | power | truncated");
            else
                cfg.g_form = value;
        } else if (key == "g.c") {
            if (!detail::parse_scalar(value, cfg.g_c))
                fail(lineno, "g.c: real");
            else
                want_positive(cfg.g_c, "g.c");
        } else if (key == "g.alpha") {
            if (!detail::parse_scalar(value, cfg.g_alpha))
                fail(lineno, "g.alpha: real");
            else
                want_positive(cfg.g_alpha, "g.alpha");
        } else if (key == "g.theta_outer") {
            if (!detail::parse_scalar(value, cfg.g_theta_outer) ||
                cfg.g_theta_outer <= 1.0)
                fail(lineno, "g.theta_outer must be > 1");
        } else if (key == "u0.kind") {
            if (value != "constant" && value != "bands" && value != "envelope" &&
                value != "bump" && value != "step-pair" && value != "inverse-sqrt")
                fail(lineno, "u0.kind: constant|bands|envelope|bump|step-pair|"
                             "inverse-sqrt");
            else
                cfg.u0_kind = value;
        } else if (key == "u0.amplitude") {
            if (!detail::parse_scalar(value, cfg.u0_amplitude))
                fail(lineno, "u0.amplitude: real");
        } else if (key == "u0.mean") {
            if (!detail::parse_scalar(value, cfg.u0_mean))
                fail(lineno, "u0.mean: real");
        } else if (key == "u0.kmax") {
            if (!detail::parse_scalar(value, cfg.u0_kmax) || cfg.u0_kmax < 1)
                fail(lineno, "u0.kmax: integer >= 1");
        } else if (key == "u0.decay") {
            if (!detail::parse_scalar(value, cfg.u0_decay))
                fail(lineno, "u0.decay: real");
        } else if (key == "u0.width") {
            if (!detail::parse_scalar(value, cfg.u0_width))
                fail(lineno, "u0.width: real");
            else
                want_positive(cfg.u0_width, "u0.width");
        } else if (key == "time.horizon") {
            if (!detail::parse_scalar(value, cfg.horizon))
                fail(lineno, "time.horizon: real");
            else
                want_positive(cfg.horizon, "time.horizon");
        } else if (key == "time.steps") {
            if (!detail::parse_scalar(value, cfg.steps) || cfg.steps < 1)
                fail(lineno, "time.steps must be >= 1");
        } else if (key == "time.windows") {
            if (!detail::parse_scalar(value, cfg.windows) || cfg.windows < 1)
                fail(lineno, "time.windows must be >= 1");
        } else if (key == "time.allow_unsupported") {
            if (!detail::parse_bool(value, cfg.allow_unsupported))
                fail(lineno, "time.allow_unsupported: true | false");
        } else if (key == "time.snapshots") {
            if (!detail::parse_list(value, cfg.snapshot_times))
                fail(lineno, "time.snapshots: list of times");
        } else if (key == "tol.inner") {
            if (!detail::parse_scalar(value, cfg.tol_inner))
                fail(lineno, "tol.inner: real");
            else
                want_positive(cfg.tol_inner, "tol.inner");
        } else if (key == "tol.inner_max_iterations") {
            if (!detail::parse_scalar(value, cfg.inner_max_iterations) ||
                cfg.inner_max_iterations < 1)
                fail(lineno, "tol.inner_max_iterations must be >= 1");
        } else if (key == "tol.quad") {
            if (!detail::parse_scalar(value, cfg.tol_quad))
                fail(lineno, "tol.quad: real");
            else
                want_positive(cfg.tol_quad, "tol.quad");
        } else if (key == "tol.wrap") {
            if (!detail::parse_scalar(value, cfg.tol_wrap))
                fail(lineno, "tol.wrap: real");
            else
                want_positive(cfg.tol_wrap, "tol.wrap");
        } else if (key == "tol.duhamel_residual") {
            if (!detail::parse_scalar(value, cfg.tol_duhamel))
                fail(lineno, "tol.duhamel_residual: real");
            else
                want_positive(cfg.tol_duhamel, "tol.duhamel_residual");
        } else if (key == "picard.max_iterations") {
            if (!detail::parse_scalar(value, cfg.picard_max_iterations) ||
                cfg.picard_max_iterations < 1)
                fail(lineno, "picard.max_iterations must be >= 1");
        } else if (key == "picard.time_samples") {
            if (!detail::parse_scalar(value, cfg.picard_time_samples) ||
                cfg.picard_time_samples < 4)
                fail(lineno, "picard.time_samples must be >= 4");
        } else if (key == "picard.quad_points") {
            if (!detail::parse_scalar(value, cfg.picard_quad_points) ||
                cfg.picard_quad_points < 4)
                fail(lineno, "picard.quad_points must be >= 4");
        } else if (key == "kernel.dimension") {
            if (!detail::parse_scalar(value, cfg.kernel_dimension) ||
                cfg.kernel_dimension < 1 || cfg.kernel_dimension > 4)
                fail(lineno, "kernel.dimension must be 1..4");
        } else if (key == "kernel.eta_max") {
            if (!detail::parse_scalar(value, cfg.kernel_eta_max))
                fail(lineno, "kernel.eta_max: real");
            else
                want_positive(cfg.kernel_eta_max, "kernel.eta_max");
        } else if (key == "kernel.resolution") {
            if (!detail::parse_scalar(value, cfg.kernel_resolution) ||
                cfg.kernel_resolution < 16)
                fail(lineno, "kernel.resolution must be >= 16");
        } else if (key == "horizon.c1") {
            if (!detail::parse_scalar(value, cfg.horizon_c1))
                fail(lineno, "horizon.c1: real");
            else
                want_positive(cfg.horizon_c1, "horizon.c1");
        } else if (key == "horizon.c2") {
            if (!detail::parse_scalar(value, cfg.horizon_c2))
                fail(lineno, "horizon.c2: real");
            else
                want_positive(cfg.horizon_c2, "horizon.c2");
        } else if (key == "horizon.k") {
            if (!detail::parse_scalar(value, cfg.horizon_k) || cfg.horizon_k < 0 ||
                cfg.horizon_k > 6)
                fail(lineno, "horizon.k must be 0 (auto) .. 6");
        } else if (key == "decay.p") {
            double p;
            if (value == "inf")
                cfg.decay_p = value;
            else if (detail::parse_scalar(value, p) && p >= 1.0)
                cfg.decay_p = value;
            else
                fail(lineno, "decay.p: inf or real >= 1");
        } else if (key == "decay.t_lo") {
            if (!detail::parse_scalar(value, cfg.decay_t_lo))
                fail(lineno, "decay.t_lo: real");
        } else if (key == "decay.t_hi") {
            if (!detail::parse_scalar(value, cfg.decay_t_hi))
                fail(lineno, "decay.t_hi: real");
        } else if (key == "verify.draws") {
            if (!detail::parse_scalar(value, cfg.verify_draws) ||
                cfg.verify_draws < 1)
                fail(lineno, "verify.draws must be >= 1");
        } else if (key == "verify.fields") {
            if (!detail::parse_scalar(value, cfg.verify_fields) ||
                cfg.verify_fields < 1)
                fail(lineno, "verify.fields must be >= 1");
        } else if (key == "verify.samples") {
            if (!detail::parse_scalar(value, cfg.verify_samples) ||
                cfg.verify_samples < 1)
                fail(lineno, "verify.samples must be >= 1");
        } else if (key == "verify.grid_points") {
            if (!detail::parse_scalar(value, cfg.verify_points) ||
                cfg.verify_points < 8)
                fail(lineno, "verify.grid_points must be >= 8");
        } else if (key == "convergence.mode") {
            if (!detail::parse_scalar(value, cfg.conv_mode) || cfg.conv_mode < 1)
                fail(lineno, "convergence.mode must be >= 1");
        } else if (key == "convergence.steps") {
            if (!detail::parse_list(value, cfg.conv_steps))
                fail(lineno, "convergence.steps: list of integers");
            else
                for (int s : cfg.conv_steps)
                    if (s < 1) fail(lineno, "convergence.steps entries must be >= 1");
        } else {
            fail(lineno, "unknown key `" + key + "`");
        }
    }

    // cross-field validation
    if (cfg.extents.size() == 1 && cfg.dimension > 1)
        cfg.extents.assign(cfg.dimension, cfg.extents[0]);
    if (cfg.points.size() == 1 && cfg.dimension > 1)
        cfg.points.assign(cfg.dimension, cfg.points[0]);
    if (static_cast<int>(cfg.extents.size()) != cfg.dimension)
        fail(0, "grid.extent: need one entry (replicated) or one per axis");
    if (static_cast<int>(cfg.points.size()) != cfg.dimension)
        fail(0, "grid.points: need one entry (replicated) or one per axis");
    if (subcommand == "cauchy" && cfg.boundary != Boundary::periodic)
        fail(0, "cauchy runs need grid.boundary = periodic");
    if (subcommand != "kernel" && subcommand != "verify") {
        for (double t : cfg.snapshot_times)
            if (t < 0.0 || t > cfg.horizon)
                fail(0, "time.snapshots must lie in [0, time.horizon]");
    }

    if (result.errors.empty()) result.config = std::move(cfg);
    return result;
}

inline std::vector<std::pair<std::string, std::string>> RunConfig::echo() const {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("subcommand", subcommand);
    kv.emplace_back("seed", std::to_string(seed));
    kv.emplace_back("grid.dimension", std::to_string(dimension));
    {
        std::string e, p;
        for (int d = 0; d < dimension; ++d) {
            e += (d ? " " : "") + num(extents[d]);
            p += (d ? " " : "") + std::to_string(points[d]);
        }
        kv.emplace_back("grid.extent", e);
        kv.emplace_back("grid.points", p);
    }
    kv.emplace_back("grid.boundary",
                    boundary == Boundary::periodic ? "periodic" : "neumann-box");
    kv.emplace_back("g.form", g_form);
    kv.emplace_back("g.c", num(g_c));
    kv.emplace_back("g.alpha", num(g_alpha));
    kv.emplace_back("g.theta_outer", num(g_theta_outer));
    kv.emplace_back("u0.kind", u0_kind);
    kv.emplace_back("u0.amplitude", num(u0_amplitude));
    kv.emplace_back("u0.mean", num(u0_mean));
    kv.emplace_back("u0.kmax", std::to_string(u0_kmax));
    kv.emplace_back("u0.decay", num(u0_decay));
    kv.emplace_back("u0.width", num(u0_width));
    kv.emplace_back("time.horizon", num(horizon));
    kv.emplace_back("time.steps", std::to_string(steps));
    kv.emplace_back("time.windows", std::to_string(windows));
    kv.emplace_back("time.allow_unsupported", allow_unsupported ? "true" : "false");
    {
        std::string s;
        for (std::size_t i = 0; i < snapshot_times.size(); ++i)
            s += (i ? " " : "") + num(snapshot_times[i]);
        kv.emplace_back("time.snapshots", s);
    }
    kv.emplace_back("tol.inner", num(tol_inner));
    kv.emplace_back("tol.inner_max_iterations", std::to_string(inner_max_iterations));
    kv.emplace_back("tol.quad", num(tol_quad));
    kv.emplace_back("tol.wrap", num(tol_wrap));
    kv.emplace_back("tol.duhamel_residual", num(tol_duhamel));
    kv.emplace_back("picard.max_iterations", std::to_string(picard_max_iterations));
    kv.emplace_back("picard.time_samples", std::to_string(picard_time_samples));
    kv.emplace_back("picard.quad_points", std::to_string(picard_quad_points));
    kv.emplace_back("kernel.dimension", std::to_string(kernel_dimension));
    kv.emplace_back("kernel.eta_max", num(kernel_eta_max));
    kv.emplace_back("kernel.resolution", std::to_string(kernel_resolution));
    kv.emplace_back("horizon.c1", num(horizon_c1));
    kv.emplace_back("horizon.c2", num(horizon_c2));
    kv.emplace_back("horizon.k", std::to_string(horizon_k));
    kv.emplace_back("decay.p", decay_p);
    kv.emplace_back("decay.t_lo", num(decay_t_lo));
    kv.emplace_back("decay.t_hi", num(decay_t_hi));
    kv.emplace_back("verify.draws", std::to_string(verify_draws));
    kv.emplace_back("verify.fields", std::to_string(verify_fields));
    kv.emplace_back("verify.samples", std::to_string(verify_samples));
    kv.emplace_back("verify.grid_points", std::to_string(verify_points));
    kv.emplace_back("convergence.mode", std::to_string(conv_mode));
    {
        std::string s;
        for (std::size_t i = 0; i < conv_steps.size(); ++i)
            s += (i ? " " : "") + std::to_string(conv_steps[i]);
        kv.emplace_back("convergence.steps", s);
    }
    return kv;
}

} // namespace thinfilm
