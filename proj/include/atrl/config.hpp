#pragma once

// Plain-text experiment configuration: [section] headers, key = value lines,
// '#' or ';' comments. Unknown sections, unknown keys, duplicate keys, and
// malformed values are all rejected so a typo cannot silently change a run.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "atrl/common.hpp"
#include "atrl/integrate.hpp"
#include "atrl/manifold.hpp"
#include "atrl/models.hpp"

namespace atrl {

struct AnalysisConfig {
    std::size_t count = 150;  // snapshots to record
    std::vector<std::size_t> n_list = {4, 6, 8, 12, 16, 24};
    double alpha = 0.5;  // fractional exponent for graph ratios and the flow fit
    double beta = 0.25;  // secondary exponent for the A^beta relation check
    double m_relation = 1.0;
    extension_rule extension = extension_rule::nearest_anchor;
    double m0_override = 0.0;  // 0 disables the override
    double m1_override = 0.0;
    double eps0 = 0.0;  // 0 = derive from the sample diameter
    std::size_t eps_scales = 6;
    std::size_t proj_dims = 6;
    std::vector<std::size_t> embed_n_list = {8, 16, 32};
    std::vector<std::uint64_t> embed_seed_list = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> perturb_amps = {1e-2, 1e-4, 1e-6};
    double pair_horizon = 2.0;
    std::size_t record_stride = 10;
    double riccati_k3 = 0.5;
    double riccati_tol = 0.1;
};

struct ExperimentConfig {
    ModelConfig model;
    IntegratorConfig integrator;
    AnalysisConfig analysis;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline double parse_double(std::string_view v, const std::string& key) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end) throw config_error("config: bad number for " + key);
    return out;
}

inline std::uint64_t parse_u64(std::string_view v, const std::string& key) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end) throw config_error("config: bad integer for " + key);
    return out;
}

inline std::size_t parse_size(std::string_view v, const std::string& key) {
    return static_cast<std::size_t>(parse_u64(v, key));
}

inline bool parse_bool(std::string_view v, const std::string& key) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw config_error("config: bad boolean for " + key);
}

template <class T, class Fn>
std::vector<T> parse_list(std::string_view v, const std::string& key, Fn&& one) {
    std::vector<T> out;
    while (true) {
        const auto comma = v.find(',');
        const std::string_view item = trim(v.substr(0, comma));
        if (item.empty()) throw config_error("config: empty list item for " + key);
        out.push_back(one(item, key));
        if (comma == std::string_view::npos) break;
        v.remove_prefix(comma + 1);
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig cfg;
    std::string section;
    std::vector<std::string> seen;
    std::size_t lineno = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        std::string_view line(text.data() + start, (nl == std::string::npos ? text.size() : nl) - start);
        start = (nl == std::string::npos) ? text.size() + 1 : nl + 1;
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw config_error("config: malformed section at line " + std::to_string(lineno));
            section = std::string(detail::trim(line.substr(1, line.size() - 2)));
            if (section != "model" && section != "integrator" && section != "analysis")
                throw config_error("config: unknown section [" + section + "]");
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw config_error("config: expected key = value at line " + std::to_string(lineno));
        const std::string key(detail::trim(line.substr(0, eq)));
        const std::string_view val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw config_error("config: empty key or value at line " + std::to_string(lineno));
        if (section.empty()) throw config_error("config: key before any section at line " + std::to_string(lineno));

        const std::string qual = section + "." + key;
        for (const auto& s : seen)
            if (s == qual) throw config_error("config: duplicate key " + qual);
        seen.push_back(qual);

        auto& m = cfg.model;
        auto& i = cfg.integrator;
        auto& a = cfg.analysis;
        if (section == "model") {
            if (key == "id") {
                if (val == "burgers")
                    m.id = model_id::burgers_1d;
                else if (val == "nse")
                    m.id = model_id::nse_2d;
                else
                    throw config_error("config: unknown model id");
            } else if (key == "nu")
                m.nu = detail::parse_double(val, qual);
            else if (key == "modes")
                m.modes = detail::parse_size(val, qual);
            else if (key == "kmax")
                m.kmax = static_cast<int>(detail::parse_u64(val, qual));
            else if (key == "resolution")
                m.resolution = detail::parse_size(val, qual);
            else if (key == "dealias") {
                if (val != "two_thirds") throw config_error("config: unknown dealias rule");
            } else if (key == "forcing_mode")
                m.forcing_mode = static_cast<unsigned>(detail::parse_u64(val, qual));
            else if (key == "forcing_amplitude")
                m.forcing_amplitude = detail::parse_double(val, qual);
            else if (key == "linear_only")
                m.linear_only = detail::parse_bool(val, qual);
            else
                throw config_error("config: unknown key " + qual);
        } else if (section == "integrator") {
            if (key == "scheme") {
                if (val == "exponential_rk4")
                    i.scheme = scheme_id::exponential_rk4;
                else if (val == "imex_cnab2")
                    i.scheme = scheme_id::imex_cnab2;
                else
                    throw config_error("config: unknown scheme");
            } else if (key == "dt")
                i.dt = detail::parse_double(val, qual);
            else if (key == "t_transient")
                i.t_transient = detail::parse_double(val, qual);
            else if (key == "t_sample")
                i.t_sample = detail::parse_double(val, qual);
            else if (key == "sample_stride")
                i.sample_stride = detail::parse_size(val, qual);
            else if (key == "seed")
                i.seed = detail::parse_u64(val, qual);
            else
                throw config_error("config: unknown key " + qual);
        } else {
            if (key == "count")
                a.count = detail::parse_size(val, qual);
            else if (key == "n_list")
                a.n_list = detail::parse_list<std::size_t>(val, qual, detail::parse_size);
            else if (key == "alpha")
                a.alpha = detail::parse_double(val, qual);
            else if (key == "beta")
                a.beta = detail::parse_double(val, qual);
            else if (key == "m_relation")
                a.m_relation = detail::parse_double(val, qual);
            else if (key == "extension") {
                if (val == "nearest_anchor")
                    a.extension = extension_rule::nearest_anchor;
                else if (val == "mcshane_coordinatewise")
                    a.extension = extension_rule::mcshane_coordinatewise;
                else
                    throw config_error("config: unknown extension rule");
            } else if (key == "m0_override")
                a.m0_override = detail::parse_double(val, qual);
            else if (key == "m1_override")
                a.m1_override = detail::parse_double(val, qual);
            else if (key == "eps0")
                a.eps0 = detail::parse_double(val, qual);
            else if (key == "eps_scales")
                a.eps_scales = detail::parse_size(val, qual);
            else if (key == "proj_dims")
                a.proj_dims = detail::parse_size(val, qual);
            else if (key == "embed_n_list")
                a.embed_n_list = detail::parse_list<std::size_t>(val, qual, detail::parse_size);
            else if (key == "embed_seed_list")
                a.embed_seed_list = detail::parse_list<std::uint64_t>(val, qual, detail::parse_u64);
            else if (key == "perturb_amps")
                a.perturb_amps = detail::parse_list<double>(val, qual, detail::parse_double);
            else if (key == "pair_horizon")
                a.pair_horizon = detail::parse_double(val, qual);
            else if (key == "record_stride")
                a.record_stride = detail::parse_size(val, qual);
            else if (key == "riccati_k3")
                a.riccati_k3 = detail::parse_double(val, qual);
            else if (key == "riccati_tol")
                a.riccati_tol = detail::parse_double(val, qual);
            else
                throw config_error("config: unknown key " + qual);
        }
    }
    if (cfg.analysis.count < 2) throw config_error("config: analysis.count must be at least 2");
    if (cfg.analysis.n_list.empty()) throw config_error("config: analysis.n_list must not be empty");
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_experiment_config(text);
}

}  // namespace atrl
