#pragma once

// Experiment configuration: JSON file -> validated ExperimentConfig. The
// delta rule is restricted to delta = c eps^q, which keeps the consistency
// check against the declared scaling regime decidable.

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tsl/csv.hpp"
#include "tsl/symbols.hpp"

namespace tsl {

struct DeltaRule {
    double c = 1.0;
    double q = 2.0;
    double at(double eps) const { return c * std::pow(eps, q); }
};

struct SystemRef {
    std::string builtin;              ///< wave2d | multiplier5 | oscillator | quasilinear1d
    std::vector<double> params;       ///< builtin-specific
    std::string lsym_path, msym_path; ///< symbol files (reduction experiments)
};

struct ExperimentConfig {
    std::string experiment; ///< reduce | converge | blowup | normwatch
    SystemRef system;
    int grid_dim = 2;
    int grid_modes = 32;
    std::optional<ScalingRegime> regime;
    std::vector<double> eps_schedule;
    DeltaRule delta_rule;
    double t_end = 1.0;
    int outputs = 20;
    std::vector<Wavevector> modes; ///< reduce
    std::vector<double> mu_list;   ///< reduce
    int depth = 0;                 ///< reduce: p override; 0 means regime.p()
    double tau_rank = 1e-10;
    std::vector<double> exponents; ///< blowup: q list
    bool well_prepared = true;     ///< blowup
    int dimension = 1;             ///< blowup: ambient dimension d
    double slope_tol = 0.1;        ///< blowup slope assertion tolerance
    double amplitude = 0.25;       ///< normwatch toy data amplitude
    int chain_m = 1;               ///< well-prepared chain length for data builds
    double chain_c = 1.0;          ///< terminal constant in delta^m <= c eps^(m+1)
    bool write_states = false;     ///< dump full coefficient trajectories
    std::string hash;              ///< FNV-1a of the raw config bytes

    std::string provenance() const {
        std::ostringstream s;
        s << "config_hash=" << hash << " tau_rank=" << fmt_g17(tau_rank);
        return s.str();
    }
};

namespace detail {

inline ScalingRegime parse_regime(const nlohmann::json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "rate_match")
        return ScalingRegime::rate_match(j.at("s").get<int>(), j.at("C").get<double>());
    if (kind == "rate_between") return ScalingRegime::rate_between(j.at("s").get<int>());
    throw ConfigError("regime kind must be rate_match or rate_between");
}

} // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    try {
        ExperimentConfig c;
        c.hash = hash_hex(fnv1a(text));
        c.experiment = j.at("experiment").get<std::string>();
        if (c.experiment != "reduce" && c.experiment != "converge" && c.experiment != "blowup" &&
            c.experiment != "normwatch")
            throw ConfigError("unknown experiment kind: " + c.experiment);

        if (j.contains("system")) {
            const auto& js = j["system"];
            if (js.contains("builtin")) c.system.builtin = js["builtin"].get<std::string>();
            if (js.contains("params")) c.system.params = js["params"].get<std::vector<double>>();
            if (js.contains("symbols")) {
                c.system.lsym_path = js["symbols"].at("L").get<std::string>();
                c.system.msym_path = js["symbols"].at("M").get<std::string>();
            }
        }
        if (j.contains("grid")) {
            c.grid_dim = j["grid"].at("dim").get<int>();
            c.grid_modes = j["grid"].at("modes").get<int>();
        }
        if (j.contains("regime")) c.regime = detail::parse_regime(j["regime"]);
        if (j.contains("eps")) c.eps_schedule = j["eps"].get<std::vector<double>>();
        if (j.contains("delta_rule")) {
            c.delta_rule.c = j["delta_rule"].at("c").get<double>();
            c.delta_rule.q = j["delta_rule"].at("q").get<double>();
        }
        if (j.contains("t_end")) c.t_end = j["t_end"].get<double>();
        if (j.contains("outputs")) c.outputs = j["outputs"].get<int>();
        if (j.contains("modes"))
            for (const auto& jm : j["modes"]) c.modes.push_back(jm.get<std::vector<int>>());
        if (j.contains("mu")) c.mu_list = j["mu"].get<std::vector<double>>();
        if (j.contains("depth")) c.depth = j["depth"].get<int>();
        if (j.contains("tau_rank")) c.tau_rank = j["tau_rank"].get<double>();
        if (j.contains("exponents")) c.exponents = j["exponents"].get<std::vector<double>>();
        if (j.contains("well_prepared")) c.well_prepared = j["well_prepared"].get<bool>();
        if (j.contains("dimension")) c.dimension = j["dimension"].get<int>();
        if (j.contains("slope_tol")) c.slope_tol = j["slope_tol"].get<double>();
        if (j.contains("amplitude")) c.amplitude = j["amplitude"].get<double>();
        if (j.contains("write_states")) c.write_states = j["write_states"].get<bool>();
        if (j.contains("chain")) {
            if (j["chain"].contains("m")) c.chain_m = j["chain"]["m"].get<int>();
            if (j["chain"].contains("c")) c.chain_c = j["chain"]["c"].get<double>();
        }

        // schedule and rule validation
        for (size_t i = 0; i < c.eps_schedule.size(); ++i) {
            if (!(c.eps_schedule[i] > 0.0 && c.eps_schedule[i] < 1.0))
                throw ConfigError("eps values must lie in (0,1)");
            if (i > 0 && c.eps_schedule[i] >= c.eps_schedule[i - 1])
                throw ConfigError("eps schedule must be strictly decreasing");
        }
        if (!(c.delta_rule.c > 0.0) || c.delta_rule.q < 1.0)
            throw ConfigError("delta rule requires c > 0 and q >= 1");
        if (c.regime && (c.experiment == "converge" || c.experiment == "normwatch")) {
            const auto& r = *c.regime;
            if (r.kind == ScalingRegime::Kind::RateMatch) {
                const double q_want = 1.0 + 1.0 / r.s;
                if (std::abs(c.delta_rule.q - q_want) > 1e-12 ||
                    std::abs(c.delta_rule.c - r.C) > 1e-12 * std::max(1.0, r.C))
                    throw ConfigError("delta rule inconsistent with rate_match regime");
            } else {
                const double lo = 1.0 + 1.0 / (r.s + 1), hi = 1.0 + 1.0 / r.s;
                if (!(c.delta_rule.q > lo + 1e-12 && c.delta_rule.q < hi - 1e-12))
                    throw ConfigError("delta rule exponent must lie strictly between the matched rates");
            }
        }
        for (double mu : c.mu_list)
            if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("mu values must lie in (0,1)");
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

} // namespace tsl
