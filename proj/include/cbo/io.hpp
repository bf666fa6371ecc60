#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cbo/constants.hpp"
#include "cbo/dynamics.hpp"
#include "cbo/experiments.hpp"
#include "cbo/meanfield.hpp"

namespace cbo {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Full-precision decimal rendering: shortest string that round-trips binary64,
// so byte-identical files are a meaningful determinism check.
inline std::string format_full(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_run_csv(const RunRecord& record, std::ostream& os) {
    const std::size_t d = record.rows.empty() ? 0 : record.rows.front().theta.size();
    os << "k,eta,t,mse,best_value,best_index,ess";
    for (std::size_t j = 0; j < d; ++j) os << ",theta_" << j;
    os << "\n";
    for (const auto& row : record.rows) {
        os << row.k << ',' << format_full(row.eta) << ',' << format_full(row.t) << ','
           << format_full(row.mse) << ',' << format_full(row.best_value) << ','
           << row.best_index << ',' << format_full(row.ess);
        for (double th : row.theta) os << ',' << format_full(th);
        os << "\n";
    }
}

inline void write_table_csv(const SweepTable& table, std::ostream& os) {
    for (std::size_t j = 0; j < table.header.size(); ++j)
        os << (j ? "," : "") << table.header[j];
    os << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < row.size(); ++j)
            os << (j ? "," : "") << format_full(row[j]);
        os << "\n";
    }
}

inline json config_to_json(const CboConfig& cfg) {
    json j;
    j["dim"] = cfg.dim;
    j["n_particles"] = cfg.n_particles;
    j["alpha"] = cfg.alpha;
    j["gamma"] = cfg.gamma;
    j["clip_radius"] = cfg.clip_radius;
    j["eta0"] = cfg.eta0;
    j["zeta"] = cfg.zeta;
    j["sigma0_sq"] = cfg.sigma0_sq;
    j["m0"] = cfg.initial_mean();
    j["seed"] = cfg.seed;
    j["max_iter"] = cfg.max_iter;
    if (cfg.noise_scale_override) j["noise_scale_override"] = *cfg.noise_scale_override;
    return j;
}

namespace detail {

template <typename T>
T require_field(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) throw ConfigError("missing required field '" + path + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("field '" + path + key + "' has the wrong type");
    }
}

template <typename T>
T optional_field(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

}  // namespace detail

inline CboConfig config_from_json(const json& j, const std::string& path = "cbo.") {
    CboConfig cfg;
    cfg.dim = detail::require_field<int>(j, "dim", path);
    cfg.n_particles = detail::require_field<int>(j, "n_particles", path);
    cfg.alpha = detail::require_field<double>(j, "alpha", path);
    cfg.gamma = detail::require_field<double>(j, "gamma", path);
    cfg.clip_radius = detail::require_field<double>(j, "clip_radius", path);
    cfg.eta0 = detail::optional_field<double>(j, "eta0", 1.0);
    cfg.zeta = detail::optional_field<double>(j, "zeta", 0.5);
    cfg.sigma0_sq = detail::require_field<double>(j, "sigma0_sq", path);
    cfg.m0 = detail::optional_field<Vec>(j, "m0", Vec{});
    cfg.seed = detail::optional_field<std::uint64_t>(j, "seed", 1);
    cfg.max_iter = detail::require_field<long>(j, "max_iter", path);
    if (j.contains("noise_scale_override"))
        cfg.noise_scale_override = j.at("noise_scale_override").get<double>();
    try {
        validate(cfg);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string(err.what()) + " (under '" + path + "')");
    }
    return cfg;
}

inline ObjectiveSpec objective_from_json(const json& j, int dim,
                                         const std::string& path = "objective.") {
    const std::string name = detail::require_field<std::string>(j, "name", path);
    const Vec shift = detail::optional_field<Vec>(j, "shift", Vec(dim, 0.0));
    try {
        return builtin(name, dim, shift);
    } catch (const std::invalid_argument& err) {
        throw ConfigError(std::string(err.what()) + " (under '" + path + "')");
    }
}

inline ExperimentPlan plan_from_json(const json& root) {
    ExperimentPlan plan;
    if (!root.contains("cbo")) throw ConfigError("missing required section 'cbo'");
    plan.base_cfg = config_from_json(root.at("cbo"));
    if (!root.contains("objective")) throw ConfigError("missing required section 'objective'");
    plan.objective =
        detail::require_field<std::string>(root.at("objective"), "name", "objective.");
    plan.shift = detail::optional_field<Vec>(root.at("objective"), "shift",
                                             Vec(plan.base_cfg.dim, 0.0));

    const json exp = root.value("experiment", json::object());
    const std::string prefix = "experiment.";
    if (exp.contains("kind"))
        plan.kind = experiment_kind_from_string(
            detail::require_field<std::string>(exp, "kind", prefix));
    plan.n_values = detail::optional_field<std::vector<long>>(exp, "n_values", {});
    plan.alphas = detail::optional_field<std::vector<double>>(exp, "alphas", {});
    plan.eta0_values = detail::optional_field<std::vector<double>>(exp, "eta0_values", {});
    plan.seeds = detail::optional_field<std::vector<std::uint64_t>>(exp, "seeds", {});
    plan.replicates = detail::optional_field<int>(exp, "replicates", 1);
    plan.c_lap = detail::optional_field<double>(exp, "c_lap", 0.18);
    plan.T = detail::optional_field<double>(exp, "T", 10.0);
    plan.h = detail::optional_field<double>(exp, "h", 0.01);
    plan.samples = detail::optional_field<long>(exp, "samples", 200000);
    plan.t_eval = detail::optional_field<double>(exp, "t", 1.0);
    plan.t_block = detail::optional_field<double>(exp, "t_block", 0.0);
    plan.record_every = detail::optional_field<long>(exp, "record_every", 10);
    return plan;
}

// Dotted-key override, e.g. "cbo.alpha=200" or "experiment.n_values=[50,200]".
inline void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    json* node = &root;
    std::size_t start = 0;
    std::vector<std::string> parts;
    while (true) {
        const auto dot = key.find('.', start);
        parts.push_back(key.substr(start, dot == std::string::npos ? dot : dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->contains(parts[i]))
            throw ConfigError("override path '" + key + "' does not exist in the config");
        node = &(*node)[parts[i]];
    }
    if (!node->contains(parts.back()))
        throw ConfigError("override path '" + key + "' does not exist in the config");

    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) parsed = value;  // bare strings stay strings
    (*node)[parts.back()] = parsed;
}

inline json verdict_to_json(const Verdict& verdict) {
    json j;
    j["kind"] = verdict.kind;
    j["pass"] = verdict.pass;
    j["metrics"] = verdict.metrics;
    j["notes"] = verdict.notes;
    return j;
}

inline json constants_to_json(const ConstantsReport& rep) {
    json j;
    j["inputs"] = rep.inputs_echo;
    json rows = json::array();
    for (const auto& e : rep.entries) {
        json row;
        row["name"] = e.name;
        if (std::isfinite(e.value))
            row["value"] = e.value;
        else
            row["value"] = nullptr;
        if (std::isfinite(e.log10))
            row["log10"] = e.log10;
        else
            row["log10"] = e.log10 > 0 ? "overflow" : "underflow";
        row["note"] = e.note;
        rows.push_back(std::move(row));
    }
    j["constants"] = std::move(rows);
    return j;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
}

}  // namespace cbo
