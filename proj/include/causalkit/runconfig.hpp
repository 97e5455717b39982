#pragma once

// Declarative run configuration: one JSON document describes the data source,
// the variable roles, the estimation settings, and the output directory.
// Command-line flags may override individual fields after loading. Every
// report row carries a fingerprint of the effective configuration so results
// stay traceable to the exact settings that produced them.
//
// Schema (all keys lowercase; unknown keys are rejected):
//
//   {
//     "data": {
//       // exactly one source:
//       "csv": "orders.csv",                // with "columns": [...]
//       "preset": "maritime",               // with optional "params", "n"
//
//       "columns": [ {"name": "Delay", "kind": "numeric", "role": "outcome"},
//                    ... ],                 // kinds: numeric|categorical|binary|date
//                                           // roles: outcome|treatment|covariate|ignored
//       "date_column": "OrderDate",         // optional: derive calendar-quarter Season
//       "params": { "multi_effect": 15.0 }, // optional generator overrides
//       "n": 20000                          // synthetic sample size
//     },
//     "outcome": "Delay",
//     "treatments": ["Multi"],
//     "cate": { "covariate": "Quantity", "df": 5, "grid": 50 },
//     "dml": { "k_folds": 5, "n_reps": 1, "trim": 0.01, "confidence_level": 0.95 },
//     "learners": { "regressor": [ {"trees": 300, "depth": 1, "learning_rate": 0.1,
//                                   "min_leaf": 40, "subsample": 1.0} ],
//                   "classifier": [ ... ] },
//     "structure": { "algorithm": "hc", "alpha": 0.01, "score": "k2", "bins": 4,
//                    "max_parents": 3 },
//     "out_dir": "out",
//     "seed": 7
//   }

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "causalkit/column.hpp"
#include "causalkit/dml.hpp"
#include "causalkit/score.hpp"
#include "causalkit/synthgen.hpp"

#include "json.hpp"

namespace causalkit {

struct StructureConfig {
    std::string algorithm = "hc";  // hc | tabu | pc
    double alpha = 0.01;           // pc independence-test level
    std::string score;             // k2 | bic; empty = per-algorithm default
    int bins = 4;                  // discretization bins for numeric columns
    int max_parents = 3;
};

struct CateConfig {
    std::string covariate;
    int df = 5;
    std::size_t grid = 100;
};

struct RunConfig {
    // data source: exactly one of csv_path / synth_preset
    std::string csv_path;
    std::vector<ColumnSpec> columns;
    std::string date_column;
    std::string synth_preset;
    nlohmann::json synth_params = nlohmann::json::object();
    std::size_t n = 20000;

    std::string outcome = "Delay";
    std::vector<std::string> treatments;
    CateConfig cate;
    DmlConfig dml;              // seed field is ignored; the run seed below wins
    LearnerGrids learners;      // defaults to the built-in grids when unset
    StructureConfig structure;
    std::string out_dir = "out";
    std::uint64_t seed = 0;

    bool synthetic() const { return !synth_preset.empty(); }

    DmlConfig effective_dml() const {
        DmlConfig cfg = dml;
        cfg.seed = seed;
        return cfg;
    }
};

namespace detail {

inline void require_keys(const nlohmann::json& obj, const std::string& where,
                         const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw UsageError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) {
            throw UsageError("config: unknown field '" + where + "." + key + "'");
        }
    }
}

template <typename T>
inline T field_as(const nlohmann::json& obj, const std::string& where, const std::string& key) {
    if (!obj.contains(key)) throw UsageError("config: missing field '" + where + "." + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw UsageError("config: field '" + where + "." + key + "' has the wrong type");
    }
}

template <typename T>
inline T field_or(const nlohmann::json& obj, const std::string& where, const std::string& key,
                  T fallback) {
    if (!obj.contains(key)) return fallback;
    return field_as<T>(obj, where, key);
}

inline ColumnKind column_kind_from_string(const std::string& s) {
    if (s == "numeric") return ColumnKind::Numeric;
    if (s == "categorical") return ColumnKind::Categorical;
    if (s == "binary") return ColumnKind::Binary;
    if (s == "date") return ColumnKind::Date;
    throw UsageError("config: unknown column kind '" + s + "'");
}

inline Role role_from_string(const std::string& s) {
    if (s == "outcome") return Role::Outcome;
    if (s == "treatment") return Role::Treatment;
    if (s == "covariate") return Role::Covariate;
    if (s == "ignored") return Role::Ignored;
    throw UsageError("config: unknown column role '" + s + "'");
}

inline Hyperparams hyperparams_from_json(const nlohmann::json& obj, const std::string& where) {
    require_keys(obj, where, {"trees", "depth", "learning_rate", "min_leaf", "subsample"});
    Hyperparams hp;
    hp.n_trees = field_or<int>(obj, where, "trees", hp.n_trees);
    hp.max_depth = field_or<int>(obj, where, "depth", hp.max_depth);
    hp.learning_rate = field_or<double>(obj, where, "learning_rate", hp.learning_rate);
    hp.min_leaf = field_or<int>(obj, where, "min_leaf", hp.min_leaf);
    hp.subsample = field_or<double>(obj, where, "subsample", hp.subsample);
    hp.validate();
    return hp;
}

// Accepts one hyperparameter object or an array of them (a tuning grid).
inline std::vector<Hyperparams> grid_from_json(const nlohmann::json& node,
                                               const std::string& where) {
    std::vector<Hyperparams> grid;
    if (node.is_object()) {
        grid.push_back(hyperparams_from_json(node, where));
        return grid;
    }
    if (!node.is_array() || node.empty()) {
        throw UsageError("config: '" + where + "' must be an object or a nonempty array");
    }
    for (std::size_t i = 0; i < node.size(); ++i) {
        grid.push_back(hyperparams_from_json(node[i], where + "[" + std::to_string(i) + "]"));
    }
    return grid;
}

}  // namespace detail

// ===========================================================================
// Generator construction: preset + field overrides
// ===========================================================================

// Builds the structural model for a named preset, applying any parameter
// overrides from the config on top of the preset's own defaults.
inline ScmSpec build_scm(const std::string& preset, const nlohmann::json& params) {
    using detail::field_or;
    const std::string where = "data.params";
    if (preset == "maritime") {
        detail::require_keys(params, where,
                             {"n_suppliers", "n_parts", "n_projects", "multi_effect", "het_step",
                              "het_threshold", "confounding", "quarter_effects",
                              "quantity_share"});
        MaritimeParams p;
        p.n_suppliers = field_or<int>(params, where, "n_suppliers", p.n_suppliers);
        p.n_parts = field_or<int>(params, where, "n_parts", p.n_parts);
        p.n_projects = field_or<int>(params, where, "n_projects", p.n_projects);
        p.multi_effect = field_or<double>(params, where, "multi_effect", p.multi_effect);
        p.het_step = field_or<double>(params, where, "het_step", p.het_step);
        p.het_threshold = field_or<double>(params, where, "het_threshold", p.het_threshold);
        p.confounding = field_or<double>(params, where, "confounding", p.confounding);
        p.quantity_share = field_or<double>(params, where, "quantity_share", p.quantity_share);
        if (params.contains("quarter_effects")) {
            const auto qe =
                detail::field_as<std::vector<double>>(params, where, "quarter_effects");
            if (qe.size() != 4) {
                throw UsageError("config: 'data.params.quarter_effects' needs 4 entries");
            }
            for (std::size_t q = 0; q < 4; ++q) p.quarter_effects[q] = qe[q];
        }
        return default_maritime_scm(p);
    }
    if (preset == "quantity_cate" || preset == "homogeneous" || preset == "sign_flip") {
        detail::require_keys(params, where,
                             {"effect_base", "effect_step", "modifier", "threshold", "noise_sd",
                              "confounding"});
        BenchmarkParams p;
        if (preset == "homogeneous") {
            p.effect_base = 10.0;
            p.effect_step = 0.0;
            p.modifier = "";
        } else if (preset == "sign_flip") {
            p.effect_base = -8.0;
            p.effect_step = 16.0;
            p.modifier = "Flag";
            p.threshold = 0.5;
        }
        p.effect_base = field_or<double>(params, where, "effect_base", p.effect_base);
        p.effect_step = field_or<double>(params, where, "effect_step", p.effect_step);
        p.modifier = field_or<std::string>(params, where, "modifier", p.modifier);
        p.threshold = field_or<double>(params, where, "threshold", p.threshold);
        p.noise_sd = field_or<double>(params, where, "noise_sd", p.noise_sd);
        p.confounding = field_or<double>(params, where, "confounding", p.confounding);
        return quantity_benchmark_scm(p);
    }
    throw UsageError("unknown generator preset '" + preset + "'");
}

inline ScmSpec build_scm(const RunConfig& config) {
    return build_scm(config.synth_preset, config.synth_params);
}

// ===========================================================================
// Loading
// ===========================================================================

inline RunConfig parse_run_config(const nlohmann::json& doc) {
    using detail::field_as;
    using detail::field_or;
    detail::require_keys(doc, "config",
                         {"data", "outcome", "treatments", "cate", "dml", "learners", "structure",
                          "out_dir", "seed"});
    RunConfig config;

    if (!doc.contains("data")) throw UsageError("config: missing field 'config.data'");
    const nlohmann::json& data = doc.at("data");
    detail::require_keys(data, "data", {"csv", "columns", "date_column", "preset", "params", "n"});
    const bool has_csv = data.contains("csv");
    const bool has_preset = data.contains("preset");
    if (has_csv == has_preset) {
        throw UsageError("config: 'data' needs exactly one of 'csv' or 'preset'");
    }
    if (has_csv) {
        config.csv_path = field_as<std::string>(data, "data", "csv");
        if (!data.contains("columns")) throw UsageError("config: missing field 'data.columns'");
        const nlohmann::json& cols = data.at("columns");
        if (!cols.is_array() || cols.empty()) {
            throw UsageError("config: 'data.columns' must be a nonempty array");
        }
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const std::string where = "data.columns[" + std::to_string(i) + "]";
            detail::require_keys(cols[i], where, {"name", "kind", "role"});
            ColumnSpec spec;
            spec.name = field_as<std::string>(cols[i], where, "name");
            spec.kind = detail::column_kind_from_string(
                field_or<std::string>(cols[i], where, "kind", "numeric"));
            spec.role = detail::role_from_string(
                field_or<std::string>(cols[i], where, "role", "covariate"));
            config.columns.push_back(spec);
        }
        config.date_column = field_or<std::string>(data, "data", "date_column", "");
    } else {
        config.synth_preset = field_as<std::string>(data, "data", "preset");
        if (data.contains("params")) {
            config.synth_params = data.at("params");
            build_scm(config.synth_preset, config.synth_params);  // validate now, fail early
        } else {
            build_scm(config.synth_preset, nlohmann::json::object());
        }
        config.n = field_or<std::size_t>(data, "data", "n", config.n);
        if (config.n < 1) throw UsageError("config: 'data.n' must be at least 1");
    }

    config.outcome = field_or<std::string>(doc, "config", "outcome", config.outcome);
    config.treatments = field_or<std::vector<std::string>>(doc, "config", "treatments", {});

    if (doc.contains("cate")) {
        const nlohmann::json& cate = doc.at("cate");
        detail::require_keys(cate, "cate", {"covariate", "df", "grid"});
        config.cate.covariate = field_as<std::string>(cate, "cate", "covariate");
        config.cate.df = field_or<int>(cate, "cate", "df", config.cate.df);
        config.cate.grid = field_or<std::size_t>(cate, "cate", "grid", config.cate.grid);
        if (config.cate.grid < 2) throw UsageError("config: 'cate.grid' must be at least 2");
    }

    if (doc.contains("dml")) {
        const nlohmann::json& dml = doc.at("dml");
        detail::require_keys(dml, "dml", {"k_folds", "n_reps", "trim", "confidence_level"});
        config.dml.k_folds = field_or<std::size_t>(dml, "dml", "k_folds", config.dml.k_folds);
        config.dml.n_reps = field_or<std::size_t>(dml, "dml", "n_reps", config.dml.n_reps);
        config.dml.trim = field_or<double>(dml, "dml", "trim", config.dml.trim);
        config.dml.confidence_level =
            field_or<double>(dml, "dml", "confidence_level", config.dml.confidence_level);
        config.dml.validate();
    }

    if (doc.contains("learners")) {
        const nlohmann::json& learners = doc.at("learners");
        detail::require_keys(learners, "learners", {"regressor", "classifier"});
        if (learners.contains("regressor")) {
            config.learners.regressor =
                detail::grid_from_json(learners.at("regressor"), "learners.regressor");
        }
        if (learners.contains("classifier")) {
            config.learners.classifier =
                detail::grid_from_json(learners.at("classifier"), "learners.classifier");
        }
    }

    if (doc.contains("structure")) {
        const nlohmann::json& st = doc.at("structure");
        detail::require_keys(st, "structure", {"algorithm", "alpha", "score", "bins",
                                               "max_parents"});
        config.structure.algorithm =
            field_or<std::string>(st, "structure", "algorithm", config.structure.algorithm);
        config.structure.alpha = field_or<double>(st, "structure", "alpha",
                                                  config.structure.alpha);
        config.structure.score = field_or<std::string>(st, "structure", "score", "");
        config.structure.bins = field_or<int>(st, "structure", "bins", config.structure.bins);
        config.structure.max_parents =
            field_or<int>(st, "structure", "max_parents", config.structure.max_parents);
        const std::string& algo = config.structure.algorithm;
        if (algo != "hc" && algo != "tabu" && algo != "pc") {
            throw UsageError("config: unknown structure algorithm '" + algo + "'");
        }
        if (!(config.structure.alpha > 0.0) || !(config.structure.alpha < 1.0)) {
            throw UsageError("config: 'structure.alpha' must be in (0, 1)");
        }
        if (!config.structure.score.empty()) {
            score_kind_from_string(config.structure.score);  // validates the name
        }
        if (config.structure.bins < 2) throw UsageError("config: 'structure.bins' must be >= 2");
        if (config.structure.max_parents < 1) {
            throw UsageError("config: 'structure.max_parents' must be positive");
        }
    }

    config.out_dir = field_or<std::string>(doc, "config", "out_dir", config.out_dir);
    config.seed = field_or<std::uint64_t>(doc, "config", "seed", config.seed);
    return config;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_run_config(doc);
}

// ===========================================================================
// Fingerprint
// ===========================================================================

// Canonical JSON image of the effective configuration (after any flag
// overrides); the fingerprint hashes this image.
inline nlohmann::json to_json(const RunConfig& config) {
    nlohmann::json doc;
    nlohmann::json data;
    if (config.synthetic()) {
        data["preset"] = config.synth_preset;
        data["params"] = config.synth_params;
        data["n"] = config.n;
    } else {
        data["csv"] = config.csv_path;
        nlohmann::json cols = nlohmann::json::array();
        for (const auto& c : config.columns) {
            cols.push_back({{"name", c.name},
                            {"kind", to_string(c.kind)},
                            {"role", to_string(c.role)}});
        }
        data["columns"] = cols;
        if (!config.date_column.empty()) data["date_column"] = config.date_column;
    }
    doc["data"] = data;
    doc["outcome"] = config.outcome;
    doc["treatments"] = config.treatments;
    if (!config.cate.covariate.empty()) {
        doc["cate"] = {{"covariate", config.cate.covariate},
                       {"df", config.cate.df},
                       {"grid", config.cate.grid}};
    }
    doc["dml"] = {{"k_folds", config.dml.k_folds},
                  {"n_reps", config.dml.n_reps},
                  {"trim", config.dml.trim},
                  {"confidence_level", config.dml.confidence_level}};
    auto grid_json = [](const std::vector<Hyperparams>& grid) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& hp : grid) {
            arr.push_back({{"trees", hp.n_trees},
                           {"depth", hp.max_depth},
                           {"learning_rate", hp.learning_rate},
                           {"min_leaf", hp.min_leaf},
                           {"subsample", hp.subsample}});
        }
        return arr;
    };
    doc["learners"] = {{"regressor", grid_json(config.learners.regressor)},
                       {"classifier", grid_json(config.learners.classifier)}};
    doc["structure"] = {{"algorithm", config.structure.algorithm},
                        {"alpha", config.structure.alpha},
                        {"score", config.structure.score},
                        {"bins", config.structure.bins},
                        {"max_parents", config.structure.max_parents}};
    doc["out_dir"] = config.out_dir;
    doc["seed"] = config.seed;
    return doc;
}

// FNV-1a over the canonical dump, rendered as 16 hex digits.
inline std::string config_fingerprint(const RunConfig& config) {
    const std::string dump = to_json(config).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return strfmt("%016llx", static_cast<unsigned long long>(h));
}

}  // namespace causalkit
