#pragma once

// Subcommand implementations behind the command-line tool. Each command
// loads the configured data, composes the estimation modules, writes its
// outputs into the configured directory, and returns the run report that
// references every file it wrote. All outputs are deterministic for a fixed
// configuration and seed.

#include <filesystem>
#include <iostream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "causalkit/cate.hpp"
#include "causalkit/folds.hpp"
#include "causalkit/pc.hpp"
#include "causalkit/policy.hpp"
#include "causalkit/report.hpp"
#include "causalkit/runconfig.hpp"
#include "causalkit/search.hpp"

namespace causalkit {

namespace detail {

// Depth-2 exact policy search scans (features x rows)^2 candidate pairs, so
// training is capped to an evenly strided subsample; evaluation still uses
// every held-out row.
inline constexpr std::size_t kPolicyTrainCap = 1200;

struct Prepared {
    DataTable table;
    nlohmann::json provenance;
};

// Load (file or generator), derive the calendar-quarter column if asked,
// then clean: whole-row deletion of missing values and exact duplicates.
inline Prepared prepare_table(const RunConfig& config) {
    Prepared prep;
    if (config.synthetic()) {
        const ScmSpec spec = build_scm(config);
        prep.table = generate(spec, config.n, config.seed);
        prep.provenance["source"] = "preset:" + config.synth_preset;
        prep.provenance["n_rows_read"] = config.n;
        prep.provenance["parse_failures"] = 0;
    } else {
        LoadResult loaded = load_csv(config.csv_path, config.columns);
        prep.provenance["source"] = config.csv_path;
        prep.provenance["n_rows_read"] = loaded.n_rows_read;
        prep.provenance["parse_failures"] = loaded.parse_failures.size();
        prep.table = std::move(loaded.table);
    }
    if (!config.date_column.empty()) {
        prep.table = derive_quarter(prep.table, config.date_column);
    }
    CleanResult cleaned = clean(prep.table);
    prep.provenance["removed_missing"] = cleaned.removed_missing;
    prep.provenance["removed_duplicates"] = cleaned.removed_duplicates;
    prep.provenance["n_rows"] = cleaned.table.n_rows();
    prep.table = std::move(cleaned.table);
    if (prep.table.n_rows() == 0) throw Error("no rows left after cleaning");
    return prep;
}

inline std::string out_path(const RunConfig& config, const std::string& name) {
    std::filesystem::create_directories(config.out_dir);
    return (std::filesystem::path(config.out_dir) / name).string();
}

inline nlohmann::json base_report(const RunConfig& config, const std::string& command) {
    nlohmann::json report;
    report["command"] = command;
    report["fingerprint"] = config_fingerprint(config);
    report["seed"] = config.seed;
    return report;
}

inline void require_treatments(const RunConfig& config) {
    if (config.treatments.empty()) {
        throw UsageError("config: 'treatments' must be nonempty for estimation commands");
    }
}

inline std::vector<double> to_std_vector(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

// Evenly strided subsample keeping at most `cap` of the given rows.
inline std::vector<std::size_t> cap_rows(const std::vector<std::size_t>& rows, std::size_t cap) {
    if (rows.size() <= cap) return rows;
    std::vector<std::size_t> kept;
    kept.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i) kept.push_back(rows[i * rows.size() / cap]);
    return kept;
}

}  // namespace detail

// ===========================================================================
// ingest: load -> clean -> cleaned CSV + outcome summary
// ===========================================================================

inline nlohmann::json cmd_ingest(const RunConfig& config, std::ostream& out = std::cout) {
    const detail::Prepared prep = detail::prepare_table(config);

    const std::string cleaned_name = "cleaned.csv";
    write_csv(detail::out_path(config, cleaned_name), prep.table);

    nlohmann::json report = detail::base_report(config, "ingest");
    report["source"] = prep.provenance;
    out << "rows kept: " << prep.table.n_rows()
        << " (removed missing: " << prep.provenance["removed_missing"]
        << ", duplicates: " << prep.provenance["removed_duplicates"] << ")\n";

    if (prep.table.has_column(config.outcome) &&
        prep.table.column(config.outcome).spec.kind == ColumnKind::Numeric) {
        const DelayStats stats = summary_stats(prep.table.column(config.outcome).numeric());
        report["outcome_summary"] = to_json(stats);
        out << strfmt("outcome '%s': delayed rate %.3f, mean/std of positive delays %.2f/%.2f\n",
                      config.outcome.c_str(), stats.delayed_rate, stats.mean_delay,
                      stats.std_delay);
    }

    report["outputs"] = nlohmann::json::array({cleaned_name});
    write_json_file(detail::out_path(config, "ingest_report.json"), report);
    return report;
}

// ===========================================================================
// dag: structure learning -> DOT + JSON graph
// ===========================================================================

inline nlohmann::json cmd_dag(const RunConfig& config, std::ostream& out = std::cout) {
    const detail::Prepared prep = detail::prepare_table(config);
    const StructureConfig& st = config.structure;

    std::string dot;
    nlohmann::json record;
    if (st.algorithm == "pc") {
        const VariableMatrix vm = variable_matrix(prep.table);
        const PcResult res = pc_discover(vm, st.alpha);
        dot = export_dot(res.pdag, "cpdag");
        record = graph_record_json(res.pdag.names(), res.pdag.directed_edges(),
                                   res.pdag.undirected_edges(), "pc",
                                   {{"alpha", st.alpha},
                                    {"tests", res.skeleton.trace.size()},
                                    {"conflicts", res.conflicts}});
        out << "pc: " << res.skeleton.trace.size() << " independence tests, "
            << res.pdag.directed_edges().size() << " directed + "
            << res.pdag.undirected_edges().size() << " undirected edges\n";
    } else if (st.algorithm == "hc" || st.algorithm == "tabu") {
        const DiscreteData data = discretize(prep.table, st.bins);
        const std::string score_name = !st.score.empty() ? st.score
                                       : st.algorithm == "hc" ? "k2"
                                                              : "bic";
        const ScoreKind kind = score_kind_from_string(score_name);
        const Dag init(data.names);
        const SearchResult res = st.algorithm == "hc"
                                     ? hill_climb(data, init, kind, 1000, st.max_parents)
                                     : tabu_search(data, init, kind, TabuOptions{},
                                                   st.max_parents);
        dot = export_dot(res.dag, st.algorithm);
        record = graph_record_json(res.dag.names(), res.dag.edges(), {}, st.algorithm,
                                   {{"score", res.score},
                                    {"score_kind", score_name},
                                    {"iterations", res.iterations},
                                    {"trajectory", res.trajectory}});
        out << st.algorithm << ": " << score_name << " score " << strfmt("%.4f", res.score)
            << " after " << res.iterations << " moves, " << res.dag.n_edges() << " edges\n";
    } else {
        throw UsageError("config: unknown structure algorithm '" + st.algorithm + "'");
    }

    write_text_file(detail::out_path(config, "dag.dot"), dot);
    write_json_file(detail::out_path(config, "dag.json"), record);

    nlohmann::json report = detail::base_report(config, "dag");
    report["algorithm"] = st.algorithm;
    report["source"] = prep.provenance;
    report["graph"] = record;
    report["outputs"] = nlohmann::json::array({"dag.dot", "dag.json"});
    write_json_file(detail::out_path(config, "dag_report.json"), report);
    return report;
}

// ===========================================================================
// ate: cross-fitted effects table
// ===========================================================================

inline nlohmann::json cmd_ate(const RunConfig& config, std::ostream& out = std::cout) {
    detail::require_treatments(config);
    const detail::Prepared prep = detail::prepare_table(config);
    const DesignMatrix dm = encode(prep.table);
    const DmlConfig cfg = config.effective_dml();
    const std::string fingerprint = config_fingerprint(config);

    std::vector<AteEstimate> rows;
    nlohmann::json row_records = nlohmann::json::array();
    for (const std::string& treatment : config.treatments) {
        try {
            rows.push_back(estimate_ate(dm, config.outcome, treatment, cfg, config.learners));
        } catch (const Error& e) {
            throw Error("treatment '" + treatment + "': " + e.what());
        }
        nlohmann::json record = to_json(rows.back());
        record["fingerprint"] = fingerprint;
        row_records.push_back(std::move(record));
    }

    out << ate_results_text(rows);
    write_text_file(detail::out_path(config, "results.csv"), ate_results_csv(rows));

    nlohmann::json report = detail::base_report(config, "ate");
    report["source"] = prep.provenance;
    report["estimates"] = row_records;
    report["outputs"] = nlohmann::json::array({"results.csv"});
    write_json_file(detail::out_path(config, "ate_report.json"), report);
    return report;
}

// ===========================================================================
// cate: effect curves along one covariate
// ===========================================================================

inline nlohmann::json cmd_cate(const RunConfig& config, std::ostream& out = std::cout) {
    detail::require_treatments(config);
    if (config.cate.covariate.empty()) {
        throw UsageError("config: missing field 'cate.covariate'");
    }
    const detail::Prepared prep = detail::prepare_table(config);
    if (!prep.table.has_column(config.cate.covariate)) {
        throw Error("no such column: '" + config.cate.covariate + "'");
    }
    if (prep.table.column(config.cate.covariate).spec.kind != ColumnKind::Numeric) {
        throw UsageError("config: 'cate.covariate' must name a numeric column");
    }

    const DesignMatrix dm = encode(prep.table);
    const DmlConfig cfg = config.effective_dml();
    const std::string fingerprint = config_fingerprint(config);
    const std::vector<double> x = detail::to_std_vector(dm.feature(config.cate.covariate));

    nlohmann::json row_records = nlohmann::json::array();
    nlohmann::json curve_files = nlohmann::json::object();
    std::vector<std::string> outputs;
    for (const std::string& treatment : config.treatments) {
        OrthoScores scores;
        const AteEstimate est = estimate_ate(dm, config.outcome, treatment, cfg, config.learners,
                                             {}, &scores);
        const CateCurve curve = estimate_cate(x, scores.psi_b, config.cate.df, 3,
                                              config.cate.grid, cfg.confidence_level);
        const std::string file = "cate_" + treatment + ".csv";
        write_text_file(detail::out_path(config, file), curve_csv(curve));
        outputs.push_back(file);
        curve_files[treatment] = file;

        nlohmann::json record = to_json(est);
        record["fingerprint"] = fingerprint;
        row_records.push_back(std::move(record));
        out << strfmt("%s | %s: curve over [%.4g, %.4g], estimate range [%.4g, %.4g]\n",
                      treatment.c_str(), config.cate.covariate.c_str(), curve.grid.front(),
                      curve.grid.back(),
                      *std::min_element(curve.estimate.begin(), curve.estimate.end()),
                      *std::max_element(curve.estimate.begin(), curve.estimate.end()));
    }

    nlohmann::json report = detail::base_report(config, "cate");
    report["source"] = prep.provenance;
    report["covariate"] = config.cate.covariate;
    report["df"] = config.cate.df;
    report["estimates"] = row_records;
    report["curves"] = curve_files;
    report["outputs"] = outputs;
    write_json_file(detail::out_path(config, "cate_report.json"), report);
    return report;
}

// ===========================================================================
// policy: depth-2 assignment trees with honest evaluation
// ===========================================================================

inline nlohmann::json cmd_policy(const RunConfig& config, std::ostream& out = std::cout) {
    detail::require_treatments(config);
    const detail::Prepared prep = detail::prepare_table(config);
    const DesignMatrix dm = encode(prep.table);
    const DmlConfig cfg = config.effective_dml();
    const std::string fingerprint = config_fingerprint(config);

    nlohmann::json trees = nlohmann::json::object();
    std::vector<std::string> outputs;
    for (const std::string& treatment : config.treatments) {
        OrthoScores scores;
        const AteEstimate est = estimate_ate(dm, config.outcome, treatment, cfg, config.learners,
                                             {}, &scores);
        const DesignMatrix sub =
            dm.submatrix(ate_covariates(dm, config.outcome, treatment, {}));

        // honest split: fit on one half, headline value from the other
        const FoldPlan split = make_folds(sub.n_rows(), 2, mix_u64(config.seed, 0x70C1E5EEDULL));
        const std::vector<std::size_t> train =
            detail::cap_rows(split.test_rows(0), detail::kPolicyTrainCap);
        const std::vector<std::size_t> holdout = split.test_rows(1);

        auto gather = [&](const std::vector<std::size_t>& rows) {
            Eigen::VectorXd psi(static_cast<Eigen::Index>(rows.size()));
            for (std::size_t i = 0; i < rows.size(); ++i) {
                psi[static_cast<Eigen::Index>(i)] =
                    scores.psi_b[static_cast<Eigen::Index>(rows[i])];
            }
            return psi;
        };
        const DesignMatrix x_train = sub.select_rows(train);
        const DesignMatrix x_hold = sub.select_rows(holdout);
        const Eigen::VectorXd psi_train = gather(train);
        const Eigen::VectorXd psi_hold = gather(holdout);

        const PolicyTree tree = fit_policy_tree(x_train.values, psi_train, 2);
        const PolicyValue train_value = evaluate_policy(tree, x_train.values, psi_train);
        const PolicyValue hold_value = evaluate_policy(tree, x_hold.values, psi_hold);

        const std::string text_file = "policy_" + treatment + ".txt";
        const std::string dot_file = "policy_" + treatment + ".dot";
        write_text_file(detail::out_path(config, text_file),
                        policy_to_text(tree, sub.feature_names));
        write_text_file(detail::out_path(config, dot_file),
                        policy_to_dot(tree, sub.feature_names));
        outputs.push_back(text_file);
        outputs.push_back(dot_file);

        nlohmann::json entry;
        entry["fingerprint"] = fingerprint;
        entry["ate"] = to_json(est);
        entry["text"] = text_file;
        entry["dot"] = dot_file;
        entry["train"] = {{"n", train_value.n},
                          {"value", train_value.value},
                          {"mean_value", train_value.value / static_cast<double>(train_value.n)}};
        entry["holdout"] = {{"n", hold_value.n},
                            {"value", hold_value.value},
                            {"mean_value", hold_value.value / static_cast<double>(hold_value.n)}};
        trees[treatment] = std::move(entry);

        out << strfmt("%s: policy value per order %.4f held-out (%.4f training)\n",
                      treatment.c_str(),
                      hold_value.value / static_cast<double>(hold_value.n),
                      train_value.value / static_cast<double>(train_value.n));
    }

    nlohmann::json report = detail::base_report(config, "policy");
    report["source"] = prep.provenance;
    report["trees"] = trees;
    report["outputs"] = outputs;
    write_json_file(detail::out_path(config, "policy_report.json"), report);
    return report;
}

// ===========================================================================
// simulate: synthetic table + generator spec + ground-truth oracle
// ===========================================================================

inline nlohmann::json cmd_simulate(const RunConfig& config, std::ostream& out = std::cout) {
    if (!config.synthetic()) {
        throw UsageError("config: simulate requires a generator data source ('data.preset')");
    }
    const ScmSpec spec = build_scm(config);
    const DataTable table = generate(spec, config.n, config.seed);
    write_csv(detail::out_path(config, "data.csv"), table);
    write_json_file(detail::out_path(config, "scm.json"), to_json(spec));

    const OracleEffects oracle = oracle_effects(spec);
    write_json_file(detail::out_path(config, "oracle.json"), to_json(oracle));

    out << "generated " << table.n_rows() << " rows from preset '" << config.synth_preset
        << "'\n";
    for (const auto& entry : oracle.treatments) {
        out << strfmt("true effect of %s: %.4f%s\n", entry.treatment.c_str(), entry.ate.value,
                      entry.ate.exact ? " (exact)" : "");
    }

    nlohmann::json report = detail::base_report(config, "simulate");
    report["preset"] = config.synth_preset;
    report["n"] = table.n_rows();
    report["oracle"] = to_json(oracle);
    report["outputs"] = nlohmann::json::array({"data.csv", "scm.json", "oracle.json"});
    write_json_file(detail::out_path(config, "simulate_report.json"), report);
    return report;
}

// Dispatch by subcommand name; unknown names are usage errors.
inline nlohmann::json run_command(const std::string& command, const RunConfig& config,
                                  std::ostream& out = std::cout) {
    if (command == "ingest") return cmd_ingest(config, out);
    if (command == "dag") return cmd_dag(config, out);
    if (command == "ate") return cmd_ate(config, out);
    if (command == "cate") return cmd_cate(config, out);
    if (command == "policy") return cmd_policy(config, out);
    if (command == "simulate") return cmd_simulate(config, out);
    throw UsageError("unknown command '" + command + "'");
}

}  // namespace causalkit
