#pragma once

// Decomposable structure scores for discrete Bayesian networks: the
// Dirichlet-uniform marginal likelihood (K2) and the penalized
// log-likelihood (BIC), over data discretized into equal-frequency bins.
// A per-family memoization cache supports incremental rescoring in search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "causalkit/common.hpp"
#include "causalkit/graph.hpp"
#include "causalkit/table.hpp"

namespace causalkit {

struct DiscreteData {
    std::vector<std::string> names;
    std::vector<int> cardinality;          // states per variable
    std::vector<std::vector<int>> values;  // [variable][row] in [0, cardinality)
    std::size_t n_rows = 0;
};

enum class ScoreKind { K2, Bic };

inline ScoreKind score_kind_from_string(const std::string& s) {
    if (s == "k2") return ScoreKind::K2;
    if (s == "bic") return ScoreKind::Bic;
    throw UsageError("unknown score: '" + s + "' (expected k2 or bic)");
}

// ---------------------------------------------------------------------------
// Discretization
// ---------------------------------------------------------------------------

// Numeric columns -> equal-frequency bins (duplicate cut points collapse, so
// cardinality may come out below `bins`); categoricals keep their codes;
// binaries stay 0/1.
inline DiscreteData discretize(const DataTable& table, int bins = 4) {
    if (bins < 2) throw UsageError("discretize: bins must be at least 2");
    DiscreteData out;
    out.n_rows = table.n_rows();
    for (const auto& col : table.columns()) {
        if (col.spec.role == Role::Ignored) continue;
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            if (col.missing[r]) {
                throw Error("discretize: column '" + col.spec.name +
                            "' has missing values; clean the table first");
            }
        }
        std::vector<int> states(table.n_rows(), 0);
        int card = 0;
        switch (col.spec.kind) {
            case ColumnKind::Numeric: {
                const auto& vals = col.numeric();
                std::vector<double> sorted = vals;
                std::sort(sorted.begin(), sorted.end());
                std::vector<double> cuts;
                for (int b = 1; b < bins; ++b) {
                    const std::size_t pos = static_cast<std::size_t>(
                        static_cast<double>(sorted.size()) * b / bins);
                    const double cut = sorted[std::min(pos, sorted.size() - 1)];
                    if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
                }
                for (std::size_t r = 0; r < vals.size(); ++r) {
                    int s = 0;
                    for (double cut : cuts) {
                        if (vals[r] >= cut) ++s;
                    }
                    states[r] = s;
                }
                card = static_cast<int>(cuts.size()) + 1;
                break;
            }
            case ColumnKind::Categorical: {
                const auto& storage = col.categorical();
                for (std::size_t r = 0; r < storage.codes.size(); ++r) {
                    states[r] = storage.codes[r];
                }
                card = static_cast<int>(storage.levels.size());
                break;
            }
            case ColumnKind::Binary: {
                const auto& vals = col.binary();
                for (std::size_t r = 0; r < vals.size(); ++r) states[r] = vals[r];
                card = 2;
                break;
            }
            case ColumnKind::Date:
                throw Error("discretize: date column '" + col.spec.name +
                            "' must be converted (calendar quarter) first");
        }
        if (card < 1) throw Error("discretize: column '" + col.spec.name + "' has no states");
        out.names.push_back(col.spec.name);
        out.cardinality.push_back(card);
        out.values.push_back(std::move(states));
    }
    if (out.names.empty()) throw Error("discretize: no usable columns");
    return out;
}

// Test/tooling entry: columns of an integer state matrix, cardinalities inferred.
inline DiscreteData discrete_from_columns(const std::vector<std::string>& names,
                                          const std::vector<std::vector<int>>& columns) {
    if (names.size() != columns.size()) throw Error("discrete data: name/column mismatch");
    DiscreteData out;
    out.names = names;
    out.values = columns;
    out.n_rows = columns.empty() ? 0 : columns.front().size();
    for (const auto& col : columns) {
        if (col.size() != out.n_rows) throw Error("discrete data: ragged columns");
        int card = 1;
        for (int v : col) {
            if (v < 0) throw Error("discrete data: negative state");
            card = std::max(card, v + 1);
        }
        out.cardinality.push_back(card);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Family scores
// ---------------------------------------------------------------------------

namespace detail {

// Sparse counts per observed parent configuration. Config ids are mixed-radix
// over the parent list; unobserved configurations contribute nothing to
// either score, so only observed ids are materialized.
struct FamilyCounts {
    std::unordered_map<std::uint64_t, std::vector<int>> by_config;  // config -> child counts
    int child_card = 0;
};

inline FamilyCounts count_family(const DiscreteData& data, int child,
                                 const std::vector<int>& parents) {
    FamilyCounts fc;
    fc.child_card = data.cardinality[static_cast<std::size_t>(child)];
    const auto& child_vals = data.values[static_cast<std::size_t>(child)];
    for (std::size_t r = 0; r < data.n_rows; ++r) {
        std::uint64_t config = 0;
        for (int p : parents) {
            config = config * static_cast<std::uint64_t>(
                                  data.cardinality[static_cast<std::size_t>(p)]) +
                     static_cast<std::uint64_t>(data.values[static_cast<std::size_t>(p)][r]);
        }
        auto& counts = fc.by_config[config];
        if (counts.empty()) counts.assign(static_cast<std::size_t>(fc.child_card), 0);
        counts[static_cast<std::size_t>(child_vals[r])] += 1;
    }
    return fc;
}

}  // namespace detail

// Dirichlet(1) marginal likelihood of one family, log scale:
// sum over observed parent configs of
//   lgamma(r) - lgamma(N_j + r) + sum_k lgamma(N_jk + 1).
inline double k2_family_score(const DiscreteData& data, int child,
                              const std::vector<int>& parents) {
    const detail::FamilyCounts fc = detail::count_family(data, child, parents);
    const double r = fc.child_card;
    double score = 0.0;
    for (const auto& [config, counts] : fc.by_config) {
        int nj = 0;
        double inner = 0.0;
        for (int njk : counts) {
            nj += njk;
            inner += std::lgamma(static_cast<double>(njk) + 1.0);
        }
        score += std::lgamma(r) - std::lgamma(static_cast<double>(nj) + r) + inner;
    }
    return score;
}

// Multinomial log-likelihood at the MLE minus ( (r-1) * q / 2 ) * log(n),
// where q is the full product of parent cardinalities.
inline double bic_family_score(const DiscreteData& data, int child,
                               const std::vector<int>& parents) {
    const detail::FamilyCounts fc = detail::count_family(data, child, parents);
    double loglik = 0.0;
    for (const auto& [config, counts] : fc.by_config) {
        int nj = 0;
        for (int njk : counts) nj += njk;
        for (int njk : counts) {
            if (njk > 0) {
                loglik += njk * std::log(static_cast<double>(njk) / static_cast<double>(nj));
            }
        }
    }
    double q = 1.0;
    for (int p : parents) q *= data.cardinality[static_cast<std::size_t>(p)];
    const double free_params = (fc.child_card - 1) * q;
    return loglik - 0.5 * free_params * std::log(static_cast<double>(data.n_rows));
}

constexpr int kDefaultMaxParents = 4;

inline double family_score(const DiscreteData& data, ScoreKind kind, int child,
                           const std::vector<int>& parents,
                           int max_parents = kDefaultMaxParents) {
    if (static_cast<int>(parents.size()) > max_parents) {
        throw Error(strfmt("family score: node '%s' would have %zu parents (max %d)",
                           data.names[static_cast<std::size_t>(child)].c_str(), parents.size(),
                           max_parents));
    }
    return kind == ScoreKind::K2 ? k2_family_score(data, child, parents)
                                 : bic_family_score(data, child, parents);
}

inline double total_score(const DiscreteData& data, ScoreKind kind, const Dag& dag,
                          int max_parents = kDefaultMaxParents) {
    if (dag.n_nodes() != data.names.size()) throw Error("score: graph/data node mismatch");
    double total = 0.0;
    for (std::size_t j = 0; j < dag.n_nodes(); ++j) {
        total += family_score(data, kind, static_cast<int>(j), dag.parents(static_cast<int>(j)),
                              max_parents);
    }
    return total;
}

inline double k2_score(const Dag& dag, const DiscreteData& data,
                       int max_parents = kDefaultMaxParents) {
    return total_score(data, ScoreKind::K2, dag, max_parents);
}

inline double bic_score(const Dag& dag, const DiscreteData& data,
                        int max_parents = kDefaultMaxParents) {
    return total_score(data, ScoreKind::Bic, dag, max_parents);
}

// Pure memoization over (child, parent set) — same key always yields the
// same value, so incremental rescoring matches full rescoring exactly.
class FamilyScoreCache {
  public:
    FamilyScoreCache(const DiscreteData& data, ScoreKind kind,
                     int max_parents = kDefaultMaxParents)
        : data_(data), kind_(kind), max_parents_(max_parents) {
        if (data.names.size() > 32) throw Error("score cache: too many variables (max 32)");
    }

    int max_parents() const { return max_parents_; }

    double family(int child, const std::vector<int>& parents) {
        std::uint64_t mask = 0;
        for (int p : parents) mask |= (1ULL << p);
        const std::uint64_t key = (static_cast<std::uint64_t>(child) << 32) | mask;
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        const double value = family_score(data_, kind_, child, parents, max_parents_);
        cache_.emplace(key, value);
        return value;
    }

    double total(const Dag& dag) {
        double sum = 0.0;
        for (std::size_t j = 0; j < dag.n_nodes(); ++j) {
            sum += family(static_cast<int>(j), dag.parents(static_cast<int>(j)));
        }
        return sum;
    }

  private:
    const DiscreteData& data_;
    ScoreKind kind_;
    int max_parents_;
    std::unordered_map<std::uint64_t, double> cache_;
};

}  // namespace causalkit
