#pragma once

// Structural causal model simulator for synthetic order data. A spec is an
// ordered list of nodes, each with one equation from a closed, serializable
// set; sampling is ancestral with counter-based noise streams keyed by
// (node, row, slot), so block split never matters and a do-intervention
// (one equation replaced by a constant) reuses the observational noise:
// interventional draws under the same seed are paired row by row.
//
// The same spec yields ground truth: exact or paired-Monte-Carlo ATE/CATE,
// per-row nuisance values (propensity and both outcome regressions), and the
// additive per-level outcome shift of a seasonal channel. These oracles back
// the estimator test suites.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "causalkit/common.hpp"
#include "causalkit/table.hpp"

namespace causalkit {

// ---------------------------------------------------------------------------
// Spec types
// ---------------------------------------------------------------------------

// One additive contribution to a linear predictor. `source` must name an
// earlier node.
struct Term {
    enum class Kind {
        Value,         // coef * (value - center); numeric or binary source
        CenteredCode,  // coef * (code - (k-1)/2); categorical source
        LevelTable,    // coef * table[code];      categorical source
    };
    Kind kind = Kind::Value;
    std::string source;
    double coef = 1.0;
    double center = 0.0;        // Value only
    std::vector<double> table;  // LevelTable only; one entry per level
};

// Additive treatment effect on the outcome, optionally modulated by a
// threshold on one upstream node:
//   contribution = (base + step * 1(modifier > threshold)) * treatment.
// With step = 0 the effect is a constant and the true ATE equals `base`
// exactly, provided the treatment reaches the outcome through no other path.
struct TreatmentEffect {
    std::string treatment;
    double base = 0.0;
    double step = 0.0;
    std::string modifier;  // required when step != 0
    double threshold = 0.0;
};

struct UniformChoiceEq {
    std::vector<std::string> levels;
};

// Rank-frequency categorical: P(code = i) proportional to (i+1)^-exponent.
// `shift_source` (optional) rotates the draw by stride * parent_code so the
// child depends on a categorical parent without a full conditional table.
struct ZipfCategoricalEq {
    std::vector<std::string> levels;
    double exponent = 1.0;
    std::string shift_source;
    int shift_stride = 0;
};

struct BernoulliLogitEq {
    double intercept = 0.0;
    std::vector<Term> terms;
};

struct UniformRealEq {
    double low = 0.0;
    double high = 1.0;
};

struct LinearGaussianEq {
    double intercept = 0.0;
    std::vector<Term> terms;
    double sigma = 1.0;
    std::vector<TreatmentEffect> effects;  // outcome node only
};

// Two-part delay outcome. A disruption flag B ~ Bernoulli(logistic(prob))
// selects between a log-normal severity min(exp(sev_location + terms +
// sigma*Z), sev_cap) and an early-arrival slack -(early_mean + early_sigma*Z'),
// so on-time rows carry negative delay. The cap bounds the extreme tail
// without touching the bulk. Linear terms and additive treatment effects apply
// to every row, which keeps do(1)-do(0) differences exact under pairing.
struct DelayOutcomeEq {
    double prob_intercept = 0.0;
    std::vector<Term> prob_terms;
    double sev_location = 4.0;
    std::vector<Term> sev_terms;
    double sev_sigma = 0.5;
    double sev_cap = std::numeric_limits<double>::infinity();
    double early_mean = 30.0;
    double early_sigma = 8.0;
    std::vector<Term> linear_terms;
    std::vector<TreatmentEffect> effects;
};

using NodeEquation = std::variant<UniformChoiceEq, ZipfCategoricalEq, BernoulliLogitEq,
                                  UniformRealEq, LinearGaussianEq, DelayOutcomeEq>;

struct ScmNode {
    std::string name;
    NodeEquation equation;
};

namespace detail {

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// E[min(exp(mu + sigma Z), cap)] for standard normal Z, via the log-normal
// partial expectation; reduces to exp(mu + sigma^2/2) when cap is infinite.
inline double capped_lognormal_mean(double mu, double sigma, double cap) {
    if (!std::isfinite(cap)) return std::exp(mu + 0.5 * sigma * sigma);
    if (sigma == 0.0) return std::min(std::exp(mu), cap);
    const double z = (std::log(cap) - mu) / sigma;
    return std::exp(mu + 0.5 * sigma * sigma) * normal_cdf(z - sigma) +
           cap * (1.0 - normal_cdf(z));
}

inline ColumnKind equation_kind(const NodeEquation& eq) {
    if (std::holds_alternative<UniformChoiceEq>(eq) ||
        std::holds_alternative<ZipfCategoricalEq>(eq)) {
        return ColumnKind::Categorical;
    }
    if (std::holds_alternative<BernoulliLogitEq>(eq)) return ColumnKind::Binary;
    return ColumnKind::Numeric;
}

inline const std::vector<std::string>* equation_levels(const NodeEquation& eq) {
    if (const auto* u = std::get_if<UniformChoiceEq>(&eq)) return &u->levels;
    if (const auto* z = std::get_if<ZipfCategoricalEq>(&eq)) return &z->levels;
    return nullptr;
}

inline const std::vector<TreatmentEffect>* equation_effects(const NodeEquation& eq) {
    if (const auto* g = std::get_if<LinearGaussianEq>(&eq)) return &g->effects;
    if (const auto* d = std::get_if<DelayOutcomeEq>(&eq)) return &d->effects;
    return nullptr;
}

inline std::vector<const std::vector<Term>*> equation_term_groups(const NodeEquation& eq) {
    std::vector<const std::vector<Term>*> groups;
    if (const auto* b = std::get_if<BernoulliLogitEq>(&eq)) {
        groups.push_back(&b->terms);
    } else if (const auto* g = std::get_if<LinearGaussianEq>(&eq)) {
        groups.push_back(&g->terms);
    } else if (const auto* d = std::get_if<DelayOutcomeEq>(&eq)) {
        groups.push_back(&d->prob_terms);
        groups.push_back(&d->sev_terms);
        groups.push_back(&d->linear_terms);
    }
    return groups;
}

}  // namespace detail

// Node list in topological order plus the causal roles. Parent sets are
// derived from the equations, so the spec cannot disagree with itself.
struct ScmSpec {
    std::vector<ScmNode> nodes;
    std::vector<std::string> treatments;
    std::string outcome;

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].name == name) return static_cast<int>(i);
        }
        return -1;
    }

    ColumnKind kind(std::size_t i) const { return detail::equation_kind(nodes[i].equation); }

    const std::vector<std::string>* levels(std::size_t i) const {
        return detail::equation_levels(nodes[i].equation);
    }

    bool is_treatment(const std::string& name) const {
        return std::find(treatments.begin(), treatments.end(), name) != treatments.end();
    }

    // Parent indices derived from the node's equation (term sources, the zipf
    // shift source, and effect treatments/modifiers), sorted and deduplicated.
    std::vector<int> parents(std::size_t i) const {
        std::vector<int> out;
        auto add = [&](const std::string& name) {
            if (name.empty()) return;
            const int j = index_of(name);
            if (j >= 0) out.push_back(j);
        };
        for (const auto* group : detail::equation_term_groups(nodes[i].equation)) {
            for (const Term& t : *group) add(t.source);
        }
        if (const auto* z = std::get_if<ZipfCategoricalEq>(&nodes[i].equation)) {
            add(z->shift_source);
        }
        if (const auto* effs = detail::equation_effects(nodes[i].equation)) {
            for (const TreatmentEffect& e : *effs) {
                add(e.treatment);
                if (!e.modifier.empty()) add(e.modifier);
            }
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    // descendants[j] = 1 when node j is strictly downstream of node i
    std::vector<char> descendants(std::size_t i) const {
        std::vector<char> down(nodes.size(), 0);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            for (int p : parents(j)) {
                if (static_cast<std::size_t>(p) == i || down[static_cast<std::size_t>(p)]) {
                    down[j] = 1;
                    break;
                }
            }
        }
        return down;
    }

    const std::vector<TreatmentEffect>& outcome_effects() const {
        static const std::vector<TreatmentEffect> kEmpty;
        const int oi = index_of(outcome);
        if (oi < 0) return kEmpty;
        const auto* effs = detail::equation_effects(nodes[static_cast<std::size_t>(oi)].equation);
        return effs != nullptr ? *effs : kEmpty;
    }

    // Full structural check: names unique, references resolve strictly
    // backwards (acyclic by construction), transforms match source kinds,
    // treatments are Bernoulli nodes, effects live on the outcome only and
    // never re-enter it through regular terms.
    void validate() const {
        if (nodes.empty()) throw Error("spec: no nodes");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (nodes[i].name.empty()) throw Error("spec: unnamed node");
            for (std::size_t j = 0; j < i; ++j) {
                if (nodes[j].name == nodes[i].name) {
                    throw Error("spec: duplicate node '" + nodes[i].name + "'");
                }
            }
        }
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const ScmNode& node = nodes[i];
            auto resolve_backward = [&](const std::string& ref) -> std::size_t {
                const int j = index_of(ref);
                if (j < 0) {
                    throw Error("spec: node '" + node.name + "' references unknown node '" +
                                ref + "'");
                }
                if (static_cast<std::size_t>(j) >= i) {
                    throw Error("spec: node '" + node.name + "' references '" + ref +
                                "' out of topological order");
                }
                return static_cast<std::size_t>(j);
            };
            auto check_term = [&](const Term& t) {
                const std::size_t j = resolve_backward(t.source);
                const ColumnKind k = kind(j);
                if (t.kind == Term::Kind::Value) {
                    if (k == ColumnKind::Categorical || k == ColumnKind::Date) {
                        throw Error("spec: value term on non-numeric node '" + t.source + "'");
                    }
                } else {
                    if (k != ColumnKind::Categorical) {
                        throw Error("spec: coded term on non-categorical node '" + t.source +
                                    "'");
                    }
                    if (t.kind == Term::Kind::LevelTable &&
                        t.table.size() != levels(j)->size()) {
                        throw Error("spec: level table size mismatch for '" + t.source + "'");
                    }
                }
            };
            for (const auto* group : detail::equation_term_groups(node.equation)) {
                for (const Term& t : *group) check_term(t);
            }
            if (const auto* u = std::get_if<UniformChoiceEq>(&node.equation)) {
                if (u->levels.size() < 2) {
                    throw Error("spec: node '" + node.name + "' needs at least 2 levels");
                }
            } else if (const auto* z = std::get_if<ZipfCategoricalEq>(&node.equation)) {
                if (z->levels.size() < 2) {
                    throw Error("spec: node '" + node.name + "' needs at least 2 levels");
                }
                if (!(z->exponent > 0.0)) {
                    throw Error("spec: node '" + node.name + "' has non-positive exponent");
                }
                if (z->shift_stride < 0) {
                    throw Error("spec: node '" + node.name + "' has negative shift stride");
                }
                if (!z->shift_source.empty()) {
                    const std::size_t j = resolve_backward(z->shift_source);
                    if (kind(j) != ColumnKind::Categorical) {
                        throw Error("spec: shift source '" + z->shift_source +
                                    "' is not categorical");
                    }
                }
            } else if (const auto* r = std::get_if<UniformRealEq>(&node.equation)) {
                if (!(r->high > r->low)) {
                    throw Error("spec: node '" + node.name + "' has empty uniform range");
                }
            } else if (const auto* g = std::get_if<LinearGaussianEq>(&node.equation)) {
                if (g->sigma < 0.0) {
                    throw Error("spec: node '" + node.name + "' has negative sigma");
                }
                if (!g->effects.empty() && node.name != outcome) {
                    throw Error("spec: treatment effects on non-outcome node '" + node.name +
                                "'");
                }
            } else if (const auto* d = std::get_if<DelayOutcomeEq>(&node.equation)) {
                if (d->sev_sigma < 0.0 || d->early_sigma < 0.0) {
                    throw Error("spec: node '" + node.name + "' has negative sigma");
                }
                if (!(d->sev_cap > 0.0)) {
                    throw Error("spec: node '" + node.name + "' has non-positive severity cap");
                }
                if (!d->effects.empty() && node.name != outcome) {
                    throw Error("spec: treatment effects on non-outcome node '" + node.name +
                                "'");
                }
            }
        }
        const int oi = index_of(outcome);
        if (oi < 0) throw Error("spec: unknown outcome '" + outcome + "'");
        const NodeEquation& oeq = nodes[static_cast<std::size_t>(oi)].equation;
        if (!std::holds_alternative<LinearGaussianEq>(oeq) &&
            !std::holds_alternative<DelayOutcomeEq>(oeq)) {
            throw Error("spec: outcome '" + outcome + "' must be linear-gaussian or delay");
        }
        for (const std::string& t : treatments) {
            const int ti = index_of(t);
            if (ti < 0) throw Error("spec: unknown treatment '" + t + "'");
            if (!std::holds_alternative<BernoulliLogitEq>(
                    nodes[static_cast<std::size_t>(ti)].equation)) {
                throw Error("spec: treatment '" + t + "' is not a bernoulli node");
            }
        }
        // Treatments may reach the outcome only through the additive effects;
        // this keeps the per-row nuisance oracle closed-form.
        for (const auto* group : detail::equation_term_groups(oeq)) {
            for (const Term& t : *group) {
                if (is_treatment(t.source)) {
                    throw Error("spec: treatment '" + t.source +
                                "' appears in a regular outcome term");
                }
            }
        }
        const auto& effs = outcome_effects();
        for (std::size_t a = 0; a < effs.size(); ++a) {
            const TreatmentEffect& e = effs[a];
            if (!is_treatment(e.treatment)) {
                throw Error("spec: effect references non-treatment '" + e.treatment + "'");
            }
            for (std::size_t b = 0; b < a; ++b) {
                if (effs[b].treatment == e.treatment) {
                    throw Error("spec: duplicate effect for treatment '" + e.treatment + "'");
                }
            }
            if (e.step != 0.0) {
                if (e.modifier.empty()) {
                    throw Error("spec: heterogeneous effect for '" + e.treatment +
                                "' has no modifier");
                }
                const int mi = index_of(e.modifier);
                if (mi < 0) throw Error("spec: unknown modifier '" + e.modifier + "'");
                const ColumnKind mk = kind(static_cast<std::size_t>(mi));
                if (mk != ColumnKind::Numeric && mk != ColumnKind::Binary) {
                    throw Error("spec: modifier '" + e.modifier + "' is not numeric");
                }
                for (const std::string& t : treatments) {
                    const std::size_t ti = static_cast<std::size_t>(index_of(t));
                    if (static_cast<std::size_t>(mi) == ti ||
                        descendants(ti)[static_cast<std::size_t>(mi)]) {
                        throw Error("spec: modifier '" + e.modifier +
                                    "' is downstream of treatment '" + t + "'");
                    }
                }
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

namespace detail {

struct ResolvedTerm {
    Term::Kind kind;
    int src;
    double coef;
    double center;
    const std::vector<double>* table;
    double half_span;  // (k-1)/2 for CenteredCode
};

inline std::vector<ResolvedTerm> resolve_terms(const ScmSpec& spec,
                                               const std::vector<Term>& terms) {
    std::vector<ResolvedTerm> out;
    out.reserve(terms.size());
    for (const Term& t : terms) {
        ResolvedTerm rt;
        rt.kind = t.kind;
        rt.src = spec.index_of(t.source);
        rt.coef = t.coef;
        rt.center = t.center;
        rt.table = &t.table;
        rt.half_span = 0.0;
        if (t.kind == Term::Kind::CenteredCode) {
            rt.half_span =
                (static_cast<double>(spec.levels(static_cast<std::size_t>(rt.src))->size()) -
                 1.0) /
                2.0;
        }
        out.push_back(rt);
    }
    return out;
}

inline double eval_terms(const std::vector<ResolvedTerm>& terms,
                         const std::vector<std::vector<double>>& raw, std::size_t row) {
    double acc = 0.0;
    for (const ResolvedTerm& t : terms) {
        const double v = raw[static_cast<std::size_t>(t.src)][row];
        switch (t.kind) {
            case Term::Kind::Value: acc += t.coef * (v - t.center); break;
            case Term::Kind::CenteredCode: acc += t.coef * (v - t.half_span); break;
            case Term::Kind::LevelTable:
                acc += t.coef * (*t.table)[static_cast<std::size_t>(v)];
                break;
        }
    }
    return acc;
}

struct ResolvedEffect {
    int treatment;
    int modifier;  // -1 when homogeneous
    double base;
    double step;
    double threshold;
};

inline std::vector<ResolvedEffect> resolve_effects(const ScmSpec& spec,
                                                   const std::vector<TreatmentEffect>& effs) {
    std::vector<ResolvedEffect> out;
    out.reserve(effs.size());
    for (const TreatmentEffect& e : effs) {
        ResolvedEffect re;
        re.treatment = spec.index_of(e.treatment);
        re.modifier = e.step != 0.0 ? spec.index_of(e.modifier) : -1;
        re.base = e.base;
        re.step = e.step;
        re.threshold = e.threshold;
        out.push_back(re);
    }
    return out;
}

// effect size for one row, before multiplying by the treatment value
inline double effect_size(const ResolvedEffect& e,
                          const std::vector<std::vector<double>>& raw, std::size_t row) {
    double v = e.base;
    if (e.modifier >= 0 &&
        raw[static_cast<std::size_t>(e.modifier)][row] > e.threshold) {
        v += e.step;
    }
    return v;
}

inline double eval_effects(const std::vector<ResolvedEffect>& effs,
                           const std::vector<std::vector<double>>& raw, std::size_t row) {
    double acc = 0.0;
    for (const ResolvedEffect& e : effs) {
        acc += effect_size(e, raw, row) * raw[static_cast<std::size_t>(e.treatment)][row];
    }
    return acc;
}

// Ancestral sampling. Noise slots per node: single-draw equations use slot 0;
// the delay outcome uses slot 0 (disruption flag), normal slot 1 (severity)
// and normal slot 2 (early slack), which touch disjoint uniform slots.
inline std::vector<std::vector<double>> sample_raw(const ScmSpec& spec, std::size_t n,
                                                   std::uint64_t seed, int do_index,
                                                   double do_value) {
    std::vector<std::vector<double>> raw(spec.nodes.size());
    for (std::size_t ni = 0; ni < spec.nodes.size(); ++ni) {
        std::vector<double>& out = raw[ni];
        out.resize(n);
        if (static_cast<int>(ni) == do_index) {
            std::fill(out.begin(), out.end(), do_value);
            continue;
        }
        const CounterRng rng(seed, ni);
        const NodeEquation& eq = spec.nodes[ni].equation;
        if (const auto* u = std::get_if<UniformChoiceEq>(&eq)) {
            const double k = static_cast<double>(u->levels.size());
            for (std::size_t r = 0; r < n; ++r) {
                out[r] = std::min(k - 1.0, std::floor(rng.uniform(r, 0) * k));
            }
        } else if (const auto* z = std::get_if<ZipfCategoricalEq>(&eq)) {
            const std::size_t k = z->levels.size();
            std::vector<double> cdf(k);
            double acc = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                acc += std::pow(static_cast<double>(i + 1), -z->exponent);
                cdf[i] = acc;
            }
            for (std::size_t i = 0; i < k; ++i) cdf[i] /= acc;
            const int shift = z->shift_source.empty() ? -1 : spec.index_of(z->shift_source);
            for (std::size_t r = 0; r < n; ++r) {
                std::size_t code = static_cast<std::size_t>(
                    std::lower_bound(cdf.begin(), cdf.end(), rng.uniform(r, 0)) - cdf.begin());
                if (code >= k) code = k - 1;
                if (shift >= 0) {
                    const std::size_t parent = static_cast<std::size_t>(
                        raw[static_cast<std::size_t>(shift)][r]);
                    code = (code + static_cast<std::size_t>(z->shift_stride) * parent) % k;
                }
                out[r] = static_cast<double>(code);
            }
        } else if (const auto* b = std::get_if<BernoulliLogitEq>(&eq)) {
            const auto terms = resolve_terms(spec, b->terms);
            for (std::size_t r = 0; r < n; ++r) {
                const double p = logistic(b->intercept + eval_terms(terms, raw, r));
                out[r] = rng.bernoulli(p, r, 0) ? 1.0 : 0.0;
            }
        } else if (const auto* ur = std::get_if<UniformRealEq>(&eq)) {
            for (std::size_t r = 0; r < n; ++r) {
                out[r] = ur->low + (ur->high - ur->low) * rng.uniform(r, 0);
            }
        } else if (const auto* g = std::get_if<LinearGaussianEq>(&eq)) {
            const auto terms = resolve_terms(spec, g->terms);
            const auto effs = resolve_effects(spec, g->effects);
            for (std::size_t r = 0; r < n; ++r) {
                out[r] = g->intercept + eval_terms(terms, raw, r) +
                         g->sigma * rng.normal(r, 0) + eval_effects(effs, raw, r);
            }
        } else {
            const auto& d = std::get<DelayOutcomeEq>(eq);
            const auto prob = resolve_terms(spec, d.prob_terms);
            const auto sev = resolve_terms(spec, d.sev_terms);
            const auto lin = resolve_terms(spec, d.linear_terms);
            const auto effs = resolve_effects(spec, d.effects);
            for (std::size_t r = 0; r < n; ++r) {
                const double p = logistic(d.prob_intercept + eval_terms(prob, raw, r));
                double y;
                if (rng.bernoulli(p, r, 0)) {
                    y = std::min(std::exp(d.sev_location + eval_terms(sev, raw, r) +
                                          d.sev_sigma * rng.normal(r, 1)),
                                 d.sev_cap);
                } else {
                    y = -(d.early_mean + d.early_sigma * rng.normal(r, 2));
                }
                out[r] = y + eval_terms(lin, raw, r) + eval_effects(effs, raw, r);
            }
        }
    }
    return raw;
}

inline DataTable build_table(const ScmSpec& spec,
                             const std::vector<std::vector<double>>& raw, std::size_t n) {
    std::vector<Column> cols;
    cols.reserve(spec.nodes.size());
    for (std::size_t ni = 0; ni < spec.nodes.size(); ++ni) {
        const ScmNode& node = spec.nodes[ni];
        Column c;
        c.spec.name = node.name;
        c.spec.kind = spec.kind(ni);
        c.spec.role = node.name == spec.outcome ? Role::Outcome
                      : spec.is_treatment(node.name) ? Role::Treatment
                                                     : Role::Covariate;
        c.missing.assign(n, 0);
        if (c.spec.kind == ColumnKind::Categorical) {
            CategoricalStorage s;
            s.levels = *spec.levels(ni);
            s.codes.reserve(n);
            for (std::size_t r = 0; r < n; ++r) {
                s.codes.push_back(static_cast<std::int32_t>(raw[ni][r]));
            }
            c.values = std::move(s);
        } else if (c.spec.kind == ColumnKind::Binary) {
            std::vector<std::int8_t> s;
            s.reserve(n);
            for (std::size_t r = 0; r < n; ++r) {
                s.push_back(static_cast<std::int8_t>(raw[ni][r] != 0.0 ? 1 : 0));
            }
            c.values = std::move(s);
        } else {
            c.values = raw[ni];
        }
        cols.push_back(std::move(c));
    }
    return DataTable(std::move(cols));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Generation API
// ---------------------------------------------------------------------------

// Per-row ground-truth nuisances for one binary treatment: the propensity
// m(X) and the outcome regressions g(0, X), g(1, X) evaluated at the realized
// covariates.
struct TreatmentOracle {
    std::vector<double> g0;
    std::vector<double> g1;
    std::vector<double> m;
};

struct SynthSample {
    DataTable table;
    std::map<std::string, TreatmentOracle> oracle;  // keyed by treatment name
};

inline DataTable generate(const ScmSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw UsageError("generate: n must be at least 1");
    return detail::build_table(spec, detail::sample_raw(spec, n, seed, -1, 0.0), n);
}

// do(treatment = value): the treatment's equation is replaced by the constant
// while every other node keeps its observational noise stream.
inline DataTable generate_do(const ScmSpec& spec, const std::string& treatment, int value,
                             std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw UsageError("generate_do: n must be at least 1");
    if (value != 0 && value != 1) throw UsageError("generate_do: value must be 0 or 1");
    if (!spec.is_treatment(treatment)) {
        throw Error("generate_do: unknown treatment '" + treatment + "'");
    }
    const int ti = spec.index_of(treatment);
    return detail::build_table(
        spec, detail::sample_raw(spec, n, seed, ti, static_cast<double>(value)), n);
}

// Observational draw plus the closed-form nuisance oracle for every treatment.
inline SynthSample generate_full(const ScmSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n < 1) throw UsageError("generate_full: n must be at least 1");
    const auto raw = detail::sample_raw(spec, n, seed, -1, 0.0);
    SynthSample out;
    out.table = detail::build_table(spec, raw, n);

    const std::size_t oi = static_cast<std::size_t>(spec.index_of(spec.outcome));
    const NodeEquation& oeq = spec.nodes[oi].equation;
    const auto& effects = spec.outcome_effects();
    const auto reffs = detail::resolve_effects(spec, effects);

    // conditional outcome mean with every treatment at its realized value,
    // minus the treatment-effect contributions (added back per arm below)
    std::vector<double> base(n, 0.0);
    if (const auto* g = std::get_if<LinearGaussianEq>(&oeq)) {
        const auto terms = detail::resolve_terms(spec, g->terms);
        for (std::size_t r = 0; r < n; ++r) {
            base[r] = g->intercept + detail::eval_terms(terms, raw, r);
        }
    } else {
        const auto& d = std::get<DelayOutcomeEq>(oeq);
        const auto prob = detail::resolve_terms(spec, d.prob_terms);
        const auto sev = detail::resolve_terms(spec, d.sev_terms);
        const auto lin = detail::resolve_terms(spec, d.linear_terms);
        for (std::size_t r = 0; r < n; ++r) {
            const double p = detail::logistic(d.prob_intercept + detail::eval_terms(prob, raw, r));
            const double mu = d.sev_location + detail::eval_terms(sev, raw, r);
            const double sev_mean =
                detail::capped_lognormal_mean(mu, d.sev_sigma, d.sev_cap);
            base[r] = p * sev_mean - (1.0 - p) * d.early_mean +
                      detail::eval_terms(lin, raw, r);
        }
    }

    for (const std::string& tname : spec.treatments) {
        const std::size_t ti = static_cast<std::size_t>(spec.index_of(tname));
        TreatmentOracle oracle;
        oracle.g0.resize(n);
        oracle.g1.resize(n);
        oracle.m.resize(n);
        const auto& beq = std::get<BernoulliLogitEq>(spec.nodes[ti].equation);
        const auto bterms = detail::resolve_terms(spec, beq.terms);
        for (std::size_t r = 0; r < n; ++r) {
            oracle.m[r] = detail::logistic(beq.intercept + detail::eval_terms(bterms, raw, r));
            double others = 0.0;
            double own = 0.0;
            for (const auto& e : reffs) {
                if (static_cast<std::size_t>(e.treatment) == ti) {
                    own = detail::effect_size(e, raw, r);
                } else {
                    others += detail::effect_size(e, raw, r) *
                              raw[static_cast<std::size_t>(e.treatment)][r];
                }
            }
            oracle.g0[r] = base[r] + others;
            oracle.g1[r] = base[r] + others + own;
        }
        out.oracle.emplace(tname, std::move(oracle));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ground-truth effects
// ---------------------------------------------------------------------------

struct TrueEffect {
    double value = 0.0;
    double mc_se = 0.0;  // 0 when exact
    bool exact = true;
};

namespace detail {

inline const TreatmentEffect* find_effect(const ScmSpec& spec, const std::string& treatment) {
    for (const TreatmentEffect& e : spec.outcome_effects()) {
        if (e.treatment == treatment) return &e;
    }
    return nullptr;
}

inline std::vector<double> column_as_doubles(const Column& c) {
    switch (c.spec.kind) {
        case ColumnKind::Numeric: return c.numeric();
        case ColumnKind::Binary: {
            std::vector<double> out;
            out.reserve(c.binary().size());
            for (std::int8_t v : c.binary()) out.push_back(static_cast<double>(v));
            return out;
        }
        case ColumnKind::Categorical: {
            std::vector<double> out;
            out.reserve(c.categorical().codes.size());
            for (std::int32_t v : c.categorical().codes) out.push_back(static_cast<double>(v));
            return out;
        }
        default: throw Error("column '" + c.spec.name + "' has no numeric view");
    }
}

// The additive construction is exact only when the treatment reaches the
// outcome solely through its effect entry.
inline bool effect_is_isolated(const ScmSpec& spec, const std::string& treatment) {
    const std::size_t ti = static_cast<std::size_t>(spec.index_of(treatment));
    const std::size_t oi = static_cast<std::size_t>(spec.index_of(spec.outcome));
    const auto down = spec.descendants(ti);
    for (std::size_t j = 0; j < down.size(); ++j) {
        if (down[j] && j != oi) return false;
    }
    return true;
}

}  // namespace detail

// Exact when the effect is additive-constant (step = 0) and the treatment has
// no mediated path; otherwise the paired Monte-Carlo mean of do(1) - do(0).
inline TrueEffect true_ate(const ScmSpec& spec, const std::string& treatment,
                           std::size_t n_mc = 20000, std::uint64_t seed = 0x0ddca11ULL) {
    spec.validate();
    if (!spec.is_treatment(treatment)) {
        throw Error("true_ate: unknown treatment '" + treatment + "'");
    }
    const TreatmentEffect* eff = detail::find_effect(spec, treatment);
    if (detail::effect_is_isolated(spec, treatment) && (eff == nullptr || eff->step == 0.0)) {
        return TrueEffect{eff == nullptr ? 0.0 : eff->base, 0.0, true};
    }
    if (n_mc < 2) throw UsageError("true_ate: n_mc must be at least 2");
    const DataTable d1 = generate_do(spec, treatment, 1, n_mc, seed);
    const DataTable d0 = generate_do(spec, treatment, 0, n_mc, seed);
    const auto& y1 = d1.column(spec.outcome).numeric();
    const auto& y0 = d0.column(spec.outcome).numeric();
    std::vector<double> diff(n_mc);
    for (std::size_t r = 0; r < n_mc; ++r) diff[r] = y1[r] - y0[r];
    TrueEffect out;
    out.value = mean(diff);
    out.mc_se = std::sqrt(sample_variance(diff) / static_cast<double>(n_mc));
    out.exact = false;
    return out;
}

struct TrueCateCurve {
    std::vector<double> grid;
    std::vector<double> value;
    std::vector<double> mc_se;  // zeros when exact
};

// CATE over one upstream covariate. Analytic when the covariate is the
// declared effect modifier (or the effect is homogeneous); otherwise paired
// Monte-Carlo differences binned to the nearest grid point.
inline TrueCateCurve true_cate(const ScmSpec& spec, const std::string& treatment,
                               const std::string& covariate, const std::vector<double>& grid,
                               std::size_t n_mc = 20000, std::uint64_t seed = 0x0ddca11ULL) {
    spec.validate();
    if (grid.empty()) throw UsageError("true_cate: empty grid");
    if (!spec.is_treatment(treatment)) {
        throw Error("true_cate: unknown treatment '" + treatment + "'");
    }
    const int ci = spec.index_of(covariate);
    if (ci < 0) throw Error("true_cate: unknown covariate '" + covariate + "'");
    const std::size_t ti = static_cast<std::size_t>(spec.index_of(treatment));
    if (spec.descendants(ti)[static_cast<std::size_t>(ci)]) {
        throw Error("true_cate: covariate '" + covariate + "' is downstream of treatment '" +
                    treatment + "'");
    }
    TrueCateCurve out;
    out.grid = grid;
    out.value.assign(grid.size(), 0.0);
    out.mc_se.assign(grid.size(), 0.0);

    const TreatmentEffect* eff = detail::find_effect(spec, treatment);
    if (detail::effect_is_isolated(spec, treatment)) {
        if (eff == nullptr || eff->step == 0.0) {
            const double v = eff == nullptr ? 0.0 : eff->base;
            std::fill(out.value.begin(), out.value.end(), v);
            return out;
        }
        if (eff->modifier == covariate) {
            for (std::size_t g = 0; g < grid.size(); ++g) {
                out.value[g] = eff->base + (grid[g] > eff->threshold ? eff->step : 0.0);
            }
            return out;
        }
    }

    // conditional Monte-Carlo: paired differences, nearest-grid-point bins
    if (n_mc < 2) throw UsageError("true_cate: n_mc must be at least 2");
    const DataTable d1 = generate_do(spec, treatment, 1, n_mc, seed);
    const DataTable d0 = generate_do(spec, treatment, 0, n_mc, seed);
    const auto& y1 = d1.column(spec.outcome).numeric();
    const auto& y0 = d0.column(spec.outcome).numeric();
    const std::vector<double> cov = detail::column_as_doubles(d0.column(covariate));
    std::vector<std::vector<double>> bins(grid.size());
    for (std::size_t r = 0; r < n_mc; ++r) {
        std::size_t best = 0;
        double best_dist = std::fabs(cov[r] - grid[0]);
        for (std::size_t g = 1; g < grid.size(); ++g) {
            const double dist = std::fabs(cov[r] - grid[g]);
            if (dist < best_dist) {
                best = g;
                best_dist = dist;
            }
        }
        bins[best].push_back(y1[r] - y0[r]);
    }
    for (std::size_t g = 0; g < grid.size(); ++g) {
        if (bins[g].size() < 2) {
            throw Error(strfmt("true_cate: no Monte-Carlo mass near grid point %g", grid[g]));
        }
        out.value[g] = mean(bins[g]);
        out.mc_se[g] =
            std::sqrt(sample_variance(bins[g]) / static_cast<double>(bins[g].size()));
    }
    return out;
}

// Expected outcome shift of each level of a categorical node, relative to the
// node's channel contribution being zeroed, counting only additive paths:
// direct coded terms on the outcome and two-hop routes through linear-gaussian
// mediators. Non-additive channels (disruption logit, severity) are not
// covered by this oracle.
inline std::vector<double> additive_channel_effects(const ScmSpec& spec,
                                                    const std::string& node_name) {
    spec.validate();
    const int ni = spec.index_of(node_name);
    if (ni < 0) throw Error("additive_channel_effects: unknown node '" + node_name + "'");
    const auto* levels = spec.levels(static_cast<std::size_t>(ni));
    if (levels == nullptr) {
        throw Error("additive_channel_effects: node '" + node_name + "' is not categorical");
    }
    const std::size_t k = levels->size();
    std::vector<double> shift(k, 0.0);
    auto coded_value = [&](const Term& t, std::size_t level) {
        if (t.kind == Term::Kind::LevelTable) return t.table[level];
        if (t.kind == Term::Kind::CenteredCode) {
            return static_cast<double>(level) - (static_cast<double>(k) - 1.0) / 2.0;
        }
        return 0.0;
    };
    const std::size_t oi = static_cast<std::size_t>(spec.index_of(spec.outcome));
    const NodeEquation& oeq = spec.nodes[oi].equation;
    const std::vector<Term>* linear = nullptr;
    if (const auto* g = std::get_if<LinearGaussianEq>(&oeq)) linear = &g->terms;
    if (const auto* d = std::get_if<DelayOutcomeEq>(&oeq)) linear = &d->linear_terms;
    if (linear == nullptr) return shift;
    for (const Term& L : *linear) {
        if (L.source == node_name) {
            for (std::size_t l = 0; l < k; ++l) shift[l] += L.coef * coded_value(L, l);
            continue;
        }
        const int mi = spec.index_of(L.source);
        if (mi < 0) continue;
        if (const auto* mg = std::get_if<LinearGaussianEq>(&spec.nodes[mi].equation)) {
            for (const Term& T : mg->terms) {
                if (T.source != node_name) continue;
                for (std::size_t l = 0; l < k; ++l) {
                    shift[l] += L.coef * T.coef * coded_value(T, l);
                }
            }
        }
    }
    return shift;
}

// Snapshot of every configured ground-truth effect, for the oracle file that
// accompanies a simulated dataset.
struct OracleEffects {
    struct TreatmentEntry {
        std::string treatment;
        TrueEffect ate;
        TreatmentEffect shape;  // additive form: base/step/modifier/threshold
    };
    std::vector<TreatmentEntry> treatments;
    std::string channel_node;  // empty when no additive channel exists
    std::vector<std::string> channel_levels;
    std::vector<double> channel_shift;
};

inline OracleEffects oracle_effects(const ScmSpec& spec, std::size_t n_mc = 20000,
                                    std::uint64_t seed = 0x0ddca11ULL) {
    spec.validate();
    OracleEffects out;
    for (const std::string& t : spec.treatments) {
        OracleEffects::TreatmentEntry entry;
        entry.treatment = t;
        entry.ate = true_ate(spec, t, n_mc, seed);
        const TreatmentEffect* eff = detail::find_effect(spec, t);
        entry.shape = eff != nullptr ? *eff : TreatmentEffect{t, 0.0, 0.0, "", 0.0};
        out.treatments.push_back(std::move(entry));
    }
    for (std::size_t ni = 0; ni < spec.nodes.size(); ++ni) {
        if (spec.kind(ni) != ColumnKind::Categorical) continue;
        if (spec.is_treatment(spec.nodes[ni].name)) continue;
        const auto shift = additive_channel_effects(spec, spec.nodes[ni].name);
        bool any = false;
        for (double v : shift) {
            if (v != 0.0) any = true;
        }
        if (any) {
            out.channel_node = spec.nodes[ni].name;
            out.channel_levels = *spec.levels(ni);
            out.channel_shift = shift;
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

// Defaults are calibrated against the marginal targets for order data: at
// n = 20000 the delayed rate lands near 0.55, the mean delay of delayed
// orders near 120 days, and the delay column is heavy-tailed (std > 1.1x the
// mean among delayed orders and overall). Supplier quality confounds the
// sourcing flag with the outcome through the disruption rate and severity,
// so the naive group-mean gap overshoots the true effect by ~25 days at the
// default strength.
struct MaritimeParams {
    int n_suppliers = 40;
    int n_parts = 60;
    int n_projects = 16;
    double multi_effect = 15.0;  // additive days; the exact ATE when het_step = 0
    double het_step = 0.0;       // extra days when Quantity exceeds het_threshold
    double het_threshold = 5.82;
    double confounding = 1.0;    // scales supplier quality -> {Multi, Delay}
    // per-quarter expected delay shift (days) routed through Quantity and
    // Price; realized exactly as additive channel effects
    std::array<double, 4> quarter_effects = {-6.0, 8.0, 10.0, -19.0};
    double quantity_share = 0.25;  // slice of each quarter effect sent via Quantity
};

namespace detail {

inline std::vector<std::string> make_levels(const std::string& prefix, int count) {
    const int width = static_cast<int>(std::to_string(count).size());
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i) {
        std::string digits = std::to_string(i);
        std::string name = prefix;
        for (int pad = width - static_cast<int>(digits.size()); pad > 0; --pad) {
            name += '0';
        }
        out.push_back(name + digits);
    }
    return out;
}

// deterministic per-level jitter in [-half_width, half_width]
inline std::vector<double> level_jitter(std::size_t k, double half_width,
                                        std::uint64_t salt) {
    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        std::uint64_t s = mix_u64(salt, i);
        const double u = static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53;
        out[i] = (2.0 * u - 1.0) * half_width;
    }
    return out;
}

}  // namespace detail

inline ScmSpec default_maritime_scm(const MaritimeParams& params = {}) {
    if (params.n_suppliers < 2 || params.n_parts < 2 || params.n_projects < 2) {
        throw UsageError("default_maritime_scm: cardinalities must be at least 2");
    }
    const std::size_t ns = static_cast<std::size_t>(params.n_suppliers);
    // The first fifth of suppliers (the high-volume ones under the rank-
    // frequency draw) are reliable (-1), the long tail is fragile (+1);
    // quality drives both the sourcing choice and the delay channels.
    std::vector<double> quality(ns, 1.0);
    const std::size_t n_big = std::max<std::size_t>(1, ns / 5);
    for (std::size_t s = 0; s < n_big; ++s) quality[s] = -1.0;

    const double kQuantityDays = 1.5;  // delay days per quantity unit
    const double kPriceDays = 0.02;    // delay days per price unit
    std::vector<double> season_quantity(4), season_price(4);
    for (std::size_t q = 0; q < 4; ++q) {
        season_quantity[q] = params.quarter_effects[q] * params.quantity_share / kQuantityDays;
        season_price[q] = params.quarter_effects[q] * (1.0 - params.quantity_share) / kPriceDays;
    }

    ScmSpec spec;
    spec.outcome = "Delay";
    spec.treatments = {"Multi"};

    spec.nodes.push_back({"Season", UniformChoiceEq{{"Q1", "Q2", "Q3", "Q4"}}});
    spec.nodes.push_back(
        {"Supplier", ZipfCategoricalEq{detail::make_levels("S", params.n_suppliers), 1.1, "", 0}});
    spec.nodes.push_back(
        {"Multi", BernoulliLogitEq{0.5,
                                   {Term{Term::Kind::LevelTable, "Supplier",
                                         1.0 * params.confounding, 0.0, quality}}}});
    spec.nodes.push_back({"Part", ZipfCategoricalEq{detail::make_levels("P", params.n_parts),
                                                    0.9, "Supplier", 7}});
    spec.nodes.push_back({"Project", ZipfCategoricalEq{
                                         detail::make_levels("J", params.n_projects), 0.7,
                                         "Supplier", 5}});
    spec.nodes.push_back(
        {"Quantity",
         LinearGaussianEq{6.0,
                          {Term{Term::Kind::LevelTable, "Season", 1.0, 0.0, season_quantity},
                           Term{Term::Kind::LevelTable, "Supplier", -0.3, 0.0, quality}},
                          1.2,
                          {}}});
    spec.nodes.push_back(
        {"Price",
         LinearGaussianEq{2800.0,
                          {Term{Term::Kind::LevelTable, "Season", 1.0, 0.0, season_price},
                           Term{Term::Kind::LevelTable, "Supplier", 120.0, 0.0, quality}},
                          300.0,
                          {}}});

    DelayOutcomeEq delay;
    delay.prob_intercept = 0.30;
    delay.prob_terms = {
        Term{Term::Kind::LevelTable, "Supplier", 0.42 * params.confounding, 0.0, quality},
        Term{Term::Kind::LevelTable, "Part", 1.0, 0.0,
             detail::level_jitter(static_cast<std::size_t>(params.n_parts), 0.18,
                                  0x9a57UL)},
        Term{Term::Kind::LevelTable, "Project", 1.0, 0.0,
             detail::level_jitter(static_cast<std::size_t>(params.n_projects), 0.12,
                                  0x6e31UL)}};
    delay.sev_location = 4.22;
    delay.sev_terms = {
        Term{Term::Kind::LevelTable, "Supplier", 0.22 * params.confounding, 0.0, quality}};
    delay.sev_sigma = 1.05;
    delay.sev_cap = 1095.0;  // three years; bounds the extreme tail
    delay.early_mean = 38.0;
    delay.early_sigma = 8.0;
    delay.linear_terms = {Term{Term::Kind::Value, "Quantity", kQuantityDays, 5.82, {}},
                          Term{Term::Kind::Value, "Price", kPriceDays, 2690.0, {}}};
    delay.effects = {TreatmentEffect{"Multi", params.multi_effect, params.het_step, "Quantity",
                                     params.het_threshold}};
    spec.nodes.push_back({"Delay", std::move(delay)});

    spec.validate();
    return spec;
}

// Small benchmark generator with a known conditional effect: the treatment
// adds base + step * 1(modifier > threshold) days on a Gaussian outcome, with
// mild confounding through Quantity and Flag. Used to exercise CATE and
// policy recovery against an exact truth.
struct BenchmarkParams {
    double effect_base = 5.0;
    double effect_step = 10.0;
    std::string modifier = "Quantity";
    double threshold = 0.5;
    double noise_sd = 10.0;
    double confounding = 0.8;  // Quantity -> Multi logit slope
};

inline ScmSpec quantity_benchmark_scm(const BenchmarkParams& params = {}) {
    ScmSpec spec;
    spec.outcome = "Delay";
    spec.treatments = {"Multi"};
    spec.nodes.push_back({"Quantity", UniformRealEq{0.0, 1.0}});
    spec.nodes.push_back({"Flag", BernoulliLogitEq{0.0, {}}});
    spec.nodes.push_back({"Distance", LinearGaussianEq{8.0, {}, 2.0, {}}});
    spec.nodes.push_back(
        {"Multi",
         BernoulliLogitEq{0.0,
                          {Term{Term::Kind::Value, "Quantity", params.confounding, 0.5, {}},
                           Term{Term::Kind::Value, "Flag", 0.3, 0.5, {}}}}});
    LinearGaussianEq delay;
    delay.intercept = 25.0;
    delay.terms = {Term{Term::Kind::Value, "Quantity", 6.0, 0.5, {}},
                   Term{Term::Kind::Value, "Distance", 1.5, 8.0, {}}};
    delay.sigma = params.noise_sd;
    delay.effects = {TreatmentEffect{"Multi", params.effect_base, params.effect_step,
                                     params.modifier, params.threshold}};
    spec.nodes.push_back({"Delay", std::move(delay)});
    spec.validate();
    return spec;
}

// Named presets for the run configuration.
inline ScmSpec scm_preset(const std::string& name) {
    if (name == "maritime") return default_maritime_scm();
    if (name == "quantity_cate") return quantity_benchmark_scm();
    if (name == "homogeneous") {
        BenchmarkParams p;
        p.effect_base = 10.0;
        p.effect_step = 0.0;
        p.modifier = "";
        return quantity_benchmark_scm(p);
    }
    if (name == "sign_flip") {
        BenchmarkParams p;
        p.effect_base = -8.0;
        p.effect_step = 16.0;
        p.modifier = "Flag";
        p.threshold = 0.5;
        return quantity_benchmark_scm(p);
    }
    throw UsageError("unknown generator preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const Term& t) {
    nlohmann::json j;
    switch (t.kind) {
        case Term::Kind::Value: j["transform"] = "value"; break;
        case Term::Kind::CenteredCode: j["transform"] = "centered_code"; break;
        case Term::Kind::LevelTable: j["transform"] = "level_table"; break;
    }
    j["source"] = t.source;
    j["coef"] = t.coef;
    if (t.kind == Term::Kind::Value) j["center"] = t.center;
    if (t.kind == Term::Kind::LevelTable) j["table"] = t.table;
    return j;
}

inline nlohmann::json to_json(const TreatmentEffect& e) {
    nlohmann::json j;
    j["treatment"] = e.treatment;
    j["base"] = e.base;
    j["step"] = e.step;
    if (e.step != 0.0) {
        j["modifier"] = e.modifier;
        j["threshold"] = e.threshold;
    }
    return j;
}

namespace detail {

inline nlohmann::json terms_json(const std::vector<Term>& terms) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Term& t : terms) arr.push_back(to_json(t));
    return arr;
}

inline nlohmann::json effects_json(const std::vector<TreatmentEffect>& effs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const TreatmentEffect& e : effs) arr.push_back(to_json(e));
    return arr;
}

}  // namespace detail

inline nlohmann::json to_json(const ScmSpec& spec) {
    nlohmann::json j;
    j["outcome"] = spec.outcome;
    j["treatments"] = spec.treatments;
    nlohmann::json nodes = nlohmann::json::array();
    for (const ScmNode& node : spec.nodes) {
        nlohmann::json e;
        e["name"] = node.name;
        if (const auto* u = std::get_if<UniformChoiceEq>(&node.equation)) {
            e["equation"] = "uniform_choice";
            e["levels"] = u->levels;
        } else if (const auto* z = std::get_if<ZipfCategoricalEq>(&node.equation)) {
            e["equation"] = "zipf_categorical";
            e["levels"] = z->levels;
            e["exponent"] = z->exponent;
            if (!z->shift_source.empty()) {
                e["shift_source"] = z->shift_source;
                e["shift_stride"] = z->shift_stride;
            }
        } else if (const auto* b = std::get_if<BernoulliLogitEq>(&node.equation)) {
            e["equation"] = "bernoulli_logit";
            e["intercept"] = b->intercept;
            e["terms"] = detail::terms_json(b->terms);
        } else if (const auto* r = std::get_if<UniformRealEq>(&node.equation)) {
            e["equation"] = "uniform_real";
            e["low"] = r->low;
            e["high"] = r->high;
        } else if (const auto* g = std::get_if<LinearGaussianEq>(&node.equation)) {
            e["equation"] = "linear_gaussian";
            e["intercept"] = g->intercept;
            e["terms"] = detail::terms_json(g->terms);
            e["sigma"] = g->sigma;
            if (!g->effects.empty()) e["effects"] = detail::effects_json(g->effects);
        } else {
            const auto& d = std::get<DelayOutcomeEq>(node.equation);
            e["equation"] = "delay_outcome";
            e["prob_intercept"] = d.prob_intercept;
            e["prob_terms"] = detail::terms_json(d.prob_terms);
            e["sev_location"] = d.sev_location;
            e["sev_terms"] = detail::terms_json(d.sev_terms);
            e["sev_sigma"] = d.sev_sigma;
            if (std::isfinite(d.sev_cap)) e["sev_cap"] = d.sev_cap;
            e["early_mean"] = d.early_mean;
            e["early_sigma"] = d.early_sigma;
            e["linear_terms"] = detail::terms_json(d.linear_terms);
            if (!d.effects.empty()) e["effects"] = detail::effects_json(d.effects);
        }
        nodes.push_back(std::move(e));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

inline nlohmann::json to_json(const OracleEffects& oracle) {
    nlohmann::json j;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& entry : oracle.treatments) {
        nlohmann::json e;
        e["treatment"] = entry.treatment;
        e["ate"] = entry.ate.value;
        e["exact"] = entry.ate.exact;
        if (!entry.ate.exact) e["mc_se"] = entry.ate.mc_se;
        e["effect"] = to_json(entry.shape);
        arr.push_back(std::move(e));
    }
    j["treatments"] = std::move(arr);
    if (!oracle.channel_node.empty()) {
        nlohmann::json ch;
        ch["node"] = oracle.channel_node;
        ch["definition"] = "expected outcome shift per level vs zeroed channel";
        nlohmann::json shift;
        for (std::size_t i = 0; i < oracle.channel_levels.size(); ++i) {
            shift[oracle.channel_levels[i]] = oracle.channel_shift[i];
        }
        ch["shift"] = std::move(shift);
        j["channel"] = std::move(ch);
    }
    return j;
}

}  // namespace causalkit
