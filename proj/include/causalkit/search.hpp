#pragma once

// Score-based structure search: greedy hill climbing on strictly-improving
// best neighbors, and tabu search with a bounded move memory, aspiration by
// global best, and a non-improvement patience stop.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "causalkit/common.hpp"
#include "causalkit/graph.hpp"
#include "causalkit/score.hpp"

namespace causalkit {

// All single-edge additions, removals, and reversals that keep the graph
// acyclic and within the parent bound, in deterministic (kind, i, j) order.
inline std::vector<Move> neighbors(const Dag& dag, int max_parents = kDefaultMaxParents) {
    std::vector<Move> moves;
    const int n = static_cast<int>(dag.n_nodes());
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j || dag.has_edge(i, j) || dag.has_edge(j, i)) continue;
            if (dag.parent_count(j) >= max_parents) continue;
            if (dag.would_cycle(i, j)) continue;
            moves.push_back(Move{MoveKind::Add, i, j});
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (dag.has_edge(i, j)) moves.push_back(Move{MoveKind::Remove, i, j});
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (!dag.has_edge(i, j)) continue;
            if (dag.parent_count(i) >= max_parents) continue;
            // reversal is valid iff no other directed path i ~> j survives
            Dag probe = dag;
            probe.remove_edge(i, j);
            if (probe.would_cycle(j, i)) continue;
            moves.push_back(Move{MoveKind::Reverse, i, j});
        }
    }
    return moves;
}

namespace detail {

// score change from applying `m` to `dag`: only the families of the affected
// children change (decomposability)
inline double move_delta(FamilyScoreCache* cache, const Dag& dag, const Move& m) {
    const auto family_with = [&](int child, int add_parent, int drop_parent) {
        std::vector<int> parents = dag.parents(child);
        if (drop_parent >= 0) {
            parents.erase(std::remove(parents.begin(), parents.end(), drop_parent),
                          parents.end());
        }
        if (add_parent >= 0) {
            parents.insert(std::lower_bound(parents.begin(), parents.end(), add_parent),
                           add_parent);
        }
        return cache->family(child, parents);
    };
    switch (m.kind) {
        case MoveKind::Add:
            return family_with(m.to, m.from, -1) - cache->family(m.to, dag.parents(m.to));
        case MoveKind::Remove:
            return family_with(m.to, -1, m.from) - cache->family(m.to, dag.parents(m.to));
        case MoveKind::Reverse:
            return family_with(m.to, -1, m.from) + family_with(m.from, m.to, -1) -
                   cache->family(m.to, dag.parents(m.to)) -
                   cache->family(m.from, dag.parents(m.from));
    }
    return 0.0;
}

}  // namespace detail

struct SearchResult {
    Dag dag;
    double score = 0.0;
    std::vector<double> trajectory;  // score after init and after each accepted move
    std::size_t iterations = 0;
};

// Best strictly-improving neighbor, repeated until a local maximum (or the
// iteration budget). The returned trajectory is strictly increasing.
inline SearchResult hill_climb(const DiscreteData& data, const Dag& init, ScoreKind kind,
                               std::size_t max_iter = 1000,
                               int max_parents = kDefaultMaxParents) {
    FamilyScoreCache cache(data, kind, max_parents);
    SearchResult result;
    result.dag = init;
    result.score = cache.total(init);
    result.trajectory.push_back(result.score);

    constexpr double kImprove = 1e-9;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        const std::vector<Move> moves = neighbors(result.dag, max_parents);
        double best_delta = kImprove;
        int best = -1;
        for (std::size_t m = 0; m < moves.size(); ++m) {
            const double delta = detail::move_delta(&cache, result.dag, moves[m]);
            if (delta > best_delta) {
                best_delta = delta;
                best = static_cast<int>(m);
            }
        }
        if (best < 0) break;  // local maximum
        apply_move(&result.dag, moves[static_cast<std::size_t>(best)]);
        result.score += best_delta;
        result.trajectory.push_back(result.score);
        result.iterations = iter + 1;
    }
    return result;
}

struct TabuOptions {
    std::size_t capacity = 50;   // recent-move memory
    std::size_t patience = 20;   // stop after this many non-improving steps
    std::size_t max_iter = 500;
};

// Best-neighbor steps (possibly downhill) where undoing a recent move is
// forbidden unless the result would beat the best score seen so far
// (aspiration). Returns the best graph encountered.
inline SearchResult tabu_search(const DiscreteData& data, const Dag& init,
                                ScoreKind kind = ScoreKind::Bic,
                                const TabuOptions& options = TabuOptions{},
                                int max_parents = kDefaultMaxParents) {
    FamilyScoreCache cache(data, kind, max_parents);
    Dag current = init;
    double current_score = cache.total(current);

    SearchResult best;
    best.dag = current;
    best.score = current_score;
    best.trajectory.push_back(current_score);

    std::deque<Move> tabu;
    const auto is_tabu = [&](const Move& m) {
        const Move inv = m.inverse();
        for (const Move& t : tabu) {
            if (m == t || inv == t) return true;
        }
        return false;
    };

    std::size_t stale = 0;
    for (std::size_t iter = 0; iter < options.max_iter && stale < options.patience; ++iter) {
        const std::vector<Move> moves = neighbors(current, max_parents);
        int pick = -1;
        double pick_score = 0.0;
        for (std::size_t m = 0; m < moves.size(); ++m) {
            const double cand = current_score + detail::move_delta(&cache, current, moves[m]);
            const bool aspiration = cand > best.score + 1e-9;
            if (is_tabu(moves[m]) && !aspiration) continue;
            if (pick < 0 || cand > pick_score) {
                pick = static_cast<int>(m);
                pick_score = cand;
            }
        }
        if (pick < 0) break;  // every neighbor is tabu and none aspires

        const Move chosen = moves[static_cast<std::size_t>(pick)];
        apply_move(&current, chosen);
        current_score = pick_score;
        tabu.push_back(chosen);
        while (tabu.size() > options.capacity) tabu.pop_front();

        best.trajectory.push_back(current_score);
        if (current_score > best.score + 1e-9) {
            best.dag = current;
            best.score = current_score;
            stale = 0;
        } else {
            ++stale;
        }
        best.iterations = iter + 1;
    }
    return best;
}

// Initial graph with the named treatment -> outcome edges pre-seeded.
inline Dag seeded_init(const std::vector<std::string>& names,
                       const std::vector<std::string>& treatments, const std::string& outcome) {
    Dag dag(names);
    const int y = dag.index_of(outcome);
    for (const auto& t : treatments) {
        dag.add_edge(dag.index_of(t), y);
    }
    return dag;
}

}  // namespace causalkit
