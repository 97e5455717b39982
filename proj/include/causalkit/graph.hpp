#pragma once

// Directed and partially-directed graphs over named variables, the move
// vocabulary for score-based search, and deterministic DOT / JSON exports.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "causalkit/common.hpp"

namespace causalkit {

class Dag {
  public:
    Dag() = default;
    explicit Dag(std::vector<std::string> names) : names_(std::move(names)) {
        adj_.assign(names_.size(), std::vector<char>(names_.size(), 0));
    }

    std::size_t n_nodes() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (names_[i] == name) return static_cast<int>(i);
        }
        throw Error("no such node: '" + name + "'");
    }

    bool has_edge(int i, int j) const {
        return adj_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0;
    }

    // true if a directed path j ~> i exists, i.e. adding i->j would close a cycle
    bool would_cycle(int i, int j) const { return reaches(j, i); }

    void add_edge(int i, int j) {
        check_pair(i, j);
        if (has_edge(i, j)) throw Error("add_edge: edge already present");
        if (would_cycle(i, j)) {
            throw Error("add_edge: " + names_[static_cast<std::size_t>(i)] + " -> " +
                        names_[static_cast<std::size_t>(j)] + " would create a cycle");
        }
        adj_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
    }

    void remove_edge(int i, int j) {
        check_pair(i, j);
        if (!has_edge(i, j)) throw Error("remove_edge: no such edge");
        adj_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 0;
    }

    void reverse_edge(int i, int j) {
        remove_edge(i, j);
        if (would_cycle(j, i)) {
            adj_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;  // restore
            throw Error("reverse_edge: reversal would create a cycle");
        }
        adj_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
    }

    std::vector<int> parents(int j) const {
        std::vector<int> out;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (adj_[i][static_cast<std::size_t>(j)]) out.push_back(static_cast<int>(i));
        }
        return out;
    }

    int parent_count(int j) const {
        int c = 0;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            c += adj_[i][static_cast<std::size_t>(j)];
        }
        return c;
    }

    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            for (std::size_t j = 0; j < names_.size(); ++j) {
                if (adj_[i][j]) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
        return out;
    }

    std::size_t n_edges() const { return edges().size(); }

    bool operator==(const Dag& other) const {
        return names_ == other.names_ && adj_ == other.adj_;
    }

  private:
    void check_pair(int i, int j) const {
        if (i < 0 || j < 0 || i >= static_cast<int>(names_.size()) ||
            j >= static_cast<int>(names_.size())) {
            throw Error("edge endpoint out of range");
        }
        if (i == j) throw Error("self-loops are not allowed");
    }

    bool reaches(int from, int to) const {
        if (from == to) return true;
        std::vector<char> seen(names_.size(), 0);
        std::vector<int> stack = {from};
        seen[static_cast<std::size_t>(from)] = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (std::size_t v = 0; v < names_.size(); ++v) {
                if (!adj_[static_cast<std::size_t>(u)][v] || seen[v]) continue;
                if (static_cast<int>(v) == to) return true;
                seen[v] = 1;
                stack.push_back(static_cast<int>(v));
            }
        }
        return false;
    }

    std::vector<std::string> names_;
    std::vector<std::vector<char>> adj_;
};

// ---------------------------------------------------------------------------
// Moves
// ---------------------------------------------------------------------------

enum class MoveKind { Add, Remove, Reverse };

struct Move {
    MoveKind kind = MoveKind::Add;
    int from = 0;
    int to = 0;

    bool operator==(const Move&) const = default;

    // the move that undoes this one
    Move inverse() const {
        switch (kind) {
            case MoveKind::Add:
                return Move{MoveKind::Remove, from, to};
            case MoveKind::Remove:
                return Move{MoveKind::Add, from, to};
            case MoveKind::Reverse:
                return Move{MoveKind::Reverse, to, from};
        }
        return *this;
    }
};

inline void apply_move(Dag* dag, const Move& m) {
    switch (m.kind) {
        case MoveKind::Add:
            dag->add_edge(m.from, m.to);
            return;
        case MoveKind::Remove:
            dag->remove_edge(m.from, m.to);
            return;
        case MoveKind::Reverse:
            dag->reverse_edge(m.from, m.to);
            return;
    }
}

// ---------------------------------------------------------------------------
// Partially directed graphs (constraint-based discovery output)
// ---------------------------------------------------------------------------

class Pdag {
  public:
    Pdag() = default;
    explicit Pdag(std::vector<std::string> names) : names_(std::move(names)) {
        directed_.assign(names_.size(), std::vector<char>(names_.size(), 0));
        undirected_.assign(names_.size(), std::vector<char>(names_.size(), 0));
    }

    std::size_t n_nodes() const { return names_.size(); }
    const std::vector<std::string>& names() const { return names_; }

    bool has_directed(int i, int j) const {
        return directed_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0;
    }
    bool has_undirected(int i, int j) const {
        return undirected_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != 0;
    }
    bool adjacent(int i, int j) const {
        return has_directed(i, j) || has_directed(j, i) || has_undirected(i, j);
    }

    void add_undirected(int i, int j) {
        if (i == j) throw Error("self-loops are not allowed");
        if (adjacent(i, j)) throw Error("add_undirected: nodes already adjacent");
        undirected_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
        undirected_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
    }

    // replace the undirected edge i-j by i->j
    void orient(int i, int j) {
        if (!has_undirected(i, j)) throw Error("orient: no undirected edge to orient");
        undirected_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 0;
        undirected_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 0;
        directed_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
        if (directed_cycle()) {
            directed_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 0;
            undirected_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
            undirected_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
            throw Error("orient: would create a directed cycle");
        }
    }

    // drop the orientation of i->j back to an undirected edge
    void unorient(int i, int j) {
        if (!has_directed(i, j)) throw Error("unorient: no directed edge");
        directed_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 0;
        undirected_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
        undirected_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
    }

    std::vector<std::pair<int, int>> directed_edges() const {
        std::vector<std::pair<int, int>> out;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            for (std::size_t j = 0; j < names_.size(); ++j) {
                if (directed_[i][j]) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
        return out;
    }

    std::vector<std::pair<int, int>> undirected_edges() const {
        std::vector<std::pair<int, int>> out;
        for (std::size_t i = 0; i < names_.size(); ++i) {
            for (std::size_t j = i + 1; j < names_.size(); ++j) {
                if (undirected_[i][j]) out.emplace_back(static_cast<int>(i), static_cast<int>(j));
            }
        }
        return out;
    }

    bool directed_cycle() const {
        // Kahn's algorithm over the directed part
        const std::size_t n = names_.size();
        std::vector<int> indeg(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) indeg[j] += directed_[i][j];
        }
        std::vector<int> queue;
        for (std::size_t j = 0; j < n; ++j) {
            if (indeg[j] == 0) queue.push_back(static_cast<int>(j));
        }
        std::size_t seen = 0;
        while (!queue.empty()) {
            const int u = queue.back();
            queue.pop_back();
            ++seen;
            for (std::size_t v = 0; v < n; ++v) {
                if (directed_[static_cast<std::size_t>(u)][v] && --indeg[v] == 0) {
                    queue.push_back(static_cast<int>(v));
                }
            }
        }
        return seen != n;
    }

  private:
    std::vector<std::string> names_;
    std::vector<std::vector<char>> directed_;
    std::vector<std::vector<char>> undirected_;
};

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

namespace detail {

inline std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        out += ch;
    }
    out += '"';
    return out;
}

// node order: lexicographic by name; edge order: lexicographic by names
inline std::vector<std::size_t> name_order(const std::vector<std::string>& names) {
    std::vector<std::size_t> order(names.size());
    for (std::size_t i = 0; i < names.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });
    return order;
}

inline std::string export_dot_impl(const std::vector<std::string>& names,
                                   std::vector<std::pair<int, int>> directed,
                                   std::vector<std::pair<int, int>> undirected,
                                   const std::string& graph_name) {
    const auto by_name = [&](const std::pair<int, int>& a, const std::pair<int, int>& b) {
        const auto& an1 = names[static_cast<std::size_t>(a.first)];
        const auto& bn1 = names[static_cast<std::size_t>(b.first)];
        if (an1 != bn1) return an1 < bn1;
        return names[static_cast<std::size_t>(a.second)] < names[static_cast<std::size_t>(b.second)];
    };
    std::sort(directed.begin(), directed.end(), by_name);
    std::sort(undirected.begin(), undirected.end(), by_name);

    std::string out = "digraph " + graph_name + " {\n";
    for (std::size_t i : name_order(names)) {
        out += "  " + dot_quote(names[i]) + ";\n";
    }
    for (const auto& [i, j] : directed) {
        out += "  " + dot_quote(names[static_cast<std::size_t>(i)]) + " -> " +
               dot_quote(names[static_cast<std::size_t>(j)]) + ";\n";
    }
    for (const auto& [i, j] : undirected) {
        out += "  " + dot_quote(names[static_cast<std::size_t>(i)]) + " -> " +
               dot_quote(names[static_cast<std::size_t>(j)]) + " [dir=none];\n";
    }
    out += "}\n";
    return out;
}

}  // namespace detail

inline std::string export_dot(const Dag& dag, const std::string& graph_name = "dag") {
    return detail::export_dot_impl(dag.names(), dag.edges(), {}, graph_name);
}

inline std::string export_dot(const Pdag& pdag, const std::string& graph_name = "cpdag") {
    return detail::export_dot_impl(pdag.names(), pdag.directed_edges(), pdag.undirected_edges(),
                                   graph_name);
}

}  // namespace causalkit
