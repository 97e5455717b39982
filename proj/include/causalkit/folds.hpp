#pragma once

// Fold plans for cross-fitting and cross-validation: uniform random
// partitions with near-equal sizes, deterministic per seed, with an optional
// stratified variant that balances a binary label across folds so every
// training split contains both classes.

#include <cstdint>
#include <vector>

#include "causalkit/common.hpp"

namespace causalkit {

struct FoldPlan {
    std::size_t n_rows = 0;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<int> assignment;  // row -> fold index in [0, k)

    std::vector<std::size_t> test_rows(int fold) const {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < assignment.size(); ++r) {
            if (assignment[r] == fold) rows.push_back(r);
        }
        return rows;
    }

    std::vector<std::size_t> train_rows(int fold) const {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < assignment.size(); ++r) {
            if (assignment[r] != fold) rows.push_back(r);
        }
        return rows;
    }
};

// Shuffles row indices and cuts contiguous blocks; the first n%k folds take
// the extra row, so sizes differ by at most one.
inline FoldPlan make_folds(std::size_t n_rows, std::size_t k, std::uint64_t seed) {
    if (k < 2) throw UsageError("make_folds: k must be at least 2");
    if (k > n_rows) throw UsageError("make_folds: k exceeds row count");

    std::vector<std::size_t> order(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    FoldPlan plan{n_rows, k, seed, std::vector<int>(n_rows, 0)};
    const std::size_t base = n_rows / k;
    const std::size_t extra = n_rows % k;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = base + (f < extra ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) {
            plan.assignment[order[pos++]] = static_cast<int>(f);
        }
    }
    return plan;
}

// Stratified variant: shuffles each class independently and deals both in one
// continuing round-robin, so per-class counts and total fold sizes each
// differ by at most one across folds.
inline FoldPlan make_stratified_folds(const std::vector<int>& labels, std::size_t k,
                                      std::uint64_t seed) {
    const std::size_t n_rows = labels.size();
    if (k < 2) throw UsageError("make_folds: k must be at least 2");
    if (k > n_rows) throw UsageError("make_folds: k exceeds row count");

    std::vector<std::size_t> ones;
    std::vector<std::size_t> zeros;
    for (std::size_t r = 0; r < n_rows; ++r) {
        if (labels[r] != 0) {
            ones.push_back(r);
        } else {
            zeros.push_back(r);
        }
    }
    Rng rng(seed);
    rng.shuffle(ones);
    rng.shuffle(zeros);

    FoldPlan plan{n_rows, k, seed, std::vector<int>(n_rows, 0)};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < ones.size(); ++i, ++pos) {
        plan.assignment[ones[i]] = static_cast<int>(pos % k);
    }
    for (std::size_t i = 0; i < zeros.size(); ++i, ++pos) {
        plan.assignment[zeros[i]] = static_cast<int>(pos % k);
    }
    return plan;
}

}  // namespace causalkit
