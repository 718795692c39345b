#pragma once

#include <cstdint>
#include <vector>

#include "lpcart/dataset.hpp"
#include "lpcart/tree.hpp"

namespace lpcart {

enum class MaxFeaturesRule { sqrt_rule, all, fixed };

struct ForestConfig {
    int n_trees = 100;
    MaxFeaturesRule max_features = MaxFeaturesRule::sqrt_rule;
    int fixed_k = 1;       // used when max_features == fixed
    bool bootstrap = true;
    int min_split = 2;     // nodes smaller than this become leaves
    std::uint64_t seed = 0;
    int jobs = 1;

    std::size_t features_per_split(std::size_t p) const;
    void validate(std::size_t p) const;
};

// Bagged variance-split trees grown to purity; leaves hold class-1 fractions.
// Per-tree generator streams are derived from (seed, tree index), so the
// forest is identical no matter how tree growth is scheduled.
struct Forest {
    std::vector<Tree> trees;
    std::size_t n_features = 0;

    Forest() = default;
    Forest(const Forest&) = delete;
    Forest& operator=(const Forest&) = delete;
    Forest(Forest&&) = default;
    Forest& operator=(Forest&&) = default;
};

Forest fit_forest(const Dataset& dataset, const ForestConfig& config);

// Per-row mean of per-tree leaf fractions.
std::vector<double> predict_proba(const Forest& forest, const Dataset& dataset);

}  // namespace lpcart
