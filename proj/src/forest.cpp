#include "lpcart/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lpcart/parallel.hpp"
#include "lpcart/rng.hpp"
#include "lpcart/split.hpp"

namespace lpcart {

std::size_t ForestConfig::features_per_split(std::size_t p) const {
    switch (max_features) {
        case MaxFeaturesRule::all: return p;
        case MaxFeaturesRule::fixed: return static_cast<std::size_t>(fixed_k);
        case MaxFeaturesRule::sqrt_rule:
            return std::max<std::size_t>(
                1, static_cast<std::size_t>(std::sqrt(static_cast<double>(p))));
    }
    return p;
}

void ForestConfig::validate(std::size_t p) const {
    if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");
    if (min_split < 2) throw std::invalid_argument("min_split must be >= 2");
    if (max_features == MaxFeaturesRule::fixed &&
        (fixed_k < 1 || static_cast<std::size_t>(fixed_k) > p))
        throw std::invalid_argument("fixed max_features must be in [1, p]");
}

namespace {

struct PendingNode {
    std::vector<std::vector<std::uint32_t>> by_feature;  // rows sorted per feature
    TreeNode* slot = nullptr;
};

Tree grow_forest_tree(const Dataset& data, const ForestConfig& cfg, std::uint64_t tree_seed) {
    const std::size_t n = data.n_rows();
    const std::size_t p = data.n_features();
    Rng rng(tree_seed);

    // Bootstrap multiplicities; sorted per-feature row lists follow from the
    // dataset's precomputed permutations, so no per-tree sort is needed.
    std::vector<std::uint32_t> multiplicity(n, 0);
    if (cfg.bootstrap) {
        for (std::size_t i = 0; i < n; ++i)
            multiplicity[rng.uniform_index(n)] += 1;
    } else {
        std::fill(multiplicity.begin(), multiplicity.end(), 1u);
    }

    PendingNode root;
    root.by_feature.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        auto& list = root.by_feature[j];
        for (auto r : data.sorted_rows(j))
            for (std::uint32_t k = 0; k < multiplicity[r]; ++k) list.push_back(r);
    }

    Tree tree;
    tree.root = std::make_unique<TreeNode>();
    tree.n_features = p;
    tree.feature_names = data.feature_names();

    const SplitCriterion cart = SplitCriterion::cart();
    const std::size_t k_features = cfg.features_per_split(p);
    auto resp = data.response();

    std::vector<std::size_t> feature_pool(p);
    std::vector<double> vbuf, ybuf;

    std::vector<PendingNode> stack;
    root.slot = tree.root.get();
    stack.push_back(std::move(root));

    while (!stack.empty()) {
        PendingNode node = std::move(stack.back());
        stack.pop_back();
        const auto& any = node.by_feature[0];
        const std::size_t m = any.size();

        double sum = 0.0, lo = resp[any[0]], hi = lo;
        for (auto r : any) {
            const double y = resp[r];
            sum += y;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        const double mean = sum / static_cast<double>(m);

        auto make_leaf = [&] {
            node.slot->feature = -1;
            node.slot->value = mean;
            node.slot->samples = m;
        };

        if (lo == hi || m < static_cast<std::size_t>(cfg.min_split)) {
            make_leaf();
            continue;
        }

        // draw k distinct candidate features for this split
        std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});
        for (std::size_t i = 0; i < k_features; ++i) {
            const std::size_t j = i + rng.uniform_index(p - i);
            std::swap(feature_pool[i], feature_pool[j]);
        }

        std::optional<SplitDecision> best;
        for (std::size_t i = 0; i < k_features; ++i) {
            const std::size_t j = feature_pool[i];
            auto col = data.feature(j);
            vbuf.clear();
            ybuf.clear();
            for (auto r : node.by_feature[j]) {
                vbuf.push_back(col[r]);
                ybuf.push_back(resp[r]);
            }
            auto found = scan_split_sorted(vbuf, ybuf, cart, 1);
            if (!found) continue;
            if (!best || found->objective_value < best->objective_value ||
                (found->objective_value == best->objective_value &&
                 (found->threshold < best->threshold ||
                  (found->threshold == best->threshold && j < best->feature_index)))) {
                best = SplitDecision{j, found->threshold, found->objective_value,
                                     found->left_count, m - found->left_count};
            }
        }
        if (!best) {
            make_leaf();
            continue;
        }

        PendingNode left, right;
        left.by_feature.resize(p);
        right.by_feature.resize(p);
        auto col = data.feature(best->feature_index);
        for (std::size_t j = 0; j < p; ++j) {
            for (auto r : node.by_feature[j]) {
                if (col[r] <= best->threshold)
                    left.by_feature[j].push_back(r);
                else
                    right.by_feature[j].push_back(r);
            }
        }

        node.slot->feature = static_cast<int>(best->feature_index);
        node.slot->threshold = best->threshold;
        node.slot->left = std::make_unique<TreeNode>();
        node.slot->right = std::make_unique<TreeNode>();
        left.slot = node.slot->left.get();
        right.slot = node.slot->right.get();
        stack.push_back(std::move(right));
        stack.push_back(std::move(left));
    }
    return tree;
}

}  // namespace

Forest fit_forest(const Dataset& dataset, const ForestConfig& config) {
    config.validate(dataset.n_features());
    if (dataset.n_rows() == 0) throw DatasetError("empty dataset");
    if (!dataset.binary_response())
        throw std::invalid_argument("fit_forest requires binary responses");

    Forest forest;
    forest.n_features = dataset.n_features();
    forest.trees.resize(static_cast<std::size_t>(config.n_trees));
    parallel_for(forest.trees.size(), config.jobs, [&](std::size_t t) {
        forest.trees[t] = grow_forest_tree(dataset, config, mix_seed(config.seed, t));
    });
    return forest;
}

std::vector<double> predict_proba(const Forest& forest, const Dataset& dataset) {
    if (dataset.n_features() != forest.n_features)
        throw std::invalid_argument("feature count mismatch between forest and dataset");
    std::vector<double> out(dataset.n_rows(), 0.0);
    for (const auto& tree : forest.trees) {
        auto pred = predict(tree, dataset);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += pred[i];
    }
    const double k = static_cast<double>(forest.trees.size());
    for (auto& v : out) v /= k;
    return out;
}

}  // namespace lpcart
