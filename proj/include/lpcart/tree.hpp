#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lpcart/dataset.hpp"
#include "lpcart/split.hpp"

namespace lpcart {

struct TrainConfig {
    int max_depth = 4;                // m, 1..32
    double min_leaf_fraction = 0.01;  // rho in (0,1); min leaf size = ceil(rho * n)
    double c = 0.5;                   // policy threshold in (0,1)
    SplitMethod method = SplitMethod::cart;
    double pfs_lambda = 0.1;
    WeightKind weight = WeightKind::linear;
    PfsCombine combine = PfsCombine::convex;
    // require both children of a re-searched final split to meet the minimum
    // leaf size; off reproduces the unconstrained final-level behavior
    bool constrain_final_splits = true;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t min_samples(std::size_t n) const;
    SplitCriterion criterion() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    std::size_t samples = 0;
    std::unique_ptr<TreeNode> left;
    std::unique_ptr<TreeNode> right;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::unique_ptr<TreeNode> root;
    std::size_t n_features = 0;
    std::vector<std::string> feature_names;

    const TreeNode& root_node() const { return *root; }
};

// CART growth with the configured criterion applied only at final splits: a
// node whose children will be leaves because depth ran out or because the
// CART proposal would leave a child below the minimum leaf size. Responses
// must be binary 0/1.
Tree grow_tree(const Dataset& dataset, const TrainConfig& config);

// Same growth driven by teacher probabilities: splits and leaf values use
// the probabilities, and a node stops when min(p) > c or max(p) < c.
Tree grow_tree_kd(const Dataset& dataset, std::span<const double> teacher_probs,
                  const TrainConfig& config);

std::vector<double> predict(const Tree& tree, const Dataset& dataset);

// Text rendering: `if <name> <= <threshold>` for internal nodes, then the
// left and the right block each indented four more spaces; leaves print
// `value: <3 decimals>, samples: <count>`.
std::string render_tree(const Tree& tree, const std::vector<std::string>& feature_names);
std::string render_tree(const Tree& tree);

struct PathCondition {
    std::size_t feature = 0;
    bool upper = false;  // true: feature <= threshold, false: feature > threshold
    double threshold = 0.0;
};

struct TargetedLeaf {
    std::vector<PathCondition> path;
    double value = 0.0;
    std::size_t samples = 0;
};

struct PolicyReport {
    std::vector<TargetedLeaf> targeted_leaves;  // leaves with value > c
    double cost = 0.0;                          // targeted fraction of the sample
    std::size_t total_samples = 0;
};

PolicyReport policy_report(const Tree& tree, double c);

std::string condition_text(const PathCondition& cond, const std::vector<std::string>& names);
std::string path_text(const std::vector<PathCondition>& path,
                      const std::vector<std::string>& names);

// Threshold formatting shared by the renderer and the reports.
std::string format_split_value(double v);

std::string tree_to_json(const Tree& tree);
Tree tree_from_json(const std::string& text);

}  // namespace lpcart
