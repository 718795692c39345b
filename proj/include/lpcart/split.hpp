#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lpcart/dataset.hpp"

namespace lpcart {

enum class SplitMethod { cart, pfs, mdfs, wefs };

enum class WeightKind { linear, quadratic, exponential };

// How the PFS objective combines impurity and penalty. The convex form
// admits lambda = 1, which is exactly MDFS; the additive form differs from
// it only by the reparameterization lambda' = lambda / (1 - lambda).
enum class PfsCombine { convex, additive };

double weight_eval(WeightKind kind, double d);

struct SplitCriterion {
    SplitMethod method = SplitMethod::cart;
    double c = 0.5;
    double lambda = 0.1;
    WeightKind weight = WeightKind::linear;
    PfsCombine combine = PfsCombine::convex;

    // MDFS is the convex combination pinned at lambda = 1.
    double effective_lambda() const { return method == SplitMethod::mdfs ? 1.0 : lambda; }

    static SplitCriterion cart() { return {}; }
    static SplitCriterion pfs(double c, double lambda = 0.1,
                              WeightKind w = WeightKind::linear,
                              PfsCombine combine = PfsCombine::convex) {
        return {SplitMethod::pfs, c, lambda, w, combine};
    }
    static SplitCriterion mdfs(double c, WeightKind w = WeightKind::linear) {
        return {SplitMethod::mdfs, c, 1.0, w, PfsCombine::convex};
    }
    static SplitCriterion wefs(double c) { return {SplitMethod::wefs, c}; }
};

struct SplitDecision {
    std::size_t feature_index = 0;
    double threshold = 0.0;
    double objective_value = 0.0;
    std::size_t left_count = 0;
    std::size_t right_count = 0;
};

struct FinalSplit {
    double threshold = 0.0;
    double objective_value = 0.0;
    std::size_t left_count = 0;
};

// Ascending midpoints between consecutive distinct sorted values; empty when
// fewer than two distinct values exist.
std::vector<double> candidate_thresholds(std::span<const double> values);

// Weighted child variances, the sample analogue of the CART criterion.
double impurity(std::span<const double> left, std::span<const double> right);

// W(|c - mean_l|) |l|/n + W(|c - mean_r|) |r|/n; maximal when both node
// means sit at the threshold.
double distance_penalty(std::span<const double> left, std::span<const double> right,
                        double c, WeightKind weight);

// Cost-weighted misclassification count: responses above c stranded in a
// non-targeted child cost (1-c) each, responses at or below c swept into a
// targeted child cost c each. A child is targeted when its mean exceeds c.
double weighted_risk(std::span<const double> left, std::span<const double> right, double c);

// Objective of `criterion` for the given child split, computed from spans.
double split_objective(std::span<const double> left, std::span<const double> right,
                       const SplitCriterion& criterion);

// One ordered pass over (sorted values, responses in that order) with running
// sums. Candidates whose children would fall below min_child are skipped;
// ties resolve to the smallest threshold. Empty optional when no candidate.
std::optional<FinalSplit> scan_split_sorted(std::span<const double> sorted_values,
                                            std::span<const double> sorted_responses,
                                            const SplitCriterion& criterion,
                                            std::size_t min_child = 1);

// Best (feature, midpoint) by impurity over all features of a row subset.
// Ties: smallest threshold, then smallest feature index.
std::optional<SplitDecision> find_best_split_cart(const Dataset& dataset,
                                                  std::span<const std::uint32_t> rows,
                                                  std::size_t min_child = 1);

// Re-searches the threshold on the CART-chosen feature under `criterion`.
std::optional<FinalSplit> find_final_split(std::span<const double> feature_values,
                                           std::span<const double> responses,
                                           const SplitCriterion& criterion,
                                           std::size_t min_child = 1);

}  // namespace lpcart
