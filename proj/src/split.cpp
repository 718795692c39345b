#include "lpcart/split.hpp"

#include <algorithm>
#include <cmath>

namespace lpcart {

double weight_eval(WeightKind kind, double d) {
    switch (kind) {
        case WeightKind::linear: return 1.0 - d;
        case WeightKind::quadratic: return (1.0 - d) * (1.0 - d);
        case WeightKind::exponential: return std::exp(-d);
    }
    return 0.0;
}

std::vector<double> candidate_thresholds(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
        if (sorted[i + 1] > sorted[i]) mids.push_back(0.5 * (sorted[i] + sorted[i + 1]));
    return mids;
}

namespace {

struct ChildSums {
    std::size_t n = 0;
    double sum = 0.0;
    double sum2 = 0.0;
    std::size_t above = 0;  // responses strictly above c
};

ChildSums accumulate(std::span<const double> ys, double c) {
    ChildSums s;
    s.n = ys.size();
    for (double y : ys) {
        s.sum += y;
        s.sum2 += y * y;
        if (y > c) ++s.above;
    }
    return s;
}

// The four objectives from running sums. Expressions here are the single
// source of truth: the ordered scan and the span-based entry points both
// route through this so their values agree bit for bit.
double objective_from_sums(const ChildSums& l, const ChildSums& r,
                           const SplitCriterion& crit) {
    const double n = static_cast<double>(l.n + r.n);
    const double wl = static_cast<double>(l.n) / n;
    const double wr = static_cast<double>(r.n) / n;
    const double mean_l = l.n ? l.sum / static_cast<double>(l.n) : 0.0;
    const double mean_r = r.n ? r.sum / static_cast<double>(r.n) : 0.0;

    if (crit.method == SplitMethod::wefs) {
        const double c = crit.c;
        const double swept = (mean_l > c ? static_cast<double>(l.n - l.above) : 0.0) +
                             (mean_r > c ? static_cast<double>(r.n - r.above) : 0.0);
        const double stranded = (mean_l <= c ? static_cast<double>(l.above) : 0.0) +
                                (mean_r <= c ? static_cast<double>(r.above) : 0.0);
        return swept * c + stranded * (1.0 - c);
    }

    const double var_l =
        l.n ? std::max(0.0, l.sum2 / static_cast<double>(l.n) - mean_l * mean_l) : 0.0;
    const double var_r =
        r.n ? std::max(0.0, r.sum2 / static_cast<double>(r.n) - mean_r * mean_r) : 0.0;
    const double imp = var_l * wl + var_r * wr;
    if (crit.method == SplitMethod::cart) return imp;

    const double pen = weight_eval(crit.weight, std::abs(crit.c - mean_l)) * wl +
                       weight_eval(crit.weight, std::abs(crit.c - mean_r)) * wr;
    const double lambda = crit.effective_lambda();
    if (crit.method == SplitMethod::pfs && crit.combine == PfsCombine::additive)
        return imp + lambda * pen;
    return (1.0 - lambda) * imp + lambda * pen;
}

}  // namespace

double impurity(std::span<const double> left, std::span<const double> right) {
    return objective_from_sums(accumulate(left, 0.5), accumulate(right, 0.5),
                               SplitCriterion::cart());
}

double distance_penalty(std::span<const double> left, std::span<const double> right,
                        double c, WeightKind weight) {
    SplitCriterion crit = SplitCriterion::mdfs(c, weight);
    return objective_from_sums(accumulate(left, c), accumulate(right, c), crit);
}

double weighted_risk(std::span<const double> left, std::span<const double> right, double c) {
    SplitCriterion crit = SplitCriterion::wefs(c);
    return objective_from_sums(accumulate(left, c), accumulate(right, c), crit);
}

double split_objective(std::span<const double> left, std::span<const double> right,
                       const SplitCriterion& criterion) {
    return objective_from_sums(accumulate(left, criterion.c), accumulate(right, criterion.c),
                               criterion);
}

std::optional<FinalSplit> scan_split_sorted(std::span<const double> sorted_values,
                                            std::span<const double> sorted_responses,
                                            const SplitCriterion& criterion,
                                            std::size_t min_child) {
    const std::size_t n = sorted_values.size();
    if (n < 2) return std::nullopt;
    ChildSums total = accumulate(sorted_responses, criterion.c);

    ChildSums left;
    std::optional<FinalSplit> best;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double y = sorted_responses[i];
        left.n += 1;
        left.sum += y;
        left.sum2 += y * y;
        if (y > criterion.c) ++left.above;
        if (sorted_values[i + 1] <= sorted_values[i]) continue;
        if (left.n < min_child || n - left.n < min_child) continue;
        ChildSums right{total.n - left.n, total.sum - left.sum, total.sum2 - left.sum2,
                        total.above - left.above};
        const double obj = objective_from_sums(left, right, criterion);
        if (!best || obj < best->objective_value)
            best = FinalSplit{0.5 * (sorted_values[i] + sorted_values[i + 1]), obj, left.n};
    }
    return best;
}

std::optional<SplitDecision> find_best_split_cart(const Dataset& dataset,
                                                  std::span<const std::uint32_t> rows,
                                                  std::size_t min_child) {
    std::vector<char> member(dataset.n_rows(), 0);
    for (auto r : rows) member[r] = 1;

    std::vector<double> values, ys;
    values.reserve(rows.size());
    ys.reserve(rows.size());

    const SplitCriterion cart = SplitCriterion::cart();
    std::optional<SplitDecision> best;
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
        values.clear();
        ys.clear();
        auto col = dataset.feature(j);
        auto resp = dataset.response();
        for (auto r : dataset.sorted_rows(j)) {
            if (!member[r]) continue;
            values.push_back(col[r]);
            ys.push_back(resp[r]);
        }
        auto found = scan_split_sorted(values, ys, cart, min_child);
        if (!found) continue;
        if (!best || found->objective_value < best->objective_value ||
            (found->objective_value == best->objective_value &&
             found->threshold < best->threshold)) {
            best = SplitDecision{j, found->threshold, found->objective_value,
                                 found->left_count, rows.size() - found->left_count};
        }
    }
    return best;
}

std::optional<FinalSplit> find_final_split(std::span<const double> feature_values,
                                           std::span<const double> responses,
                                           const SplitCriterion& criterion,
                                           std::size_t min_child) {
    const std::size_t n = feature_values.size();
    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return feature_values[a] < feature_values[b];
    });
    std::vector<double> values(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = feature_values[order[i]];
        ys[i] = responses[order[i]];
    }
    return scan_split_sorted(values, ys, criterion, min_child);
}

}  // namespace lpcart
