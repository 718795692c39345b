#include "lpcart/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include <json.hpp>

namespace lpcart {

void TrainConfig::validate() const {
    if (max_depth < 1 || max_depth > 32)
        throw std::invalid_argument("max_depth must be in [1, 32]");
    if (!(min_leaf_fraction > 0.0) || !(min_leaf_fraction < 1.0))
        throw std::invalid_argument("min_leaf_fraction must be in (0, 1)");
    if (!(c > 0.0) || !(c < 1.0)) throw std::invalid_argument("threshold c must be in (0, 1)");
    if (!(pfs_lambda >= 0.0) || !(pfs_lambda <= 1.0))
        throw std::invalid_argument("pfs_lambda must be in [0, 1]");
}

std::size_t TrainConfig::min_samples(std::size_t n) const {
    const double raw = std::ceil(min_leaf_fraction * static_cast<double>(n));
    return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

SplitCriterion TrainConfig::criterion() const {
    SplitCriterion crit;
    crit.method = method;
    crit.c = c;
    crit.lambda = pfs_lambda;
    crit.weight = weight;
    crit.combine = combine;
    return crit;
}

namespace {

// Per-node state: row indices sorted by every feature, kept sorted across
// partitions so no node ever re-sorts.
struct NodeRows {
    std::vector<std::vector<std::uint32_t>> by_feature;

    std::size_t size() const { return by_feature.empty() ? 0 : by_feature[0].size(); }
};

struct Grower {
    const Dataset& data;
    std::span<const double> resp;  // y or teacher probabilities
    const TrainConfig& cfg;
    SplitCriterion crit;
    std::size_t min_samples;
    bool kd_stop;

    std::vector<double> vbuf, ybuf;

    std::unique_ptr<TreeNode> leaf(double mean, std::size_t n) const {
        auto node = std::make_unique<TreeNode>();
        node->value = mean;
        node->samples = n;
        return node;
    }

    // best CART proposal over all features; candidates unconstrained
    std::optional<SplitDecision> propose(const NodeRows& rows) {
        const SplitCriterion cart = SplitCriterion::cart();
        std::optional<SplitDecision> best;
        for (std::size_t j = 0; j < data.n_features(); ++j) {
            auto col = data.feature(j);
            const auto& order = rows.by_feature[j];
            vbuf.clear();
            ybuf.clear();
            for (auto r : order) {
                vbuf.push_back(col[r]);
                ybuf.push_back(resp[r]);
            }
            auto found = scan_split_sorted(vbuf, ybuf, cart, 1);
            if (!found) continue;
            if (!best || found->objective_value < best->objective_value ||
                (found->objective_value == best->objective_value &&
                 found->threshold < best->threshold)) {
                best = SplitDecision{j, found->threshold, found->objective_value,
                                     found->left_count, order.size() - found->left_count};
            }
        }
        return best;
    }

    std::optional<FinalSplit> refit_threshold(const NodeRows& rows, std::size_t j,
                                              const SplitCriterion& criterion,
                                              std::size_t min_child) {
        auto col = data.feature(j);
        const auto& order = rows.by_feature[j];
        vbuf.clear();
        ybuf.clear();
        for (auto r : order) {
            vbuf.push_back(col[r]);
            ybuf.push_back(resp[r]);
        }
        return scan_split_sorted(vbuf, ybuf, criterion, min_child);
    }

    double objective_at_threshold(const NodeRows& rows, std::size_t j, double threshold,
                                  const SplitCriterion& criterion) {
        auto col = data.feature(j);
        vbuf.clear();  // left responses
        ybuf.clear();  // right responses
        for (auto r : rows.by_feature[j])
            (col[r] <= threshold ? vbuf : ybuf).push_back(resp[r]);
        return split_objective(vbuf, ybuf, criterion);
    }

    std::pair<NodeRows, NodeRows> partition(const NodeRows& rows, std::size_t j,
                                            double threshold) const {
        NodeRows left, right;
        left.by_feature.resize(rows.by_feature.size());
        right.by_feature.resize(rows.by_feature.size());
        auto col = data.feature(j);
        for (std::size_t k = 0; k < rows.by_feature.size(); ++k) {
            for (auto r : rows.by_feature[k]) {
                if (col[r] <= threshold)
                    left.by_feature[k].push_back(r);
                else
                    right.by_feature[k].push_back(r);
            }
        }
        return {std::move(left), std::move(right)};
    }

    std::unique_ptr<TreeNode> grow(const NodeRows& rows, int depth) {
        const auto& any = rows.by_feature[0];
        const std::size_t n = any.size();
        double sum = 0.0, lo = resp[any[0]], hi = lo;
        for (auto r : any) {
            const double y = resp[r];
            sum += y;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        const double mean = sum / static_cast<double>(n);

        const bool value_stop = kd_stop ? (lo > cfg.c || hi < cfg.c) : (lo == hi);
        if (depth >= cfg.max_depth || n < min_samples || value_stop) return leaf(mean, n);

        auto prop = propose(rows);
        if (!prop) return leaf(mean, n);

        const bool last_level = depth == cfg.max_depth - 1;
        const bool small_child =
            prop->left_count < min_samples || prop->right_count < min_samples;
        if (!last_level && !small_child) {
            auto [lrows, rrows] = partition(rows, prop->feature_index, prop->threshold);
            auto node = std::make_unique<TreeNode>();
            node->feature = static_cast<int>(prop->feature_index);
            node->threshold = prop->threshold;
            node->left = grow(lrows, depth + 1);
            node->right = grow(rrows, depth + 1);
            return node;
        }

        // Final split: children become leaves. Non-CART criteria re-search the
        // threshold on the CART-chosen feature; when constrained, every
        // accepted candidate must leave both children at or above the minimum
        // leaf size.
        const std::size_t min_child = cfg.constrain_final_splits ? min_samples : 1;
        double threshold = prop->threshold;
        if (small_child && cfg.constrain_final_splits) {
            auto cart_refit =
                refit_threshold(rows, prop->feature_index, SplitCriterion::cart(), min_child);
            if (!cart_refit) return leaf(mean, n);
            threshold = cart_refit->threshold;
        }
        if (cfg.method != SplitMethod::cart) {
            auto refit = refit_threshold(rows, prop->feature_index, crit, min_child);
            if (!refit) return leaf(mean, n);
            // When every candidate's child means sit on one side of c the
            // distance and weighted-risk objectives are constant in the
            // threshold, so their argmin carries no signal. Move off the
            // impurity-chosen threshold only for a strict improvement.
            const double at_fallback =
                objective_at_threshold(rows, prop->feature_index, threshold, crit);
            if (refit->objective_value < at_fallback - 1e-12)
                threshold = refit->threshold;
        }

        auto col = data.feature(prop->feature_index);
        double lsum = 0.0, rsum = 0.0;
        std::size_t ln = 0, rn = 0;
        for (auto r : any) {
            if (col[r] <= threshold) {
                lsum += resp[r];
                ++ln;
            } else {
                rsum += resp[r];
                ++rn;
            }
        }
        auto node = std::make_unique<TreeNode>();
        node->feature = static_cast<int>(prop->feature_index);
        node->threshold = threshold;
        node->left = leaf(lsum / static_cast<double>(ln), ln);
        node->right = leaf(rsum / static_cast<double>(rn), rn);
        return node;
    }
};

Tree grow_impl(const Dataset& dataset, std::span<const double> resp, const TrainConfig& cfg,
               bool kd_stop) {
    cfg.validate();
    if (dataset.n_rows() == 0) throw DatasetError("empty dataset");

    NodeRows root;
    root.by_feature.resize(dataset.n_features());
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
        auto perm = dataset.sorted_rows(j);
        root.by_feature[j].assign(perm.begin(), perm.end());
    }

    Grower grower{dataset, resp, cfg, cfg.criterion(),
                  cfg.min_samples(dataset.n_rows()), kd_stop, {}, {}};
    Tree tree;
    tree.root = grower.grow(root, 0);
    tree.n_features = dataset.n_features();
    tree.feature_names = dataset.feature_names();
    return tree;
}

}  // namespace

Tree grow_tree(const Dataset& dataset, const TrainConfig& config) {
    if (!dataset.binary_response())
        throw std::invalid_argument("grow_tree requires binary responses; "
                                    "use grow_tree_kd for probability targets");
    return grow_impl(dataset, dataset.response(), config, false);
}

Tree grow_tree_kd(const Dataset& dataset, std::span<const double> teacher_probs,
                  const TrainConfig& config) {
    if (teacher_probs.size() != dataset.n_rows())
        throw std::invalid_argument("teacher probability count does not match rows");
    for (double p : teacher_probs)
        if (!std::isfinite(p) || p < 0.0 || p > 1.0)
            throw std::invalid_argument("teacher probabilities must lie in [0,1]");
    return grow_impl(dataset, teacher_probs, config, true);
}

std::vector<double> predict(const Tree& tree, const Dataset& dataset) {
    if (dataset.n_features() != tree.n_features)
        throw std::invalid_argument("feature count mismatch between tree and dataset");
    std::vector<double> out(dataset.n_rows());
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        const TreeNode* node = tree.root.get();
        while (!node->is_leaf()) {
            const double v = dataset.feature(static_cast<std::size_t>(node->feature))[i];
            node = v <= node->threshold ? node->left.get() : node->right.get();
        }
        out[i] = node->value;
    }
    return out;
}

std::string format_split_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos &&
        s.find_first_of("0123456789") != std::string::npos)
        s += ".0";
    return s;
}

namespace {

void render_node(const TreeNode& node, const std::vector<std::string>& names, int depth,
                 std::string& out) {
    out.append(static_cast<std::size_t>(4 * depth), ' ');
    if (node.is_leaf()) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "value: %.3f, samples: %zu", node.value,
                      node.samples);
        out += buf;
        out += '\n';
        return;
    }
    const auto j = static_cast<std::size_t>(node.feature);
    const std::string name = j < names.size() ? names[j] : "x" + std::to_string(j + 1);
    out += "if " + name + " <= " + format_split_value(node.threshold) + "\n";
    render_node(*node.left, names, depth + 1, out);
    render_node(*node.right, names, depth + 1, out);
}

}  // namespace

std::string render_tree(const Tree& tree, const std::vector<std::string>& feature_names) {
    std::string out;
    render_node(*tree.root, feature_names, 0, out);
    return out;
}

std::string render_tree(const Tree& tree) { return render_tree(tree, tree.feature_names); }

namespace {

void collect_targeted(const TreeNode& node, double c, std::vector<PathCondition>& path,
                      PolicyReport& report) {
    if (node.is_leaf()) {
        report.total_samples += node.samples;
        if (node.value > c)
            report.targeted_leaves.push_back({path, node.value, node.samples});
        return;
    }
    path.push_back({static_cast<std::size_t>(node.feature), true, node.threshold});
    collect_targeted(*node.left, c, path, report);
    path.back().upper = false;
    collect_targeted(*node.right, c, path, report);
    path.pop_back();
}

}  // namespace

PolicyReport policy_report(const Tree& tree, double c) {
    PolicyReport report;
    std::vector<PathCondition> path;
    collect_targeted(*tree.root, c, path, report);
    std::size_t targeted = 0;
    for (const auto& leaf : report.targeted_leaves) targeted += leaf.samples;
    report.cost = report.total_samples
                      ? static_cast<double>(targeted) / static_cast<double>(report.total_samples)
                      : 0.0;
    return report;
}

std::string condition_text(const PathCondition& cond, const std::vector<std::string>& names) {
    const std::string name =
        cond.feature < names.size() ? names[cond.feature] : "x" + std::to_string(cond.feature + 1);
    return name + (cond.upper ? " <= " : " > ") + format_split_value(cond.threshold);
}

std::string path_text(const std::vector<PathCondition>& path,
                      const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) out += " and ";
        out += condition_text(path[i], names);
    }
    return out;
}

namespace {

nlohmann::json node_to_json(const TreeNode& node) {
    if (node.is_leaf()) return {{"value", node.value}, {"samples", node.samples}};
    return {{"feature", node.feature},
            {"threshold", node.threshold},
            {"left", node_to_json(*node.left)},
            {"right", node_to_json(*node.right)}};
}

std::unique_ptr<TreeNode> node_from_json(const nlohmann::json& j) {
    auto node = std::make_unique<TreeNode>();
    if (j.contains("feature")) {
        node->feature = j.at("feature").get<int>();
        node->threshold = j.at("threshold").get<double>();
        node->left = node_from_json(j.at("left"));
        node->right = node_from_json(j.at("right"));
    } else {
        node->value = j.at("value").get<double>();
        node->samples = j.at("samples").get<std::size_t>();
    }
    return node;
}

}  // namespace

std::string tree_to_json(const Tree& tree) {
    nlohmann::json j{{"n_features", tree.n_features},
                     {"feature_names", tree.feature_names},
                     {"root", node_to_json(*tree.root)}};
    return j.dump(2);
}

Tree tree_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Tree tree;
    tree.n_features = j.at("n_features").get<std::size_t>();
    tree.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    tree.root = node_from_json(j.at("root"));
    return tree;
}

}  // namespace lpcart
