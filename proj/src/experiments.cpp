#include "lpcart/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lpcart/parallel.hpp"
#include "lpcart/rng.hpp"

namespace lpcart::experiments {

namespace {

const std::vector<std::pair<Method, std::string>>& method_table() {
    static const std::vector<std::pair<Method, std::string>> table = {
        {Method::cart, "cart"},       {Method::pfs, "pfs"},
        {Method::mdfs, "mdfs"},       {Method::wefs, "wefs"},
        {Method::rf_cart, "rf-cart"}, {Method::rf_mdfs, "rf-mdfs"}};
    return table;
}

SplitMethod student_method(Method m) {
    switch (m) {
        case Method::cart:
        case Method::rf_cart: return SplitMethod::cart;
        case Method::pfs: return SplitMethod::pfs;
        case Method::mdfs:
        case Method::rf_mdfs: return SplitMethod::mdfs;
        case Method::wefs: return SplitMethod::wefs;
    }
    return SplitMethod::cart;
}

}  // namespace

const std::string& method_name(Method m) {
    for (const auto& [method, name] : method_table())
        if (method == m) return name;
    throw std::invalid_argument("unknown method");
}

Method method_by_name(const std::string& name) {
    for (const auto& [method, mname] : method_table())
        if (mname == name) return method;
    throw std::invalid_argument("unknown method '" + name +
                                "'; expected cart, pfs, mdfs, wefs, rf-cart or rf-mdfs");
}

bool is_rf(Method m) { return m == Method::rf_cart || m == Method::rf_mdfs; }

std::vector<Method> tree_methods() {
    return {Method::cart, Method::pfs, Method::mdfs, Method::wefs};
}

std::vector<Method> all_methods() {
    return {Method::cart,  Method::pfs,     Method::mdfs,
            Method::wefs,  Method::rf_cart, Method::rf_mdfs};
}

double mr(std::span<const double> predictions, std::span<const double> eta_true, double c) {
    if (predictions.size() != eta_true.size())
        throw std::invalid_argument("prediction and eta lengths differ");
    if (predictions.empty()) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if ((predictions[i] - c) * (eta_true[i] - c) < 0.0) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

std::uint64_t ExperimentSetting::replicate_seed(int replicate) const {
    return mix_seed(base_seed, static_cast<std::uint64_t>(dgp.kind),
                    static_cast<std::uint64_t>(std::llround(c * 1000.0)),
                    static_cast<std::uint64_t>(max_depth),
                    static_cast<std::uint64_t>(std::llround(min_leaf_fraction * 100000.0)),
                    static_cast<std::uint64_t>(replicate));
}

double SettingResult::mean_of(Method m) const {
    for (std::size_t i = 0; i < methods.size(); ++i)
        if (methods[i] == m) return mean_mr[i];
    throw std::invalid_argument("method not present in result");
}

double SettingResult::std_of(Method m) const {
    for (std::size_t i = 0; i < methods.size(); ++i)
        if (methods[i] == m) return std_mr[i];
    throw std::invalid_argument("method not present in result");
}

SettingResult run_setting(const ExperimentSetting& setting, int jobs) {
    const auto n_methods = setting.methods.size();
    const auto reps = static_cast<std::size_t>(setting.replicates);
    const bool needs_forest =
        std::any_of(setting.methods.begin(), setting.methods.end(), is_rf);

    SettingResult result;
    result.methods = setting.methods;
    result.mr_values.assign(n_methods, std::vector<double>(reps, 0.0));
    result.seeds.resize(reps);
    std::vector<std::string> failures(reps);

    parallel_for(reps, jobs, [&](std::size_t rep) {
        const std::uint64_t seed = setting.replicate_seed(static_cast<int>(rep));
        result.seeds[rep] = seed;
        try {
            const auto sample = dgp::sample(setting.dgp, setting.n, seed);
            std::optional<dgp::SyntheticSample> test;
            if (setting.holdout)
                test = dgp::sample(setting.dgp, setting.n, mix_seed(seed, 0x7e57));
            const Dataset& score_data = setting.holdout ? test->dataset : sample.dataset;

            std::vector<double> teacher;
            if (needs_forest) {
                ForestConfig fc;
                fc.n_trees = setting.teacher_trees;
                fc.seed = mix_seed(seed, 0xf0);
                teacher = predict_proba(fit_forest(sample.dataset, fc), sample.dataset);
            }

            for (std::size_t mi = 0; mi < n_methods; ++mi) {
                const Method method = setting.methods[mi];
                TrainConfig cfg;
                cfg.max_depth = setting.max_depth;
                cfg.min_leaf_fraction = setting.min_leaf_fraction;
                cfg.c = setting.c;
                cfg.method = student_method(method);
                cfg.pfs_lambda = setting.pfs_lambda;
                cfg.weight = setting.weight;
                cfg.combine = setting.combine;
                cfg.constrain_final_splits = setting.constrain_final_splits;
                cfg.seed = seed;
                const Tree tree = is_rf(method)
                                      ? grow_tree_kd(sample.dataset, teacher, cfg)
                                      : grow_tree(sample.dataset, cfg);
                const auto preds = predict(tree, score_data);
                result.mr_values[mi][rep] =
                    100.0 * mr(preds, score_data.eta_true(), setting.c);
            }
        } catch (const std::exception& e) {
            for (std::size_t mi = 0; mi < n_methods; ++mi)
                result.mr_values[mi][rep] = std::nan("");
            failures[rep] = std::string("replicate ") + std::to_string(rep) + " seed " +
                            std::to_string(seed) + " aborted: " + e.what();
        }
    });

    for (const auto& f : failures)
        if (!f.empty()) result.diagnostics.push_back(f);

    result.mean_mr.resize(n_methods);
    result.std_mr.resize(n_methods);
    for (std::size_t mi = 0; mi < n_methods; ++mi) {
        double sum = 0.0;
        std::size_t k = 0;
        for (double v : result.mr_values[mi])
            if (!std::isnan(v)) {
                sum += v;
                ++k;
            }
        const double mean = k ? sum / static_cast<double>(k) : std::nan("");
        double ss = 0.0;
        for (double v : result.mr_values[mi])
            if (!std::isnan(v)) ss += (v - mean) * (v - mean);
        result.mean_mr[mi] = mean;
        result.std_mr[mi] = k > 1 ? std::sqrt(ss / static_cast<double>(k - 1)) : 0.0;
    }
    return result;
}

SuiteReport run_suite(const std::vector<ExperimentSetting>& grid, int jobs) {
    SuiteReport report;
    report.rows.resize(grid.size());
    // settings split the worker budget; replicates of one setting run serially
    parallel_for(grid.size(), jobs, [&](std::size_t i) {
        report.rows[i] = {grid[i], run_setting(grid[i], 1)};
    });

    for (const auto& row : report.rows) {
        for (const auto& d : row.result.diagnostics) report.diagnostics.push_back(d);
        const auto& methods = row.result.methods;
        auto has = [&](Method m) {
            return std::find(methods.begin(), methods.end(), m) != methods.end();
        };
        if (has(Method::cart)) {
            const double cart_mean = row.result.mean_of(Method::cart);
            for (Method m : {Method::pfs, Method::mdfs, Method::wefs}) {
                if (!has(m)) continue;
                auto& wr = report.win_vs_cart[m];
                ++wr.comparisons;
                if (row.result.mean_of(m) < cart_mean) ++wr.wins;
            }
        }
        if (has(Method::rf_cart) && has(Method::rf_mdfs)) {
            ++report.rf_mdfs_vs_rf_cart.comparisons;
            if (row.result.mean_of(Method::rf_mdfs) < row.result.mean_of(Method::rf_cart))
                ++report.rf_mdfs_vs_rf_cart.wins;
        }
    }
    return report;
}

std::vector<ExperimentSetting> make_grid(std::uint64_t base_seed,
                                         const std::vector<Method>& methods,
                                         const std::vector<int>& depths,
                                         const std::vector<double>& leaf_fractions,
                                         const std::vector<double>& thresholds,
                                         int replicates, std::size_t n,
                                         bool standardize_dgp) {
    std::vector<ExperimentSetting> grid;
    for (auto kind : dgp::all_dgp_kinds()) {
        const auto spec = dgp::make_dgp(kind, standardize_dgp);
        for (double c : thresholds) {
            for (int depth : depths) {
                for (double rho : leaf_fractions) {
                    ExperimentSetting s;
                    s.dgp = spec;
                    s.c = c;
                    s.max_depth = depth;
                    s.min_leaf_fraction = rho;
                    s.n = n;
                    s.replicates = replicates;
                    s.methods = methods;
                    s.base_seed = base_seed;
                    grid.push_back(std::move(s));
                }
            }
        }
    }
    return grid;
}

std::vector<ExperimentSetting> full_grid(std::uint64_t base_seed,
                                         const std::vector<Method>& methods,
                                         bool standardize_dgp) {
    return make_grid(base_seed, methods, {4, 5, 6, 7}, {0.01, 0.02, 0.03}, {0.6, 0.7, 0.8},
                     50, 5000, standardize_dgp);
}

std::vector<ExperimentSetting> smoke_grid(std::uint64_t base_seed,
                                          const std::vector<Method>& methods,
                                          bool standardize_dgp) {
    return make_grid(base_seed, methods, {4, 6}, {0.01, 0.02, 0.03}, {0.6, 0.7, 0.8}, 5,
                     5000, standardize_dgp);
}

CaseStudyResult run_case_study(const std::string& name, const Dataset& dataset, double c,
                               int depth, std::uint64_t seed, int teacher_trees, int jobs) {
    if (name != "pima" && name != "forestfire")
        throw std::invalid_argument("unknown case study '" + name +
                                    "'; expected pima or forestfire");

    ForestConfig fc;
    fc.n_trees = teacher_trees;
    fc.seed = mix_seed(seed, 0xf0);
    fc.jobs = jobs;
    const auto teacher = predict_proba(fit_forest(dataset, fc), dataset);

    CaseStudyResult out;
    out.name = name;
    out.c = c;
    out.depth = depth;
    for (Method method : {Method::cart, Method::mdfs, Method::rf_cart, Method::rf_mdfs}) {
        TrainConfig cfg;
        cfg.max_depth = depth;
        // the comparison trees are unconstrained in leaf size
        cfg.min_leaf_fraction = 1e-9;
        cfg.c = c;
        cfg.method = student_method(method);
        cfg.seed = seed;
        Tree tree = is_rf(method) ? grow_tree_kd(dataset, teacher, cfg)
                                  : grow_tree(dataset, cfg);
        CaseStudyEntry entry;
        entry.method = method;
        entry.rendered = render_tree(tree);
        entry.policy = policy_report(tree, c);
        entry.tree = std::move(tree);
        out.entries.push_back(std::move(entry));
    }
    return out;
}

}  // namespace lpcart::experiments
