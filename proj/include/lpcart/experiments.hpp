#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lpcart/dataset.hpp"
#include "lpcart/dgp.hpp"
#include "lpcart/forest.hpp"
#include "lpcart/tree.hpp"

namespace lpcart::experiments {

enum class Method { cart, pfs, mdfs, wefs, rf_cart, rf_mdfs };

const std::string& method_name(Method m);
Method method_by_name(const std::string& name);
bool is_rf(Method m);
std::vector<Method> tree_methods();  // cart, pfs, mdfs, wefs
std::vector<Method> all_methods();

// Fraction of rows whose tree estimate and true eta fall on opposite sides
// of c; a product of exactly zero counts as correct.
double mr(std::span<const double> predictions, std::span<const double> eta_true, double c);

struct ExperimentSetting {
    dgp::DgpSpec dgp;
    double c = 0.6;
    int max_depth = 4;
    double min_leaf_fraction = 0.01;
    std::size_t n = 5000;
    int replicates = 50;
    std::vector<Method> methods;
    std::uint64_t base_seed = 0;
    int teacher_trees = 100;
    bool holdout = false;
    double pfs_lambda = 0.1;
    WeightKind weight = WeightKind::linear;
    PfsCombine combine = PfsCombine::convex;
    bool constrain_final_splits = true;

    std::uint64_t replicate_seed(int replicate) const;
};

struct SettingResult {
    std::vector<Method> methods;
    std::vector<std::vector<double>> mr_values;  // [method][replicate], percent; NaN = failed
    std::vector<double> mean_mr;                 // percent, over completed replicates
    std::vector<double> std_mr;                  // sample standard deviation (n-1)
    std::vector<std::uint64_t> seeds;            // per-replicate seeds
    std::vector<std::string> diagnostics;        // one entry per aborted replicate

    double mean_of(Method m) const;
    double std_of(Method m) const;
};

// All requested methods fit the same per-replicate sample; RF methods share
// one forest teacher per replicate.
SettingResult run_setting(const ExperimentSetting& setting, int jobs = 1);

struct SuiteRow {
    ExperimentSetting setting;
    SettingResult result;
};

struct WinRate {
    std::size_t wins = 0;
    std::size_t comparisons = 0;
    double rate() const {
        return comparisons ? static_cast<double>(wins) / static_cast<double>(comparisons) : 0.0;
    }
};

struct SuiteReport {
    std::vector<SuiteRow> rows;
    // strictly smaller mean MR than CART on the same setting; ties lose
    std::map<Method, WinRate> win_vs_cart;
    WinRate rf_mdfs_vs_rf_cart;
    std::vector<std::string> diagnostics;
};

SuiteReport run_suite(const std::vector<ExperimentSetting>& grid, int jobs = 1);

std::vector<ExperimentSetting> make_grid(std::uint64_t base_seed,
                                         const std::vector<Method>& methods,
                                         const std::vector<int>& depths,
                                         const std::vector<double>& leaf_fractions,
                                         const std::vector<double>& thresholds,
                                         int replicates, std::size_t n,
                                         bool standardize_dgp = true);

// The 288-setting grid: 8 DGPs x 3 thresholds x 4 depths x 3 leaf fractions.
std::vector<ExperimentSetting> full_grid(std::uint64_t base_seed,
                                         const std::vector<Method>& methods,
                                         bool standardize_dgp = true);

// Reduced grid: 5 replicates and depths {4, 6}.
std::vector<ExperimentSetting> smoke_grid(std::uint64_t base_seed,
                                          const std::vector<Method>& methods,
                                          bool standardize_dgp = true);

struct CaseStudyEntry {
    Method method = Method::cart;
    Tree tree;
    std::string rendered;
    PolicyReport policy;
};

struct CaseStudyResult {
    std::string name;
    double c = 0.6;
    int depth = 3;
    std::vector<CaseStudyEntry> entries;  // cart, mdfs, rf_cart, rf_mdfs
};

// Depth-fixed comparison on a prepared dataset: CART, MDFS and their
// forest-distilled counterparts, with targeted-subgroup reports.
CaseStudyResult run_case_study(const std::string& name, const Dataset& dataset, double c,
                               int depth, std::uint64_t seed = 0, int teacher_trees = 100,
                               int jobs = 1);

}  // namespace lpcart::experiments
