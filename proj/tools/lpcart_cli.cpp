#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpcart/dgp.hpp"
#include "lpcart/experiments.hpp"
#include "lpcart/forest.hpp"
#include "lpcart/io.hpp"
#include "lpcart/parallel.hpp"
#include "lpcart/rng.hpp"
#include "lpcart/theory.hpp"
#include "lpcart/tree.hpp"

namespace {

using namespace lpcart;

// CLI11 config reader for flat JSON files whose keys mirror the flag names
// with dashes replaced by underscores.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        input >> j;
        if (!j.is_object()) throw CLI::FileError("config must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (auto it = j.begin(); it != j.end(); ++it) {
            CLI::ConfigItem item;
            std::string name = it.key();
            std::replace(name.begin(), name.end(), '_', '-');
            item.name = name;
            const auto& value = it.value();
            if (value.is_array()) {
                for (const auto& v : value)
                    item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
            } else if (value.is_string()) {
                item.inputs.push_back(value.get<std::string>());
            } else {
                item.inputs.push_back(value.dump());
            }
            items.push_back(std::move(item));
        }
        return items;
    }
};

struct CommonOpts {
    std::uint64_t seed = 0;
    int jobs = default_jobs();
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--seed", opts.seed, "base seed controlling all randomness");
    cmd->add_option("--jobs", opts.jobs, "worker count; 1 forces serial execution")
        ->check(CLI::PositiveNumber);
    cmd->set_config("--config", "", "JSON file whose keys mirror flags (flags win)");
    cmd->config_formatter(std::make_shared<JsonConfig>());
}

WeightKind weight_by_name(const std::string& name) {
    if (name == "linear") return WeightKind::linear;
    if (name == "quadratic") return WeightKind::quadratic;
    if (name == "exponential") return WeightKind::exponential;
    throw CLI::ValidationError("--weight", "expected linear, quadratic or exponential");
}

SplitMethod split_method_by_name(const std::string& name) {
    if (name == "cart") return SplitMethod::cart;
    if (name == "pfs") return SplitMethod::pfs;
    if (name == "mdfs") return SplitMethod::mdfs;
    if (name == "wefs") return SplitMethod::wefs;
    throw CLI::ValidationError("--method", "expected cart, pfs, mdfs or wefs");
}

Dataset load_with_schema(const std::string& data_path, const std::string& schema_name,
                         const std::string& response_column) {
    if (schema_name == "pima")
        return io::prepare_pima(io::load_csv(data_path, io::pima_schema()));
    if (schema_name == "forestfire")
        return io::prepare_forestfire(io::load_csv(data_path, io::forestfire_schema()));
    if (schema_name == "generic") {
        const auto header = io::read_csv_header(data_path);
        return io::load_csv(data_path, io::generic_schema(header, response_column));
    }
    throw CLI::ValidationError("--schema", "expected pima, forestfire or generic");
}

std::string theory_csv(const std::vector<theory::SplitEvaluation>& rows) {
    std::string out = "s,mu_L,mu_R,risk,g_cart,g_pfs,g_star\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.s,
                      r.mu_left, r.mu_right, r.risk, r.g_cart, r.g_pfs, r.g_star);
        out += buf;
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

void print_setting_result(const experiments::ExperimentSetting& setting,
                          const experiments::SettingResult& result) {
    std::printf("dgp=%s c=%.2f depth=%d rho=%.2f n=%zu replicates=%d\n",
                setting.dgp.name.c_str(), setting.c, setting.max_depth,
                setting.min_leaf_fraction, setting.n, setting.replicates);
    for (std::size_t mi = 0; mi < result.methods.size(); ++mi)
        std::printf("  %-8s MR %% = %s (%s)\n",
                    experiments::method_name(result.methods[mi]).c_str(),
                    io::format_percent(result.mean_mr[mi]).c_str(),
                    io::format_percent(result.std_mr[mi]).c_str());
    for (const auto& d : result.diagnostics) std::printf("  diagnostic: %s\n", d.c_str());
}

int run_cli(int argc, char** argv) {
    CLI::App app{"tree learning with modified final splits, plus the numeric theory lab"};
    app.require_subcommand(1);

    // theory ---------------------------------------------------------------
    auto* theory_cmd = app.add_subcommand(
        "theory", "evaluate population split objectives on an s-grid and write a CSV");
    CommonOpts theory_common;
    std::string theory_model = "sine", theory_out = "curves.csv";
    double theory_c = 0.75, theory_lambda = 0.1;
    std::string theory_weight = "linear";
    std::size_t theory_grid = 1000;
    theory_cmd->add_option("--model", theory_model,
                           "one of sine, capped-sine, linear, step, double-crossing");
    theory_cmd->add_option("--c", theory_c, "policy threshold in (0,1)");
    theory_cmd->add_option("--grid", theory_grid, "number of s-grid rows")
        ->check(CLI::PositiveNumber);
    theory_cmd->add_option("--lambda", theory_lambda, "penalty weight for the PFS column");
    theory_cmd->add_option("--weight", theory_weight, "W: linear, quadratic or exponential");
    theory_cmd->add_option("--out", theory_out, "output CSV path");
    add_common(theory_cmd, theory_common);

    // simulate --------------------------------------------------------------
    auto* sim_cmd = app.add_subcommand(
        "simulate", "run one synthetic setting (or dump a generated sample)");
    CommonOpts sim_common;
    std::string sim_dgp = "ball", sim_dump, sim_out;
    double sim_c = 0.6, sim_rho = 0.01, sim_lambda = 0.1;
    int sim_depth = 4, sim_reps = 50, sim_teacher = 100;
    std::size_t sim_n = 5000;
    bool sim_holdout = false, sim_plain_sigmoid = false, sim_unconstrained = false;
    std::vector<std::string> sim_methods = {"cart", "pfs", "mdfs", "wefs"};
    sim_cmd->add_option("--dgp", sim_dgp, "data generation process name");
    sim_cmd->add_option("--c", sim_c, "policy threshold");
    sim_cmd->add_option("--depth", sim_depth, "max tree depth");
    sim_cmd->add_option("--min-leaf-frac", sim_rho, "minimum leaf fraction rho");
    sim_cmd->add_option("--n", sim_n, "sample size");
    sim_cmd->add_option("--replicates", sim_reps, "replicate count");
    sim_cmd->add_option("--method", sim_methods,
                        "methods to fit (cart, pfs, mdfs, wefs, rf-cart, rf-mdfs)");
    sim_cmd->add_option("--lambda", sim_lambda, "PFS penalty weight");
    sim_cmd->add_option("--teacher-trees", sim_teacher, "forest size for rf-* methods");
    sim_cmd->add_flag("--holdout", sim_holdout, "score MR on an independent sample");
    sim_cmd->add_flag("--plain-sigmoid", sim_plain_sigmoid,
                      "disable the standardized sigmoid argument");
    sim_cmd->add_flag("--unconstrained-finals", sim_unconstrained,
                      "do not enforce the minimum leaf size on final-split candidates");
    sim_cmd->add_option("--dump-sample", sim_dump, "write one generated sample CSV and exit");
    sim_cmd->add_option("--out", sim_out, "directory for the setting report");
    add_common(sim_cmd, sim_common);

    // suite ------------------------------------------------------------------
    auto* suite_cmd = app.add_subcommand("suite", "run the simulation grid and write reports");
    CommonOpts suite_common;
    std::string suite_out = "results";
    bool suite_full = false, suite_smoke = false, suite_with_rf = false, suite_no_rf = false;
    bool suite_plain_sigmoid = false, suite_unconstrained = false;
    suite_cmd->add_flag("--full", suite_full, "full grid: 288 settings, 50 replicates");
    suite_cmd->add_flag("--smoke", suite_smoke, "reduced grid: depths {4,6}, 5 replicates");
    suite_cmd->add_flag("--with-rf", suite_with_rf, "add rf-cart and rf-mdfs to the grid");
    suite_cmd->add_flag("--no-rf", suite_no_rf, "drop rf methods from the smoke grid");
    suite_cmd->add_flag("--plain-sigmoid", suite_plain_sigmoid,
                        "disable the standardized sigmoid argument");
    suite_cmd->add_flag("--unconstrained-finals", suite_unconstrained,
                        "do not enforce the minimum leaf size on final-split candidates");
    suite_cmd->add_option("--out", suite_out, "output directory");
    add_common(suite_cmd, suite_common);

    // fit ---------------------------------------------------------------------
    auto* fit_cmd = app.add_subcommand("fit", "fit one tree on a CSV dataset");
    CommonOpts fit_common;
    std::string fit_data, fit_schema = "generic", fit_response, fit_method = "cart";
    std::string fit_weight = "linear", fit_out;
    double fit_c = 0.5, fit_rho = 0.01, fit_lambda = 0.1;
    int fit_depth = 4;
    fit_cmd->add_option("--data", fit_data, "input CSV path")->required();
    fit_cmd->add_option("--schema", fit_schema, "pima, forestfire or generic");
    fit_cmd->add_option("--response", fit_response,
                        "response column for the generic schema (default: last)");
    fit_cmd->add_option("--method", fit_method, "cart, pfs, mdfs or wefs");
    fit_cmd->add_option("--c", fit_c, "policy threshold");
    fit_cmd->add_option("--depth", fit_depth, "max tree depth");
    fit_cmd->add_option("--min-leaf-frac", fit_rho, "minimum leaf fraction rho");
    fit_cmd->add_option("--lambda", fit_lambda, "PFS penalty weight");
    fit_cmd->add_option("--weight", fit_weight, "W: linear, quadratic or exponential");
    fit_cmd->add_option("--out", fit_out, "write the tree as JSON to this path");
    add_common(fit_cmd, fit_common);

    // kd-fit -------------------------------------------------------------------
    auto* kd_cmd = app.add_subcommand("kd-fit",
                                      "fit a forest teacher, then a distilled student tree");
    CommonOpts kd_common;
    std::string kd_data, kd_schema = "generic", kd_response, kd_method = "cart";
    std::string kd_weight = "linear", kd_out;
    double kd_c = 0.5, kd_rho = 0.01, kd_lambda = 0.1;
    int kd_depth = 4, kd_teacher = 100;
    kd_cmd->add_option("--data", kd_data, "input CSV path")->required();
    kd_cmd->add_option("--schema", kd_schema, "pima, forestfire or generic");
    kd_cmd->add_option("--response", kd_response, "response column for the generic schema");
    kd_cmd->add_option("--method", kd_method, "cart, pfs, mdfs or wefs");
    kd_cmd->add_option("--c", kd_c, "policy threshold");
    kd_cmd->add_option("--depth", kd_depth, "max tree depth");
    kd_cmd->add_option("--min-leaf-frac", kd_rho, "minimum leaf fraction rho");
    kd_cmd->add_option("--lambda", kd_lambda, "PFS penalty weight");
    kd_cmd->add_option("--weight", kd_weight, "W: linear, quadratic or exponential");
    kd_cmd->add_option("--teacher-trees", kd_teacher, "forest size");
    kd_cmd->add_option("--out", kd_out, "write the student tree as JSON to this path");
    add_common(kd_cmd, kd_common);

    // case-study -----------------------------------------------------------------
    auto* case_cmd = app.add_subcommand(
        "case-study", "fit cart, mdfs, rf-cart and rf-mdfs and write tree/policy files");
    CommonOpts case_common;
    std::string case_name = "pima", case_data, case_out = "case_study";
    double case_c = 0.6;
    int case_depth = 3, case_teacher = 100;
    case_cmd->add_option("--name", case_name, "pima or forestfire");
    case_cmd->add_option("--data", case_data, "input CSV path")->required();
    case_cmd->add_option("--c", case_c, "policy threshold");
    case_cmd->add_option("--depth", case_depth, "tree depth");
    case_cmd->add_option("--teacher-trees", case_teacher, "forest size");
    case_cmd->add_option("--out", case_out, "output directory");
    add_common(case_cmd, case_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (theory_cmd->parsed()) {
        const auto model = theory::model_by_name(theory_model);
        const auto rows = theory::evaluate_grid(model, theory_c, theory_grid, theory_lambda,
                                                weight_by_name(theory_weight));
        write_file(theory_out, theory_csv(rows));
        const double s_cart = theory::cart_split(model);
        std::printf("%s: cart_split=%.6f risk(cart)=%.6f -> %s (%zu rows)\n",
                    model.name().c_str(), s_cart, theory::risk(model, theory_c, s_cart),
                    theory_out.c_str(), rows.size());
        return 0;
    }

    if (sim_cmd->parsed()) {
        const auto spec = dgp::make_dgp(sim_dgp, !sim_plain_sigmoid);
        if (!sim_dump.empty()) {
            const auto sample = dgp::sample(spec, sim_n, sim_common.seed);
            io::write_dataset_csv(sample.dataset, sim_dump);
            std::printf("wrote %zu rows of %s to %s\n", sim_n, spec.name.c_str(),
                        sim_dump.c_str());
            return 0;
        }
        experiments::ExperimentSetting setting;
        setting.dgp = spec;
        setting.c = sim_c;
        setting.max_depth = sim_depth;
        setting.min_leaf_fraction = sim_rho;
        setting.n = sim_n;
        setting.replicates = sim_reps;
        for (const auto& name : sim_methods)
            setting.methods.push_back(experiments::method_by_name(name));
        setting.base_seed = sim_common.seed;
        setting.teacher_trees = sim_teacher;
        setting.holdout = sim_holdout;
        setting.pfs_lambda = sim_lambda;
        setting.constrain_final_splits = !sim_unconstrained;
        const auto result = experiments::run_setting(setting, sim_common.jobs);
        print_setting_result(setting, result);
        if (!sim_out.empty()) {
            experiments::SuiteReport report;
            report.rows.push_back({setting, result});
            for (const auto& d : result.diagnostics) report.diagnostics.push_back(d);
            for (const auto& p : io::write_report(report, sim_out))
                std::printf("wrote %s\n", p.string().c_str());
        }
        return 0;
    }

    if (suite_cmd->parsed()) {
        if (suite_full && suite_smoke)
            throw CLI::ValidationError("--full/--smoke", "choose one grid");
        const bool smoke = suite_smoke;
        std::vector<experiments::Method> methods = experiments::tree_methods();
        const bool with_rf = suite_with_rf || (smoke && !suite_no_rf);
        if (with_rf) {
            methods.push_back(experiments::Method::rf_cart);
            methods.push_back(experiments::Method::rf_mdfs);
        }
        auto grid =
            smoke ? experiments::smoke_grid(suite_common.seed, methods, !suite_plain_sigmoid)
                  : experiments::full_grid(suite_common.seed, methods, !suite_plain_sigmoid);
        if (suite_unconstrained)
            for (auto& s : grid) s.constrain_final_splits = false;
        std::printf("running %zu settings on %d workers...\n", grid.size(),
                    suite_common.jobs);
        const auto report = experiments::run_suite(grid, suite_common.jobs);
        for (const auto& p : io::write_report(report, suite_out))
            std::printf("wrote %s\n", p.string().c_str());
        for (const auto& [m, wr] : report.win_vs_cart)
            std::printf("%s beats cart in %zu/%zu settings (%.2f%%)\n",
                        experiments::method_name(m).c_str(), wr.wins, wr.comparisons,
                        100.0 * wr.rate());
        if (report.rf_mdfs_vs_rf_cart.comparisons)
            std::printf("rf-mdfs beats rf-cart in %zu/%zu settings (%.2f%%)\n",
                        report.rf_mdfs_vs_rf_cart.wins, report.rf_mdfs_vs_rf_cart.comparisons,
                        100.0 * report.rf_mdfs_vs_rf_cart.rate());
        return 0;
    }

    if (fit_cmd->parsed() || kd_cmd->parsed()) {
        const bool kd = kd_cmd->parsed();
        const auto data = load_with_schema(kd ? kd_data : fit_data,
                                           kd ? kd_schema : fit_schema,
                                           kd ? kd_response : fit_response);
        TrainConfig cfg;
        cfg.max_depth = kd ? kd_depth : fit_depth;
        cfg.min_leaf_fraction = kd ? kd_rho : fit_rho;
        cfg.c = kd ? kd_c : fit_c;
        cfg.method = split_method_by_name(kd ? kd_method : fit_method);
        cfg.pfs_lambda = kd ? kd_lambda : fit_lambda;
        cfg.weight = weight_by_name(kd ? kd_weight : fit_weight);
        cfg.seed = kd ? kd_common.seed : fit_common.seed;

        Tree tree;
        if (kd) {
            ForestConfig fc;
            fc.n_trees = kd_teacher;
            fc.seed = mix_seed(kd_common.seed, 0xf0);
            fc.jobs = kd_common.jobs;
            const auto teacher = predict_proba(fit_forest(data, fc), data);
            tree = grow_tree_kd(data, teacher, cfg);
        } else {
            tree = grow_tree(data, cfg);
        }
        std::fputs(render_tree(tree).c_str(), stdout);
        const auto policy = policy_report(tree, cfg.c);
        std::printf("targeted leaves: %zu, cost: %.4f\n", policy.targeted_leaves.size(),
                    policy.cost);
        const std::string& out = kd ? kd_out : fit_out;
        if (!out.empty()) {
            write_file(out, tree_to_json(tree) + "\n");
            std::printf("wrote %s\n", out.c_str());
        }
        return 0;
    }

    if (case_cmd->parsed()) {
        Dataset data = load_with_schema(case_data, case_name, "");
        const auto result = experiments::run_case_study(case_name, data, case_c, case_depth,
                                                        case_common.seed, case_teacher,
                                                        case_common.jobs);
        for (const auto& p : io::write_case_study(result, case_out))
            std::printf("wrote %s\n", p.string().c_str());
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
