#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lpcart/dataset.hpp"
#include "lpcart/dgp.hpp"
#include "lpcart/experiments.hpp"
#include "lpcart/forest.hpp"
#include "lpcart/theory.hpp"
#include "lpcart/tree.hpp"

namespace py = pybind11;
using namespace lpcart;

namespace {

SplitMethod parse_method(const std::string& name) {
    if (name == "cart") return SplitMethod::cart;
    if (name == "pfs") return SplitMethod::pfs;
    if (name == "mdfs") return SplitMethod::mdfs;
    if (name == "wefs") return SplitMethod::wefs;
    throw std::invalid_argument("method must be cart, pfs, mdfs or wefs");
}

WeightKind parse_weight(const std::string& name) {
    if (name == "linear") return WeightKind::linear;
    if (name == "quadratic") return WeightKind::quadratic;
    if (name == "exponential") return WeightKind::exponential;
    throw std::invalid_argument("weight must be linear, quadratic or exponential");
}

}  // namespace

PYBIND11_MODULE(_lpcart, m) {
    m.doc() = "tree learning with modified final splits";

    py::class_<Dataset>(m, "Dataset")
        .def(py::init([](std::vector<std::string> names,
                         std::vector<std::vector<double>> columns,
                         std::vector<double> response,
                         std::optional<std::vector<double>> eta_true) {
                 return validate_dataset(std::move(names), std::move(columns),
                                         std::move(response), std::move(eta_true));
             }),
             py::arg("names"), py::arg("columns"), py::arg("response"),
             py::arg("eta_true") = std::nullopt)
        .def_property_readonly("n_rows", &Dataset::n_rows)
        .def_property_readonly("n_features", &Dataset::n_features)
        .def_property_readonly("feature_names", &Dataset::feature_names)
        .def_property_readonly("binary_response", &Dataset::binary_response)
        .def("response",
             [](const Dataset& d) {
                 return std::vector<double>(d.response().begin(), d.response().end());
             })
        .def("eta_true", [](const Dataset& d) -> std::optional<std::vector<double>> {
            if (!d.has_eta_true()) return std::nullopt;
            return std::vector<double>(d.eta_true().begin(), d.eta_true().end());
        });

    py::class_<NodeStats>(m, "NodeStats")
        .def_readonly("count", &NodeStats::count)
        .def_readonly("mean", &NodeStats::mean)
        .def_readonly("variance", &NodeStats::variance);
    m.def("node_stats",
          [](const std::vector<double>& ys) { return node_stats(ys); });

    py::class_<Tree>(m, "Tree")
        .def_property_readonly("n_features", [](const Tree& t) { return t.n_features; })
        .def("render", [](const Tree& t) { return render_tree(t); })
        .def("to_json", &tree_to_json);
    m.def("tree_from_json", &tree_from_json);

    m.def(
        "grow_tree",
        [](const Dataset& data, int max_depth, double min_leaf_fraction, double c,
           const std::string& method, double pfs_lambda, const std::string& weight) {
            TrainConfig cfg;
            cfg.max_depth = max_depth;
            cfg.min_leaf_fraction = min_leaf_fraction;
            cfg.c = c;
            cfg.method = parse_method(method);
            cfg.pfs_lambda = pfs_lambda;
            cfg.weight = parse_weight(weight);
            return grow_tree(data, cfg);
        },
        py::arg("dataset"), py::arg("max_depth") = 4, py::arg("min_leaf_fraction") = 0.01,
        py::arg("c") = 0.5, py::arg("method") = "cart", py::arg("pfs_lambda") = 0.1,
        py::arg("weight") = "linear");

    m.def(
        "grow_tree_kd",
        [](const Dataset& data, const std::vector<double>& probs, int max_depth,
           double min_leaf_fraction, double c, const std::string& method, double pfs_lambda,
           const std::string& weight) {
            TrainConfig cfg;
            cfg.max_depth = max_depth;
            cfg.min_leaf_fraction = min_leaf_fraction;
            cfg.c = c;
            cfg.method = parse_method(method);
            cfg.pfs_lambda = pfs_lambda;
            cfg.weight = parse_weight(weight);
            return grow_tree_kd(data, probs, cfg);
        },
        py::arg("dataset"), py::arg("teacher_probs"), py::arg("max_depth") = 4,
        py::arg("min_leaf_fraction") = 0.01, py::arg("c") = 0.5, py::arg("method") = "cart",
        py::arg("pfs_lambda") = 0.1, py::arg("weight") = "linear");

    m.def("predict", [](const Tree& tree, const Dataset& data) { return predict(tree, data); });

    py::class_<PolicyReport>(m, "PolicyReport")
        .def_property_readonly("cost", [](const PolicyReport& r) { return r.cost; })
        .def_property_readonly("total_samples",
                               [](const PolicyReport& r) { return r.total_samples; })
        .def("targeted",
             [](const PolicyReport& r) {
                 std::vector<std::pair<double, std::size_t>> out;
                 for (const auto& leaf : r.targeted_leaves)
                     out.emplace_back(leaf.value, leaf.samples);
                 return out;
             });
    m.def("policy_report", [](const Tree& t, double c) { return policy_report(t, c); });

    py::class_<Forest>(m, "Forest");
    m.def(
        "fit_forest",
        [](const Dataset& data, int n_trees, bool bootstrap, const std::string& max_features,
           std::uint64_t seed, int jobs) {
            ForestConfig cfg;
            cfg.n_trees = n_trees;
            cfg.bootstrap = bootstrap;
            if (max_features == "sqrt")
                cfg.max_features = MaxFeaturesRule::sqrt_rule;
            else if (max_features == "all")
                cfg.max_features = MaxFeaturesRule::all;
            else
                throw std::invalid_argument("max_features must be sqrt or all");
            cfg.seed = seed;
            cfg.jobs = jobs;
            return fit_forest(data, cfg);
        },
        py::arg("dataset"), py::arg("n_trees") = 100, py::arg("bootstrap") = true,
        py::arg("max_features") = "sqrt", py::arg("seed") = 0, py::arg("jobs") = 1);
    m.def("predict_proba",
          [](const Forest& f, const Dataset& d) { return predict_proba(f, d); });

    m.def(
        "sample_dgp",
        [](const std::string& name, std::size_t n, std::uint64_t seed, bool standardize,
           bool poly2_alt) {
            return dgp::sample(dgp::make_dgp(name, standardize, poly2_alt), n, seed).dataset;
        },
        py::arg("name"), py::arg("n"), py::arg("seed") = 0, py::arg("standardize") = true,
        py::arg("poly2_alt") = false);
    m.def("dgp_names", [] {
        std::vector<std::string> names;
        for (auto kind : dgp::all_dgp_kinds()) names.push_back(dgp::dgp_name(kind));
        return names;
    });

    m.def("mr", [](const std::vector<double>& preds, const std::vector<double>& eta,
                   double c) { return experiments::mr(preds, eta, c); });

    py::class_<theory::EtaModel>(m, "EtaModel")
        .def_property_readonly("name", &theory::EtaModel::name)
        .def("eta", &theory::EtaModel::eta);
    m.def("eta_model", &theory::model_by_name);
    m.def("eta_model_names", &theory::model_names);
    m.def("node_means", [](const theory::EtaModel& model, double s) {
        const auto nm = theory::node_means(model, s);
        return std::make_pair(nm.mu_left, nm.mu_right);
    });
    m.def("risk", &theory::risk);
    m.def("cart_split", &theory::cart_split);
    m.def("midpoint_residual", &theory::midpoint_residual);
    m.def(
        "pfs_split",
        [](const theory::EtaModel& model, double c, double lambda, const std::string& weight) {
            return theory::pfs_split(model, c, lambda, parse_weight(weight));
        },
        py::arg("model"), py::arg("c"), py::arg("lambda_") = 0.1,
        py::arg("weight") = "linear");
    m.def("mdfs_split", &theory::mdfs_split);
    m.def("dominates", &theory::dominates);
    m.def("g_cart", &theory::g_cart);
    m.def("g_star", &theory::g_star);
    m.def("mdfs_estimate",
          [](const std::vector<double>& xs, const std::vector<double>& ys, double c,
             double epsilon) { return theory::mdfs_estimate(xs, ys, c, epsilon); });
}
