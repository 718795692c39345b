#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpcart/split.hpp"

namespace lpcart::theory {

struct OptimizationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Analytic univariate conditional-probability model on [0,1]: eta(x) with a
// density f (uniform by default). Cumulative integrals of f and eta*f are
// tabulated once on a fine grid (composite Simpson per cell), and the
// crossing points of eta(x) = c are located by bisection and cached, so the
// indicator integrands of the risk are always integrated on smooth pieces.
class EtaModel {
  public:
    EtaModel(std::string name, std::function<double(double)> eta);
    EtaModel(std::string name, std::function<double(double)> eta,
             std::function<double(double)> density);

    const std::string& name() const { return name_; }
    bool uniform_density() const { return uniform_; }

    double eta(double x) const { return eta_(x); }
    double density(double x) const { return uniform_ ? 1.0 : density_(x); }

    double cdf(double x) const;           // F(x)
    double eta_integral(double x) const;  // int_0^x eta dF
    double mean_response() const;         // int_0^1 eta dF
    double inverse_cdf(double u) const;

    // ascending solutions of eta(x) = c in (0,1), located to 1e-10
    std::vector<double> crossings(double c) const;
    // F-measure of {x in [a,b] : eta(x) > c}
    double measure_above(double c, double a, double b) const;

  private:
    double cell_integral(const std::vector<double>& nodes, double x) const;

    std::string name_;
    std::function<double(double)> eta_;
    std::function<double(double)> density_;
    bool uniform_ = true;

    // nodes at x = k/(2K): even entries are cell boundaries, odd are midpoints
    std::vector<double> f_nodes_, ef_nodes_;
    std::vector<double> cum_f_, cum_ef_;  // prefix integrals at cell boundaries

    mutable std::mutex cache_mutex_;
    mutable std::map<double, std::vector<double>> crossing_cache_;
};

struct NodeMeans {
    double mu_left = 0.0;
    double mu_right = 0.0;
};

// Conditional means of the response on each side of the split, by quadrature.
NodeMeans node_means(const EtaModel& model, double s);

// Misclassification risk of splitting at s with policy threshold c.
double risk(const EtaModel& model, double c, double s);

// Weighted child-variance objective and its modifications, population level.
double g_cart(const EtaModel& model, double s);
double g_pfs(const EtaModel& model, double s, double c, double lambda,
             WeightKind weight = WeightKind::linear,
             PfsCombine combine = PfsCombine::additive);
double g_star(const EtaModel& model, double s, double c);

// Global minimizer of g_cart over a fine grid with golden-section polish.
double cart_split(const EtaModel& model);

// |2 eta(s) - mu_L(s) - mu_R(s)|: zero at the variance-optimal split of any
// continuous non-constant model.
double midpoint_residual(const EtaModel& model, double s);

double pfs_split(const EtaModel& model, double c, double lambda,
                 WeightKind weight = WeightKind::linear,
                 PfsCombine combine = PfsCombine::additive);

// Global maximizer of g_star; requires a unique crossing of eta and c under
// a uniform density, and verifies |eta(result) - c| <= 1e-3.
double mdfs_split(const EtaModel& model, double c);

// Maximizer of g_star without the crossing-identity check, for diagnostics.
double g_star_maximizer(const EtaModel& model, double c);

// True when s_prime classifies every x at least as well as s and strictly
// better on a grid set of positive measure.
bool dominates(const EtaModel& model, double c, double s, double s_prime);

// Sample MDFS estimator: maximizes s|mean_L - c| + (1-s)|mean_R - c| (the
// literal split-location weights) over candidate midpoints inside
// (epsilon, 1 - epsilon).
double mdfs_estimate(std::span<const double> x_sample, std::span<const double> y_sample,
                     double c, double epsilon);

struct ConsistencyConfig {
    double epsilon = 0.05;
    std::vector<std::size_t> n_grid;
    int replicates = 50;
    std::uint64_t seed = 0;
    int jobs = 1;
};

struct ConsistencyRow {
    std::size_t n = 0;
    double median_abs_error = 0.0;
    double median_risk = 0.0;
};

std::vector<ConsistencyRow> consistency_experiment(const EtaModel& model, double c,
                                                   const ConsistencyConfig& config);

struct SplitEvaluation {
    double s, mu_left, mu_right, risk, g_cart, g_pfs, g_star;
};

std::vector<SplitEvaluation> evaluate_grid(const EtaModel& model, double c, std::size_t grid,
                                           double lambda = 0.1,
                                           WeightKind weight = WeightKind::linear);

// Shipped models.
EtaModel sine_model();             // (sin(2 pi x) + 1) / 2
EtaModel capped_sine_model();      // 1 on [0,1/4], the sine branch, 0 on [3/4,1]
EtaModel linear_model();           // 9x/11
EtaModel step_model();             // steep ramp through 0.4
EtaModel double_crossing_model();  // 0.9 - 1.6 (x - 1/2)^2
EtaModel model_by_name(const std::string& name);
std::vector<std::string> model_names();

double median(std::vector<double> values);

}  // namespace lpcart::theory
