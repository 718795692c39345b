#include "lpcart/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lpcart/parallel.hpp"
#include "lpcart/rng.hpp"

namespace lpcart::theory {

namespace {

constexpr std::size_t kCells = 100000;     // prefix-table resolution
constexpr std::size_t kGridPoints = 100000;  // optimizer bracketing grid
constexpr std::size_t kScanIntervals = 20000;  // crossing detection scan

double simpson(double a, double fa, double fm, double fb, double b) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

}  // namespace

EtaModel::EtaModel(std::string name, std::function<double(double)> eta)
    : name_(std::move(name)), eta_(std::move(eta)), uniform_(true) {
    f_nodes_.assign(2 * kCells + 1, 1.0);
    ef_nodes_.resize(2 * kCells + 1);
    for (std::size_t i = 0; i <= 2 * kCells; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(2 * kCells);
        ef_nodes_[i] = eta_(x);
    }
    cum_f_.resize(kCells + 1);
    cum_ef_.resize(kCells + 1);
    const double h = 1.0 / static_cast<double>(kCells);
    cum_f_[0] = cum_ef_[0] = 0.0;
    for (std::size_t k = 0; k < kCells; ++k) {
        const double a = static_cast<double>(k) * h;
        cum_f_[k + 1] = cum_f_[k] + h;
        cum_ef_[k + 1] = cum_ef_[k] + simpson(a, ef_nodes_[2 * k], ef_nodes_[2 * k + 1],
                                              ef_nodes_[2 * k + 2], a + h);
    }
}

EtaModel::EtaModel(std::string name, std::function<double(double)> eta,
                   std::function<double(double)> density)
    : name_(std::move(name)), eta_(std::move(eta)), density_(std::move(density)),
      uniform_(false) {
    f_nodes_.resize(2 * kCells + 1);
    ef_nodes_.resize(2 * kCells + 1);
    for (std::size_t i = 0; i <= 2 * kCells; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(2 * kCells);
        f_nodes_[i] = density_(x);
        ef_nodes_[i] = eta_(x) * f_nodes_[i];
    }
    cum_f_.resize(kCells + 1);
    cum_ef_.resize(kCells + 1);
    const double h = 1.0 / static_cast<double>(kCells);
    cum_f_[0] = cum_ef_[0] = 0.0;
    for (std::size_t k = 0; k < kCells; ++k) {
        const double a = static_cast<double>(k) * h;
        cum_f_[k + 1] = cum_f_[k] + simpson(a, f_nodes_[2 * k], f_nodes_[2 * k + 1],
                                            f_nodes_[2 * k + 2], a + h);
        cum_ef_[k + 1] = cum_ef_[k] + simpson(a, ef_nodes_[2 * k], ef_nodes_[2 * k + 1],
                                              ef_nodes_[2 * k + 2], a + h);
    }
    const double total = cum_f_.back();
    if (std::abs(total - 1.0) > 1e-6)
        throw std::invalid_argument("density does not integrate to 1 over [0,1]");
}

double EtaModel::cell_integral(const std::vector<double>& nodes, double x) const {
    // prefix value at the boundary below x plus a partial-cell Simpson term
    const auto& cum = (&nodes == &f_nodes_) ? cum_f_ : cum_ef_;
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return cum.back();
    const double h = 1.0 / static_cast<double>(kCells);
    auto k = static_cast<std::size_t>(x / h);
    if (k >= kCells) k = kCells - 1;
    double a = static_cast<double>(k) * h;
    if (a > x) {
        --k;
        a = static_cast<double>(k) * h;
    }
    const bool uniform_f = (&nodes == &f_nodes_) && uniform_;
    if (uniform_f) return cum[k] + (x - a);
    const double mid = 0.5 * (a + x);
    const double fa = nodes[2 * k];
    const double fm = (&nodes == &f_nodes_)
                          ? density_(mid)
                          : eta_(mid) * (uniform_ ? 1.0 : density_(mid));
    const double fb = (&nodes == &f_nodes_) ? density_(x)
                                            : eta_(x) * (uniform_ ? 1.0 : density_(x));
    return cum[k] + simpson(a, fa, fm, fb, x);
}

double EtaModel::cdf(double x) const {
    if (uniform_) return std::clamp(x, 0.0, 1.0);
    return cell_integral(f_nodes_, x);
}

double EtaModel::eta_integral(double x) const { return cell_integral(ef_nodes_, x); }

double EtaModel::mean_response() const { return cum_ef_.back(); }

double EtaModel::inverse_cdf(double u) const {
    if (uniform_) return u;
    auto it = std::lower_bound(cum_f_.begin(), cum_f_.end(), u);
    if (it == cum_f_.begin()) return 0.0;
    if (it == cum_f_.end()) return 1.0;
    const auto k = static_cast<std::size_t>(it - cum_f_.begin());
    const double h = 1.0 / static_cast<double>(kCells);
    const double lo = cum_f_[k - 1], hi = cum_f_[k];
    const double t = hi > lo ? (u - lo) / (hi - lo) : 0.5;
    return (static_cast<double>(k - 1) + t) * h;
}

std::vector<double> EtaModel::crossings(double c) const {
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = crossing_cache_.find(c);
        if (it != crossing_cache_.end()) return it->second;
    }
    std::vector<double> roots;
    const double h = 1.0 / static_cast<double>(kScanIntervals);
    double x0 = 0.0, g0 = eta_(0.0) - c;
    for (std::size_t i = 1; i <= kScanIntervals; ++i) {
        const double x1 = static_cast<double>(i) * h;
        const double g1 = eta_(x1) - c;
        if ((g0 > 0.0) != (g1 > 0.0)) {
            double lo = x0, hi = x1, glo = g0;
            while (hi - lo > 1e-10) {
                const double mid = 0.5 * (lo + hi);
                const double gm = eta_(mid) - c;
                if ((glo > 0.0) != (gm > 0.0)) {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        x0 = x1;
        g0 = g1;
    }
    std::lock_guard<std::mutex> lock(cache_mutex_);
    crossing_cache_[c] = roots;
    return roots;
}

double EtaModel::measure_above(double c, double a, double b) const {
    if (b <= a) return 0.0;
    auto roots = crossings(c);
    std::vector<double> cuts;
    cuts.push_back(a);
    for (double r : roots)
        if (r > a && r < b) cuts.push_back(r);
    cuts.push_back(b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        if (eta_(mid) > c) total += cdf(cuts[i + 1]) - cdf(cuts[i]);
    }
    return total;
}

namespace {

void require_interior(double s, const char* what) {
    if (!(s > 0.0) || !(s < 1.0))
        throw std::domain_error(std::string(what) + " must lie in (0, 1)");
}

// exhaustive bracketing grid followed by golden-section polish; the risk and
// distance objectives are not differentiable everywhere, so the search is
// derivative-free throughout
double grid_golden_min(const std::function<double(double)>& f, double tol = 1e-7) {
    const double h = 1.0 / static_cast<double>(kGridPoints);
    double best_s = h, best_v = f(h);
    double lo_v = best_v, hi_v = best_v;
    for (std::size_t i = 2; i < kGridPoints; ++i) {
        const double s = static_cast<double>(i) * h;
        const double v = f(s);
        lo_v = std::min(lo_v, v);
        hi_v = std::max(hi_v, v);
        if (v < best_v) {
            best_v = v;
            best_s = s;
        }
    }
    if (hi_v - lo_v < 1e-12) throw OptimizationError("flat objective");

    double a = std::max(h * 0.5, best_s - h);
    double b = std::min(1.0 - h * 0.5, best_s + h);
    const double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    const double mid = 0.5 * (a + b);
    return f(mid) <= best_v ? mid : best_s;
}

}  // namespace

NodeMeans node_means(const EtaModel& model, double s) {
    require_interior(s, "split s");
    const double F = model.cdf(s);
    const double el = model.eta_integral(s);
    const double total = model.mean_response();
    NodeMeans m;
    m.mu_left = el / F;
    m.mu_right = (total - el) / (1.0 - F);
    return m;
}

double risk(const EtaModel& model, double c, double s) {
    require_interior(s, "split s");
    require_interior(c, "threshold c");
    const auto m = node_means(model, s);
    const double above_left = model.measure_above(c, 0.0, s);
    const double above_right = model.measure_above(c, s, 1.0);
    const double F = model.cdf(s);
    const double left_wrong = m.mu_left <= c ? above_left : F - above_left;
    const double right_wrong = m.mu_right <= c ? above_right : (1.0 - F) - above_right;
    return left_wrong + right_wrong;
}

double g_cart(const EtaModel& model, double s) {
    require_interior(s, "split s");
    const auto m = node_means(model, s);
    const double F = model.cdf(s);
    return F * (m.mu_left - m.mu_left * m.mu_left) +
           (1.0 - F) * (m.mu_right - m.mu_right * m.mu_right);
}

double g_pfs(const EtaModel& model, double s, double c, double lambda, WeightKind weight,
             PfsCombine combine) {
    const auto m = node_means(model, s);
    const double F = model.cdf(s);
    const double impurity = F * (m.mu_left - m.mu_left * m.mu_left) +
                            (1.0 - F) * (m.mu_right - m.mu_right * m.mu_right);
    const double penalty = F * weight_eval(weight, std::abs(m.mu_left - c)) +
                           (1.0 - F) * weight_eval(weight, std::abs(m.mu_right - c));
    if (combine == PfsCombine::additive) return impurity + lambda * penalty;
    return (1.0 - lambda) * impurity + lambda * penalty;
}

double g_star(const EtaModel& model, double s, double c) {
    const auto m = node_means(model, s);
    return s * std::abs(m.mu_left - c) + (1.0 - s) * std::abs(m.mu_right - c);
}

double cart_split(const EtaModel& model) {
    return grid_golden_min([&](double s) { return g_cart(model, s); });
}

double midpoint_residual(const EtaModel& model, double s) {
    require_interior(s, "split s");
    const auto m = node_means(model, s);
    return std::abs(2.0 * model.eta(s) - m.mu_left - m.mu_right);
}

double pfs_split(const EtaModel& model, double c, double lambda, WeightKind weight,
                 PfsCombine combine) {
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    return grid_golden_min(
        [&](double s) { return g_pfs(model, s, c, lambda, weight, combine); });
}

double g_star_maximizer(const EtaModel& model, double c) {
    return grid_golden_min([&](double s) { return -g_star(model, s, c); });
}

double mdfs_split(const EtaModel& model, double c) {
    const double s = g_star_maximizer(model, c);
    if (std::abs(model.eta(s) - c) > 1e-3)
        throw OptimizationError(
            "g_star maximizer does not solve eta(s) = c; the model must have a unique "
            "crossing under a uniform density");
    return s;
}

bool dominates(const EtaModel& model, double c, double s, double s_prime) {
    require_interior(s, "split s");
    require_interior(s_prime, "split s'");
    const auto ms = node_means(model, s);
    const auto mp = node_means(model, s_prime);
    constexpr std::size_t kDomGrid = 20001;
    bool strictly_better_somewhere = false;
    for (std::size_t i = 0; i < kDomGrid; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(kDomGrid);
        const bool above = model.eta(x) > c;
        const bool target_s = (x <= s ? ms.mu_left : ms.mu_right) > c;
        const bool target_p = (x <= s_prime ? mp.mu_left : mp.mu_right) > c;
        const bool correct_s = above == target_s;
        const bool correct_p = above == target_p;
        if (correct_s && !correct_p) return false;
        if (!correct_s && correct_p) strictly_better_somewhere = true;
    }
    return strictly_better_somewhere;
}

double mdfs_estimate(std::span<const double> x_sample, std::span<const double> y_sample,
                     double c, double epsilon) {
    if (x_sample.size() != y_sample.size())
        throw std::invalid_argument("x and y sample lengths differ");
    if (!(epsilon > 0.0) || !(epsilon < 0.5))
        throw std::invalid_argument("epsilon must lie in (0, 0.5)");
    const std::size_t n = x_sample.size();
    if (n < 2) throw std::invalid_argument("need at least two samples");

    std::vector<std::uint32_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return x_sample[a] < x_sample[b];
    });

    double total = 0.0;
    for (double y : y_sample) total += y;

    double best_s = 0.0, best_g = 0.0;
    bool found = false;
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += y_sample[order[i]];
        const double a = x_sample[order[i]];
        const double b = x_sample[order[i + 1]];
        if (b <= a) continue;
        const double s = 0.5 * (a + b);
        if (s <= epsilon || s >= 1.0 - epsilon) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        const double mean_l = nl ? left_sum / static_cast<double>(nl) : 0.0;
        const double mean_r = nr ? (total - left_sum) / static_cast<double>(nr) : 0.0;
        const double g = s * std::abs(mean_l - c) + (1.0 - s) * std::abs(mean_r - c);
        if (!found || g > best_g) {
            best_g = g;
            best_s = s;
            found = true;
        }
    }
    if (!found)
        throw std::invalid_argument("no candidate split inside (epsilon, 1 - epsilon)");
    return best_s;
}

std::vector<ConsistencyRow> consistency_experiment(const EtaModel& model, double c,
                                                   const ConsistencyConfig& config) {
    std::vector<ConsistencyRow> rows;
    const double s_ref = g_star_maximizer(model, c);
    model.crossings(c);  // warm the cache before fanning out

    for (std::size_t gi = 0; gi < config.n_grid.size(); ++gi) {
        const std::size_t n = config.n_grid[gi];
        const auto reps = static_cast<std::size_t>(config.replicates);
        std::vector<double> errs(reps), risks(reps);
        parallel_for(reps, config.jobs, [&](std::size_t rep) {
            Rng rng(mix_seed(config.seed, gi, rep));
            std::vector<double> xs(n), ys(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = rng.uniform();
                xs[i] = model.uniform_density() ? u : model.inverse_cdf(u);
                ys[i] = rng.bernoulli(model.eta(xs[i])) ? 1.0 : 0.0;
            }
            const double s_hat = mdfs_estimate(xs, ys, c, config.epsilon);
            errs[rep] = std::abs(s_hat - s_ref);
            risks[rep] = risk(model, c, s_hat);
        });
        rows.push_back({n, median(errs), median(risks)});
    }
    return rows;
}

std::vector<SplitEvaluation> evaluate_grid(const EtaModel& model, double c, std::size_t grid,
                                           double lambda, WeightKind weight) {
    std::vector<SplitEvaluation> rows;
    rows.reserve(grid);
    for (std::size_t i = 1; i <= grid; ++i) {
        const double s = static_cast<double>(i) / static_cast<double>(grid + 1);
        const auto m = node_means(model, s);
        rows.push_back({s, m.mu_left, m.mu_right, risk(model, c, s), g_cart(model, s),
                        g_pfs(model, s, c, lambda, weight, PfsCombine::additive),
                        g_star(model, s, c)});
    }
    return rows;
}

EtaModel sine_model() {
    return EtaModel("sine", [](double x) {
        return 0.5 * (std::sin(2.0 * std::numbers::pi * x) + 1.0);
    });
}

EtaModel capped_sine_model() {
    return EtaModel("capped-sine", [](double x) {
        if (x <= 0.25) return 1.0;
        if (x >= 0.75) return 0.0;
        return 0.5 * (std::sin(2.0 * std::numbers::pi * x) + 1.0);
    });
}

EtaModel linear_model() {
    return EtaModel("linear", [](double x) { return 9.0 * x / 11.0; });
}

EtaModel step_model() {
    // continuous steep ramp: 1 until 0.39, 0 from 0.41, linear in between
    return EtaModel("step", [](double x) {
        if (x <= 0.39) return 1.0;
        if (x >= 0.41) return 0.0;
        return (0.41 - x) / 0.02;
    });
}

EtaModel double_crossing_model() {
    return EtaModel("double-crossing", [](double x) {
        return 0.9 - 1.6 * (x - 0.5) * (x - 0.5);
    });
}

EtaModel model_by_name(const std::string& name) {
    if (name == "sine") return sine_model();
    if (name == "capped-sine") return capped_sine_model();
    if (name == "linear") return linear_model();
    if (name == "step") return step_model();
    if (name == "double-crossing") return double_crossing_model();
    throw std::invalid_argument("unknown model '" + name +
                                "'; expected one of sine, capped-sine, linear, step, "
                                "double-crossing");
}

std::vector<std::string> model_names() {
    return {"sine", "capped-sine", "linear", "step", "double-crossing"};
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size() / 2;
    if (values.size() % 2 == 1) return values[m];
    return 0.5 * (values[m - 1] + values[m]);
}

}  // namespace lpcart::theory
