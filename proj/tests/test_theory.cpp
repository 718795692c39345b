#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lpcart/rng.hpp"
#include "lpcart/theory.hpp"

using namespace lpcart;
using namespace lpcart::theory;

namespace {

constexpr double kPi = std::numbers::pi;

// direct composite-Simpson oracle, independent of the prefix-table path
double simpson_oracle(const std::function<double(double)>& g, double a, double b,
                      int panels = 20000) {
    double sum = g(a) + g(b);
    for (int i = 1; i < panels; ++i)
        sum += g(a + (b - a) * i / panels) * (i % 2 ? 4.0 : 2.0);
    return sum * (b - a) / (3.0 * panels);
}

}  // namespace

TEST_CASE("node means match closed forms on the sine model") {
    auto sine = sine_model();
    auto m = node_means(sine, 0.5);
    CHECK(m.mu_left == doctest::Approx(0.5 + 1.0 / kPi).epsilon(1e-6));
    CHECK(m.mu_right == doctest::Approx(0.5 - 1.0 / kPi).epsilon(1e-6));

    auto m2 = node_means(sine, 5.0 / 12.0);
    CHECK(m2.mu_left == doctest::Approx(0.856).epsilon(2e-3));
    CHECK(m2.mu_right == doctest::Approx(0.246).epsilon(2e-3));

    CHECK_THROWS_AS(node_means(sine, 0.0), std::domain_error);
    CHECK_THROWS_AS(node_means(sine, 1.0), std::domain_error);
}

TEST_CASE("node means match closed forms on the linear model") {
    auto linear = linear_model();
    auto m = node_means(linear, 0.5);
    CHECK(m.mu_left == doctest::Approx(9.0 / 44.0).epsilon(1e-7));
    CHECK(m.mu_right == doctest::Approx(27.0 / 44.0).epsilon(1e-7));
}

TEST_CASE("node means under a non-uniform density") {
    // f(x) = 2x, eta(x) = x: mu_L(s) = (2/3) s
    EtaModel model("tilted", [](double x) { return x; }, [](double x) { return 2.0 * x; });
    auto m = node_means(model, 0.6);
    CHECK(m.mu_left == doctest::Approx(0.4).epsilon(1e-6));
    CHECK(m.mu_left * model.cdf(0.6) + m.mu_right * (1 - model.cdf(0.6)) ==
          doctest::Approx(model.mean_response()).epsilon(1e-9));
    CHECK_THROWS_AS(EtaModel("bad", [](double) { return 0.5; },
                             [](double) { return 2.0; }),
                    std::invalid_argument);
}

TEST_CASE("law of total mean holds on every shipped model") {
    Rng rng(5);
    for (const auto& name : model_names()) {
        auto model = model_by_name(name);
        for (int i = 0; i < 10; ++i) {
            const double s = 0.05 + 0.9 * rng.uniform();
            auto m = node_means(model, s);
            const double total = model.cdf(s) * m.mu_left + (1 - model.cdf(s)) * m.mu_right;
            CHECK(std::abs(total - model.mean_response()) <= 1e-6);
        }
    }
}

TEST_CASE("risk matches hand-computed sine values") {
    auto sine = sine_model();
    // eta > 0.75 exactly on (1/12, 5/12)
    CHECK(risk(sine, 0.75, 0.5) == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
    CHECK(risk(sine, 0.75, 5.0 / 12.0) == doctest::Approx(1.0 / 12.0).epsilon(1e-6));
    CHECK(risk(sine, 0.75, 0.5) - risk(sine, 0.75, 5.0 / 12.0) ==
          doctest::Approx(1.0 / 12.0).epsilon(1e-4));
}

TEST_CASE("risk is zero when classification is everywhere correct") {
    EtaModel high("high", [](double x) { return 0.6 + 0.3 * x; });
    CHECK(risk(high, 0.5, 0.5) == doctest::Approx(0.0).epsilon(1e-10));

    auto linear = linear_model();
    CHECK(risk(linear, 0.75, 11.0 / 12.0) <= 1e-4);
}

TEST_CASE("cart_split finds the variance-optimal split") {
    CHECK(cart_split(sine_model()) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(cart_split(linear_model()) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(cart_split(capped_sine_model()) == doctest::Approx(0.5).epsilon(1e-4));

    EtaModel flat("flat", [](double) { return 0.4; });
    CHECK_THROWS_AS(cart_split(flat), OptimizationError);
}

TEST_CASE("g_cart agrees with a direct quadrature oracle") {
    auto sine = sine_model();
    for (double s : {0.2, 0.5, 0.77}) {
        const double el = simpson_oracle([&](double x) { return sine.eta(x); }, 0.0, s);
        const double er = simpson_oracle([&](double x) { return sine.eta(x); }, s, 1.0);
        const double mu_l = el / s, mu_r = er / (1.0 - s);
        const double oracle =
            s * (mu_l - mu_l * mu_l) + (1.0 - s) * (mu_r - mu_r * mu_r);
        CHECK(g_cart(sine, s) == doctest::Approx(oracle).epsilon(1e-8));
    }
}

TEST_CASE("midpoint residual vanishes at optimal splits only") {
    auto sine = sine_model();
    CHECK(midpoint_residual(sine, cart_split(sine)) <= 1e-4);
    CHECK(midpoint_residual(sine, 0.3) > 0.01);

    for (const auto& name : model_names()) {
        auto model = model_by_name(name);
        CHECK(midpoint_residual(model, cart_split(model)) <= 1e-3);
    }
}

TEST_CASE("pfs_split reduces to cart at lambda zero and reduces risk on the sine") {
    auto sine = sine_model();
    CHECK(std::abs(pfs_split(sine, 0.75, 0.0) - cart_split(sine)) <= 1e-5);

    const double s_pfs = pfs_split(sine, 0.75, 0.1);
    CHECK(s_pfs > 5.0 / 12.0);
    CHECK(s_pfs < 0.5);
    CHECK(risk(sine, 0.75, s_pfs) < risk(sine, 0.75, 0.5));
}

TEST_CASE("pfs_split leaves the split unchanged when c is below both node means") {
    auto sine = sine_model();
    // with W(d)=1-d and both means above c the penalty is constant in s
    CHECK(std::abs(pfs_split(sine, 0.01, 0.1) - cart_split(sine)) <= 1e-3);
}

TEST_CASE("mdfs_split identifies the crossing of eta and c") {
    CHECK(mdfs_split(linear_model(), 0.75) == doctest::Approx(11.0 / 12.0).epsilon(1e-4));
    CHECK(mdfs_split(capped_sine_model(), 0.75) ==
          doctest::Approx(5.0 / 12.0).epsilon(1e-4));

    EtaModel square("square", [](double x) { return x * x; });
    CHECK(mdfs_split(square, 0.09) == doctest::Approx(0.3).epsilon(1e-4));

    CHECK(risk(linear_model(), 0.75, mdfs_split(linear_model(), 0.75)) <=
          risk(linear_model(), 0.75, cart_split(linear_model())) + 1e-6);
}

TEST_CASE("g_star is constant when both node means share a side of c") {
    auto linear = linear_model();
    // mu_R(s) <= 0.75 for s <= 5/6, so both means sit below c on (0, 5/6)
    const double ref = g_star(linear, 0.2, 0.75);
    CHECK(g_star(linear, 0.5, 0.75) == doctest::Approx(ref).epsilon(1e-6));
    CHECK(g_star(linear, 0.7, 0.75) == doctest::Approx(ref).epsilon(1e-6));

    EtaModel high("high", [](double x) { return 0.6 + 0.3 * x; });
    CHECK(g_star(high, 0.3, 0.5) == doctest::Approx(g_star(high, 0.8, 0.5)).epsilon(1e-6));
}

TEST_CASE("dominance on the sine model at c = 0.75") {
    auto sine = sine_model();
    CHECK(dominates(sine, 0.75, 0.5, 5.0 / 12.0));
    CHECK_FALSE(dominates(sine, 0.75, 0.5, 0.5));
    CHECK_FALSE(dominates(sine, 0.75, 5.0 / 12.0, 0.5));
}

TEST_CASE("dominance implies strictly smaller risk") {
    auto sine = sine_model();
    for (double s_prime : {5.0 / 12.0, 0.44, 0.47, 0.49}) {
        REQUIRE(dominates(sine, 0.75, 0.5, s_prime));
        CHECK(risk(sine, 0.75, s_prime) < risk(sine, 0.75, 0.5));
    }
}

TEST_CASE("risk is monotone along the dominance interval") {
    auto sine = sine_model();
    double prev = risk(sine, 0.75, 0.5);
    for (int i = 1; i <= 100; ++i) {
        const double s = 0.5 - i * (0.5 - 5.0 / 12.0) / 100.0;
        const double r = risk(sine, 0.75, s);
        CHECK(r <= prev + 1e-9);
        prev = r;
    }
}

TEST_CASE("the double-crossing model fails mdfs point identification") {
    auto dc = double_crossing_model();
    CHECK(dc.crossings(0.75).size() == 2);
    CHECK_THROWS_AS(mdfs_split(dc, 0.75), OptimizationError);
    // the unchecked maximizer still exists for diagnostics
    const double s = g_star_maximizer(dc, 0.75);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
}

TEST_CASE("mdfs_estimate on a noiseless step sample") {
    const std::size_t n = 2000;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        ys[i] = xs[i] <= 0.4 ? 1.0 : 0.0;
    }
    const double s_hat = mdfs_estimate(xs, ys, 0.5, 0.05);
    CHECK(std::abs(s_hat - 0.4) <= 1.0 / static_cast<double>(n));

    CHECK_THROWS_AS(mdfs_estimate(xs, ys, 0.5, 0.499999), std::invalid_argument);
    CHECK_THROWS_AS(mdfs_estimate(std::vector<double>{0.5},
                                  std::vector<double>{1.0}, 0.5, 0.05),
                    std::invalid_argument);
}

TEST_CASE("mdfs_estimate sharpens with sample size on the linear model") {
    auto linear = linear_model();
    Rng rng(77);
    auto run = [&](std::size_t n, int reps) {
        std::vector<double> errs;
        for (int rep = 0; rep < reps; ++rep) {
            std::vector<double> xs(n), ys(n);
            for (std::size_t i = 0; i < n; ++i) {
                xs[i] = rng.uniform();
                ys[i] = rng.bernoulli(linear.eta(xs[i])) ? 1.0 : 0.0;
            }
            errs.push_back(std::abs(mdfs_estimate(xs, ys, 0.75, 0.05) - 11.0 / 12.0));
        }
        return median(errs);
    };
    const double med_small = run(1000, 15);
    const double med_large = run(100000, 15);
    CHECK(med_large < med_small);
    CHECK(med_large < 0.02);
}

TEST_CASE("consistency experiment produces non-increasing medians") {
    auto linear = linear_model();
    ConsistencyConfig cfg;
    cfg.n_grid = {2000, 20000};
    cfg.replicates = 12;
    cfg.seed = 3;
    cfg.jobs = 2;
    auto rows = consistency_experiment(linear, 0.75, cfg);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 2000);
    CHECK(rows[1].median_abs_error <= rows[0].median_abs_error);
    CHECK(rows[1].median_risk <= rows[0].median_risk);

    // identical configs reproduce identical tables
    auto again = consistency_experiment(linear, 0.75, cfg);
    CHECK(again[0].median_abs_error == rows[0].median_abs_error);
    CHECK(again[1].median_risk == rows[1].median_risk);
}

TEST_CASE("consistency diagnostics run on the step and double-crossing models") {
    ConsistencyConfig cfg;
    cfg.n_grid = {500};
    cfg.replicates = 9;
    cfg.seed = 4;
    auto step_rows = consistency_experiment(step_model(), 0.5, cfg);
    REQUIRE(step_rows.size() == 1);
    CHECK(step_rows[0].median_risk <= 0.02);

    auto dc_rows = consistency_experiment(double_crossing_model(), 0.75, cfg);
    REQUIRE(dc_rows.size() == 1);  // table produced, nothing asserted beyond shape
}

TEST_CASE("evaluate_grid emits the requested rows with finite values") {
    auto rows = evaluate_grid(sine_model(), 0.75, 37);
    REQUIRE(rows.size() == 37);
    for (const auto& r : rows) {
        CHECK(r.s > 0.0);
        CHECK(r.s < 1.0);
        for (double v : {r.mu_left, r.mu_right, r.risk, r.g_cart, r.g_pfs, r.g_star})
            CHECK(std::isfinite(v));
        CHECK(r.risk >= 0.0);
    }
}

TEST_CASE("model registry") {
    CHECK(model_names().size() == 5);
    for (const auto& name : model_names()) CHECK(model_by_name(name).name() == name);
    CHECK_THROWS_AS(model_by_name("nope"), std::invalid_argument);
}
