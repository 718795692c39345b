#include <doctest.h>

#include <cmath>

#include "lpcart/dgp.hpp"
#include "lpcart/rng.hpp"

using namespace lpcart;
using namespace lpcart::dgp;

TEST_CASE("center constants match analytic moments") {
    // E[X^k] = 1/(k+1) for U(0,1)
    CHECK(center_constant(DgpKind::ball, 200000, 11) == doctest::Approx(1.0).epsilon(5e-3));
    CHECK(center_constant(DgpKind::collinear, 200000, 11) ==
          doctest::Approx(3.0).epsilon(5e-3));
    CHECK(center_constant(DgpKind::poly1, 200000, 11) == doctest::Approx(3.7).epsilon(5e-3));
    CHECK(center_constant(DgpKind::poly2, 200000, 11) == doctest::Approx(3.7).epsilon(5e-3));
}

TEST_CASE("spec caches shapes and centers") {
    auto ball = make_dgp(DgpKind::ball);
    CHECK(ball.n_features == 5);
    CHECK(ball.center == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(ball.scale > 0.4);

    auto plain = make_dgp(DgpKind::ball, false);
    CHECK(plain.scale == 1.0);

    CHECK(make_dgp(DgpKind::collinear).n_features == 6);
    CHECK(make_dgp("friedman2").name == "friedman2");
    CHECK_THROWS_AS(dgp_by_name("nonsense"), std::invalid_argument);
}

TEST_CASE("eval_f pins the printed formulas") {
    auto at = [](DgpKind kind, std::initializer_list<double> vals, bool alt = false) {
        double x[6] = {0, 0, 0, 0, 0, 0};
        std::size_t i = 0;
        for (double v : vals) x[i++] = v;
        DgpSpec spec = make_dgp(kind, false, alt);
        return eval_f(spec, x);
    };

    CHECK(at(DgpKind::ball, {0, 0, 0}) == 0.0);
    CHECK(at(DgpKind::ball, {1, 1, 1, 0.3, 0.9}) == 3.0);
    CHECK(at(DgpKind::friedman1, {0, 0, 0.5, 0, 0}) == 0.0);
    CHECK(at(DgpKind::ring, {1, 0, 0}) == 0.0);
    CHECK(at(DgpKind::poly1, {1, 1, 1, 1, 0}) == doctest::Approx(10.0));
    // printed form repeats X1; the alternative reads 4*X4
    CHECK(at(DgpKind::poly2, {1, 0, 0, 0}) == doctest::Approx(5.0));
    CHECK(at(DgpKind::poly2, {1, 0, 0, 0}, true) == doctest::Approx(1.0));
    CHECK(at(DgpKind::poly2, {0, 0, 0, 1}, true) == doctest::Approx(4.0));
    CHECK(at(DgpKind::collinear, {1, 1, 1, 1, 1, 1}) == doctest::Approx(6.0));

    // friedman2 at (x1, x2, x3, x4) = (0, 0, 0, 0): z1=0, z2=40pi, z4=1
    const double z2 = 40.0 * std::numbers::pi;
    CHECK(at(DgpKind::friedman2, {0, 0, 0, 0, 0}) == doctest::Approx(1.0 / z2));
}

TEST_CASE("sigmoid is stable and bounded") {
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(-1.0) == doctest::Approx(0.2689414).epsilon(1e-6));
    CHECK(sigmoid(800.0) == 1.0);
    CHECK(sigmoid(-800.0) == doctest::Approx(0.0));
}

TEST_CASE("sample populates eta and labels deterministically") {
    auto spec = make_dgp(DgpKind::ball);
    auto a = sample(spec, 500, 42);
    auto b = sample(spec, 500, 42);
    CHECK(a.dataset.n_rows() == 500);
    CHECK(a.dataset.n_features() == 5);
    REQUIRE(a.dataset.has_eta_true());
    for (std::size_t j = 0; j < 5; ++j)
        for (std::size_t i = 0; i < 500; ++i)
            CHECK(a.dataset.feature(j)[i] == b.dataset.feature(j)[i]);
    for (std::size_t i = 0; i < 500; ++i) {
        CHECK(a.dataset.response()[i] == b.dataset.response()[i]);
        CHECK(a.dataset.eta_true()[i] == b.dataset.eta_true()[i]);
    }
    auto c = sample(spec, 500, 43);
    bool any_diff = false;
    for (std::size_t i = 0; i < 500; ++i)
        if (c.dataset.feature(0)[i] != a.dataset.feature(0)[i]) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("plain sigmoid variant matches the printed formula exactly") {
    auto spec = make_dgp(DgpKind::poly1, false);
    auto s = sample(spec, 200, 9);
    double x[6];
    for (std::size_t i = 0; i < 200; ++i) {
        for (std::size_t j = 0; j < 5; ++j) x[j] = s.dataset.feature(j)[i];
        const double f = eval_f(spec, x);
        CHECK(s.dataset.eta_true()[i] == sigmoid(f - spec.center));
    }
}

TEST_CASE("eta stays strictly inside (0,1) and labels match its mean") {
    for (auto kind : all_dgp_kinds()) {
        auto spec = make_dgp(kind);
        auto s = sample(spec, 20000, 7);
        double eta_sum = 0.0, y_sum = 0.0;
        for (std::size_t i = 0; i < s.dataset.n_rows(); ++i) {
            const double e = s.dataset.eta_true()[i];
            CHECK(e > 0.0);
            CHECK(e < 1.0);
            eta_sum += e;
            y_sum += s.dataset.response()[i];
        }
        const double n = static_cast<double>(s.dataset.n_rows());
        // binomial noise bound: 3 sqrt(0.25/n)
        CHECK(std::abs(y_sum / n - eta_sum / n) <= 3.0 * std::sqrt(0.25 / n));
    }
}

TEST_CASE("collinear features are noisy copies and may leave [0,1]") {
    auto s = sample(make_dgp(DgpKind::collinear), 5000, 13);
    double corr_num = 0.0, base_var = 0.0;
    double min_val = 1e9, max_val = -1e9;
    for (std::size_t i = 0; i < 5000; ++i) {
        const double base = s.dataset.feature(0)[i];
        const double copy = s.dataset.feature(3)[i];
        corr_num += (copy - base) * (copy - base);
        base_var += base;
        min_val = std::min(min_val, copy);
        max_val = std::max(max_val, copy);
    }
    // noise is 0.1 N(0,1): mean squared deviation about 0.01
    CHECK(corr_num / 5000.0 == doctest::Approx(0.01).epsilon(0.15));
    CHECK((min_val < 0.0 || max_val > 1.0));  // unclipped
}

TEST_CASE("centering keeps the empirical mean of f near the cached constant") {
    auto spec = make_dgp(DgpKind::friedman1);
    auto s = sample(spec, 100000, 21);
    double x[6];
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < s.dataset.n_rows(); ++i) {
        for (std::size_t j = 0; j < 5; ++j) x[j] = s.dataset.feature(j)[i];
        const double f = eval_f(spec, x);
        sum += f;
        sum2 += f * f;
    }
    const double n = static_cast<double>(s.dataset.n_rows());
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean - spec.center) <= 3.0 * sd / std::sqrt(n));
}
