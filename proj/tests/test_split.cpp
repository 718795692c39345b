#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "lpcart/dataset.hpp"
#include "lpcart/rng.hpp"
#include "lpcart/split.hpp"

using namespace lpcart;

namespace {

// O(n^2) reference: recomputes every objective from scratch at every midpoint
// candidate, with the same tie-break order (objective, threshold, feature).
struct BruteBest {
    std::size_t feature = 0;
    double threshold = 0.0;
    double objective = 0.0;
    bool found = false;
};

BruteBest brute_force_best(const std::vector<std::vector<double>>& columns,
                           const std::vector<double>& ys, const SplitCriterion& crit,
                           std::size_t min_child) {
    BruteBest best;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        for (double thr : candidate_thresholds(columns[j])) {
            std::vector<double> left, right;
            for (std::size_t i = 0; i < ys.size(); ++i)
                (columns[j][i] <= thr ? left : right).push_back(ys[i]);
            if (left.size() < min_child || right.size() < min_child) continue;
            const double obj = split_objective(left, right, crit);
            if (!best.found || obj < best.objective ||
                (obj == best.objective &&
                 (thr < best.threshold || (thr == best.threshold && j < best.feature)))) {
                best = {j, thr, obj, true};
            }
        }
    }
    return best;
}

}  // namespace

TEST_CASE("candidate_thresholds midpoints over distinct sorted values") {
    CHECK(candidate_thresholds(std::vector<double>{1, 2, 3, 4}) ==
          std::vector<double>{1.5, 2.5, 3.5});
    CHECK(candidate_thresholds(std::vector<double>{5, 5, 5}).empty());
    CHECK(candidate_thresholds(std::vector<double>{2, 1, 1, 3}) ==
          std::vector<double>{1.5, 2.5});
}

TEST_CASE("impurity examples") {
    CHECK(impurity(std::vector<double>{0, 0}, std::vector<double>{1, 1}) == 0.0);
    CHECK(impurity(std::vector<double>{0, 1}, std::vector<double>{0, 1}) ==
          doctest::Approx(0.25));
    CHECK(impurity(std::vector<double>{0, 0, 1}, std::vector<double>{1}) ==
          doctest::Approx(1.0 / 6.0));
}

TEST_CASE("distance_penalty examples") {
    // means 0.2 and 0.8 with five rows each, c = 0.6, W(d) = 1 - d
    std::vector<double> left{0.2, 0.2, 0.2, 0.2, 0.2};
    std::vector<double> right{0.8, 0.8, 0.8, 0.8, 0.8};
    CHECK(distance_penalty(left, right, 0.6, WeightKind::linear) == doctest::Approx(0.7));

    CHECK(distance_penalty(std::vector<double>{0, 0}, std::vector<double>{1, 1}, 0.5,
                           WeightKind::linear) == doctest::Approx(0.5));

    std::vector<double> half{0.5, 0.5};
    CHECK(distance_penalty(half, half, 0.5, WeightKind::linear) == doctest::Approx(1.0));
}

TEST_CASE("weighted_risk examples") {
    CHECK(weighted_risk(std::vector<double>{1, 1, 0}, std::vector<double>{0, 0, 1}, 0.6) ==
          doctest::Approx(1.0));
    CHECK(weighted_risk(std::vector<double>{1, 1}, std::vector<double>{0, 0}, 0.5) == 0.0);
    CHECK(weighted_risk(std::vector<double>{0, 0}, std::vector<double>{1, 1}, 0.5) == 0.0);
}

TEST_CASE("weighted_risk zero iff children cleanly separated") {
    // child mean above c but containing a response at or below c costs c
    CHECK(weighted_risk(std::vector<double>{1, 1, 0.3}, std::vector<double>{0.1}, 0.5) > 0.0);
    // mean exactly c counts as not targeted
    CHECK(weighted_risk(std::vector<double>{0.5, 0.5}, std::vector<double>{0.1}, 0.5) == 0.0);
}

TEST_CASE("objectives are permutation invariant within children") {
    Rng rng(21);
    std::vector<double> left, right;
    for (int i = 0; i < 40; ++i) left.push_back(rng.bernoulli(0.4) ? 1.0 : 0.0);
    for (int i = 0; i < 25; ++i) right.push_back(rng.bernoulli(0.7) ? 1.0 : 0.0);
    auto shuffled_left = left;
    auto shuffled_right = right;
    std::reverse(shuffled_left.begin(), shuffled_left.end());
    std::reverse(shuffled_right.begin(), shuffled_right.end());
    CHECK(impurity(left, right) == doctest::Approx(impurity(shuffled_left, shuffled_right)));
    CHECK(distance_penalty(left, right, 0.6, WeightKind::linear) ==
          doctest::Approx(distance_penalty(shuffled_left, shuffled_right, 0.6,
                                           WeightKind::linear)));
    CHECK(weighted_risk(left, right, 0.6) ==
          doctest::Approx(weighted_risk(shuffled_left, shuffled_right, 0.6)));
}

TEST_CASE("distance identity: convex lambda=1 equals one minus distance sum") {
    Rng rng(22);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> ys;
        std::vector<double> xs;
        const std::size_t n = 10 + rng.uniform_index(60);
        for (std::size_t i = 0; i < n; ++i) {
            xs.push_back(rng.uniform());
            ys.push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
        }
        const double c = 0.6;
        for (double thr : candidate_thresholds(xs)) {
            std::vector<double> left, right;
            for (std::size_t i = 0; i < n; ++i)
                (xs[i] <= thr ? left : right).push_back(ys[i]);
            if (left.empty() || right.empty()) continue;
            const double pen = distance_penalty(left, right, c, WeightKind::linear);
            const auto ls = node_stats(left);
            const auto rs = node_stats(right);
            const double wl = static_cast<double>(left.size()) / static_cast<double>(n);
            const double wr = static_cast<double>(right.size()) / static_cast<double>(n);
            const double distance_sum =
                wl * std::abs(ls.mean - c) + wr * std::abs(rs.mean - c);
            CHECK(std::abs(pen - (1.0 - distance_sum)) <= 1e-12);
        }
    }
}

TEST_CASE("find_best_split_cart basic examples") {
    auto data = validate_dataset({"a"}, {{1, 2, 3, 4}}, {0, 0, 1, 1});
    std::vector<std::uint32_t> rows{0, 1, 2, 3};
    auto best = find_best_split_cart(data, rows);
    REQUIRE(best.has_value());
    CHECK(best->feature_index == 0);
    CHECK(best->threshold == doctest::Approx(2.5));
    CHECK(best->objective_value == doctest::Approx(0.0));
    CHECK(best->left_count == 2);
    CHECK(best->right_count == 2);

    // a feature that copies the label wins with objective zero
    auto data2 = validate_dataset({"noise", "copy"}, {{5, 1, 4, 2, 3}, {0, 1, 0, 1, 0}},
                                  {0, 1, 0, 1, 0});
    std::vector<std::uint32_t> rows2{0, 1, 2, 3, 4};
    auto best2 = find_best_split_cart(data2, rows2);
    REQUIRE(best2.has_value());
    CHECK(best2->feature_index == 1);
    CHECK(best2->objective_value == doctest::Approx(0.0));

    auto flat = validate_dataset({"a", "b"}, {{7, 7, 7}, {1, 1, 1}}, {0, 1, 0});
    std::vector<std::uint32_t> rows3{0, 1, 2};
    CHECK_FALSE(find_best_split_cart(flat, rows3).has_value());
}

TEST_CASE("find_final_split degenerate cases") {
    // PFS with lambda = 0 reduces to impurity minimization
    std::vector<double> xs{1, 2, 3, 4, 5, 6};
    std::vector<double> ys{0, 0, 0, 1, 1, 1};
    auto cart = find_final_split(xs, ys, SplitCriterion::cart());
    auto pfs0 = find_final_split(xs, ys, SplitCriterion::pfs(0.6, 0.0));
    REQUIRE(cart.has_value());
    REQUIRE(pfs0.has_value());
    CHECK(cart->threshold == pfs0->threshold);
    CHECK(cart->threshold == doctest::Approx(3.5));

    // wEFS returns a perfectly separating candidate with objective zero
    auto wefs = find_final_split(xs, ys, SplitCriterion::wefs(0.5));
    REQUIRE(wefs.has_value());
    CHECK(wefs->threshold == doctest::Approx(3.5));
    CHECK(wefs->objective_value == 0.0);

    std::vector<double> constant{2, 2, 2, 2};
    CHECK_FALSE(find_final_split(constant, ys, SplitCriterion::mdfs(0.5)).has_value());
}

TEST_CASE("final split scan honors the minimum child size") {
    std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<double> ys{1, 0, 0, 0, 0, 0, 0, 1};
    auto unconstrained = find_final_split(xs, ys, SplitCriterion::mdfs(0.5), 1);
    auto constrained = find_final_split(xs, ys, SplitCriterion::mdfs(0.5), 3);
    REQUIRE(unconstrained.has_value());
    REQUIRE(constrained.has_value());
    CHECK(unconstrained->threshold == doctest::Approx(1.5));
    CHECK(constrained->left_count >= 3);
    CHECK(xs.size() - constrained->left_count >= 3);
    CHECK_FALSE(find_final_split(xs, ys, SplitCriterion::mdfs(0.5), 5).has_value());
}

TEST_CASE("mdfs final split approaches the latent crossing on a large sample") {
    // deterministic grid feature, labels 1{eta(x) > u} with eta = 9x/11
    const std::size_t n = 100000;
    Rng rng(1234);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        ys[i] = rng.uniform() < 9.0 * xs[i] / 11.0 ? 1.0 : 0.0;
    }
    auto split = find_final_split(xs, ys, SplitCriterion::mdfs(0.75));
    REQUIRE(split.has_value());
    CHECK(split->threshold == doctest::Approx(11.0 / 12.0).epsilon(0.025));
}

TEST_CASE("streaming search equals brute force on random instances") {
    Rng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 5 + rng.uniform_index(120);
        const std::size_t p = 1 + rng.uniform_index(4);
        const bool continuous = trial % 5 == 4;
        std::vector<std::vector<double>> columns(p, std::vector<double>(n));
        std::vector<double> ys(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < p; ++j)
                columns[j][i] = static_cast<double>(rng.uniform_index(12));  // duplicates
            ys[i] = continuous ? rng.uniform() : (rng.bernoulli(0.45) ? 1.0 : 0.0);
        }
        const double c = 0.6;
        std::vector<std::string> names;
        for (std::size_t j = 0; j < p; ++j) names.push_back("f" + std::to_string(j));
        auto data = validate_dataset(names, columns, ys);
        std::vector<std::uint32_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);

        const auto cart = SplitCriterion::cart();
        auto brute = brute_force_best(columns, ys, cart, 1);
        auto fast = find_best_split_cart(data, rows);
        REQUIRE(fast.has_value() == brute.found);
        if (brute.found) {
            CHECK(fast->feature_index == brute.feature);
            CHECK(fast->threshold == brute.threshold);
            CHECK(std::abs(fast->objective_value - brute.objective) <= 1e-10);
        }

        for (const auto crit :
             {SplitCriterion::pfs(c, 0.1), SplitCriterion::mdfs(c), SplitCriterion::wefs(c)}) {
            for (std::size_t j = 0; j < p; ++j) {
                auto single = brute_force_best({columns[j]}, ys, crit, 1);
                auto streamed = find_final_split(columns[j], ys, crit, 1);
                REQUIRE(streamed.has_value() == single.found);
                if (single.found) {
                    CHECK(streamed->threshold == single.threshold);
                    CHECK(std::abs(streamed->objective_value - single.objective) <= 1e-10);
                }
            }
        }
    }
}

TEST_CASE("all objectives finite and nonnegative") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> left, right;
        const std::size_t nl = 1 + rng.uniform_index(30), nr = 1 + rng.uniform_index(30);
        for (std::size_t i = 0; i < nl; ++i) left.push_back(rng.uniform());
        for (std::size_t i = 0; i < nr; ++i) right.push_back(rng.uniform());
        for (double v : {impurity(left, right),
                         distance_penalty(left, right, 0.7, WeightKind::quadratic),
                         distance_penalty(left, right, 0.7, WeightKind::exponential),
                         weighted_risk(left, right, 0.7)}) {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
}
