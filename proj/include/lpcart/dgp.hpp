#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpcart/dataset.hpp"

namespace lpcart::dgp {

enum class DgpKind {
    ball,
    friedman1,
    friedman2,
    friedman3,
    poly1,
    poly2,
    ring,
    collinear
};

struct DgpSpec {
    DgpKind kind = DgpKind::ball;
    std::string name;
    std::size_t n_features = 5;
    double center = 0.0;  // E[f(X)], Monte-Carlo with a reserved seed
    double scale = 1.0;   // sigmoid argument divisor; 1 disables scaling
    bool poly2_alt = false;  // trailing 4*X4 instead of the printed 4*X1
};

std::vector<DgpKind> all_dgp_kinds();
const std::string& dgp_name(DgpKind kind);
DgpKind dgp_by_name(const std::string& name);

// Monte-Carlo estimate of E[f(X)] over mc_n draws.
double center_constant(DgpKind kind, std::size_t mc_n, std::uint64_t seed,
                       bool poly2_alt = false);

// Builds a spec with cached center (and, when standardize is set, the cached
// Monte-Carlo standard deviation of f as the sigmoid scale).
DgpSpec make_dgp(DgpKind kind, bool standardize = true, bool poly2_alt = false);
DgpSpec make_dgp(const std::string& name, bool standardize = true, bool poly2_alt = false);

double eval_f(const DgpSpec& spec, const double* x);
double sigmoid(double z);

struct SyntheticSample {
    Dataset dataset;  // features x1..xp, binary response, eta_true populated
    std::uint64_t seed = 0;
};

// Features U(0,1) i.i.d. (Collinear adds three noisy copies), eta through the
// centered sigmoid, labels Bernoulli(eta); bit-identical given (spec, n, seed).
SyntheticSample sample(const DgpSpec& spec, std::size_t n, std::uint64_t seed);

}  // namespace lpcart::dgp
