#include "lpcart/dgp.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "lpcart/rng.hpp"

namespace lpcart::dgp {

namespace {

constexpr std::uint64_t kCenterSeed = 0x0c0ffee5eed5ULL;  // reserved for centering
constexpr std::size_t kCenterDraws = 1000000;

struct Moments {
    double mean = 0.0;
    double stddev = 1.0;
};

std::size_t feature_count(DgpKind kind) {
    return kind == DgpKind::collinear ? 6 : 5;
}

// one feature vector in draw order: uniforms first, Collinear noise after
void draw_features(Rng& rng, DgpKind kind, double* x) {
    if (kind == DgpKind::collinear) {
        for (int i = 0; i < 3; ++i) x[i] = rng.uniform();
        for (int i = 0; i < 3; ++i) x[i + 3] = x[i] + 0.1 * rng.normal();
        return;
    }
    for (int i = 0; i < 5; ++i) x[i] = rng.uniform();
}

double eval_f_kind(DgpKind kind, const double* x, bool poly2_alt) {
    using std::numbers::pi;
    switch (kind) {
        case DgpKind::ball:
            return x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        case DgpKind::friedman1:
            return 10.0 * std::sin(pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
                   10.0 * x[3] + 5.0 * x[4];
        case DgpKind::friedman2: {
            const double z1 = 100.0 * x[0];
            const double z2 = 40.0 * pi + 520.0 * pi * x[1];
            const double z4 = 10.0 * x[3] + 1.0;
            const double t = z2 * x[2] - 1.0 / (z2 * z4);
            return std::sqrt(z1 * z1 + t * t);
        }
        case DgpKind::friedman3: {
            const double z1 = 100.0 * x[0];
            const double z2 = 40.0 * pi + 520.0 * pi * x[1];
            const double z4 = 10.0 * x[3] + 1.0;
            const double t = z2 * x[2] - 1.0 / (z2 * z4);
            return std::atan(t / z1);
        }
        case DgpKind::poly1:
            return 4.0 * x[0] + 3.0 * x[1] * x[1] + 2.0 * x[2] * x[2] * x[2] +
                   x[3] * x[3] * x[3] * x[3];
        case DgpKind::poly2: {
            const double tail = 4.0 * (poly2_alt ? x[3] : x[0]);
            return x[0] * x[0] * x[0] * x[0] + 2.0 * x[1] * x[1] * x[1] +
                   3.0 * x[2] * x[2] + tail;
        }
        case DgpKind::ring:
            return std::abs(x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - 1.0);
        case DgpKind::collinear:
            return x[0] + x[1] + x[2] + x[3] + x[4] + x[5];
    }
    throw std::invalid_argument("unknown DGP kind");
}

Moments estimate_moments(DgpKind kind, std::size_t mc_n, std::uint64_t seed, bool poly2_alt) {
    Rng rng(seed);
    double x[6];
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < mc_n; ++i) {
        draw_features(rng, kind, x);
        const double f = eval_f_kind(kind, x, poly2_alt);
        sum += f;
        sum2 += f * f;
    }
    const double m = sum / static_cast<double>(mc_n);
    const double var = std::max(0.0, sum2 / static_cast<double>(mc_n) - m * m);
    return {m, std::sqrt(var)};
}

Moments cached_moments(DgpKind kind, bool poly2_alt) {
    static std::mutex mutex;
    static std::map<std::pair<int, bool>, Moments> cache;
    std::lock_guard<std::mutex> lock(mutex);
    const auto key = std::make_pair(static_cast<int>(kind), poly2_alt);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const Moments m = estimate_moments(kind, kCenterDraws, kCenterSeed, poly2_alt);
    cache[key] = m;
    return m;
}

}  // namespace

std::vector<DgpKind> all_dgp_kinds() {
    return {DgpKind::ball,  DgpKind::friedman1, DgpKind::friedman2, DgpKind::friedman3,
            DgpKind::poly1, DgpKind::poly2,     DgpKind::ring,      DgpKind::collinear};
}

const std::string& dgp_name(DgpKind kind) {
    static const std::map<DgpKind, std::string> names = {
        {DgpKind::ball, "ball"},           {DgpKind::friedman1, "friedman1"},
        {DgpKind::friedman2, "friedman2"}, {DgpKind::friedman3, "friedman3"},
        {DgpKind::poly1, "poly1"},         {DgpKind::poly2, "poly2"},
        {DgpKind::ring, "ring"},           {DgpKind::collinear, "collinear"}};
    return names.at(kind);
}

DgpKind dgp_by_name(const std::string& name) {
    for (auto kind : all_dgp_kinds())
        if (dgp_name(kind) == name) return kind;
    throw std::invalid_argument("unknown DGP '" + name +
                                "'; expected ball, friedman1, friedman2, friedman3, poly1, "
                                "poly2, ring or collinear");
}

double center_constant(DgpKind kind, std::size_t mc_n, std::uint64_t seed, bool poly2_alt) {
    return estimate_moments(kind, mc_n, seed, poly2_alt).mean;
}

DgpSpec make_dgp(DgpKind kind, bool standardize, bool poly2_alt) {
    const Moments m = cached_moments(kind, poly2_alt);
    DgpSpec spec;
    spec.kind = kind;
    spec.name = dgp_name(kind);
    spec.n_features = feature_count(kind);
    spec.center = m.mean;
    spec.scale = standardize ? m.stddev : 1.0;
    spec.poly2_alt = poly2_alt;
    return spec;
}

DgpSpec make_dgp(const std::string& name, bool standardize, bool poly2_alt) {
    return make_dgp(dgp_by_name(name), standardize, poly2_alt);
}

double eval_f(const DgpSpec& spec, const double* x) {
    return eval_f_kind(spec.kind, x, spec.poly2_alt);
}

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

SyntheticSample sample(const DgpSpec& spec, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample size must be >= 1");
    Rng rng(seed);
    const std::size_t p = spec.n_features;

    std::vector<std::vector<double>> columns(p, std::vector<double>(n));
    std::vector<double> response(n), eta_true(n);
    double x[6];
    for (std::size_t i = 0; i < n; ++i) {
        draw_features(rng, spec.kind, x);
        for (std::size_t j = 0; j < p; ++j) columns[j][i] = x[j];
        const double f = eval_f_kind(spec.kind, x, spec.poly2_alt);
        const double eta = sigmoid((f - spec.center) / spec.scale);
        eta_true[i] = eta;
        response[i] = rng.bernoulli(eta) ? 1.0 : 0.0;
    }

    std::vector<std::string> names(p);
    for (std::size_t j = 0; j < p; ++j) names[j] = "x" + std::to_string(j + 1);
    // Collinear noise is left unclipped, so feature validation only requires
    // finiteness here.
    return {validate_dataset(std::move(names), std::move(columns), std::move(response),
                             std::move(eta_true)),
            seed};
}

}  // namespace lpcart::dgp
