#include "lpcart/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lpcart {

Dataset::Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
                 std::vector<double> response, std::optional<std::vector<double>> eta_true)
    : names_(std::move(names)),
      columns_(std::move(columns)),
      response_(std::move(response)),
      eta_true_(std::move(eta_true)) {
    binary_ = std::all_of(response_.begin(), response_.end(),
                          [](double y) { return y == 0.0 || y == 1.0; });
    sort_perm_.resize(columns_.size());
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        auto& perm = sort_perm_[j];
        perm.resize(response_.size());
        std::iota(perm.begin(), perm.end(), 0u);
        const auto& col = columns_[j];
        std::stable_sort(perm.begin(), perm.end(),
                         [&col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
}

Dataset validate_dataset(std::vector<std::string> names,
                         std::vector<std::vector<double>> columns,
                         std::vector<double> response,
                         std::optional<std::vector<double>> eta_true) {
    if (columns.empty()) throw DatasetError("dataset has no feature columns");
    if (names.size() != columns.size())
        throw DatasetError("feature name count does not match column count");
    const std::size_t n = response.size();
    if (n == 0) throw DatasetError("dataset has no rows");
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != n)
            throw DatasetError("length mismatch: column '" + names[j] + "' has " +
                               std::to_string(columns[j].size()) + " rows, response has " +
                               std::to_string(n));
        for (double v : columns[j])
            if (!std::isfinite(v))
                throw DatasetError("non-finite value in column '" + names[j] + "'");
    }
    for (double y : response) {
        if (!std::isfinite(y)) throw DatasetError("non-finite value in response");
        if (y < 0.0 || y > 1.0) throw DatasetError("response outside [0,1]");
    }
    if (eta_true) {
        if (eta_true->size() != n) throw DatasetError("length mismatch: eta_true");
        for (double e : *eta_true) {
            if (!std::isfinite(e)) throw DatasetError("non-finite value in eta_true");
            if (e < 0.0 || e > 1.0) throw DatasetError("eta_true outside [0,1]");
        }
    }
    return Dataset(std::move(names), std::move(columns), std::move(response),
                   std::move(eta_true));
}

NodeStats node_stats(std::span<const double> responses) {
    NodeStats s;
    s.count = responses.size();
    if (s.count == 0) return s;
    double sum = 0.0, sum2 = 0.0;
    for (double y : responses) {
        sum += y;
        sum2 += y * y;
    }
    const double n = static_cast<double>(s.count);
    s.mean = sum / n;
    s.variance = std::max(0.0, sum2 / n - s.mean * s.mean);
    if (s.count <= 1) s.variance = 0.0;
    return s;
}

}  // namespace lpcart
