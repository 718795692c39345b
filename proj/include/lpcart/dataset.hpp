#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpcart {

struct DatasetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Immutable column-major table: named numeric features, a response in [0,1]
// (binary labels or distilled probabilities) and, for synthetic data, the
// true conditional probability per row. Per-feature sort permutations are
// precomputed once so every split scan is a single ordered pass.
class Dataset {
  public:
    Dataset(std::vector<std::string> names, std::vector<std::vector<double>> columns,
            std::vector<double> response,
            std::optional<std::vector<double>> eta_true = std::nullopt);

    std::size_t n_rows() const { return response_.size(); }
    std::size_t n_features() const { return columns_.size(); }

    std::span<const double> feature(std::size_t j) const { return columns_[j]; }
    std::span<const double> response() const { return response_; }
    const std::string& feature_name(std::size_t j) const { return names_[j]; }
    const std::vector<std::string>& feature_names() const { return names_; }

    bool has_eta_true() const { return eta_true_.has_value(); }
    std::span<const double> eta_true() const { return *eta_true_; }

    // rows sorted ascending by feature j, stable in the original order
    std::span<const std::uint32_t> sorted_rows(std::size_t j) const { return sort_perm_[j]; }

    // true when every response value is exactly 0 or 1
    bool binary_response() const { return binary_; }

  private:
    std::vector<std::string> names_;
    std::vector<std::vector<double>> columns_;
    std::vector<double> response_;
    std::optional<std::vector<double>> eta_true_;
    std::vector<std::vector<std::uint32_t>> sort_perm_;
    bool binary_ = false;
};

// Validates shapes and ranges; throws DatasetError naming the problem.
Dataset validate_dataset(std::vector<std::string> names,
                         std::vector<std::vector<double>> columns,
                         std::vector<double> response,
                         std::optional<std::vector<double>> eta_true = std::nullopt);

struct NodeStats {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // population variance, zero when count <= 1
};

NodeStats node_stats(std::span<const double> responses);

}  // namespace lpcart
