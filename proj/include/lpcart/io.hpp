#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lpcart/dataset.hpp"
#include "lpcart/experiments.hpp"

namespace lpcart::io {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ColumnKind { numeric, month_ordinal };

enum class ResponseRule { passthrough, greater_than };

struct CsvSchema {
    std::vector<std::pair<std::string, ColumnKind>> features;
    std::string response_column;
    ResponseRule response_rule = ResponseRule::passthrough;
    double response_threshold = 0.0;  // used by greater_than
};

// RFC-4180-style parsing with a header row; ordinal columns map month tokens
// jan..dec to 1..12. Cell errors report both row and column.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

CsvSchema pima_schema();
CsvSchema forestfire_schema();  // y = 1{area > 5}; 'day' is dropped
CsvSchema generic_schema(const std::vector<std::string>& header,
                         const std::string& response_column);

// header of a CSV file, for schema construction
std::vector<std::string> read_csv_header(const std::filesystem::path& path);

// Shape checks for the two case studies. In strict mode violations throw;
// otherwise they are appended to `warnings`.
Dataset prepare_pima(Dataset raw, bool strict = true,
                     std::vector<std::string>* warnings = nullptr);
Dataset prepare_forestfire(Dataset raw, bool strict = true,
                           std::vector<std::string>* warnings = nullptr);

// x1..xp[, eta], y with full round-trip precision
void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

// results.csv, table1.md (best config per task by CART), table1_per_method.md,
// win_rates.csv and diagnostics.log; byte-stable given identical inputs.
std::vector<std::filesystem::path> write_report(const experiments::SuiteReport& report,
                                                const std::filesystem::path& out_dir);

// one tree text + tree json per method plus policy.md
std::vector<std::filesystem::path> write_case_study(const experiments::CaseStudyResult& result,
                                                    const std::filesystem::path& out_dir);

std::string format_percent(double v);  // one decimal, Table-1 convention

}  // namespace lpcart::io
