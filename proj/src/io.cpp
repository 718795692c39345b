#include "lpcart/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace lpcart::io {

namespace {

std::vector<std::vector<std::string>> parse_csv_text(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    const std::size_t len = text.size();
    for (std::size_t i = 0; i < len; ++i) {
        const char ch = text[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < len && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (ch == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto rows = parse_csv_text(buffer.str());
    if (rows.empty()) throw CsvError("empty file '" + path.string() + "'");
    return rows;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

int month_ordinal(const std::string& token, std::size_t row, const std::string& column) {
    static const std::map<std::string, int> months = {
        {"jan", 1}, {"feb", 2}, {"mar", 3}, {"apr", 4},  {"may", 5},  {"jun", 6},
        {"jul", 7}, {"aug", 8}, {"sep", 9}, {"oct", 10}, {"nov", 11}, {"dec", 12}};
    std::string key;
    for (char ch : token) key += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    auto it = months.find(key);
    if (it == months.end())
        throw CsvError("unknown month token '" + token + "' at row " + std::to_string(row) +
                       ", column '" + column + "'");
    return it->second;
}

double parse_numeric(const std::string& token, std::size_t row, const std::string& column) {
    const std::string t = trim(token);
    const char* begin = t.data();
    const char* end = begin + t.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end)
        throw CsvError("unparseable cell '" + token + "' at row " + std::to_string(row) +
                       ", column '" + column + "'");
    return value;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name,
                        const std::filesystem::path& path) {
    for (std::size_t j = 0; j < header.size(); ++j)
        if (trim(header[j]) == name) return j;
    throw CsvError("missing column '" + name + "' in '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw CsvError("write failed for '" + path.string() + "'");
}

std::string full_precision(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

}  // namespace

std::vector<std::string> read_csv_header(const std::filesystem::path& path) {
    auto rows = read_csv_rows(path);
    std::vector<std::string> header;
    for (auto& cell : rows.front()) header.push_back(trim(cell));
    return header;
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
    auto rows = read_csv_rows(path);
    const auto& header = rows.front();
    const std::size_t n = rows.size() - 1;
    if (n == 0) throw CsvError("no data rows in '" + path.string() + "'");

    std::vector<std::size_t> feature_cols;
    std::vector<std::string> names;
    for (const auto& [name, kind] : schema.features) {
        feature_cols.push_back(find_column(header, name, path));
        names.push_back(name);
    }
    const std::size_t response_col = find_column(header, schema.response_column, path);

    std::vector<std::vector<double>> columns(schema.features.size(), std::vector<double>(n));
    std::vector<double> response(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = rows[i + 1];
        if (row.size() != header.size())
            throw CsvError("row " + std::to_string(i + 2) + " has " +
                           std::to_string(row.size()) + " cells, header has " +
                           std::to_string(header.size()));
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const auto& cell = row[feature_cols[f]];
            columns[f][i] = schema.features[f].second == ColumnKind::month_ordinal
                                ? month_ordinal(cell, i + 2, names[f])
                                : parse_numeric(cell, i + 2, names[f]);
        }
        const double raw = parse_numeric(row[response_col], i + 2, schema.response_column);
        response[i] = schema.response_rule == ResponseRule::greater_than
                          ? (raw > schema.response_threshold ? 1.0 : 0.0)
                          : raw;
    }
    return validate_dataset(std::move(names), std::move(columns), std::move(response));
}

CsvSchema pima_schema() {
    CsvSchema s;
    for (const char* name : {"Pregnancies", "Glucose", "BloodPressure", "SkinThickness",
                             "Insulin", "BMI", "DiabetesPedigreeFunction", "Age"})
        s.features.emplace_back(name, ColumnKind::numeric);
    s.response_column = "Outcome";
    return s;
}

CsvSchema forestfire_schema() {
    CsvSchema s;
    s.features.emplace_back("X", ColumnKind::numeric);
    s.features.emplace_back("Y", ColumnKind::numeric);
    s.features.emplace_back("month", ColumnKind::month_ordinal);
    for (const char* name : {"FFMC", "DMC", "DC", "ISI", "temp", "RH", "wind", "rain"})
        s.features.emplace_back(name, ColumnKind::numeric);
    s.response_column = "area";
    s.response_rule = ResponseRule::greater_than;
    s.response_threshold = 5.0;
    return s;
}

CsvSchema generic_schema(const std::vector<std::string>& header,
                         const std::string& response_column) {
    CsvSchema s;
    const std::string response = response_column.empty() ? header.back() : response_column;
    for (const auto& name : header)
        if (name != response) s.features.emplace_back(name, ColumnKind::numeric);
    s.response_column = response;
    return s;
}

namespace {

void shape_check(bool ok, const std::string& message, bool strict,
                 std::vector<std::string>* warnings) {
    if (ok) return;
    if (strict) throw CsvError(message);
    if (warnings) warnings->push_back(message);
}

}  // namespace

Dataset prepare_pima(Dataset raw, bool strict, std::vector<std::string>* warnings) {
    shape_check(raw.n_rows() == 768,
                "pima: expected 768 rows, got " + std::to_string(raw.n_rows()), strict,
                warnings);
    shape_check(raw.n_features() == 8,
                "pima: expected 8 features, got " + std::to_string(raw.n_features()), strict,
                warnings);
    const auto stats = node_stats(raw.response());
    shape_check(std::abs(stats.mean - 0.349) <= 0.001,
                "pima: positive rate " + fixed(stats.mean, 4) + " is not 0.349 +- 0.001",
                strict, warnings);
    return raw;
}

Dataset prepare_forestfire(Dataset raw, bool strict, std::vector<std::string>* warnings) {
    shape_check(raw.n_rows() == 517,
                "forestfire: expected 517 rows, got " + std::to_string(raw.n_rows()), strict,
                warnings);
    shape_check(raw.n_features() == 11,
                "forestfire: expected 11 features, got " + std::to_string(raw.n_features()),
                strict, warnings);
    return raw;
}

void write_dataset_csv(const Dataset& dataset, const std::filesystem::path& path) {
    std::string out;
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
        out += dataset.feature_name(j);
        out += ',';
    }
    if (dataset.has_eta_true()) out += "eta,";
    out += "y\n";
    for (std::size_t i = 0; i < dataset.n_rows(); ++i) {
        for (std::size_t j = 0; j < dataset.n_features(); ++j) {
            out += full_precision(dataset.feature(j)[i]);
            out += ',';
        }
        if (dataset.has_eta_true()) {
            out += full_precision(dataset.eta_true()[i]);
            out += ',';
        }
        out += full_precision(dataset.response()[i]);
        out += '\n';
    }
    write_text(path, out);
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
    const auto header = read_csv_header(path);
    CsvSchema schema;
    std::optional<std::size_t> eta_col;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "y") continue;
        if (header[j] == "eta") {
            eta_col = j;
            continue;
        }
        schema.features.emplace_back(header[j], ColumnKind::numeric);
    }
    schema.response_column = "y";
    Dataset flat = load_csv(path, schema);
    if (!eta_col) return flat;

    // re-read eta as a feature, then move it into its slot
    CsvSchema with_eta = schema;
    with_eta.features.emplace_back("eta", ColumnKind::numeric);
    Dataset loaded = load_csv(path, with_eta);
    std::vector<std::vector<double>> columns;
    std::vector<std::string> names;
    for (std::size_t j = 0; j + 1 < loaded.n_features(); ++j) {
        auto col = loaded.feature(j);
        columns.emplace_back(col.begin(), col.end());
        names.push_back(loaded.feature_name(j));
    }
    auto eta = loaded.feature(loaded.n_features() - 1);
    auto resp = loaded.response();
    return validate_dataset(std::move(names), std::move(columns),
                            std::vector<double>(resp.begin(), resp.end()),
                            std::vector<double>(eta.begin(), eta.end()));
}

std::string format_percent(double v) { return fixed(v, 1); }

namespace {

std::string setting_key_csv(const experiments::ExperimentSetting& s) {
    std::string out;
    out += s.dgp.name;
    out += ',';
    out += fixed(s.c, 2);
    out += ',';
    out += std::to_string(s.max_depth);
    out += ',';
    out += fixed(s.min_leaf_fraction, 2);
    out += ',';
    out += std::to_string(s.n);
    out += ',';
    out += std::to_string(s.replicates);
    return out;
}

// Table-1-style layout: one row per (DGP, c) task at a chosen config.
std::string best_config_table(const experiments::SuiteReport& report, bool per_method) {
    using experiments::Method;
    std::vector<Method> columns;
    for (Method m : experiments::all_methods()) {
        for (const auto& row : report.rows) {
            if (std::find(row.result.methods.begin(), row.result.methods.end(), m) !=
                row.result.methods.end()) {
                columns.push_back(m);
                break;
            }
        }
    }

    std::string out = "| DGP | c |";
    for (Method m : columns) out += " " + experiments::method_name(m) + " |";
    out += "\n|---|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
    out += "\n";

    // tasks in first-appearance order
    std::vector<std::pair<std::string, double>> tasks;
    for (const auto& row : report.rows) {
        const auto key = std::make_pair(row.setting.dgp.name, row.setting.c);
        if (std::find(tasks.begin(), tasks.end(), key) == tasks.end()) tasks.push_back(key);
    }

    for (const auto& [dgp_name, c] : tasks) {
        out += "| " + dgp_name + " | " + fixed(c, 1) + " |";
        std::vector<const experiments::SuiteRow*> group;
        for (const auto& row : report.rows)
            if (row.setting.dgp.name == dgp_name && row.setting.c == c)
                group.push_back(&row);
        const experiments::SuiteRow* by_cart = nullptr;
        for (const auto* row : group) {
            try {
                const double m = row->result.mean_of(Method::cart);
                if (!by_cart || m < by_cart->result.mean_of(Method::cart)) by_cart = row;
            } catch (const std::invalid_argument&) {
            }
        }
        for (Method m : columns) {
            const experiments::SuiteRow* chosen = by_cart;
            if (per_method || !chosen) {
                chosen = nullptr;
                for (const auto* row : group) {
                    try {
                        const double v = row->result.mean_of(m);
                        if (!chosen || v < chosen->result.mean_of(m)) chosen = row;
                    } catch (const std::invalid_argument&) {
                    }
                }
            }
            if (!chosen) {
                out += " - |";
                continue;
            }
            try {
                out += " " + format_percent(chosen->result.mean_of(m)) + " (" +
                       format_percent(chosen->result.std_of(m)) + ") |";
            } catch (const std::invalid_argument&) {
                out += " - |";
            }
        }
        out += "\n";
    }
    return out;
}

}  // namespace

std::vector<std::filesystem::path> write_report(const experiments::SuiteReport& report,
                                                const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;

    {
        std::string csv = "dgp,c,max_depth,min_leaf_fraction,n,replicates,method,mr_mean,"
                          "mr_std,completed\n";
        for (const auto& row : report.rows) {
            for (std::size_t mi = 0; mi < row.result.methods.size(); ++mi) {
                std::size_t completed = 0;
                for (double v : row.result.mr_values[mi])
                    if (!std::isnan(v)) ++completed;
                csv += setting_key_csv(row.setting);
                csv += ',';
                csv += experiments::method_name(row.result.methods[mi]);
                csv += ',';
                csv += full_precision(row.result.mean_mr[mi]);
                csv += ',';
                csv += full_precision(row.result.std_mr[mi]);
                csv += ',';
                csv += std::to_string(completed);
                csv += '\n';
            }
        }
        const auto path = out_dir / "results.csv";
        write_text(path, csv);
        written.push_back(path);
    }

    {
        std::string md = "# Best configuration per task (config chosen by CART)\n\n";
        md += best_config_table(report, false);
        md += "\n# Best configuration per task (config chosen per method)\n\n";
        md += best_config_table(report, true);
        const auto path = out_dir / "table1.md";
        write_text(path, md);
        written.push_back(path);
    }

    {
        std::string csv = "comparison,wins,settings,rate\n";
        for (const auto& [m, wr] : report.win_vs_cart) {
            csv += experiments::method_name(m);
            csv += "_vs_cart,";
            csv += std::to_string(wr.wins);
            csv += ',';
            csv += std::to_string(wr.comparisons);
            csv += ',';
            csv += full_precision(wr.rate());
            csv += '\n';
        }
        if (report.rf_mdfs_vs_rf_cart.comparisons) {
            csv += "rf-mdfs_vs_rf-cart,";
            csv += std::to_string(report.rf_mdfs_vs_rf_cart.wins);
            csv += ',';
            csv += std::to_string(report.rf_mdfs_vs_rf_cart.comparisons);
            csv += ',';
            csv += full_precision(report.rf_mdfs_vs_rf_cart.rate());
            csv += '\n';
        }
        const auto path = out_dir / "win_rates.csv";
        write_text(path, csv);
        written.push_back(path);
    }

    {
        std::string log;
        for (const auto& d : report.diagnostics) {
            log += d;
            log += '\n';
        }
        const auto path = out_dir / "diagnostics.log";
        write_text(path, log);
        written.push_back(path);
    }
    return written;
}

std::vector<std::filesystem::path> write_case_study(const experiments::CaseStudyResult& result,
                                                    const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;

    std::string policy = "# " + result.name + " targeted subgroups (c = " +
                         fixed(result.c, 2) + ", depth = " + std::to_string(result.depth) +
                         ")\n";
    for (const auto& entry : result.entries) {
        const auto& name = experiments::method_name(entry.method);
        const auto tree_path = out_dir / (result.name + "_" + name + "_tree.txt");
        write_text(tree_path, entry.rendered);
        written.push_back(tree_path);
        const auto json_path = out_dir / (result.name + "_" + name + "_tree.json");
        write_text(json_path, tree_to_json(entry.tree) + "\n");
        written.push_back(json_path);

        policy += "\n## " + name + "\n\n";
        policy += "cost: " + fixed(entry.policy.cost, 4) + " (" +
                  std::to_string(static_cast<std::size_t>(std::llround(
                      entry.policy.cost * static_cast<double>(entry.policy.total_samples)))) +
                  " of " + std::to_string(entry.policy.total_samples) + " samples)\n\n";
        if (entry.policy.targeted_leaves.empty()) {
            policy += "no targeted leaves\n";
            continue;
        }
        policy += "| subgroup | value | samples |\n|---|---|---|\n";
        for (const auto& leaf : entry.policy.targeted_leaves) {
            policy += "| " + path_text(leaf.path, entry.tree.feature_names) + " | " +
                      fixed(leaf.value, 3) + " | " + std::to_string(leaf.samples) + " |\n";
        }
    }
    const auto policy_path = out_dir / (result.name + "_policy.md");
    write_text(policy_path, policy);
    written.push_back(policy_path);
    return written;
}

}  // namespace lpcart::io
