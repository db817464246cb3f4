#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wlasso/sim.hpp"
#include "wlasso/solver.hpp"
#include "wlasso/tuning.hpp"

namespace wlasso {

enum class NaPolicy { Error, DropRow };

struct CsvSpec {
    std::string path;
    std::string response_column; // name (with header) or 0-based index; "" = first column
    char delimiter = ',';
    bool has_header = true;
    NaPolicy na_policy = NaPolicy::Error;
    std::map<std::string, int> label_map; // e.g. {"ALL",1},{"AML",0}; empty = numeric 0/1
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

inline std::string fmt17(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

inline bool is_na(const std::string& s) {
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

} // namespace detail

/// Load a Dataset from CSV, all-or-nothing: any malformed cell aborts the
/// whole load with row/column coordinates in the message.
inline Dataset load_csv(const CsvSpec& spec, std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(spec.path);
    if (!in) throw std::runtime_error("load_csv: cannot open " + spec.path);

    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) lines.push_back(line);
    if (lines.empty()) throw std::runtime_error("load_csv: empty file " + spec.path);

    std::vector<std::string> header;
    std::size_t first_row = 0;
    if (spec.has_header) {
        header = detail::split_csv_line(lines[0], spec.delimiter);
        first_row = 1;
    }
    if (lines.size() <= first_row) throw std::runtime_error("load_csv: no data rows");

    const std::size_t n_cols = detail::split_csv_line(lines[first_row], spec.delimiter).size();

    std::size_t response_idx = 0;
    if (!spec.response_column.empty()) {
        bool found = false;
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (header[j] == spec.response_column) {
                response_idx = j;
                found = true;
                break;
            }
        }
        if (!found) {
            try {
                const long idx = std::stol(spec.response_column);
                if (idx < 0 || static_cast<std::size_t>(idx) >= n_cols)
                    throw std::out_of_range("index");
                response_idx = static_cast<std::size_t>(idx);
                found = true;
            } catch (const std::exception&) {
                throw std::runtime_error("load_csv: response column '" +
                                         spec.response_column + "' not found");
            }
        }
    }

    std::vector<std::vector<double>> x_rows;
    std::vector<int> y_values;
    for (std::size_t li = first_row; li < lines.size(); ++li) {
        const auto fields = detail::split_csv_line(lines[li], spec.delimiter);
        if (fields.size() != n_cols)
            throw std::runtime_error("load_csv: row " + std::to_string(li + 1) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(n_cols));
        bool drop = false;
        std::vector<double> row;
        int y = 0;
        for (std::size_t j = 0; j < n_cols; ++j) {
            const std::string& cell = fields[j];
            if (detail::is_na(cell)) {
                if (spec.na_policy == NaPolicy::DropRow) {
                    drop = true;
                    break;
                }
                throw std::runtime_error("load_csv: NA at row " + std::to_string(li + 1) +
                                         ", column " + std::to_string(j + 1));
            }
            if (j == response_idx) {
                if (!spec.label_map.empty()) {
                    const auto it = spec.label_map.find(cell);
                    if (it == spec.label_map.end())
                        throw std::runtime_error("load_csv: unmapped response label '" +
                                                 cell + "' at row " + std::to_string(li + 1));
                    y = it->second;
                } else if (cell == "0" || cell == "1") {
                    y = cell == "1" ? 1 : 0;
                } else {
                    throw std::runtime_error(
                        "load_csv: response '" + cell + "' at row " + std::to_string(li + 1) +
                        " is not 0/1; pass a label map for categorical responses");
                }
            } else {
                std::size_t consumed = 0;
                double value = 0.0;
                try {
                    value = std::stod(cell, &consumed);
                } catch (const std::exception&) {
                    consumed = 0;
                }
                if (consumed != cell.size() || !std::isfinite(value))
                    throw std::runtime_error("load_csv: cannot parse '" + cell + "' at row " +
                                             std::to_string(li + 1) + ", column " +
                                             std::to_string(j + 1));
                row.push_back(value);
            }
        }
        if (drop) {
            if (warnings)
                warnings->push_back("load_csv: dropped row " + std::to_string(li + 1) +
                                    " (NA)");
            continue;
        }
        x_rows.push_back(std::move(row));
        y_values.push_back(y);
    }
    if (x_rows.empty()) throw std::runtime_error("load_csv: all rows dropped");

    Matrix x(x_rows.size(), x_rows[0].size());
    Eigen::VectorXi y(static_cast<Eigen::Index>(y_values.size()));
    for (std::size_t i = 0; i < x_rows.size(); ++i) {
        for (std::size_t j = 0; j < x_rows[i].size(); ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = x_rows[i][j];
        y[static_cast<Eigen::Index>(i)] = y_values[i];
    }
    return Dataset(std::move(x), std::move(y));
}

/// Write a Dataset back out (response first, 17 significant digits).
inline void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv: cannot write " + path);
    out << "y";
    for (Eigen::Index j = 0; j < data.p(); ++j) out << ",x" << (j + 1);
    out << "\n";
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        out << data.y[i];
        for (Eigen::Index j = 0; j < data.p(); ++j)
            out << "," << detail::fmt17(data.x(i, j));
        out << "\n";
    }
}

inline nlohmann::json to_json(const Coefficients& coef) {
    nlohmann::json j;
    j["beta"] = std::vector<double>(coef.beta.data(), coef.beta.data() + coef.beta.size());
    if (coef.intercept) j["intercept"] = *coef.intercept;
    return j;
}

inline nlohmann::json to_json(const FitResult& r) {
    nlohmann::json j;
    j["beta"] = std::vector<double>(r.coef.beta.data(),
                                    r.coef.beta.data() + r.coef.beta.size());
    if (r.coef.intercept) j["intercept"] = *r.coef.intercept;
    j["lambda"] = r.lambda;
    j["objective"] = r.objective;
    j["iterations"] = r.iterations;
    j["kkt_max_violation"] = r.kkt_max_violation;
    j["converged"] = r.converged;
    j["weights"] = std::vector<double>(r.weights.w.data(),
                                       r.weights.w.data() + r.weights.w.size());
    j["weight_scheme"] = to_string(r.weights.scheme);
    return j;
}

inline nlohmann::json to_json(const CvReport& r) {
    nlohmann::json j;
    j["lambda_path"] = std::vector<double>(r.lambda_path.values.data(),
                                           r.lambda_path.values.data() +
                                               r.lambda_path.values.size());
    j["mean_loss"] = std::vector<double>(r.mean_loss.data(),
                                         r.mean_loss.data() + r.mean_loss.size());
    j["se_loss"] =
        std::vector<double>(r.se_loss.data(), r.se_loss.data() + r.se_loss.size());
    j["lambda_opt"] = r.lambda_opt;
    j["fold_assignment"] = r.fold_assignment;
    j["loss_kind"] = r.loss_kind == CvLoss::Deviance ? "deviance" : "misclassification";
    return j;
}

inline nlohmann::json to_json(const LoocvReport& r) {
    nlohmann::json j;
    j["model_size_mean"] = r.model_size_mean;
    j["model_size_sd"] = r.model_size_sd;
    j["misclass_mean"] = r.misclass_mean;
    j["misclass_sd"] = r.misclass_sd;
    j["folds_completed"] = r.folds_completed;
    j["folds_failed"] = r.folds_failed;
    return j;
}

inline std::string pattern_name(BetaPattern p) {
    switch (p) {
        case BetaPattern::Pattern1: return "1";
        case BetaPattern::Pattern2: return "2";
        case BetaPattern::Custom: return "custom";
    }
    return "?";
}

inline nlohmann::json to_json(const SimReport& r) {
    nlohmann::json j;
    j["config"] = {{"n_train", r.config.n_train},
                   {"n_test", r.config.n_test},
                   {"p", r.config.p},
                   {"rho", r.config.rho},
                   {"pattern", pattern_name(r.config.pattern)},
                   {"n_replicates", r.config.n_replicates},
                   {"seed", r.config.seed},
                   {"cv_folds", r.config.cv_folds},
                   {"support_limit", r.config.support_limit}};
    nlohmann::json methods;
    for (const auto& [scheme, summary] : r.per_method) {
        methods[to_string(scheme)] = {
            {"l1_error_mean", summary.l1_error_mean},
            {"l1_error_sd", summary.l1_error_sd},
            {"pred_rms", summary.pred_rms},
            {"pred_mean_norm", summary.pred_mean_norm},
            {"pred_norm_sd", summary.pred_norm_sd},
            {"support_recovery_rate", summary.support_recovery_rate},
            {"replicates_completed", summary.replicates_completed},
            {"replicates_failed", summary.replicates_failed}};
    }
    j["per_method"] = methods;
    nlohmann::json rows = nlohmann::json::array();
    for (const ReplicateRow& row : r.per_replicate) {
        rows.push_back({{"replicate", row.replicate},
                        {"method", to_string(row.method)},
                        {"lambda_opt", row.lambda_opt},
                        {"l1_error", row.l1_error},
                        {"pred_norm", row.pred_norm},
                        {"support_size", row.recovery.size},
                        {"contains_true", row.recovery.contains_true},
                        {"exact_recovery", row.recovery.exact},
                        {"converged", row.converged}});
    }
    j["per_replicate"] = rows;
    return j;
}

inline const std::string kSimCsvHeader =
    "method,p,rho,pattern,l1_mean,l1_sd,pred_rms,pred_mean_norm,support_rate,"
    "replicates_completed";

/// One aggregate CSV row per method in the report.
inline std::string sim_report_csv_rows(const SimReport& r) {
    std::ostringstream out;
    for (const auto& [scheme, summary] : r.per_method) {
        out << to_string(scheme) << ',' << r.config.p << ',' << detail::fmt17(r.config.rho)
            << ',' << pattern_name(r.config.pattern) << ','
            << detail::fmt17(summary.l1_error_mean) << ','
            << detail::fmt17(summary.l1_error_sd) << ',' << detail::fmt17(summary.pred_rms)
            << ',' << detail::fmt17(summary.pred_mean_norm) << ','
            << detail::fmt17(summary.support_recovery_rate) << ','
            << summary.replicates_completed << '\n';
    }
    return out.str();
}

/// Deterministic serialization: nlohmann::json orders keys, doubles are
/// round-trip exact.
inline void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_json: cannot write " + path);
    out << j.dump(2) << "\n";
}

inline void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_text: cannot write " + path);
    out << text;
}

} // namespace wlasso
