// Command-line front end: fit / cv / loocv / weights / simulate / bounds.
// Results go to files or stdout, diagnostics to stderr. Exit codes:
// 0 success, 1 usage or input error, 2 numerical non-convergence.

#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "wlasso/io.hpp"

using namespace wlasso;

namespace {

WeightScheme parse_scheme(const std::string& name) {
    if (name == "uniform") return WeightScheme::Uniform;
    if (name == "type1") return WeightScheme::TypeI;
    if (name == "type2") return WeightScheme::TypeII;
    if (name == "type3") return WeightScheme::TypeIII;
    if (name == "type4") return WeightScheme::TypeIV;
    throw CLI::ValidationError("--weights", "unknown scheme '" + name + "'");
}

std::map<std::string, int> parse_label_map(const std::string& text) {
    std::map<std::string, int> map;
    std::istringstream in(text);
    for (std::string item; std::getline(in, item, ',');) {
        const auto eq = item.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--label-map", "expected LABEL=0|1 pairs");
        map[item.substr(0, eq)] = std::stoi(item.substr(eq + 1));
    }
    return map;
}

struct WeightsWithPilot {
    WeightVector w;
    double cv_lambda = -1.0; // plain-Lasso CV selection, when one was run
};

/// Normalized weights for a scheme. The adaptive pilot is a plain Lasso at
/// either the supplied pilot lambda or a 10-fold CV selection.
WeightsWithPilot build_weights(const Dataset& data, WeightScheme scheme,
                               const WeightConfig& wcfg, std::uint64_t seed) {
    WeightsWithPilot out;
    switch (scheme) {
        case WeightScheme::Uniform:
            out.w = WeightVector::uniform(data.p());
            return out;
        case WeightScheme::TypeI:
            out.w = normalize(type1_weights(data, wcfg));
            return out;
        case WeightScheme::TypeII:
            out.w = normalize(type2_weights(data, wcfg));
            return out;
        case WeightScheme::TypeIII:
            out.w = normalize(type3_weights(data, wcfg));
            return out;
        case WeightScheme::TypeIV: {
            const WeightVector uniform = WeightVector::uniform(data.p());
            double pilot_lambda;
            if (wcfg.lasso_pilot_lambda) {
                pilot_lambda = *wcfg.lasso_pilot_lambda;
            } else {
                const auto path = make_lambda_path(lambda_max(data, uniform));
                const auto cv =
                    cross_validate(data, uniform, path, 10, CvLoss::Deviance, seed);
                pilot_lambda = cv.lambda_opt;
                out.cv_lambda = pilot_lambda;
            }
            const FitResult pilot = fit(data, uniform, pilot_lambda);
            if (!pilot.converged)
                std::cerr << "warning: adaptive pilot fit did not converge\n";
            out.w = normalize(type4_weights(data, wcfg, pilot.coef));
            return out;
        }
    }
    throw std::logic_error("unknown scheme");
}

double resolve_lambda(const std::string& text, const Dataset& data, std::uint64_t seed) {
    if (text == "cv") {
        const WeightVector uniform = WeightVector::uniform(data.p());
        const auto path = make_lambda_path(lambda_max(data, uniform));
        const auto cv = cross_validate(data, uniform, path, 10, CvLoss::Deviance, seed);
        std::cerr << "cv-selected lambda = " << cv.lambda_opt << "\n";
        return cv.lambda_opt;
    }
    const double value = std::stod(text);
    if (value < 0.0) throw CLI::ValidationError("--lambda", "must be >= 0 or 'cv'");
    return value;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    if (out_path.empty())
        std::cout << j.dump(2) << "\n";
    else
        write_json(j, out_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted-Lasso logistic regression toolkit"};
    app.require_subcommand(1);

    std::string data_path, out_path, scheme_name = "uniform", lambda_text = "cv";
    std::string response_column, label_map_text;
    std::uint64_t seed = 1;
    double limit = 0.0, weight_r = 1.0;
    double pilot_lambda = -1.0;
    int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    auto add_data_flags = [&](CLI::App* cmd) {
        cmd->add_option("--data", data_path, "input CSV")->required();
        cmd->add_option("--response", response_column,
                        "response column name or 0-based index (default: first)");
        cmd->add_option("--label-map", label_map_text,
                        "categorical response mapping, e.g. ALL=1,AML=0");
    };
    auto load_data = [&]() {
        CsvSpec spec;
        spec.path = data_path;
        spec.response_column = response_column;
        if (!label_map_text.empty()) spec.label_map = parse_label_map(label_map_text);
        std::vector<std::string> warnings;
        Dataset data = load_csv(spec, &warnings);
        for (const auto& w : warnings) std::cerr << w << "\n";
        return data;
    };
    auto weight_config = [&]() {
        WeightConfig cfg;
        cfg.r = weight_r;
        if (pilot_lambda >= 0.0) cfg.lasso_pilot_lambda = pilot_lambda;
        return cfg;
    };

    // fit
    auto* cmd_fit = app.add_subcommand("fit", "solve the weighted-Lasso problem");
    add_data_flags(cmd_fit);
    cmd_fit->add_option("--weights", scheme_name, "uniform|type1|type2|type3|type4");
    cmd_fit->add_option("--lambda", lambda_text, "penalty level or 'cv'");
    cmd_fit->add_option("--limit", limit, "coefficient threshold applied to the report");
    cmd_fit->add_option("--seed", seed, "seed for CV fold assignment");
    cmd_fit->add_option("--out", out_path, "output JSON (default stdout)");
    cmd_fit->add_option("--r", weight_r, "concentration exponent");
    cmd_fit->add_option("--pilot-lambda", pilot_lambda, "fixed adaptive-pilot lambda");

    // cv
    int cv_k = 10;
    std::string loss_name = "deviance";
    auto* cmd_cv = app.add_subcommand("cv", "k-fold cross-validation over the path");
    add_data_flags(cmd_cv);
    cmd_cv->add_option("--weights", scheme_name);
    cmd_cv->add_option("--k", cv_k, "number of folds");
    cmd_cv->add_option("--loss", loss_name, "deviance|misclass");
    cmd_cv->add_option("--seed", seed);
    cmd_cv->add_option("--out", out_path);
    cmd_cv->add_option("--r", weight_r);
    cmd_cv->add_option("--pilot-lambda", pilot_lambda);

    // loocv
    auto* cmd_loocv = app.add_subcommand("loocv", "leave-one-out model size and error");
    add_data_flags(cmd_loocv);
    cmd_loocv->add_option("--weights", scheme_name);
    cmd_loocv->add_option("--lambda", lambda_text, "penalty level or 'cv'");
    cmd_loocv->add_option("--limit", limit, "coefficient threshold");
    cmd_loocv->add_option("--seed", seed);
    cmd_loocv->add_option("--out", out_path);
    cmd_loocv->add_option("--r", weight_r);
    cmd_loocv->add_option("--pilot-lambda", pilot_lambda);

    // weights
    bool raw = false;
    auto* cmd_weights = app.add_subcommand("weights", "compute penalty weights");
    add_data_flags(cmd_weights);
    cmd_weights->add_option("--weights", scheme_name)->required();
    cmd_weights->add_option("--r", weight_r);
    cmd_weights->add_option("--pilot-lambda", pilot_lambda);
    cmd_weights->add_option("--seed", seed);
    cmd_weights->add_flag("--raw", raw, "skip the sum-to-p normalization");
    cmd_weights->add_option("--out", out_path);

    // simulate
    int sim_pattern = 1, sim_p = 50, sim_replicates = 100;
    double sim_rho = 0.3;
    bool grid = false;
    std::string out_dir;
    auto* cmd_sim = app.add_subcommand("simulate", "replicated estimator comparison");
    cmd_sim->add_option("--pattern", sim_pattern, "1 or 2")->check(CLI::Range(1, 2));
    cmd_sim->add_option("--p", sim_p, "number of covariates");
    cmd_sim->add_option("--rho", sim_rho, "AR(1) correlation");
    cmd_sim->add_option("--replicates", sim_replicates);
    cmd_sim->add_option("--seed", seed);
    cmd_sim->add_option("--out", out_dir, "output directory")->required();
    cmd_sim->add_flag("--grid", grid, "sweep p in {50,100,150,200}, rho in {.3,.5,.8}, both patterns");
    cmd_sim->add_option("--jobs", jobs, "worker count (1 gives identical results)");

    // bounds
    double b_L = 1.0, b_B = 1.0, b_A = 1.0, b_lambda = 1.0, b_k = 0.5, b_eps = 0.0;
    double b_wmin = 1.0, b_wmax = 1.0, b_whsq = -1.0, b_delta = 0.05, b_bstar = 1e300;
    long long b_dstar = 0, b_n = 100, b_p = 50;
    auto* cmd_bounds = app.add_subcommand("bounds", "oracle-bound calculators");
    cmd_bounds->add_option("--L", b_L, "design sup-norm bound");
    cmd_bounds->add_option("--B", b_B, "l1 radius of the truth");
    cmd_bounds->add_option("--A", b_A, "confidence exponent");
    cmd_bounds->add_option("--lambda", b_lambda);
    cmd_bounds->add_option("--dstar", b_dstar, "true support size");
    cmd_bounds->add_option("--k", b_k, "restricted-eigenvalue constant");
    cmd_bounds->add_option("--eps", b_eps, "measurement-error level");
    cmd_bounds->add_option("--wmin", b_wmin);
    cmd_bounds->add_option("--wmax", b_wmax);
    cmd_bounds->add_option("--wh-sq", b_whsq, "sum of squared on-support weights (default dstar*wmin^2)");
    cmd_bounds->add_option("--n", b_n);
    cmd_bounds->add_option("--p", b_p);
    cmd_bounds->add_option("--delta", b_delta, "confidence level for the beta-min companion");
    cmd_bounds->add_option("--Bstar", b_bstar, "constant for the weight condition check");
    cmd_bounds->add_option("--out", out_path);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cmd_fit) {
            const Dataset data = load_data();
            const auto scheme = parse_scheme(scheme_name);
            const auto [w, cv_lambda] = build_weights(data, scheme, weight_config(), seed);
            const double lambda = resolve_lambda(lambda_text, data, seed);
            FitResult result = fit(data, w, lambda);
            nlohmann::json j = to_json(result);
            if (limit > 0.0) {
                auto [thresholded, support] = threshold_coefficients(result.coef, limit);
                j["thresholded_beta"] =
                    std::vector<double>(thresholded.beta.data(),
                                        thresholded.beta.data() + thresholded.beta.size());
                j["model_size"] = support.size();
            }
            emit(j, out_path);
            if (!result.converged) {
                std::cerr << "warning: solver did not converge (kkt violation "
                          << result.kkt_max_violation << ")\n";
                return 2;
            }
            return 0;
        }

        if (*cmd_cv) {
            const Dataset data = load_data();
            const auto scheme = parse_scheme(scheme_name);
            const auto [w, cv_lambda] = build_weights(data, scheme, weight_config(), seed);
            const auto path = make_lambda_path(lambda_max(data, w));
            const CvLoss loss = loss_name == "misclass" ? CvLoss::Misclassification
                                                        : CvLoss::Deviance;
            const auto report = cross_validate(data, w, path, cv_k, loss, seed);
            emit(to_json(report), out_path);
            return 0;
        }

        if (*cmd_loocv) {
            const Dataset data = load_data();
            const auto scheme = parse_scheme(scheme_name);
            const auto [w, cv_lambda] = build_weights(data, scheme, weight_config(), seed);
            const double lambda = resolve_lambda(lambda_text, data, seed);
            const auto report = loocv(data, w, lambda, limit);
            nlohmann::json j = to_json(report);
            j["lambda"] = lambda;
            j["limit"] = limit;
            j["weight_scheme"] = to_string(scheme);
            emit(j, out_path);
            return report.folds_failed > 0 ? 2 : 0;
        }

        if (*cmd_weights) {
            const Dataset data = load_data();
            const auto scheme = parse_scheme(scheme_name);
            auto [w, cv_lambda] = build_weights(data, scheme, weight_config(), seed);
            if (raw && scheme != WeightScheme::Uniform) {
                // recompute unnormalized
                const WeightConfig wcfg = weight_config();
                switch (scheme) {
                    case WeightScheme::TypeI: w = type1_weights(data, wcfg); break;
                    case WeightScheme::TypeII: w = type2_weights(data, wcfg); break;
                    case WeightScheme::TypeIII: w = type3_weights(data, wcfg); break;
                    default:
                        throw CLI::ValidationError("--raw",
                                                   "raw weights unsupported for type4");
                }
            }
            nlohmann::json j;
            j["weights"] = std::vector<double>(w.w.data(), w.w.data() + w.w.size());
            j["scheme"] = to_string(w.scheme);
            j["normalized"] = w.normalized;
            j["flagged_columns"] = w.flagged_columns;
            if (cv_lambda >= 0.0) j["pilot_lambda"] = cv_lambda;
            emit(j, out_path);
            return 0;
        }

        if (*cmd_sim) {
            std::filesystem::create_directories(out_dir);
            std::vector<std::tuple<int, int, double>> configs;
            if (grid) {
                for (int pattern : {1, 2})
                    for (int p : {50, 100, 150, 200})
                        for (double rho : {0.3, 0.5, 0.8})
                            configs.emplace_back(pattern, p, rho);
            } else {
                configs.emplace_back(sim_pattern, sim_p, sim_rho);
            }
            std::string combined = kSimCsvHeader + "\n";
            for (const auto& [pattern, p, rho] : configs) {
                SimConfig cfg;
                cfg.pattern = pattern == 1 ? BetaPattern::Pattern1 : BetaPattern::Pattern2;
                cfg.p = p;
                cfg.rho = rho;
                cfg.n_replicates = sim_replicates;
                cfg.seed = seed;
                cfg.jobs = jobs;
                const auto report = run_simulation(cfg);
                std::ostringstream stem;
                stem << "sim_pattern" << pattern << "_p" << p << "_rho" << rho;
                write_json(to_json(report),
                           (std::filesystem::path(out_dir) / (stem.str() + ".json")).string());
                write_text(kSimCsvHeader + "\n" + sim_report_csv_rows(report),
                           (std::filesystem::path(out_dir) / (stem.str() + ".csv")).string());
                combined += sim_report_csv_rows(report);
                std::cerr << "finished " << stem.str() << "\n";
            }
            write_text(combined,
                       (std::filesystem::path(out_dir) / "summary.csv").string());
            return 0;
        }

        if (*cmd_bounds) {
            BoundInputs in;
            in.L = b_L;
            in.B = b_B;
            in.A = b_A;
            in.lambda = b_lambda;
            in.d_star = static_cast<Eigen::Index>(b_dstar);
            in.k = b_k;
            in.eps_n = b_eps;
            in.n = static_cast<Eigen::Index>(b_n);
            in.p = static_cast<Eigen::Index>(b_p);
            // the calculators only consult w through min/max/on-support sums,
            // so a two-point surrogate with an explicit wh_sq override suffices
            in.w.w = (Vector(2) << b_wmin, b_wmax).finished();
            in.H.indices.insert(0);
            const double whsq = b_whsq >= 0.0 ? b_whsq
                                              : static_cast<double>(b_dstar) * b_wmin * b_wmin;

            const double s = s_constant(in.L, in.B);
            const double floor = theoretical_lambda_floor(in.L, in.A, b_wmin, in.n, in.p);
            if (in.lambda < floor)
                std::cerr << "warning: lambda " << in.lambda
                          << " is below the theoretical floor " << floor << "\n";

            const double tail = (in.lambda + 2.0 * s) / (in.lambda * b_wmin) * in.eps_n;
            const double pred_tail = (2.0 * in.lambda / s + 3.0) * in.eps_n;
            nlohmann::json j;
            j["s"] = s;
            j["lambda_floor"] = floor;
            j["lambda_above_floor"] = in.lambda >= floor;
            j["l1_weighted_stabil"] =
                2.0 * in.lambda * static_cast<double>(in.d_star) / (s * in.k * b_wmin) + tail;
            j["l1_stabil"] = 2.0 * in.lambda * whsq / (s * in.k * b_wmin) + tail;
            j["pred_weighted_stabil"] =
                3.0 * in.lambda * in.lambda * static_cast<double>(in.d_star) / (s * s * in.k) +
                pred_tail;
            j["pred_stabil"] =
                3.0 * in.lambda * in.lambda * whsq / (s * s * in.k) + pred_tail;
            const auto bmin = beta_min_threshold(in, b_delta);
            j["beta_min_b0"] = bmin.b0;
            j["p_of_delta"] = bmin.p_of_delta;
            j["failure_probability"] =
                std::pow(2.0 * static_cast<double>(in.p), -b_A * b_A);
            j["weight_condition_holds"] =
                b_B * (4.0 * b_wmax + b_wmin) / b_wmin + b_eps / b_wmin <= b_bstar;
            emit(j, out_path);
            return 0;
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
