#pragma once

#include <atomic>
#include <map>
#include <thread>
#include <vector>

#include "wlasso/theory.hpp"
#include "wlasso/tuning.hpp"

namespace wlasso {

enum class BetaPattern { Pattern1, Pattern2, Custom };

struct SimConfig {
    Eigen::Index n_train = 100;
    Eigen::Index n_test = 200;
    Eigen::Index p = 50;
    double rho = 0.3;
    BetaPattern pattern = BetaPattern::Pattern1;
    Vector custom_beta; // used when pattern == Custom
    int n_replicates = 100;
    std::uint64_t seed = 1;
    std::vector<WeightScheme> methods = {WeightScheme::Uniform, WeightScheme::TypeI,
                                         WeightScheme::TypeII, WeightScheme::TypeIII,
                                         WeightScheme::TypeIV};
    int cv_folds = 10;
    double support_limit = 1e-4;
    int jobs = 1;
    SolverConfig solver;
    WeightConfig weight_cfg;

    void validate() const {
        if (n_train < 1 || n_test < 1)
            throw std::invalid_argument("SimConfig: n_train, n_test >= 1");
        if (!(rho >= 0.0 && rho < 1.0))
            throw std::invalid_argument("SimConfig: rho in [0,1)");
        if (n_replicates < 1) throw std::invalid_argument("SimConfig: n_replicates >= 1");
        if (jobs < 1) throw std::invalid_argument("SimConfig: jobs >= 1");
    }
};

struct SupportRecovery {
    bool contains_true = false;
    bool exact = false;
    std::size_t size = 0;
};

struct ReplicateRow {
    int replicate = 0;
    WeightScheme method = WeightScheme::Uniform;
    double lambda_opt = 0.0;
    double l1_error = 0.0;
    double pred_norm = 0.0; // |X_test (beta* - beta_hat)|_2
    SupportRecovery recovery;
    bool converged = false;
};

struct MethodSummary {
    double l1_error_mean = 0.0;
    double l1_error_sd = 0.0;
    double pred_rms = 0.0;       // sqrt(mean of squared norms) - headline
    double pred_mean_norm = 0.0; // plain mean of per-replicate norms
    double pred_norm_sd = 0.0;
    double support_recovery_rate = 0.0; // fraction with H(beta*) contained
    int replicates_completed = 0;
    int replicates_failed = 0;
};

struct SimReport {
    SimConfig config;
    std::map<WeightScheme, MethodSummary> per_method;
    std::vector<ReplicateRow> per_replicate;
};

/// Rows i.i.d. N_p(0, Sigma) with Sigma_kl = rho^{|k-l|}, built by the AR(1)
/// recursion column by column.
inline Matrix gen_ar1_gaussian(Eigen::Index n, Eigen::Index p, double rho,
                               std::uint64_t seed) {
    if (!(rho >= 0.0 && rho < 1.0))
        throw std::invalid_argument("gen_ar1_gaussian: rho in [0,1)");
    Rng rng(seed);
    Matrix x(n, p);
    const double innovation = std::sqrt(1.0 - rho * rho);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = rng.next_normal();
        for (Eigen::Index j = 1; j < p; ++j)
            x(i, j) = rho * x(i, j - 1) + innovation * rng.next_normal();
    }
    return x;
}

/// The two built-in true-coefficient patterns.
inline Coefficients beta_star(BetaPattern pattern, Eigen::Index p,
                              const Vector& custom = Vector()) {
    if (pattern == BetaPattern::Custom) {
        if (custom.size() != p)
            throw std::invalid_argument("beta_star: custom vector length mismatch");
        return Coefficients(custom);
    }
    if (p < 9) throw std::invalid_argument("beta_star: built-in patterns need p >= 9");
    Vector beta = Vector::Zero(p);
    if (pattern == BetaPattern::Pattern1) {
        beta.head(9).setConstant(10.0);
    } else {
        beta.segment(0, 3).setConstant(17.0);
        beta.segment(3, 3).setConstant(-5.0);
        beta.segment(6, 3).setConstant(7.0);
    }
    return Coefficients(std::move(beta));
}

/// Y_i ~ Bernoulli(sigmoid(x_i beta*)), independent across rows.
inline Eigen::VectorXi gen_responses(const Matrix& x, const Coefficients& coef,
                                     std::uint64_t seed) {
    if (x.cols() != coef.beta.size())
        throw std::invalid_argument("gen_responses: dimension mismatch");
    Rng rng(seed);
    Eigen::VectorXi y(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double eta = x.row(i).dot(coef.beta) + (coef.intercept ? *coef.intercept : 0.0);
        y[i] = rng.next_double() < sigmoid_prob(eta) ? 1 : 0;
    }
    return y;
}

/// Per-replicate prediction norm |X_test beta* - X_test beta_hat|_2.
inline double prediction_error(const Matrix& x_test, const Coefficients& truth,
                               const Coefficients& estimate) {
    if (x_test.cols() != truth.beta.size() || x_test.cols() != estimate.beta.size())
        throw std::invalid_argument("prediction_error: dimension mismatch");
    return (x_test * (truth.beta - estimate.beta)).norm();
}

inline SupportRecovery support_recovery(const Coefficients& estimate,
                                        const Coefficients& truth, double limit) {
    const SupportSet truth_support = SupportSet::from_coefficients(truth, 0.0);
    const SupportSet est_support = SupportSet::from_coefficients(estimate, limit);
    SupportRecovery out;
    out.size = est_support.size();
    out.contains_true = std::includes(est_support.indices.begin(), est_support.indices.end(),
                                      truth_support.indices.begin(),
                                      truth_support.indices.end());
    out.exact = est_support.indices == truth_support.indices;
    return out;
}

namespace detail {

inline WeightVector scheme_weights(WeightScheme scheme, const Dataset& train,
                                   const WeightConfig& wcfg, const Coefficients& pilot) {
    switch (scheme) {
        case WeightScheme::Uniform: return WeightVector::uniform(train.p());
        case WeightScheme::TypeI: return normalize(type1_weights(train, wcfg));
        case WeightScheme::TypeII: return normalize(type2_weights(train, wcfg));
        case WeightScheme::TypeIII: return normalize(type3_weights(train, wcfg));
        case WeightScheme::TypeIV: return normalize(type4_weights(train, wcfg, pilot));
    }
    throw std::logic_error("scheme_weights: unknown scheme");
}

/// One replicate: generate data, pick lambda_op by plain-Lasso 10-fold CV,
/// fit every method at that lambda with its own normalized weights.
inline std::vector<ReplicateRow> run_replicate(const SimConfig& cfg, int replicate) {
    const std::uint64_t base = cfg.seed;
    const std::uint64_t stream = static_cast<std::uint64_t>(replicate) * 8;
    auto stream_seed = [&](int which) {
        Rng r = Rng::derive(base, stream + static_cast<std::uint64_t>(which));
        return r.next_u64();
    };

    const Coefficients truth = beta_star(cfg.pattern, cfg.p, cfg.custom_beta);
    const Matrix x_train = gen_ar1_gaussian(cfg.n_train, cfg.p, cfg.rho, stream_seed(0));
    const Eigen::VectorXi y_train = gen_responses(x_train, truth, stream_seed(1));
    const Matrix x_test = gen_ar1_gaussian(cfg.n_test, cfg.p, cfg.rho, stream_seed(2));
    const Dataset train(x_train, y_train);

    const WeightVector uniform = WeightVector::uniform(cfg.p);
    const double lam_max = lambda_max(train, uniform);
    const LambdaPath path = make_lambda_path(lam_max);
    const CvReport cv = cross_validate(train, uniform, path, cfg.cv_folds,
                                       CvLoss::Deviance, stream_seed(3), cfg.solver);
    const double lambda_op = cv.lambda_opt;

    // Pilot for the adaptive scheme: plain Lasso at the CV-selected lambda.
    const FitResult pilot_fit = fit(train, uniform, lambda_op, cfg.solver);

    std::vector<ReplicateRow> rows;
    rows.reserve(cfg.methods.size());
    for (WeightScheme scheme : cfg.methods) {
        ReplicateRow row;
        row.replicate = replicate;
        row.method = scheme;
        row.lambda_opt = lambda_op;
        try {
            const WeightVector w =
                scheme_weights(scheme, train, cfg.weight_cfg, pilot_fit.coef);
            const FitResult r = scheme == WeightScheme::Uniform
                                    ? pilot_fit
                                    : fit(train, w, lambda_op, cfg.solver);
            row.converged = r.converged;
            row.l1_error = (r.coef.beta - truth.beta).lpNorm<1>();
            row.pred_norm = prediction_error(x_test, truth, r.coef);
            row.recovery = support_recovery(r.coef, truth, cfg.support_limit);
        } catch (const std::exception&) {
            row.converged = false;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace detail

/// Replicated comparison of the five estimators. Replicates run on a worker
/// pool; each has its own derived seed and results are aggregated by index,
/// so the report is identical for any jobs count.
inline SimReport run_simulation(const SimConfig& cfg) {
    cfg.validate();
    std::vector<std::vector<ReplicateRow>> by_replicate(cfg.n_replicates);

    const int workers = std::min(cfg.jobs, cfg.n_replicates);
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    auto work = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= cfg.n_replicates) return;
            by_replicate[r] = detail::run_replicate(cfg, r);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    SimReport report;
    report.config = cfg;
    for (auto& rows : by_replicate)
        for (auto& row : rows) report.per_replicate.push_back(row);

    for (WeightScheme scheme : cfg.methods) {
        std::vector<double> l1, pred;
        int contains = 0, failed = 0;
        for (const ReplicateRow& row : report.per_replicate) {
            if (row.method != scheme) continue;
            if (!row.converged) {
                ++failed;
                continue;
            }
            l1.push_back(row.l1_error);
            pred.push_back(row.pred_norm);
            if (row.recovery.contains_true) ++contains;
        }
        MethodSummary summary;
        summary.replicates_completed = static_cast<int>(l1.size());
        summary.replicates_failed = failed;
        if (!l1.empty()) {
            auto mean = [](const std::vector<double>& v) {
                double acc = 0.0;
                for (double x : v) acc += x;
                return acc / static_cast<double>(v.size());
            };
            auto sd = [&](const std::vector<double>& v, double m) {
                if (v.size() < 2) return 0.0;
                double acc = 0.0;
                for (double x : v) acc += (x - m) * (x - m);
                return std::sqrt(acc / static_cast<double>(v.size() - 1));
            };
            summary.l1_error_mean = mean(l1);
            summary.l1_error_sd = sd(l1, summary.l1_error_mean);
            summary.pred_mean_norm = mean(pred);
            summary.pred_norm_sd = sd(pred, summary.pred_mean_norm);
            double sq = 0.0;
            for (double x : pred) sq += x * x;
            summary.pred_rms = std::sqrt(sq / static_cast<double>(pred.size()));
            summary.support_recovery_rate =
                static_cast<double>(contains) / static_cast<double>(l1.size());
        }
        report.per_method[scheme] = summary;
    }
    return report;
}

} // namespace wlasso
