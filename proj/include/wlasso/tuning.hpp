#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "wlasso/rng.hpp"
#include "wlasso/solver.hpp"

namespace wlasso {

enum class CvLoss { Deviance, Misclassification };

struct LambdaPath {
    Vector values;   // strictly decreasing, values[0] = lambda_max
    int n_lambda = 100;
    double min_ratio = 1e-4;
};

struct CvReport {
    LambdaPath lambda_path;
    Vector mean_loss;
    Vector se_loss;
    double lambda_opt = 0.0;
    std::vector<int> fold_assignment;
    CvLoss loss_kind = CvLoss::Deviance;
};

struct LoocvReport {
    double model_size_mean = 0.0;
    double model_size_sd = 0.0;
    double misclass_mean = 0.0;
    double misclass_sd = 0.0;
    int folds_completed = 0;
    int folds_failed = 0; // non-convergent inner fits, excluded from aggregates
};

/// Smallest lambda at which beta = 0 is optimal: max_j |score_j(0)| / w_j.
inline double lambda_max(const Dataset& data, const WeightVector& w) {
    if ((w.w.array() <= 0).any())
        throw std::invalid_argument("lambda_max: weights must be strictly positive");
    const Vector sc = score(data, Coefficients::zeros(data.p()));
    const double value = (sc.cwiseAbs().cwiseQuotient(w.w)).maxCoeff();
    if (value <= 0.0)
        throw std::invalid_argument("lambda_max: null score vanishes, path is degenerate");
    return value;
}

/// glmnet-style grid: n_lambda log-spaced values from lambda_max down to
/// lambda_max * min_ratio.
inline LambdaPath make_lambda_path(double lam_max, int n_lambda = 100,
                                   double min_ratio = 1e-4) {
    if (n_lambda < 1 || !(lam_max > 0.0) || !(min_ratio > 0.0 && min_ratio < 1.0))
        throw std::invalid_argument("make_lambda_path: invalid parameters");
    LambdaPath path;
    path.n_lambda = n_lambda;
    path.min_ratio = min_ratio;
    path.values.resize(n_lambda);
    if (n_lambda == 1) {
        path.values[0] = lam_max;
        return path;
    }
    const double log_step = std::log(min_ratio) / (n_lambda - 1);
    for (int i = 0; i < n_lambda; ++i) path.values[i] = lam_max * std::exp(log_step * i);
    return path;
}

/// Solve the whole path with warm starts, top down.
inline std::vector<FitResult> fit_path(const Dataset& data, const WeightVector& w,
                                       const LambdaPath& path,
                                       const SolverConfig& cfg = SolverConfig{}) {
    std::vector<FitResult> fits;
    fits.reserve(path.values.size());
    Coefficients warm = Coefficients::zeros(data.p());
    for (Eigen::Index i = 0; i < path.values.size(); ++i) {
        FitResult r = fit(data, w, path.values[i], cfg, &warm);
        warm = r.coef;
        fits.push_back(std::move(r));
    }
    return fits;
}

namespace detail {

/// Stratified-by-class fold labels, deterministic in seed.
inline std::vector<int> stratified_folds(const Eigen::VectorXi& y, int k,
                                         std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> assignment(y.size(), -1);
    for (int cls : {0, 1}) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y[i] == cls) idx.push_back(i);
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[rng.next_below(i)]);
        for (std::size_t pos = 0; pos < idx.size(); ++pos)
            assignment[idx[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
    }
    return assignment;
}

inline Dataset subset_rows(const Dataset& data, const std::vector<Eigen::Index>& rows) {
    Matrix x(rows.size(), data.p());
    Eigen::VectorXi y(rows.size());
    std::optional<Vector> ow;
    if (data.obs_weights) ow = Vector(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        x.row(i) = data.x.row(rows[i]);
        y[i] = data.y[rows[i]];
        if (ow) (*ow)[i] = (*data.obs_weights)[rows[i]];
    }
    return Dataset(std::move(x), std::move(y), std::move(ow));
}

inline double heldout_loss(const Dataset& data, Eigen::Index row,
                           const Coefficients& coef, CvLoss kind) {
    const double eta = data.x.row(row).dot(coef.beta) +
                       (coef.intercept ? *coef.intercept : 0.0);
    if (kind == CvLoss::Deviance)
        return 2.0 * (log1p_exp(eta) - data.y[row] * eta);
    const int predicted = sigmoid_prob(eta) >= 0.5 ? 1 : 0;
    return predicted == data.y[row] ? 0.0 : 1.0;
}

} // namespace detail

/// k-fold cross-validation over the path. Folds are stratified by class and
/// deterministic in seed; lambda_opt is the loss minimizer with ties broken
/// toward the larger (sparser) lambda.
inline CvReport cross_validate(const Dataset& data, const WeightVector& w,
                               const LambdaPath& path, int k, CvLoss loss_kind,
                               std::uint64_t seed,
                               const SolverConfig& cfg = SolverConfig{}) {
    if (k < 2 || k > data.n())
        throw std::invalid_argument("cross_validate: need 2 <= k <= n");

    CvReport report;
    report.lambda_path = path;
    report.loss_kind = loss_kind;
    report.fold_assignment = detail::stratified_folds(data.y, k, seed);

    const auto n_lambda = path.values.size();
    Matrix fold_mean(k, n_lambda);
    Vector fold_size = Vector::Zero(k);

    for (int fold = 0; fold < k; ++fold) {
        std::vector<Eigen::Index> train_rows, test_rows;
        for (Eigen::Index i = 0; i < data.n(); ++i)
            (report.fold_assignment[i] == fold ? test_rows : train_rows).push_back(i);
        if (test_rows.empty())
            throw std::invalid_argument("cross_validate: empty fold, reduce k");
        const Dataset train = detail::subset_rows(data, train_rows);
        const std::vector<FitResult> fits = fit_path(train, w, path, cfg);

        fold_size[fold] = static_cast<double>(test_rows.size());
        for (Eigen::Index li = 0; li < n_lambda; ++li) {
            double acc = 0.0;
            for (Eigen::Index row : test_rows)
                acc += detail::heldout_loss(data, row, fits[li].coef, loss_kind);
            fold_mean(fold, li) = acc / static_cast<double>(test_rows.size());
        }
    }

    report.mean_loss.resize(n_lambda);
    report.se_loss.resize(n_lambda);
    const double n_total = fold_size.sum();
    for (Eigen::Index li = 0; li < n_lambda; ++li) {
        report.mean_loss[li] = fold_size.dot(fold_mean.col(li)) / n_total;
        double var = 0.0;
        for (int fold = 0; fold < k; ++fold) {
            const double d = fold_mean(fold, li) - fold_mean.col(li).mean();
            var += d * d;
        }
        var /= std::max(1, k - 1);
        report.se_loss[li] = std::sqrt(var / k);
    }

    Eigen::Index best = 0;
    for (Eigen::Index li = 1; li < n_lambda; ++li)
        if (report.mean_loss[li] < report.mean_loss[best]) best = li; // strict: ties keep larger lambda
    report.lambda_opt = path.values[best];
    return report;
}

/// Set |beta_j| < limit to exactly zero; the support is what survives.
inline std::pair<Coefficients, SupportSet> threshold_coefficients(const Coefficients& coef,
                                                                  double limit) {
    if (limit < 0.0) throw std::invalid_argument("threshold_coefficients: limit >= 0");
    Coefficients out = coef;
    for (Eigen::Index j = 0; j < out.beta.size(); ++j)
        if (std::abs(out.beta[j]) < limit) out.beta[j] = 0.0;
    return {out, SupportSet::from_coefficients(out, 0.0)};
}

/// Leave-one-out CV at a fixed lambda: per fold, fit on n-1 rows, threshold
/// at limit, record model size and the held-out 0/1 error. Non-convergent
/// fits are counted and excluded.
inline LoocvReport loocv(const Dataset& data, const WeightVector& w, double lambda,
                         double limit, const SolverConfig& cfg = SolverConfig{}) {
    if (data.n() < 2) throw std::invalid_argument("loocv: need n >= 2");
    std::vector<double> sizes, errors;
    LoocvReport report;
    for (Eigen::Index held = 0; held < data.n(); ++held) {
        std::vector<Eigen::Index> train_rows;
        for (Eigen::Index i = 0; i < data.n(); ++i)
            if (i != held) train_rows.push_back(i);
        const Dataset train = detail::subset_rows(data, train_rows);
        const FitResult r = fit(train, w, lambda, cfg);
        if (!r.converged) {
            ++report.folds_failed;
            continue;
        }
        auto [thresholded, support] = threshold_coefficients(r.coef, limit);
        sizes.push_back(static_cast<double>(support.size()));
        errors.push_back(detail::heldout_loss(data, held, thresholded,
                                              CvLoss::Misclassification));
    }
    report.folds_completed = static_cast<int>(sizes.size());
    auto mean_sd = [](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double var = 0.0;
        for (double x : v) var += (x - mean) * (x - mean);
        var /= std::max<std::size_t>(1, v.size() - 1);
        return std::pair<double, double>{mean, std::sqrt(var)};
    };
    if (!sizes.empty()) {
        std::tie(report.model_size_mean, report.model_size_sd) = mean_sd(sizes);
        std::tie(report.misclass_mean, report.misclass_sd) = mean_sd(errors);
    }
    return report;
}

/// Tuning-parameter floor (20 L A / w_min) sqrt(2 log(2p) / n).
inline double theoretical_lambda_floor(double L, double A, double w_min,
                                       Eigen::Index n, Eigen::Index p) {
    if (!(L > 0.0) || !(A >= 1.0) || !(w_min > 0.0) || n < 1 || p < 1)
        throw std::invalid_argument("theoretical_lambda_floor: invalid inputs");
    return (20.0 * L * A / w_min) *
           std::sqrt(2.0 * std::log(2.0 * static_cast<double>(p)) / static_cast<double>(n));
}

} // namespace wlasso
