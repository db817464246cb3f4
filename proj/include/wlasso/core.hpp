#pragma once

#include <cmath>

#include "wlasso/types.hpp"

namespace wlasso {

/// Logistic function exp(eta)/(1+exp(eta)), overflow-safe on both tails.
inline double sigmoid_prob(double eta) {
    if (eta < 0.0) {
        const double e = std::exp(eta);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(-eta));
}

/// log(1 + exp(eta)) without overflow: branches at eta = 0.
inline double log1p_exp(double eta) {
    if (eta <= 0.0) return std::log1p(std::exp(eta));
    return eta + std::log1p(std::exp(-eta));
}

inline Vector linear_predictor(const Dataset& data, const Coefficients& coef) {
    Vector eta = data.x * coef.beta;
    if (coef.intercept) eta.array() += *coef.intercept;
    return eta;
}

/// Average negative log-likelihood -(1/n) sum_i [y_i eta_i - log(1+exp(eta_i))].
/// With per-observation weights R_i each term is scaled by n*R_i, so uniform
/// R_i = 1/n reproduces the unweighted loss.
inline double neg_log_likelihood(const Dataset& data, const Coefficients& coef) {
    check_dims(data, coef);
    const Vector eta = linear_predictor(data, coef);
    const auto n = data.n();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double term = data.y[i] * eta[i] - log1p_exp(eta[i]);
        acc += data.obs_weights ? static_cast<double>(n) * (*data.obs_weights)[i] * term
                                : term;
    }
    return -acc / static_cast<double>(n);
}

/// Gradient of neg_log_likelihood: -(1/n) sum_i x_i (y_i - pi_i).
inline Vector gradient(const Dataset& data, const Coefficients& coef) {
    check_dims(data, coef);
    const Vector eta = linear_predictor(data, coef);
    const auto n = data.n();
    Vector residual(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double r = data.y[i] - sigmoid_prob(eta[i]);
        if (data.obs_weights) r *= static_cast<double>(n) * (*data.obs_weights)[i];
        residual[i] = r;
    }
    return -(data.x.transpose() * residual) / static_cast<double>(n);
}

/// Score at beta: (1/n) sum_i x_i (y_i - pi_i). Equal to -gradient.
inline Vector score(const Dataset& data, const Coefficients& coef) {
    return -gradient(data, coef);
}

/// Classify 1 where pi >= cutoff (ties go to class 1).
inline Eigen::VectorXi predict_class(const Dataset& data, const Coefficients& coef,
                                     double cutoff = 0.5) {
    check_dims(data, coef);
    if (!(cutoff > 0.0 && cutoff < 1.0))
        throw std::invalid_argument("predict_class: cutoff must lie in (0,1)");
    const Vector eta = linear_predictor(data, coef);
    Eigen::VectorXi out(data.n());
    for (Eigen::Index i = 0; i < data.n(); ++i)
        out[i] = sigmoid_prob(eta[i]) >= cutoff ? 1 : 0;
    return out;
}

} // namespace wlasso
