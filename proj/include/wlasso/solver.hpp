#pragma once

#include <cmath>
#include <limits>

#include "wlasso/core.hpp"
#include "wlasso/weights.hpp"

namespace wlasso {

enum class Algorithm { ProxGradFista, TransformThenUnweighted };

struct SolverConfig {
    int max_iter = 10000;
    double tol_obj = 1e-9;  // relative objective change
    double tol_kkt = 1e-6;  // max KKT violation
    Algorithm algorithm = Algorithm::ProxGradFista;
    double backtracking_shrink = 0.5;

    void validate() const {
        if (max_iter < 1) throw std::invalid_argument("SolverConfig: max_iter >= 1");
        if (!(tol_obj > 0.0 && tol_kkt > 0.0))
            throw std::invalid_argument("SolverConfig: tolerances must be > 0");
        if (!(backtracking_shrink > 0.0 && backtracking_shrink < 1.0))
            throw std::invalid_argument("SolverConfig: shrink in (0,1)");
    }
};

struct FitResult {
    Coefficients coef;
    double lambda = 0.0;
    WeightVector weights;
    double objective = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    double kkt_max_violation = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
};

/// Penalized objective: neg_log_likelihood + lambda * sum_j w_j |beta_j|.
inline double penalized_objective(const Dataset& data, const Coefficients& coef,
                                  const WeightVector& w, double lambda) {
    return neg_log_likelihood(data, coef) +
           lambda * (w.w.array() * coef.beta.array().abs()).sum();
}

/// Soft-threshold step: sign(z) max(|z| - step*lambda*w_j, 0), z = beta - step*grad.
inline Vector prox_step(const Vector& beta, const Vector& grad, double step,
                        const WeightVector& w, double lambda) {
    if (!(step > 0.0)) throw std::invalid_argument("prox_step: step must be > 0");
    Vector out(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double z = beta[j] - step * grad[j];
        const double threshold = step * lambda * w.w[j];
        out[j] = std::copysign(std::max(std::abs(z) - threshold, 0.0), z);
    }
    return out;
}

/// Per-coordinate KKT violations of the subgradient system at result.coef.
/// Active coordinates: |score_j - lambda w_j sign(beta_j)|.
/// Inactive: max(0, |score_j| - lambda w_j).
inline Vector kkt_residuals(const Dataset& data, const FitResult& result) {
    check_dims(data, result.coef);
    const Vector sc = score(data, result.coef);
    Vector viol(data.p());
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        const double beta_j = result.coef.beta[j];
        const double lw = result.lambda * result.weights.w[j];
        if (beta_j != 0.0)
            viol[j] = std::abs(sc[j] - lw * (beta_j > 0 ? 1.0 : -1.0));
        else
            viol[j] = std::max(0.0, std::abs(sc[j]) - lw);
    }
    return viol;
}

namespace detail {

inline double kkt_max(const Dataset& data, const FitResult& result) {
    return kkt_residuals(data, result).maxCoeff();
}

} // namespace detail

/// Minimize the weighted-Lasso objective by FISTA with backtracking line
/// search and monotone restart. Converged means both the relative objective
/// change fell below tol_obj and the max KKT violation is below tol_kkt.
/// At lambda = 0 only the gradient-norm KKT check applies and a diverging
/// iterate (|beta|_inf > 1e6) raises a perfect-separation error.
inline FitResult fit(const Dataset& data, const WeightVector& w, double lambda,
                     const SolverConfig& cfg = SolverConfig{},
                     const Coefficients* init = nullptr) {
    cfg.validate();
    if (lambda < 0.0) throw std::invalid_argument("fit: lambda must be >= 0");
    if (w.p() != data.p()) throw std::invalid_argument("fit: weight length mismatch");

    const auto n = data.n();
    const double nd = static_cast<double>(n);
    Vector x = init ? init->beta : Vector::Zero(data.p());
    if (init) check_dims(data, *init);
    Vector x_prev = x;
    double momentum = 1.0; // FISTA t_k sequence

    // Everything below works off cached linear predictors; eta of the
    // momentum point is a linear combination of cached ones, so a normal
    // iteration costs two matrix passes (X^T residual and X * candidate).
    auto nll_at = [&](const Vector& eta) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double term = data.y[i] * eta[i] - log1p_exp(eta[i]);
            acc += data.obs_weights ? nd * (*data.obs_weights)[i] * term : term;
        }
        return -acc / nd;
    };
    auto grad_at = [&](const Vector& eta) {
        Vector residual(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = data.y[i] - sigmoid_prob(eta[i]);
            if (data.obs_weights) r *= nd * (*data.obs_weights)[i];
            residual[i] = r;
        }
        return Vector(-(data.x.transpose() * residual) / nd);
    };
    auto kkt_from_grad = [&](const Vector& beta, const Vector& grad) {
        double worst = 0.0;
        for (Eigen::Index j = 0; j < data.p(); ++j) {
            const double lw = lambda * w.w[j];
            const double viol = beta[j] != 0.0
                                    ? std::abs(-grad[j] - lw * (beta[j] > 0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::abs(grad[j]) - lw);
            worst = std::max(worst, viol);
        }
        return worst;
    };

    // Inverse of the Lipschitz over-estimate |X|_op^2/(4n) <= |X|_F^2/(4n).
    double step = 4.0 * static_cast<double>(n) / data.x.squaredNorm();
    // The Frobenius bound is loose by up to the rank, so the line search may
    // grow the step back, up to the spectral bound 4n/|X|_op^2; the momentum
    // recursion is only stable for steps below 1/L, and past that rounding
    // noise keeps the iterate from reaching tight KKT tolerances. lambda = 0
    // is uncapped so separated data diverges into the guard below instead of
    // stalling.
    double max_step = std::numeric_limits<double>::infinity();
    if (lambda > 0.0) {
        Vector v = Vector::LinSpaced(data.p(), 1.0, 2.0).normalized();
        double sigma2 = 0.0, prev = 0.0;
        for (int it = 0; it < 200; ++it) {
            v = data.x.transpose() * (data.x * v);
            sigma2 = v.norm();
            if (sigma2 == 0.0) break;
            v /= sigma2;
            if (std::abs(sigma2 - prev) <= 1e-8 * sigma2) break;
            prev = sigma2;
        }
        if (sigma2 > 0.0) max_step = 0.99 * 4.0 * static_cast<double>(n) / sigma2;
    }

    auto penalty = [&](const Vector& b) {
        return lambda * (w.w.array() * b.array().abs()).sum();
    };

    Vector eta_x = data.x * x;
    Vector eta_x_prev = eta_x;
    double smooth_x = nll_at(eta_x);
    double obj = smooth_x + penalty(x);
    double kkt = std::numeric_limits<double>::infinity();
    int iter = 0;
    bool converged = false;

    Vector cand, eta_cand;
    double smooth_cand = 0.0;
    auto backtrack = [&](const Vector& base, double f_base, const Vector& grad_base) {
        step = std::min(step / cfg.backtracking_shrink, max_step);
        for (;;) {
            cand = prox_step(base, grad_base, step, w, lambda);
            Vector diff = cand - base;
            const double quad = f_base + grad_base.dot(diff) + diff.squaredNorm() / (2.0 * step);
            eta_cand = data.x * cand;
            smooth_cand = nll_at(eta_cand);
            if (smooth_cand <= quad + 1e-14 * std::max(1.0, std::abs(quad))) return;
            step *= cfg.backtracking_shrink;
        }
    };

    for (iter = 1; iter <= cfg.max_iter; ++iter) {
        const double momentum_next = (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum)) / 2.0;
        const double c = (momentum - 1.0) / momentum_next;
        Vector y = x + c * (x - x_prev);
        Vector eta_y = eta_x + c * (eta_x - eta_x_prev);

        backtrack(y, nll_at(eta_y), grad_at(eta_y));
        double obj_cand = smooth_cand + penalty(cand);

        if (obj_cand > obj + 1e-12) {
            // Monotone restart: redo the step from x, which cannot ascend.
            backtrack(x, smooth_x, grad_at(eta_x));
            obj_cand = smooth_cand + penalty(cand);
            momentum = 1.0;
        } else {
            momentum = momentum_next;
        }

        x_prev.swap(x);
        x = cand;
        eta_x_prev.swap(eta_x);
        eta_x = eta_cand;
        smooth_x = smooth_cand;
        const double rel_change = std::abs(obj - obj_cand) / std::max(1.0, std::abs(obj));
        obj = obj_cand;

        if (lambda == 0.0 && x.cwiseAbs().maxCoeff() > 1e6)
            throw std::runtime_error(
                "fit: iterate diverging at lambda = 0; data looks perfectly separated "
                "and the unpenalized maximum likelihood estimate does not exist");

        if (rel_change <= cfg.tol_obj || iter % 50 == 0) {
            // At lambda = 0 this reduces to the max absolute gradient entry.
            kkt = kkt_from_grad(x, grad_at(eta_x));
            if (rel_change <= cfg.tol_obj && kkt <= cfg.tol_kkt) {
                converged = true;
                break;
            }
        }
    }

    FitResult result;
    result.coef = Coefficients(x);
    result.lambda = lambda;
    result.weights = w;
    result.objective = obj;
    result.iterations = std::min(iter, cfg.max_iter);
    result.kkt_max_violation =
        lambda == 0.0 ? gradient(data, Coefficients(x)).cwiseAbs().maxCoeff()
                      : detail::kkt_max(data, result);
    result.converged = converged && result.kkt_max_violation <= cfg.tol_kkt;
    return result;
}

/// Solve the weighted problem through the column-rescaling identity:
/// X~_j = X_j / w_j, solve the uniform-weight problem, map back beta_j = beta~_j / w_j.
/// The result is certified against the KKT system of the original problem.
inline FitResult fit_by_transform(const Dataset& data, const WeightVector& w,
                                  double lambda, const SolverConfig& cfg = SolverConfig{},
                                  double zero_floor = 1e-8) {
    if ((w.w.array() < zero_floor).any())
        throw std::invalid_argument(
            "fit_by_transform: weight below zero_floor, transform is ill-conditioned");

    Matrix x_tilde = data.x;
    for (Eigen::Index j = 0; j < data.p(); ++j) x_tilde.col(j) /= w.w[j];
    Dataset transformed(std::move(x_tilde), data.y, data.obs_weights);

    // The uniform-problem residuals scale back by w_j, so tighten the inner
    // tolerance by the largest weight.
    SolverConfig inner = cfg;
    inner.tol_kkt = cfg.tol_kkt / std::max(1.0, w.max());

    FitResult inner_result = fit(transformed, WeightVector::uniform(data.p()), lambda, inner);

    FitResult result;
    result.coef = Coefficients(inner_result.coef.beta.cwiseQuotient(w.w));
    result.lambda = lambda;
    result.weights = w;
    result.objective = penalized_objective(data, result.coef, w, lambda);
    result.iterations = inner_result.iterations;
    result.kkt_max_violation = detail::kkt_max(data, result);

    if (inner_result.converged && result.kkt_max_violation > cfg.tol_kkt) {
        // Rare: polish on the original problem from the mapped-back iterate.
        FitResult polished = fit(data, w, lambda, cfg, &result.coef);
        polished.iterations += result.iterations;
        return polished;
    }
    result.converged = inner_result.converged && result.kkt_max_violation <= cfg.tol_kkt;
    return result;
}

} // namespace wlasso
