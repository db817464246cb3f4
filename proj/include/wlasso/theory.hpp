#pragma once

#include <cmath>
#include <vector>

#include "wlasso/rng.hpp"
#include "wlasso/tuning.hpp"
#include "wlasso/types.hpp"
#include "wlasso/weights.hpp"

namespace wlasso {

/// Inputs to the oracle-bound calculators. Convention: k is the cone
/// multiplier (3 in the main theorem) and the curvature constant enters
/// through this same record's k field used as the restricted-eigenvalue
/// lower bound; see estimate_stabil_constants for empirical values.
struct BoundInputs {
    double L = 1.0;      // sup-norm bound on the design
    double B = 1.0;      // l1 radius of the true coefficient
    double A = 1.0;      // confidence exponent, >= 1
    double lambda = 1.0; // tuning parameter
    Eigen::Index d_star = 0;
    double k = 0.5;      // restricted-eigenvalue (Stabil) constant, in (0,1)
    double eps_n = 0.0;  // measurement-error level
    WeightVector w;
    SupportSet H;
    Eigen::Index n = 1;
    Eigen::Index p = 1;

    double w_min() const { return w.min(); }
    double w_max() const { return w.max(); }
    double wh_sq() const {
        double acc = 0.0;
        for (Eigen::Index j : H.indices) acc += w.w[j] * w.w[j];
        return acc;
    }
    /// True when lambda clears the theoretical floor; a warning, not an error.
    bool lambda_above_floor() const {
        return lambda >= theoretical_lambda_floor(L, A, w_min(), n, p);
    }
};

struct ErrorBounds {
    double stabil_bound = 0.0;
    double weighted_stabil_bound = 0.0;
};

struct PredictionBounds {
    double stabil_bound = 0.0;
    double weighted_stabil_bound = 0.0;
    bool weight_condition_holds = true; // Eq-style check against a supplied B*
};

struct BetaMinResult {
    double b0 = 0.0;       // beta-min threshold
    double p_of_delta = 0.0; // companion dimension (1/2) exp(log(1/delta)/A^2)
};

struct ConeSampleReport {
    std::size_t n_samples = 0;
    double c1_hat = 0.0;
    double c2_hat = 0.0;
    std::size_t violations = 0;
};

/// Curvature constant s = e^{LB} / (2 (1 + e^{LB})^2), in (0, 1/8].
inline double s_constant(double L, double B) {
    if (!(L > 0.0) || !(B > 0.0))
        throw std::invalid_argument("s_constant: L and B must be > 0");
    const double e = std::exp(L * B);
    return e / (2.0 * (1.0 + e) * (1.0 + e));
}

/// l1-estimation error bounds. The weighted-Stabil form carries d*, the
/// Stabil form carries sum_{j in H} w_j^2; both share the measurement-error
/// tail ((lambda + 2s)/(lambda w_min)) eps_n.
inline ErrorBounds l1_error_bounds(const BoundInputs& in) {
    const double s = s_constant(in.L, in.B);
    if (!(in.k > 0.0)) throw std::invalid_argument("l1_error_bounds: k must be > 0");
    const double wmin = in.w_min();
    const double tail = (in.lambda + 2.0 * s) / (in.lambda * wmin) * in.eps_n;
    ErrorBounds out;
    out.weighted_stabil_bound =
        2.0 * in.lambda * static_cast<double>(in.d_star) / (s * in.k * wmin) + tail;
    out.stabil_bound = 2.0 * in.lambda * in.wh_sq() / (s * in.k * wmin) + tail;
    return out;
}

/// Squared prediction error bounds; b_star is the constant the weight
/// condition B (4 w_max + w_min)/w_min + eps_n/w_min <= B* is checked against.
inline PredictionBounds prediction_error_bounds(const BoundInputs& in, double b_star) {
    const double s = s_constant(in.L, in.B);
    if (!(in.k > 0.0))
        throw std::invalid_argument("prediction_error_bounds: k must be > 0");
    const double tail = (2.0 * in.lambda / s + 3.0) * in.eps_n;
    PredictionBounds out;
    out.weighted_stabil_bound =
        3.0 * in.lambda * in.lambda * static_cast<double>(in.d_star) / (s * s * in.k) + tail;
    out.stabil_bound = 3.0 * in.lambda * in.lambda * in.wh_sq() / (s * s * in.k) + tail;
    const double wmin = in.w_min();
    out.weight_condition_holds =
        in.B * (4.0 * in.w_max() + wmin) / wmin + in.eps_n / wmin <= b_star;
    return out;
}

/// Beta-min threshold B0 = 4 lambda d*/(2 s k) + ((lambda + 2s)/lambda) eps_n,
/// with the corollary's companion dimension p(delta, A).
inline BetaMinResult beta_min_threshold(const BoundInputs& in, double delta = 0.05) {
    const double s = s_constant(in.L, in.B);
    if (!(in.k > 0.0)) throw std::invalid_argument("beta_min_threshold: k must be > 0");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("beta_min_threshold: delta in (0,1)");
    BetaMinResult out;
    out.b0 = 4.0 * in.lambda * static_cast<double>(in.d_star) / (2.0 * s * in.k) +
             (in.lambda + 2.0 * s) / in.lambda * in.eps_n;
    out.p_of_delta = 0.5 * std::exp(std::log(1.0 / delta) / (in.A * in.A));
    return out;
}

/// Draw vectors from the weighted cone
/// { b : |W_{H^c} b_{H^c}|_1 <= k |W_H b_H|_1 + eps }.
/// b_H is standard Gaussian; b_{H^c} is Gaussian rescaled so its weighted l1
/// norm equals u * (k |W_H b_H|_1 + eps) with u uniform on [0,1], so every
/// sample satisfies the inequality by construction.
inline std::vector<Vector> sample_weighted_cone(Eigen::Index p, const SupportSet& H,
                                                const WeightVector& w, double k,
                                                double eps, std::size_t n_samples,
                                                std::uint64_t seed,
                                                bool* degenerate_warning = nullptr) {
    if (!(k >= 0.0) || !(eps >= 0.0))
        throw std::invalid_argument("sample_weighted_cone: need k >= 0 and eps >= 0");
    if (w.p() != p) throw std::invalid_argument("sample_weighted_cone: weight length");
    if (degenerate_warning) *degenerate_warning = false;

    Rng rng(seed);
    std::vector<Vector> samples;
    samples.reserve(n_samples);

    std::vector<Eigen::Index> off_support;
    for (Eigen::Index j = 0; j < p; ++j)
        if (!H.contains(j)) off_support.push_back(j);

    const bool degenerate = H.indices.empty() && eps == 0.0;
    if (degenerate && degenerate_warning) *degenerate_warning = true;

    for (std::size_t sample = 0; sample < n_samples; ++sample) {
        Vector b = Vector::Zero(p);
        double on_mass = 0.0;
        for (Eigen::Index j : H.indices) {
            b[j] = rng.next_normal();
            on_mass += w.w[j] * std::abs(b[j]);
        }
        const double budget = k * on_mass + eps;
        if (!off_support.empty() && budget > 0.0) {
            Vector g(static_cast<Eigen::Index>(off_support.size()));
            double off_mass = 0.0;
            for (Eigen::Index i = 0; i < g.size(); ++i) {
                g[i] = rng.next_normal();
                off_mass += w.w[off_support[i]] * std::abs(g[i]);
            }
            const double u = rng.next_double();
            if (off_mass > 0.0) {
                const double scale = u * budget / off_mass;
                for (Eigen::Index i = 0; i < g.size(); ++i)
                    b[off_support[i]] = g[i] * scale;
            }
        }
        samples.push_back(std::move(b));
    }
    return samples;
}

/// Membership slack: k |W_H b_H|_1 + eps - |W_{H^c} b_{H^c}|_1 (>= 0 inside).
inline double cone_slack(const Vector& b, const SupportSet& H, const WeightVector& w,
                         double k, double eps) {
    double on_mass = 0.0, off_mass = 0.0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        if (H.contains(j)) on_mass += w.w[j] * std::abs(b[j]);
        else off_mass += w.w[j] * std::abs(b[j]);
    }
    return k * on_mass + eps - off_mass;
}

/// Monte-Carlo estimates of the Stabil / Weighted-Stabil constants over the
/// weighted cone. The reported minima are upper estimates of the true
/// restricted infima (sampling cannot go below it).
inline ConeSampleReport estimate_stabil_constants(const Matrix& sigma, const SupportSet& H,
                                                  const WeightVector& w, double k,
                                                  double eps, std::size_t n_samples,
                                                  std::uint64_t seed) {
    if (sigma.rows() != sigma.cols())
        throw std::invalid_argument("estimate_stabil_constants: sigma must be square");
    const double asym = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8)
        throw std::invalid_argument("estimate_stabil_constants: sigma is not symmetric");
    const Matrix sym = 0.5 * (sigma + sigma.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-8 * scale)
        throw std::invalid_argument("estimate_stabil_constants: sigma is not PSD");

    const auto samples =
        sample_weighted_cone(sigma.rows(), H, w, k, eps, n_samples, seed);

    ConeSampleReport report;
    report.n_samples = n_samples;
    double c1 = std::numeric_limits<double>::infinity();
    double c2 = std::numeric_limits<double>::infinity();
    for (const Vector& b : samples) {
        double bh_sq = 0.0, wbh_sq = 0.0;
        for (Eigen::Index j : H.indices) {
            bh_sq += b[j] * b[j];
            wbh_sq += w.w[j] * w.w[j] * b[j] * b[j];
        }
        if (std::sqrt(bh_sq) < 1e-12) continue;
        const double quad = b.dot(sym * b);
        const double q1 = (quad + eps) / bh_sq;
        const double q2 = (quad + eps) / wbh_sq;
        if (q1 < 0.0 || q2 < 0.0) ++report.violations;
        c1 = std::min(c1, q1);
        c2 = std::min(c2, q2);
    }
    report.c1_hat = c1;
    report.c2_hat = c2;
    return report;
}

} // namespace wlasso
