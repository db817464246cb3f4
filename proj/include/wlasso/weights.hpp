#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "wlasso/types.hpp"

namespace wlasso {

enum class WeightScheme { Uniform, TypeI, TypeII, TypeIII, TypeIV };

inline std::string to_string(WeightScheme s) {
    switch (s) {
        case WeightScheme::Uniform: return "uniform";
        case WeightScheme::TypeI: return "type1";
        case WeightScheme::TypeII: return "type2";
        case WeightScheme::TypeIII: return "type3";
        case WeightScheme::TypeIV: return "type4";
    }
    return "?";
}

struct WeightConfig {
    double r = 1.0;            // concentration exponent in r*log p + log 2
    std::optional<double> lasso_pilot_lambda; // fixed pilot penalty for TypeIV
    double zero_floor = 1e-8;

    void validate() const {
        if (!(r > 0.0)) throw std::invalid_argument("WeightConfig: r must be > 0");
        if (!(zero_floor > 0.0))
            throw std::invalid_argument("WeightConfig: zero_floor must be > 0");
    }
};

/// Strictly positive penalty weights. flagged_columns records indices where
/// the degenerate-column floor rule fired.
struct WeightVector {
    Vector w;
    WeightScheme scheme = WeightScheme::Uniform;
    bool normalized = false;
    std::vector<Eigen::Index> flagged_columns;

    Eigen::Index p() const { return w.size(); }
    double min() const { return w.minCoeff(); }
    double max() const { return w.maxCoeff(); }

    static WeightVector uniform(Eigen::Index p) {
        WeightVector v;
        v.w = Vector::Ones(p);
        v.scheme = WeightScheme::Uniform;
        v.normalized = true;
        return v;
    }
};

/// Common concentration factor sqrt((2/n)(r log p + log 2)).
inline double concentration_factor(Eigen::Index n, Eigen::Index p, double r) {
    return std::sqrt((2.0 / static_cast<double>(n)) *
                     (r * std::log(static_cast<double>(p)) + std::log(2.0)));
}

/// Type I: w_j proportional to max_k |X_kj| * sqrt((2/n)(r log p + log 2)).
inline WeightVector type1_weights(const Dataset& data, const WeightConfig& cfg) {
    cfg.validate();
    const double factor = concentration_factor(data.n(), data.p(), cfg.r);
    WeightVector v;
    v.scheme = WeightScheme::TypeI;
    v.w.resize(data.p());
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        double col_max = data.x.col(j).cwiseAbs().maxCoeff();
        double wj = col_max * factor;
        if (wj < cfg.zero_floor) {
            wj = cfg.zero_floor;
            v.flagged_columns.push_back(j);
        }
        v.w[j] = wj;
    }
    return v;
}

/// Type II: w_j proportional to sqrt((1/n) sum_k X_kj^2) * same factor.
inline WeightVector type2_weights(const Dataset& data, const WeightConfig& cfg) {
    cfg.validate();
    const double factor = concentration_factor(data.n(), data.p(), cfg.r);
    WeightVector v;
    v.scheme = WeightScheme::TypeII;
    v.w.resize(data.p());
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        double rms = std::sqrt(data.x.col(j).squaredNorm() / static_cast<double>(data.n()));
        double wj = rms * factor;
        if (wj < cfg.zero_floor) {
            wj = cfg.zero_floor;
            v.flagged_columns.push_back(j);
        }
        v.w[j] = wj;
    }
    return v;
}

/// Type III: w_j proportional to the reciprocal of the column sample variance
/// (1/n normalization). Constant columns are capped at 1/zero_floor.
inline WeightVector type3_weights(const Dataset& data,
                                  const WeightConfig& cfg = WeightConfig{}) {
    cfg.validate();
    WeightVector v;
    v.scheme = WeightScheme::TypeIII;
    v.w.resize(data.p());
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        const double mean = data.x.col(j).mean();
        const double variance =
            (data.x.col(j).array() - mean).square().sum() / static_cast<double>(data.n());
        if (variance < cfg.zero_floor) {
            v.w[j] = 1.0 / cfg.zero_floor;
            v.flagged_columns.push_back(j);
        } else {
            v.w[j] = 1.0 / variance;
        }
    }
    return v;
}

/// Type IV (adaptive Lasso): w_j proportional to 1/|pilot_j|, pilot zeros
/// floored at zero_floor.
inline WeightVector type4_weights(const Dataset& data, const WeightConfig& cfg,
                                  const Coefficients& pilot) {
    cfg.validate();
    check_dims(data, pilot);
    WeightVector v;
    v.scheme = WeightScheme::TypeIV;
    v.w.resize(data.p());
    for (Eigen::Index j = 0; j < data.p(); ++j) {
        const double mag = std::max(std::abs(pilot.beta[j]), cfg.zero_floor);
        if (std::abs(pilot.beta[j]) < cfg.zero_floor) v.flagged_columns.push_back(j);
        v.w[j] = 1.0 / mag;
    }
    return v;
}

/// Standardize so the weights sum to p: w~_j = p w_j / sum_k w_k.
inline WeightVector normalize(const WeightVector& v) {
    if ((v.w.array() <= 0).any())
        throw std::invalid_argument("normalize: weights must be strictly positive");
    WeightVector out = v;
    out.w = static_cast<double>(v.p()) * v.w / v.w.sum();
    out.normalized = true;
    return out;
}

/// McDiarmid bounded-difference tail bound 2 exp(-n (lambda w)^2 / (2 max|X_kj|^2)).
/// Plugging the Type I magnitude lambda*w_j yields exactly p^{-r}.
inline double mcdiarmid_tail_bound(Eigen::Index n, Eigen::Index p, double lambda_w,
                                   double col_max) {
    (void)p;
    if (n < 1 || !(lambda_w > 0.0) || !(col_max > 0.0))
        throw std::invalid_argument("mcdiarmid_tail_bound: need n>=1, lambda_w>0, col_max>0");
    return 2.0 * std::exp(-static_cast<double>(n) * lambda_w * lambda_w /
                          (2.0 * col_max * col_max));
}

} // namespace wlasso
