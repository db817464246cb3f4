#pragma once

#include <Eigen/Dense>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

namespace wlasso {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Design matrix, binary responses and optional per-observation weights.
/// Immutable after construction; all operations over it are pure.
struct Dataset {
    Matrix x;                          // n x p
    Eigen::VectorXi y;                 // entries in {0,1}
    std::optional<Vector> obs_weights; // length n, >= 0, at least one > 0

    Dataset(Matrix x_, Eigen::VectorXi y_,
            std::optional<Vector> obs_weights_ = std::nullopt)
        : x(std::move(x_)), y(std::move(y_)), obs_weights(std::move(obs_weights_)) {
        if (x.rows() < 1 || x.cols() < 1)
            throw std::invalid_argument("Dataset: need n >= 1 and p >= 1");
        if (y.size() != x.rows())
            throw std::invalid_argument("Dataset: y length does not match rows of x");
        for (Eigen::Index i = 0; i < y.size(); ++i)
            if (y[i] != 0 && y[i] != 1)
                throw std::invalid_argument("Dataset: y must contain only 0 or 1");
        if (obs_weights) {
            if (obs_weights->size() != x.rows())
                throw std::invalid_argument("Dataset: obs_weights length mismatch");
            if ((obs_weights->array() < 0).any())
                throw std::invalid_argument("Dataset: obs_weights must be non-negative");
            if ((obs_weights->array() == 0).all())
                throw std::invalid_argument("Dataset: obs_weights must have a positive entry");
        }
    }

    Eigen::Index n() const { return x.rows(); }
    Eigen::Index p() const { return x.cols(); }
};

/// Coefficient vector with an optional unpenalized intercept (default absent).
struct Coefficients {
    Vector beta;
    std::optional<double> intercept;

    Coefficients() = default;
    explicit Coefficients(Vector beta_, std::optional<double> intercept_ = std::nullopt)
        : beta(std::move(beta_)), intercept(intercept_) {}

    static Coefficients zeros(Eigen::Index p) { return Coefficients(Vector::Zero(p)); }
};

/// Sorted set of column indices with nonzero coefficient (0-based).
struct SupportSet {
    std::set<Eigen::Index> indices;

    bool contains(Eigen::Index j) const { return indices.count(j) > 0; }
    std::size_t size() const { return indices.size(); }

    static SupportSet from_coefficients(const Coefficients& coef, double threshold) {
        SupportSet s;
        for (Eigen::Index j = 0; j < coef.beta.size(); ++j)
            if (std::abs(coef.beta[j]) >= threshold && coef.beta[j] != 0.0)
                s.indices.insert(j);
        return s;
    }
};

inline void check_dims(const Dataset& data, const Coefficients& coef) {
    if (coef.beta.size() != data.p())
        throw std::invalid_argument("coefficient length does not match dataset p");
}

} // namespace wlasso
