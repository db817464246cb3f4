#pragma once

#include "wlasso/rng.hpp"
#include "wlasso/types.hpp"

namespace testutil {

/// Random dense instance with i.i.d. uniform(-2,2) covariates and labels
/// drawn from a random logistic model.
inline wlasso::Dataset random_dataset(Eigen::Index n, Eigen::Index p,
                                      std::uint64_t seed, double beta_scale = 1.0) {
    wlasso::Rng rng(seed);
    wlasso::Matrix x(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) x(i, j) = 4.0 * rng.next_double() - 2.0;
    wlasso::Vector beta(p);
    for (Eigen::Index j = 0; j < p; ++j)
        beta[j] = beta_scale * (2.0 * rng.next_double() - 1.0);
    Eigen::VectorXi y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double eta = x.row(i).dot(beta);
        y[i] = rng.next_double() < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
    }
    return wlasso::Dataset(std::move(x), std::move(y));
}

inline wlasso::Vector random_vector(Eigen::Index p, std::uint64_t seed, double scale = 1.0) {
    wlasso::Rng rng(seed);
    wlasso::Vector v(p);
    for (Eigen::Index j = 0; j < p; ++j) v[j] = scale * (2.0 * rng.next_double() - 1.0);
    return v;
}

} // namespace testutil
