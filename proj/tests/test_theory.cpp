#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "wlasso/theory.hpp"

using namespace wlasso;

namespace {

BoundInputs default_inputs() {
    BoundInputs in;
    in.L = 1.0;
    in.B = 1.0;
    in.A = 1.0;
    in.lambda = 1.0;
    in.d_star = 9;
    in.k = 0.5;
    in.eps_n = 0.0;
    in.w = WeightVector::uniform(50);
    for (Eigen::Index j = 0; j < 9; ++j) in.H.indices.insert(j);
    in.n = 100;
    in.p = 50;
    return in;
}

Matrix ar1_sigma(Eigen::Index p, double rho) {
    Matrix sigma(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            sigma(i, j) = std::pow(rho, std::abs(double(i - j)));
    return sigma;
}

} // namespace

TEST_CASE("s_constant values and range") {
    CHECK(s_constant(1e-6, 1e-6) == doctest::Approx(0.125).epsilon(1e-9));
    const double e = std::exp(1.0);
    CHECK(s_constant(1.0, 1.0) ==
          doctest::Approx(e / (2.0 * (1.0 + e) * (1.0 + e))).epsilon(1e-14));
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed);
        const double lb = 0.01 + 4.99 * rng.next_double();
        const double s = s_constant(lb, 1.0);
        CHECK(s > 0.0);
        CHECK(s <= 0.125);
        // Remark-3 style sharpness versus the earlier constant
        CHECK(s > std::pow(1.0 + std::exp(lb), -4.0));
    }
    CHECK_THROWS(s_constant(0.0, 1.0));
}

TEST_CASE("l1 bounds coincide at uniform weights and zero eps") {
    auto in = default_inputs();
    const auto bounds = l1_error_bounds(in);
    const double s = s_constant(1.0, 1.0);
    const double expected = 2.0 * in.lambda * 9.0 / (s * in.k);
    CHECK(bounds.weighted_stabil_bound == doctest::Approx(expected).epsilon(1e-12));
    CHECK(bounds.stabil_bound == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("l1 weighted bound is linear in d_star") {
    auto in = default_inputs();
    const double one = l1_error_bounds(in).weighted_stabil_bound;
    in.d_star = 18;
    CHECK(l1_error_bounds(in).weighted_stabil_bound ==
          doctest::Approx(2.0 * one).epsilon(1e-12));
}

TEST_CASE("l1 bound at the theoretical floor reproduces the desk value") {
    auto in = default_inputs();
    in.lambda = theoretical_lambda_floor(1.0, 1.0, 1.0, 100, 50);
    const auto bounds = l1_error_bounds(in);
    const double s = s_constant(1.0, 1.0);
    CHECK(bounds.weighted_stabil_bound ==
          doctest::Approx(2.0 * in.lambda * 9.0 / (s * 0.5)).epsilon(1e-12));
    CHECK(bounds.weighted_stabil_bound == doctest::Approx(2222.6).epsilon(2e-3));
}

TEST_CASE("prediction bounds: forms, eps tail and monotonicity") {
    auto in = default_inputs();
    const double s = s_constant(1.0, 1.0);
    const auto bounds = prediction_error_bounds(in, 1e9);
    CHECK(bounds.weighted_stabil_bound ==
          doctest::Approx(3.0 * in.lambda * in.lambda * 9.0 / (s * s * in.k))
              .epsilon(1e-12));
    CHECK(bounds.stabil_bound == doctest::Approx(bounds.weighted_stabil_bound).epsilon(1e-12));

    // additive eps tail with s = 1/8, lambda = 1: (2*8 + 3) * 1 = 19
    BoundInputs tail = in;
    tail.L = 1e-9;
    tail.B = 1e-9;
    tail.d_star = 0;
    tail.eps_n = 1.0;
    CHECK(prediction_error_bounds(tail, 1e9).weighted_stabil_bound ==
          doctest::Approx(19.0).epsilon(1e-6));

    BoundInputs bigger = in;
    bigger.lambda = 2.0 * in.lambda;
    CHECK(prediction_error_bounds(bigger, 1e9).weighted_stabil_bound >
          bounds.weighted_stabil_bound);
}

TEST_CASE("weight condition flag against B*") {
    auto in = default_inputs();
    // uniform weights: B (4+1)/1 = 5
    CHECK(prediction_error_bounds(in, 5.0).weight_condition_holds);
    CHECK_FALSE(prediction_error_bounds(in, 4.9).weight_condition_holds);
}

TEST_CASE("beta_min threshold and companion dimension") {
    auto in = default_inputs();
    const double s = s_constant(1.0, 1.0);
    const auto result = beta_min_threshold(in, 0.02);
    CHECK(result.b0 == doctest::Approx(2.0 * in.lambda * 9.0 / (s * in.k)).epsilon(1e-12));
    CHECK(result.p_of_delta == doctest::Approx(25.0).epsilon(1e-12));

    BoundInputs empty = in;
    empty.d_star = 0;
    CHECK(beta_min_threshold(empty, 0.5).b0 == doctest::Approx(0.0));
}

TEST_CASE("stabil-form l1 bound is sharper when |W_H|^2 <= d*") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        auto in = default_inputs();
        WeightVector w;
        w.w = testutil::random_vector(50, seed).array().abs() * 0.9 + 0.05;
        // cap on-support weights at 1 so sum of squares <= d*
        for (Eigen::Index j : in.H.indices) w.w[j] = std::min(w.w[j], 1.0);
        in.w = w;
        REQUIRE(in.wh_sq() <= static_cast<double>(in.d_star));
        const auto bounds = l1_error_bounds(in);
        CHECK(bounds.stabil_bound <= bounds.weighted_stabil_bound + 1e-12);
    }
}

TEST_CASE("bound calculators match an independent scalar script on 100 tuples") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Rng rng(seed * 17);
        BoundInputs in;
        in.L = 0.1 + 2.0 * rng.next_double();
        in.B = 0.1 + 2.0 * rng.next_double();
        in.A = 1.0 + rng.next_double();
        in.lambda = 0.05 + rng.next_double();
        in.d_star = 1 + static_cast<Eigen::Index>(rng.next_below(10));
        in.k = 0.1 + 0.8 * rng.next_double();
        in.eps_n = rng.next_double() * 0.1;
        const Eigen::Index p = 20;
        WeightVector w;
        w.w = Vector(p);
        for (Eigen::Index j = 0; j < p; ++j) w.w[j] = 0.2 + 2.0 * rng.next_double();
        in.w = w;
        for (Eigen::Index j = 0; j < in.d_star; ++j) in.H.indices.insert(j);
        in.n = 100;
        in.p = p;

        // scalar recomputation, written out long-hand
        const double elb = std::exp(in.L * in.B);
        const double s = elb / (2.0 * (1.0 + elb) * (1.0 + elb));
        double wmin = w.w[0], whsq = 0.0, wmax = w.w[0];
        for (Eigen::Index j = 0; j < p; ++j) {
            wmin = std::min(wmin, w.w[j]);
            wmax = std::max(wmax, w.w[j]);
        }
        for (Eigen::Index j = 0; j < in.d_star; ++j) whsq += w.w[j] * w.w[j];
        const double tail = (in.lambda + 2.0 * s) / (in.lambda * wmin) * in.eps_n;
        const double l1_ws = 2.0 * in.lambda * in.d_star / (s * in.k * wmin) + tail;
        const double l1_s = 2.0 * in.lambda * whsq / (s * in.k * wmin) + tail;
        const double pred_tail = (2.0 * in.lambda / s + 3.0) * in.eps_n;
        const double pred_ws =
            3.0 * in.lambda * in.lambda * in.d_star / (s * s * in.k) + pred_tail;
        const double pred_s =
            3.0 * in.lambda * in.lambda * whsq / (s * s * in.k) + pred_tail;
        const double b0 = 4.0 * in.lambda * in.d_star / (2.0 * s * in.k) +
                          (in.lambda + 2.0 * s) / in.lambda * in.eps_n;

        const auto l1 = l1_error_bounds(in);
        const auto pred = prediction_error_bounds(in, 1e9);
        const auto bmin = beta_min_threshold(in, 0.1);
        CHECK(l1.weighted_stabil_bound == doctest::Approx(l1_ws).epsilon(1e-12));
        CHECK(l1.stabil_bound == doctest::Approx(l1_s).epsilon(1e-12));
        CHECK(pred.weighted_stabil_bound == doctest::Approx(pred_ws).epsilon(1e-12));
        CHECK(pred.stabil_bound == doctest::Approx(pred_s).epsilon(1e-12));
        CHECK(bmin.b0 == doctest::Approx(b0).epsilon(1e-12));
    }
}

TEST_CASE("cone samples satisfy the membership inequality") {
    SupportSet H;
    for (Eigen::Index j = 0; j < 3; ++j) H.indices.insert(j);
    WeightVector w;
    w.w = testutil::random_vector(10, 5).array().abs() + 0.3;
    const auto samples = sample_weighted_cone(10, H, w, 3.0, 0.1, 2000, 42);
    REQUIRE(samples.size() == 2000);
    for (const auto& b : samples) CHECK(cone_slack(b, H, w, 3.0, 0.1) >= -1e-12);
}

TEST_CASE("degenerate cone k = 0, eps = 0 forces zero off support") {
    SupportSet H;
    H.indices.insert(0);
    WeightVector w = WeightVector::uniform(5);
    const auto samples = sample_weighted_cone(5, H, w, 0.0, 0.0, 100, 7);
    for (const auto& b : samples)
        for (Eigen::Index j = 1; j < 5; ++j) CHECK(b[j] == 0.0);
}

TEST_CASE("empty support with eps = 0 warns and returns zero padding") {
    SupportSet H;
    WeightVector w = WeightVector::uniform(4);
    bool warned = false;
    const auto samples = sample_weighted_cone(4, H, w, 3.0, 0.0, 10, 3, &warned);
    CHECK(warned);
    for (const auto& b : samples) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity covariance estimate is at least 1") {
    SupportSet H;
    for (Eigen::Index j = 0; j < 3; ++j) H.indices.insert(j);
    const auto report = estimate_stabil_constants(Matrix::Identity(8, 8), H,
                                                  WeightVector::uniform(8), 3.0, 0.0,
                                                  20000, 11);
    CHECK(report.c1_hat >= 1.0 - 1e-10);
    CHECK(report.violations == 0);
}

TEST_CASE("estimates shrink with denser sampling") {
    SupportSet H;
    for (Eigen::Index j = 0; j < 3; ++j) H.indices.insert(j);
    const Matrix sigma = ar1_sigma(10, 0.5);
    const WeightVector w = WeightVector::uniform(10);
    const auto coarse = estimate_stabil_constants(sigma, H, w, 3.0, 0.0, 1000, 21);
    const auto fine = estimate_stabil_constants(sigma, H, w, 3.0, 0.0, 100000, 21);
    // nested sample prefix: the finer minimum cannot exceed the coarser one
    CHECK(fine.c1_hat <= coarse.c1_hat + 1e-12);
    CHECK(fine.c1_hat > 0.0);
}

TEST_CASE("covariance scaling moves c1_hat linearly at eps = 0") {
    SupportSet H;
    for (Eigen::Index j = 0; j < 2; ++j) H.indices.insert(j);
    const Matrix sigma = ar1_sigma(6, 0.3);
    const WeightVector w = WeightVector::uniform(6);
    const auto one = estimate_stabil_constants(sigma, H, w, 3.0, 0.0, 5000, 31);
    const auto scaled = estimate_stabil_constants(2.0 * sigma, H, w, 3.0, 0.0, 5000, 31);
    CHECK(scaled.c1_hat == doctest::Approx(2.0 * one.c1_hat).epsilon(1e-12));
}

TEST_CASE("asymmetric or indefinite sigma is rejected") {
    SupportSet H;
    H.indices.insert(0);
    const WeightVector w = WeightVector::uniform(3);
    Matrix asym = Matrix::Identity(3, 3);
    asym(0, 1) = 0.5; // not mirrored
    CHECK_THROWS(estimate_stabil_constants(asym, H, w, 3.0, 0.0, 10, 1));
    Matrix indef = Matrix::Identity(3, 3);
    indef(2, 2) = -1.0;
    CHECK_THROWS(estimate_stabil_constants(indef, H, w, 3.0, 0.0, 10, 1));
}

TEST_CASE("lambda floor flag on BoundInputs") {
    auto in = default_inputs();
    CHECK_FALSE(in.lambda_above_floor()); // lambda = 1 is far below the floor
    in.lambda = 10.0;
    CHECK(in.lambda_above_floor());
}
