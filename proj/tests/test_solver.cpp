#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "wlasso/solver.hpp"
#include "wlasso/tuning.hpp"

using namespace wlasso;

namespace {

/// Independent reference: cyclic coordinate descent with per-coordinate
/// Newton steps on the smooth part and exact soft-thresholding. Shares no
/// code path with the FISTA implementation.
Vector reference_cd_lasso(const Dataset& data, double lambda, int sweeps = 4000,
                          double tol = 1e-11) {
    const auto n = data.n();
    const auto p = data.p();
    Vector beta = Vector::Zero(p);
    Vector eta = Vector::Zero(n);
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        double max_move = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            double grad = 0.0, hess = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double pi = 1.0 / (1.0 + std::exp(-eta[i]));
                grad += -data.x(i, j) * (data.y[i] - pi) / n;
                hess += data.x(i, j) * data.x(i, j) * pi * (1.0 - pi) / n;
            }
            if (hess < 1e-12) continue;
            const double z = beta[j] - grad / hess;
            const double thresh = lambda / hess;
            const double updated = std::copysign(std::max(std::abs(z) - thresh, 0.0), z);
            const double delta = updated - beta[j];
            if (delta != 0.0) {
                for (Eigen::Index i = 0; i < n; ++i) eta[i] += data.x(i, j) * delta;
                beta[j] = updated;
                max_move = std::max(max_move, std::abs(delta));
            }
        }
        if (max_move < tol) break;
    }
    return beta;
}

} // namespace

TEST_CASE("prox_step soft-threshold arithmetic") {
    WeightVector w = WeightVector::uniform(1);
    Vector beta(1), grad(1);

    beta << 3.0;
    grad << 0.0;
    CHECK(prox_step(beta, grad, 1.0, w, 1.0)[0] == doctest::Approx(2.0));

    beta << 0.7;
    CHECK(prox_step(beta, grad, 1.0, w, 1.0)[0] == doctest::Approx(0.0));

    beta << 1.5;
    grad << 0.25;
    CHECK(prox_step(beta, grad, 2.0, w, 0.0)[0] == doctest::Approx(1.0));

    CHECK_THROWS(prox_step(beta, grad, 0.0, w, 1.0));
}

TEST_CASE("large lambda gives the exact zero solution") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        const auto data = testutil::random_dataset(20, 6, seed);
        const WeightVector w = WeightVector::uniform(6);
        const double lam = lambda_max(data, w);
        const auto r = fit(data, w, 1.01 * lam);
        CHECK(r.coef.beta.cwiseAbs().maxCoeff() == 0.0);
        CHECK(r.converged);
        CHECK(kkt_residuals(data, r).maxCoeff() == doctest::Approx(0.0).epsilon(1e-15));

        const auto r2 = fit(data, w, 0.5 * lam);
        CHECK(r2.coef.beta.cwiseAbs().maxCoeff() > 0.0);
    }
}

TEST_CASE("every converged fit passes the KKT certificate") {
    SolverConfig cfg;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto data = testutil::random_dataset(30, 8, seed);
        WeightVector w;
        w.w = testutil::random_vector(8, seed + 7).array().abs() + 0.3;
        const double lam = 0.05 + 0.1 * (seed % 5);
        const auto r = fit(data, w, lam, cfg);
        REQUIRE(r.converged);
        CHECK(r.kkt_max_violation <= cfg.tol_kkt);
        CHECK(kkt_residuals(data, r).maxCoeff() <= cfg.tol_kkt);
        // objective recomposes from its parts
        const double recomputed = neg_log_likelihood(data, r.coef) +
                                  lam * (w.w.array() * r.coef.beta.array().abs()).sum();
        CHECK(std::abs(recomputed - r.objective) < 1e-10);
    }
}

TEST_CASE("p=2 objective beats an exhaustive grid") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto data = testutil::random_dataset(20, 2, seed);
        WeightVector w;
        w.w = (Vector(2) << 0.8, 1.2).finished();
        const double lam = 0.08;
        const auto r = fit(data, w, lam);
        REQUIRE(r.converged);

        double grid_best = std::numeric_limits<double>::infinity();
        for (int a = 0; a <= 400; ++a)
            for (int b = 0; b <= 400; ++b) {
                Vector beta(2);
                beta << -10.0 + a * 0.05, -10.0 + b * 0.05;
                grid_best = std::min(grid_best,
                                     penalized_objective(data, Coefficients(beta), w, lam));
            }
        CHECK(r.objective <= grid_best + 1e-6);
    }
}

TEST_CASE("uniform-weight fit matches an independent coordinate-descent solver") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto data = testutil::random_dataset(40, 5, seed * 31);
        const WeightVector w = WeightVector::uniform(5);
        const double lam = 0.04;
        SolverConfig cfg;
        cfg.tol_kkt = 1e-8;
        const auto r = fit(data, w, lam, cfg);
        REQUIRE(r.converged);
        const Vector ref = reference_cd_lasso(data, lam);
        CHECK((r.coef.beta - ref).cwiseAbs().maxCoeff() < 1e-4);
    }
}

TEST_CASE("hand-built one-dimensional KKT algebra") {
    // Single covariate x = 1, y = 1: score(beta) = 1 - pi(beta).
    // At lambda w = 0.25 the stationarity condition is 1 - pi = 0.25,
    // i.e. beta = log(3).
    Matrix x(1, 1);
    x << 1.0;
    Eigen::VectorXi y(1);
    y << 1;
    Dataset data(x, y);
    const WeightVector w = WeightVector::uniform(1);
    SolverConfig cfg;
    cfg.tol_kkt = 1e-10;
    const auto r = fit(data, w, 0.25, cfg);
    REQUIRE(r.converged);
    CHECK(r.coef.beta[0] == doctest::Approx(std::log(3.0)).epsilon(1e-7));
    CHECK(kkt_residuals(data, r)[0] < 1e-10);

    // residual at an arbitrary beta matches the symbolic value
    FitResult probe;
    probe.coef = Coefficients((Vector(1) << 1.0).finished());
    probe.lambda = 0.25;
    probe.weights = w;
    const double pi = 1.0 / (1.0 + std::exp(-1.0));
    CHECK(kkt_residuals(data, probe)[0] ==
          doctest::Approx(std::abs((1.0 - pi) - 0.25)).epsilon(1e-12));
}

TEST_CASE("objective sequence is monotone under restart") {
    // Re-run a fit while recording objectives through repeated partial solves.
    const auto data = testutil::random_dataset(30, 6, 99);
    const WeightVector w = WeightVector::uniform(6);
    SolverConfig cfg;
    double prev = std::numeric_limits<double>::infinity();
    for (int iters = 1; iters <= 40; ++iters) {
        cfg.max_iter = iters;
        const auto r = fit(data, w, 0.05, cfg);
        CHECK(r.objective <= prev + 1e-12);
        prev = r.objective;
    }
}

TEST_CASE("transform route equals direct route") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto data = testutil::random_dataset(30 + seed % 70, 5 + seed % 10, seed * 7);
        WeightVector w;
        w.w = testutil::random_vector(data.p(), seed + 500).array().abs() + 0.4;
        w = normalize(w);
        const double lam = 0.03 + 0.01 * (seed % 4);
        SolverConfig tight;
        tight.tol_kkt = 1e-8;
        const auto direct = fit(data, w, lam, tight);
        const auto transformed = fit_by_transform(data, w, lam, tight);
        REQUIRE(direct.converged);
        REQUIRE(transformed.converged);
        CHECK(std::abs(direct.objective - transformed.objective) < 1e-8);
        CHECK((direct.coef.beta - transformed.coef.beta).cwiseAbs().maxCoeff() < 1e-5);
        CHECK(kkt_residuals(data, transformed).maxCoeff() <= 1e-6);

        // support sets agree after thresholding
        const auto s1 = SupportSet::from_coefficients(direct.coef, 1e-6);
        const auto s2 = SupportSet::from_coefficients(transformed.coef, 1e-6);
        CHECK(s1.indices == s2.indices);
    }
}

TEST_CASE("transform route with unit weights is the identity") {
    const auto data = testutil::random_dataset(25, 4, 404);
    const WeightVector w = WeightVector::uniform(4);
    const auto direct = fit(data, w, 0.05);
    const auto transformed = fit_by_transform(data, w, 0.05);
    CHECK((direct.coef.beta - transformed.coef.beta).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("transform route rejects weights at the floor") {
    const auto data = testutil::random_dataset(10, 3, 5);
    WeightVector w;
    w.w = (Vector(3) << 1.0, 1e-10, 1.0).finished();
    CHECK_THROWS(fit_by_transform(data, w, 0.1));
}

TEST_CASE("weight-lambda scaling identity") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto data = testutil::random_dataset(30, 5, seed * 13);
        WeightVector w;
        w.w = testutil::random_vector(5, seed + 60).array().abs() + 0.5;
        const double lam = 0.05;
        const double c = 3.0;
        WeightVector cw = w;
        cw.w *= c;
        const auto a = fit(data, w, lam);
        const auto b = fit(data, cw, lam / c);
        CHECK((a.coef.beta - b.coef.beta).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("perfect separation at lambda 0 raises an error") {
    // Small covariate scale keeps the margins growing slowly, so the iterate
    // passes the divergence threshold before the gradient underflows.
    Matrix x(4, 1);
    x << -2e-4, -1e-4, 1e-4, 2e-4;
    Eigen::VectorXi y(4);
    y << 0, 0, 1, 1;
    Dataset data(x, y);
    SolverConfig cfg;
    cfg.max_iter = 2000000;
    cfg.tol_kkt = 1e-300;
    CHECK_THROWS_AS(fit(data, WeightVector::uniform(1), 0.0, cfg), std::runtime_error);
}

TEST_CASE("lambda 0 recovers the unpenalized MLE on non-separated data") {
    const auto data = testutil::random_dataset(200, 2, 77, 0.5);
    SolverConfig cfg;
    cfg.tol_kkt = 1e-8;
    const auto r = fit(data, WeightVector::uniform(2), 0.0, cfg);
    REQUIRE(r.converged);
    CHECK(gradient(data, r.coef).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("non-convergence is reported, not thrown") {
    const auto data = testutil::random_dataset(50, 10, 31);
    SolverConfig cfg;
    cfg.max_iter = 2;
    cfg.tol_kkt = 1e-12;
    const auto r = fit(data, WeightVector::uniform(10), 0.01, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 2);
}
