#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "driftmle/discrete.hpp"
#include "driftmle/models.hpp"
#include "driftmle/path.hpp"
#include "driftmle/rng.hpp"
#include "driftmle/sim.hpp"
#include "test_helpers.hpp"

using driftmle::CovarianceModel;
using driftmle::SamplePath;

namespace {

SamplePath regular_path(const std::vector<double>& values, double h) {
    SamplePath p;
    p.values = values;
    p.times.resize(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) p.times[k] = static_cast<double>(k) * h;
    return p;
}

}  // namespace

TEST_CASE("Wiener model: discrete MLE is X_T / T with variance 1/T") {
    driftmle::Xoshiro256pp rng(5);
    std::vector<double> vals{0.0};
    for (int k = 0; k < 40; ++k) vals.push_back(vals.back() + 0.5 * rng.normal() + 0.1);
    const auto path = regular_path(vals, 0.25);
    const auto rep = driftmle::estimate_discrete(path, CovarianceModel::wiener());
    CHECK(rep.theta_hat == Catch::Approx(vals.back() / path.duration()).epsilon(1e-13));
    CHECK(rep.theoretical_variance == Catch::Approx(1.0 / path.duration()).epsilon(1e-13));
    CHECK(rep.n_increments == 40);
    CHECK(rep.horizon == Catch::Approx(0.25));
}

TEST_CASE("noiseless linear path recovers the drift exactly") {
    SamplePath p;
    for (int k = 0; k <= 4; ++k) {
        p.times.push_back(static_cast<double>(k));
        p.values.push_back(2.0 * static_cast<double>(k));
    }
    for (const auto& m : {CovarianceModel::fbm(0.75), CovarianceModel::fbm_plus_wiener(0.6),
                          CovarianceModel::fbm(0.3)}) {
        const auto rep = driftmle::estimate_discrete(p, m);
        CHECK(rep.theta_hat == Catch::Approx(2.0).epsilon(1e-13));
    }
}

TEST_CASE("discrete MLE matches the explicit quadratic-form formula") {
    // dX = e_1: theta_hat = (Gamma^{-1} z)_1 h / (z' Gamma^{-1} z) with z = h 1
    const double h = 1.0;
    const std::size_t n = 10;
    const auto model = CovarianceModel::fbm(0.7);
    std::vector<double> vals(n + 1, 1.0);
    vals[0] = 0.0;
    const auto path = regular_path(vals, h);
    const auto rep = driftmle::estimate_discrete(path, model);

    const auto gamma = driftmle::build_gamma(model, h, n);
    const auto w = testutil::eigen_toeplitz_solve(gamma, std::vector<double>(n, h));
    double z_dx = w[0];  // dX = e_1
    double z_z = 0.0;
    for (double v : w) z_z += v * h;
    CHECK(rep.theta_hat == Catch::Approx(z_dx / z_z).epsilon(1e-10));
    CHECK(rep.theoretical_variance == Catch::Approx(1.0 / z_z).epsilon(1e-10));
}

TEST_CASE("estimator is linear and equivariant in the drift") {
    const auto model = CovarianceModel::fbm_plus_wiener(0.8);
    auto path = driftmle::simulate_path({model, 0.0, 4.0, 64, 99});
    const double base = driftmle::estimate_discrete(path, model).theta_hat;
    for (double shift : {1.0, -2.5}) {
        auto shifted = path;
        for (std::size_t k = 0; k < shifted.times.size(); ++k)
            shifted.values[k] += shift * shifted.times[k];
        const double est = driftmle::estimate_discrete(shifted, model).theta_hat;
        CHECK(est == Catch::Approx(base + shift).margin(1e-10));
    }
}

TEST_CASE("single increment: theta_hat = X_h / h, variance gamma(0)/h^2") {
    SamplePath p;
    p.times = {0.0, 2.0};
    p.values = {0.0, 3.0};
    const auto rep = driftmle::estimate_discrete(p, CovarianceModel::fbm(0.75));
    CHECK(rep.theta_hat == Catch::Approx(1.5).epsilon(1e-14));
    CHECK(rep.theoretical_variance == Catch::Approx(std::pow(2.0, 1.5) / 4.0).epsilon(1e-13));
}

TEST_CASE("irregular grid falls back to the dense covariance") {
    SamplePath p;
    p.times = {0.0, 0.3, 1.0, 1.4, 2.5};
    p.values = {0.0, 0.7, 1.1, 2.0, 2.4};
    REQUIRE_FALSE(p.is_regular());

    // Wiener: Gamma = diag(steps), z = steps, so theta_hat = X_T / T again
    const auto wrep = driftmle::estimate_discrete(p, CovarianceModel::wiener());
    CHECK(wrep.theta_hat == Catch::Approx(2.4 / 2.5).epsilon(1e-13));
    CHECK(wrep.theoretical_variance == Catch::Approx(1.0 / 2.5).epsilon(1e-13));

    // fBm: verify against the entrywise dense formula through Eigen
    const auto model = CovarianceModel::fbm(0.7);
    const auto rep = driftmle::estimate_discrete(p, model);
    const auto cov = driftmle::detail::increment_cov_dense(model, p.times);
    const auto w = testutil::eigen_spd_solve(cov, p.steps());
    const auto dx = p.increments();
    const auto z = p.steps();
    double z_dx = 0.0, z_z = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        z_dx += w[k] * dx[k];
        z_z += w[k] * z[k];
    }
    CHECK(rep.theta_hat == Catch::Approx(z_dx / z_z).epsilon(1e-11));
    CHECK(rep.theoretical_variance == Catch::Approx(1.0 / z_z).epsilon(1e-11));
}

TEST_CASE("irregular and regular agree when the grid is in fact regular") {
    const auto model = CovarianceModel::fbm(0.8);
    auto path = driftmle::simulate_path({model, 1.0, 2.0, 32, 17});
    const auto fast = driftmle::estimate_discrete(path, model);
    // force the dense route by setting an impossible regularity tolerance
    const auto dense = driftmle::estimate_discrete(path, model, -1.0);
    CHECK(fast.theta_hat == Catch::Approx(dense.theta_hat).epsilon(1e-9));
    CHECK(fast.theoretical_variance == Catch::Approx(dense.theoretical_variance).epsilon(1e-9));
}

TEST_CASE("log-likelihood is the expected parabola") {
    const auto model = CovarianceModel::fbm_plus_wiener(0.7);
    const auto path = driftmle::simulate_path({model, 1.5, 2.0, 50, 23});
    CHECK(driftmle::loglik_discrete(path, model, 0.0) == 0.0);

    const auto rep = driftmle::estimate_discrete(path, model);
    const double l1 = driftmle::loglik_discrete(path, model, 1.0);
    const double l2 = driftmle::loglik_discrete(path, model, 2.0);
    // loglik = q1 theta - q2 theta^2 / 2; recover the coefficients
    const double q2 = 2.0 * l1 - l2;        // = q1 - q2/2 doubled minus (2q1 - 2q2) ...
    const double q1 = l1 + 0.5 * q2;
    CHECK(q1 / q2 == Catch::Approx(rep.theta_hat).epsilon(1e-10));
    CHECK(1.0 / q2 == Catch::Approx(rep.theoretical_variance).epsilon(1e-10));

    // the MLE maximizes the likelihood
    const double at_hat = driftmle::loglik_discrete(path, model, rep.theta_hat);
    CHECK(at_hat >= driftmle::loglik_discrete(path, model, rep.theta_hat + 0.01));
    CHECK(at_hat >= driftmle::loglik_discrete(path, model, rep.theta_hat - 0.01));
}

TEST_CASE("Wiener log-likelihood has the Girsanov form") {
    const auto path = driftmle::simulate_path({CovarianceModel::wiener(), 0.5, 3.0, 48, 31});
    const double xt = path.values.back(), T = path.duration();
    for (double theta : {-1.0, 0.3, 2.0})
        CHECK(driftmle::loglik_discrete(path, CovarianceModel::wiener(), theta) ==
              Catch::Approx(theta * xt - 0.5 * theta * theta * T).epsilon(1e-12));
}

TEST_CASE("variance decay profile decreases and matches direct solves") {
    const auto model = CovarianceModel::fbm(0.7);
    const auto profile = driftmle::variance_decay_profile(model, 1.0, 64);
    REQUIRE(profile.size() == 64);
    CHECK(profile[0].first == 1);
    CHECK(profile[0].second == Catch::Approx(1.0).epsilon(1e-13));  // gamma(0)/h^2 at h = 1
    for (std::size_t k = 1; k < profile.size(); ++k)
        CHECK(profile[k].second <= profile[k - 1].second * (1.0 + 1e-12));

    // spot check against a fresh estimate at N = 32
    const auto gamma = driftmle::build_gamma(model, 1.0, 32);
    const auto w = testutil::eigen_toeplitz_solve(gamma, std::vector<double>(32, 1.0));
    double z_z = 0.0;
    for (double v : w) z_z += v;
    CHECK(profile[31].second == Catch::Approx(1.0 / z_z).epsilon(1e-9));
}

TEST_CASE("path validation errors surface") {
    SamplePath bad;
    bad.times = {0.0, 1.0, 0.5};
    bad.values = {0.0, 1.0, 2.0};
    CHECK_THROWS_AS(driftmle::estimate_discrete(bad, CovarianceModel::wiener()),
                    driftmle::validation_error);
    SamplePath offset;
    offset.times = {0.5, 1.0};
    offset.values = {0.0, 1.0};
    CHECK_THROWS_AS(driftmle::estimate_discrete(offset, CovarianceModel::wiener()),
                    driftmle::validation_error);
}

TEST_CASE("discrete MLE is unbiased with the advertised variance", "[stats]") {
    const auto model = CovarianceModel::fbm(0.7);
    const double theta = 1.3, h = 1.0;
    const std::size_t N = 64, M = 2000;
    const driftmle::PathSimulator sim(model, theta, h * N, N);

    const auto gamma = driftmle::build_gamma(model, h, N);
    const auto w = driftmle::solve_spd_toeplitz(gamma, std::vector<double>(N, h));
    double z_z = 0.0;
    for (double v : w) z_z += v * h;
    const double var_theory = 1.0 / z_z;

    std::vector<double> est(M);
    for (std::size_t r = 0; r < M; ++r) {
        const auto path = sim.simulate(driftmle::substream_seed(1234, r));
        est[r] = driftmle::estimate_discrete(path, model).theta_hat;
    }
    const auto s = testutil::stats_of(est);
    CHECK(std::abs(s.mean - theta) <= 4.0 * std::sqrt(var_theory / static_cast<double>(M)));
    CHECK(s.variance > 0.85 * var_theory);
    CHECK(s.variance < 1.18 * var_theory);
}

TEST_CASE("discrete estimator process has independent increments", "[stats]") {
    // cov(theta_hat_{N2}, theta_hat_{N3}) = Var theta_hat_{N3}, and the
    // increments over disjoint index ranges are uncorrelated:
    // corr(theta_hat_{N3} - theta_hat_{N2}, theta_hat_{N2} - theta_hat_{N1}) = 0
    const auto model = CovarianceModel::fbm(0.75);
    const std::size_t N1 = 16, N2 = 32, N3 = 64, M = 2000;
    const driftmle::PathSimulator sim(model, 0.0, static_cast<double>(N3), N3);

    const auto gamma = driftmle::build_gamma(model, 1.0, N3);
    auto weights_for = [&](std::size_t n) {
        driftmle::SymToeplitz head{{gamma.first_row.begin(),
                                    gamma.first_row.begin() + static_cast<std::ptrdiff_t>(n)}};
        return driftmle::solve_spd_toeplitz(head, std::vector<double>(n, 1.0));
    };
    const auto w1 = weights_for(N1), w2 = weights_for(N2), w3 = weights_for(N3);
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (double v : w1) s1 += v;
    for (double v : w2) s2 += v;
    for (double v : w3) s3 += v;
    const double var3 = 1.0 / s3;

    std::vector<double> e1(M), e2(M), e3(M);
    for (std::size_t r = 0; r < M; ++r) {
        const auto dx = sim.simulate(driftmle::substream_seed(777, r)).increments();
        double n1 = 0.0, n2 = 0.0, n3 = 0.0;
        for (std::size_t k = 0; k < N1; ++k) n1 += w1[k] * dx[k];
        for (std::size_t k = 0; k < N2; ++k) n2 += w2[k] * dx[k];
        for (std::size_t k = 0; k < N3; ++k) n3 += w3[k] * dx[k];
        e1[r] = n1 / s1;
        e2[r] = n2 / s2;
        e3[r] = n3 / s3;
    }

    // covariance identity, SE from the per-replication products
    std::vector<double> prod(M), inc_a(M), inc_b(M);
    for (std::size_t r = 0; r < M; ++r) {
        prod[r] = e2[r] * e3[r];
        inc_a[r] = e3[r] - e2[r];
        inc_b[r] = e2[r] - e1[r];
    }
    const auto ps = testutil::stats_of(prod);
    CHECK(std::abs(ps.mean - var3) <= 4.0 * std::sqrt(ps.variance / static_cast<double>(M)));

    CHECK(std::abs(testutil::correlation(inc_a, inc_b)) <=
          4.0 / std::sqrt(static_cast<double>(M)));
}
