#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "driftmle/models.hpp"
#include "driftmle/rng.hpp"
#include "driftmle/toeplitz.hpp"
#include "test_helpers.hpp"

using driftmle::CovarianceModel;
using driftmle::SymToeplitz;

namespace {

std::vector<CovarianceModel> solver_palette() {
    return {CovarianceModel::wiener(),          CovarianceModel::fbm(0.25),
            CovarianceModel::fbm(0.7),          CovarianceModel::fbm(0.9),
            CovarianceModel::fbm_plus_wiener(0.6), CovarianceModel::two_fbm(0.3, 0.7)};
}

}  // namespace

TEST_CASE("build_gamma reproduces the increment autocovariance") {
    const auto g = driftmle::build_gamma(CovarianceModel::wiener(), 0.5, 3);
    CHECK(g.first_row == std::vector<double>{0.5, 0.0, 0.0});
    CHECK(g.entry(2, 2) == 0.5);
    CHECK(g.entry(0, 2) == 0.0);

    const auto f = driftmle::build_gamma(CovarianceModel::fbm(0.75), 1.0, 2);
    CHECK(f.first_row[0] == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(f.first_row[1] == Catch::Approx(0.41421356237309515).epsilon(1e-12));

    const auto m = driftmle::build_gamma(CovarianceModel::fbm_plus_wiener(0.75), 1.0, 2);
    CHECK(m.first_row[0] == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(m.first_row[1] == Catch::Approx(f.first_row[1]).epsilon(1e-14));
}

TEST_CASE("Toeplitz solve on identity and a 2x2 system") {
    const SymToeplitz eye{{1.0, 0.0, 0.0, 0.0}};
    const std::vector<double> rhs{1.0, -2.0, 3.0, 0.5};
    CHECK(driftmle::solve_spd_toeplitz(eye, rhs) == rhs);

    // [[1, g], [g, 1]] x = [1, 0]  =>  x = [1, -g] / (1 - g^2)
    const double g = 0.41421356237309515;
    const SymToeplitz t{{1.0, g}};
    const auto x = driftmle::solve_spd_toeplitz(t, {1.0, 0.0});
    CHECK(x[0] == Catch::Approx(1.0 / (1.0 - g * g)).epsilon(1e-14));
    CHECK(x[1] == Catch::Approx(-g / (1.0 - g * g)).epsilon(1e-14));
}

TEST_CASE("Levinson solve agrees with dense LLT across models and sizes") {
    driftmle::Xoshiro256pp rng(7);
    for (const auto& model : solver_palette()) {
        for (std::size_t n : {2u, 3u, 5u, 13u, 32u, 64u, 128u, 256u}) {
            const auto gamma = driftmle::build_gamma(model, 0.5, n);
            for (int rep = 0; rep < 3; ++rep) {
                std::vector<double> rhs(n);
                for (auto& v : rhs) v = rng.normal();
                const auto x = driftmle::solve_spd_toeplitz(gamma, rhs);
                const auto y = testutil::eigen_toeplitz_solve(gamma, rhs);
                double xn = 0.0;
                for (double v : y) xn = std::max(xn, std::abs(v));
                for (std::size_t i = 0; i < n; ++i)
                    CHECK(std::abs(x[i] - y[i]) <= 1e-9 * std::max(xn, 1.0));
            }
        }
    }
}

TEST_CASE("dense Cholesky solve matches Eigen on a random SPD matrix") {
    driftmle::Xoshiro256pp rng(11);
    const std::size_t n = 20;
    // A = B'B + n I is SPD
    std::vector<double> b(n * n), a(n * n, 0.0);
    for (auto& v : b) v = rng.normal();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = i == j ? static_cast<double>(n) : 0.0;
            for (std::size_t k = 0; k < n; ++k) s += b[k * n + i] * b[k * n + j];
            a[i * n + j] = s;
        }
    std::vector<double> rhs(n);
    for (auto& v : rhs) v = rng.normal();
    const auto x = driftmle::solve_dense_spd(a, rhs);
    const auto y = testutil::eigen_spd_solve(a, rhs);
    for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == Catch::Approx(y[i]).margin(1e-10));
}

TEST_CASE("solver rejects a singular Toeplitz matrix") {
    const SymToeplitz singular{{1.0, 1.0}};  // all-ones 2x2
    CHECK_THROWS_AS(driftmle::solve_spd_toeplitz(singular, {1.0, 2.0}), driftmle::numeric_error);
    const SymToeplitz indefinite{{1.0, 2.0}};
    CHECK_THROWS_AS(driftmle::solve_spd_toeplitz(indefinite, {1.0, 0.0}), driftmle::numeric_error);
}

TEST_CASE("inv_quadratic_form basics and positivity") {
    const SymToeplitz eye{{1.0, 0.0, 0.0}};
    CHECK(driftmle::inv_quadratic_form(eye, {1, 1, 1}, {1, 1, 1}) == Catch::Approx(3.0));

    driftmle::Xoshiro256pp rng(3);
    const auto gamma = driftmle::build_gamma(CovarianceModel::fbm(0.8), 1.0, 24);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> z(24);
        for (auto& v : z) v = rng.normal();
        const double q = driftmle::inv_quadratic_form(gamma, z, z);
        CHECK(q > 0.0);

        // Cauchy-Schwarz: z' G^{-1} z >= ||z||^4 / (z' G z)
        double zz = 0.0, zgz = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i) {
            zz += z[i] * z[i];
            for (std::size_t j = 0; j < z.size(); ++j) zgz += z[i] * gamma.entry(i, j) * z[j];
        }
        CHECK(q >= zz * zz / zgz * (1.0 - 1e-12));
    }
}

TEST_CASE("quadratic_form_profile matches per-N dense solves and is nondecreasing") {
    for (const auto& model : solver_palette()) {
        const std::size_t n = 48;
        const double h = 0.5;
        const auto gamma = driftmle::build_gamma(model, h, n);
        const std::vector<double> z(n, h);
        const auto profile = driftmle::quadratic_form_profile(gamma, z);
        REQUIRE(profile.size() == n);
        for (std::size_t m = 1; m <= n; m += 7) {
            SymToeplitz head{{gamma.first_row.begin(),
                              gamma.first_row.begin() + static_cast<std::ptrdiff_t>(m)}};
            std::vector<double> zm(m, h);
            const auto x = testutil::eigen_toeplitz_solve(head, zm);
            double dot = 0.0;
            for (std::size_t i = 0; i < m; ++i) dot += zm[i] * x[i];
            CHECK(profile[m - 1] == Catch::Approx(dot).epsilon(1e-9));
        }
        // information grows with the sample
        for (std::size_t m = 1; m < n; ++m) CHECK(profile[m] >= profile[m - 1] * (1.0 - 1e-12));
    }
}

TEST_CASE("profile falls back to dense solves when Levinson aborts") {
    // gamma(1)/gamma(0) = 1 - 1e-13 trips the reflection-coefficient guard
    const double a = 1.0 - 1e-13;
    const SymToeplitz nearly_singular{{1.0, a}};
    const std::vector<double> z{1.0, 1.0};
    const auto profile = driftmle::quadratic_form_profile(nearly_singular, z);
    REQUIRE(profile.size() == 2);
    CHECK(profile[0] == Catch::Approx(1.0));
    CHECK(profile[1] == Catch::Approx(2.0 / (1.0 + a)).epsilon(1e-10));
}
