#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "driftmle/errors.hpp"
#include "driftmle/models.hpp"
#include "driftmle/path.hpp"
#include "driftmle/toeplitz.hpp"

namespace driftmle {

enum class Scheme { Discrete, Continuous };

inline std::string scheme_name(Scheme s) { return s == Scheme::Discrete ? "discrete" : "continuous"; }

struct EstimateReport {
    double theta_hat = 0.0;
    double theoretical_variance = 0.0;
    Scheme scheme = Scheme::Discrete;
    CovarianceModel model = CovarianceModel::wiener();
    std::size_t n_increments = 0;   // N (discrete) or number of path cells (continuous)
    double horizon = 0.0;           // h (discrete regular grid) or T (continuous)
    std::size_t weight_cells = 0;   // continuous scheme only
};

namespace detail {

// Dense covariance matrix of the increments on an arbitrary grid (row-major).
inline std::vector<double> increment_cov_dense(const CovarianceModel& model,
                                               const std::vector<double>& times) {
    const std::size_t n = times.size() - 1;
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = model.covariance(times[i + 1], times[j + 1]) -
                             model.covariance(times[i + 1], times[j]) -
                             model.covariance(times[i], times[j + 1]) +
                             model.covariance(times[i], times[j]);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    return a;
}

struct QuadraticForms {
    double z_dx = 0.0;  // z' Gamma^{-1} dX
    double z_z = 0.0;   // z' Gamma^{-1} z
};

// One solve yields both forms: w = Gamma^{-1} z, then w.dX and w.z.
inline QuadraticForms discrete_forms(const SamplePath& path, const CovarianceModel& model,
                                     double regular_tol) {
    path.validate();
    const std::vector<double> dx = path.increments();
    const std::vector<double> z = path.steps();
    std::vector<double> w;
    if (path.is_regular(regular_tol)) {
        const double h = path.duration() / static_cast<double>(path.n_increments());
        const SymToeplitz gamma = build_gamma(model, h, path.n_increments());
        w = solve_spd_toeplitz(gamma, z);
    } else {
        w = solve_dense_spd(increment_cov_dense(model, path.times), z);
    }
    QuadraticForms f;
    for (std::size_t k = 0; k < w.size(); ++k) {
        f.z_dx += w[k] * dx[k];
        f.z_z += w[k] * z[k];
    }
    return f;
}

}  // namespace detail

// MLE from discrete observations:
//   theta_hat = z' Gamma^{-1} dX / z' Gamma^{-1} z,  Var = 1 / z' Gamma^{-1} z.
// Regular grids take the Toeplitz fast path; irregular grids fall back to a
// dense entrywise covariance with z the actual steps.
inline EstimateReport estimate_discrete(const SamplePath& path, const CovarianceModel& model,
                                        double regular_tol = 1e-9) {
    const auto f = detail::discrete_forms(path, model, regular_tol);
    if (!(f.z_z > 0.0)) throw numeric_error("estimate_discrete: nonpositive quadratic form");
    EstimateReport rep;
    rep.theta_hat = f.z_dx / f.z_z;
    rep.theoretical_variance = 1.0 / f.z_z;
    rep.scheme = Scheme::Discrete;
    rep.model = model;
    rep.n_increments = path.n_increments();
    rep.horizon = path.duration() / static_cast<double>(path.n_increments());
    return rep;
}

// log L^(N)(theta) = theta z'Gamma^{-1} dX - (theta^2/2) z'Gamma^{-1} z.
inline double loglik_discrete(const SamplePath& path, const CovarianceModel& model, double theta,
                              double regular_tol = 1e-9) {
    const auto f = detail::discrete_forms(path, model, regular_tol);
    return theta * f.z_dx - 0.5 * theta * theta * f.z_z;
}

// Var theta_hat^(N) = 1 / (z' Gamma_N^{-1} z) for N = 1..n_max, in one
// Levinson pass over the largest system.
inline std::vector<std::pair<std::size_t, double>> variance_decay_profile(
    const CovarianceModel& model, double h, std::size_t n_max) {
    if (n_max < 1) throw validation_error("variance_decay_profile: n_max must be >= 1");
    const SymToeplitz gamma = build_gamma(model, h, n_max);
    const std::vector<double> z(n_max, h);
    const std::vector<double> forms = quadratic_form_profile(gamma, z);
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(n_max);
    for (std::size_t k = 0; k < n_max; ++k) out.emplace_back(k + 1, 1.0 / forms[k]);
    return out;
}

}  // namespace driftmle
