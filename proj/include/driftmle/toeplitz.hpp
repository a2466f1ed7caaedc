#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "driftmle/errors.hpp"
#include "driftmle/models.hpp"

namespace driftmle {

// Symmetric positive-definite Toeplitz matrix stored by its first row.
struct SymToeplitz {
    std::vector<double> first_row;

    std::size_t size() const { return first_row.size(); }

    double entry(std::size_t i, std::size_t j) const {
        return first_row[i >= j ? i - j : j - i];
    }

    std::vector<double> to_dense() const {
        const std::size_t n = size();
        std::vector<double> a(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a[i * n + j] = entry(i, j);
        return a;
    }
};

// Increment covariance matrix of the model on a regular grid of step h.
inline SymToeplitz build_gamma(const CovarianceModel& model, double h, std::size_t n) {
    return SymToeplitz{increment_autocov(model, h, n).gamma};
}

namespace detail {

// In-place lower Cholesky of a row-major dense SPD matrix; throws on failure.
inline void cholesky_inplace(std::vector<double>& a, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0))
            throw numeric_error("covariance matrix is not positive definite (Cholesky failure)");
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / ljj;
        }
    }
}

inline std::vector<double> cholesky_solve(const std::vector<double>& chol, std::size_t n,
                                          const std::vector<double>& rhs) {
    std::vector<double> x(rhs);
    for (std::size_t i = 0; i < n; ++i) {
        double s = x[i];
        for (std::size_t k = 0; k < i; ++k) s -= chol[i * n + k] * x[k];
        x[i] = s / chol[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= chol[k * n + ii] * x[k];
        x[ii] = s / chol[ii * n + ii];
    }
    return x;
}

}  // namespace detail

// Dense Cholesky solve of a general SPD matrix (row-major). Serves as the
// fallback path and as the cross-validation oracle for the Levinson solver.
inline std::vector<double> solve_dense_spd(std::vector<double> a, const std::vector<double>& rhs) {
    const std::size_t n = rhs.size();
    detail::cholesky_inplace(a, n);
    return detail::cholesky_solve(a, n, rhs);
}

inline std::vector<double> solve_dense_toeplitz(const SymToeplitz& t, const std::vector<double>& rhs) {
    if (rhs.size() != t.size()) throw validation_error("solve_dense_toeplitz: dimension mismatch");
    return solve_dense_spd(t.to_dense(), rhs);
}

namespace detail {

struct LevinsonResult {
    std::vector<double> x;
    bool ok = false;                 // false when the near-singularity guard fired
    std::vector<double> rhs_dot_x;   // rhs(1..k)' x_k for k = 1..n, when requested
};

// Levinson recursion for a symmetric Toeplitz system T x = rhs, O(n^2).
// Aborts (ok = false) when the reflection coefficient magnitude reaches
// 1 - 1e-12, which signals near-singularity of a leading principal minor.
inline LevinsonResult levinson(const SymToeplitz& t, const std::vector<double>& rhs,
                               bool want_profile) {
    const std::size_t n = rhs.size();
    LevinsonResult res;
    const double t0 = t.first_row[0];
    if (!(t0 > 0.0)) return res;
    std::vector<double> r(n);
    for (std::size_t k = 0; k < n; ++k) r[k] = t.first_row[k] / t0;

    std::vector<double> x(n, 0.0), y(n, 0.0);
    if (want_profile) res.rhs_dot_x.reserve(n);
    x[0] = rhs[0] / t0;
    if (want_profile) res.rhs_dot_x.push_back(rhs[0] * x[0]);
    double beta = 1.0;
    double alpha = n > 1 ? -r[1] : 0.0;
    if (n > 1) y[0] = alpha;

    for (std::size_t k = 1; k < n; ++k) {
        if (std::abs(alpha) >= 1.0 - 1e-12) return res;
        beta *= 1.0 - alpha * alpha;
        if (!(beta > 0.0)) return res;
        double mu = rhs[k] / t0;
        for (std::size_t i = 0; i < k; ++i) mu -= r[k - i] * x[i];
        mu /= beta;
        for (std::size_t i = 0; i < k; ++i) x[i] += mu * y[k - 1 - i];
        x[k] = mu;
        if (want_profile) {
            double dot = 0.0;
            for (std::size_t i = 0; i <= k; ++i) dot += rhs[i] * x[i];
            res.rhs_dot_x.push_back(dot);
        }
        if (k + 1 < n) {
            double a = -r[k + 1];
            for (std::size_t i = 0; i < k; ++i) a -= r[k - i] * y[i];
            a /= beta;
            for (std::size_t i = 0; i < k; ++i) {
                const double tmp = y[i] + a * y[k - 1 - i];
                // symmetric in-place update; pair (i, k-1-i) touched twice
                if (i < k - 1 - i) {
                    const double tmp2 = y[k - 1 - i] + a * y[i];
                    y[i] = tmp;
                    y[k - 1 - i] = tmp2;
                } else if (i == k - 1 - i) {
                    y[i] = tmp;
                }
            }
            y[k] = a;
            alpha = a;
        }
    }
    res.x = std::move(x);
    res.ok = true;
    return res;
}

inline double residual_inf(const SymToeplitz& t, const std::vector<double>& x,
                           const std::vector<double>& rhs) {
    const std::size_t n = rhs.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += t.entry(i, j) * x[j];
        worst = std::max(worst, std::abs(s - rhs[i]));
    }
    return worst;
}

}  // namespace detail

// Solves T x = rhs for SPD Toeplitz T. Levinson recursion with a dense
// Cholesky fallback when the recursion hits near-singularity or the residual
// check ||Tx - rhs||_inf <= 1e-8 ||rhs||_inf fails.
inline std::vector<double> solve_spd_toeplitz(const SymToeplitz& t, const std::vector<double>& rhs) {
    if (rhs.size() != t.size()) throw validation_error("solve_spd_toeplitz: dimension mismatch");
    if (rhs.empty()) return {};
    auto lev = detail::levinson(t, rhs, false);
    if (lev.ok) {
        double rhs_inf = 0.0;
        for (double v : rhs) rhs_inf = std::max(rhs_inf, std::abs(v));
        if (detail::residual_inf(t, lev.x, rhs) <= 1e-8 * rhs_inf) return std::move(lev.x);
    }
    return solve_dense_toeplitz(t, rhs);
}

// u' T^{-1} v via one solve plus a dot product.
inline double inv_quadratic_form(const SymToeplitz& t, const std::vector<double>& u,
                                 const std::vector<double>& v) {
    if (u.size() != t.size() || v.size() != t.size())
        throw validation_error("inv_quadratic_form: dimension mismatch");
    const std::vector<double> x = solve_spd_toeplitz(t, v);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * x[i];
    return s;
}

// z_N' (T_N)^{-1} z_N for every leading principal submatrix T_N, N = 1..n,
// extracted from a single Levinson pass. Falls back to per-N dense solves if
// the recursion aborts.
inline std::vector<double> quadratic_form_profile(const SymToeplitz& t, const std::vector<double>& z) {
    if (z.size() != t.size()) throw validation_error("quadratic_form_profile: dimension mismatch");
    auto lev = detail::levinson(t, z, true);
    if (lev.ok) return std::move(lev.rhs_dot_x);
    std::vector<double> out;
    out.reserve(z.size());
    for (std::size_t n = 1; n <= z.size(); ++n) {
        SymToeplitz head{{t.first_row.begin(), t.first_row.begin() + static_cast<std::ptrdiff_t>(n)}};
        std::vector<double> zn(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
        const auto x = solve_dense_toeplitz(head, zn);
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) dot += zn[i] * x[i];
        out.push_back(dot);
    }
    return out;
}

}  // namespace driftmle
