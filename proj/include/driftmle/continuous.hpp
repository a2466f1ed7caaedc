#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "driftmle/discrete.hpp"
#include "driftmle/errors.hpp"
#include "driftmle/fft.hpp"
#include "driftmle/models.hpp"
#include "driftmle/path.hpp"

namespace driftmle {

// Discretized weight function h_T on midpoint nodes of a uniform partition of
// [0,T] into n cells.
struct WeightFunction {
    double T = 0.0;
    std::size_t n = 0;
    double cell_width = 0.0;
    std::vector<double> values;
    double integral_h = 0.0;          // the value used for the estimator and its variance
    double integral_midpoint = 0.0;   // midpoint-rule diagnostic
    double residual = 0.0;            // ||Gamma_T h - 1||_inf over interior nodes
    std::size_t iterations = 0;

    double node(std::size_t i) const { return (static_cast<double>(i) + 0.5) * cell_width; }
};

namespace detail {

// Symmetric Toeplitz matvec via circulant embedding; first column `c`.
class ToeplitzConvolver {
public:
    explicit ToeplitzConvolver(const std::vector<double>& c) : n_(c.size()) {
        m_ = next_power_of_two(2 * n_);
        std::vector<std::complex<double>> emb(m_, 0.0);
        for (std::size_t k = 0; k < n_; ++k) emb[k] = c[k];
        for (std::size_t k = 1; k < n_; ++k) emb[m_ - k] = c[k];
        fft_inplace(emb, false);
        eig_.resize(m_);
        for (std::size_t k = 0; k < m_; ++k) eig_[k] = emb[k].real();
    }

    std::vector<double> apply(const std::vector<double>& f) const {
        std::vector<std::complex<double>> x(m_, 0.0);
        for (std::size_t k = 0; k < n_; ++k) x[k] = f[k];
        fft_inplace(x, false);
        for (std::size_t k = 0; k < m_; ++k) x[k] *= eig_[k];
        fft_inplace(x, true);
        std::vector<double> out(n_);
        for (std::size_t k = 0; k < n_; ++k) out[k] = x[k].real();
        return out;
    }

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<double> eig_;
};

// First column of the product-integration discretization of Gamma_T^C:
// c[k] = integral of K over [k*dt - dt/2, k*dt + dt/2].
inline std::vector<double> kernel_cell_column(const CovarianceModel& model, double T, std::size_t n) {
    model.require_continuous();
    const double dt = T / static_cast<double>(n);
    std::vector<double> c(n);
    if (model.fbm_hursts().empty()) return c;  // pure white noise: no kernel part
    for (std::size_t k = 0; k < n; ++k) {
        const double mid = static_cast<double>(k) * dt;
        c[k] = kernel_cell_integral(model, mid - 0.5 * dt, mid + 0.5 * dt);
    }
    return c;
}

inline double beta_function(double a, double b) {
    return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

// Exact-to-quadrature cell average of s^a (T-s)^a over [lo, lo+dt] with
// a = 1/2 - H in (-1/2, 0); the substitution s = lo + dt v^{1/(1+a)} absorbs
// the endpoint singularity at lo = 0.
inline double singular_cell_average(double a, double T, double lo, double dt) {
    // 32-point Gauss-Legendre on [0,1]
    static const double gl_x[16] = {
        0.0483076656877383162, 0.1444719615827964934, 0.2392873622521370745, 0.3318686022821276497,
        0.4213512761306353454, 0.5068999089322293900, 0.5877157572407623290, 0.6630442669302152009,
        0.7321821187402896804, 0.7944837959679424070, 0.8493676137325699701, 0.8963211557660521240,
        0.9349060759377396892, 0.9647622555875064308, 0.9856115115452683354, 0.9972638618494815635};
    static const double gl_w[16] = {
        0.0965400885147278006, 0.0956387200792748594, 0.0938443990808045654, 0.0911738786957638847,
        0.0876520930044038111, 0.0833119242269467552, 0.0781938957870703065, 0.0723457941088485062,
        0.0658222227763618468, 0.0586840934785355471, 0.0509980592623761762, 0.0428358980222266807,
        0.0342738629130214331, 0.0253920653092620595, 0.0162743947309056706, 0.0070186100094700966};
    const double p = 1.0 / (1.0 + a);
    double sum = 0.0;
    for (int i = 0; i < 16; ++i) {
        for (double sign : {-1.0, 1.0}) {
            const double v = 0.5 * (1.0 + sign * gl_x[i]);
            double s, jac_times_sa;  // s^a ds = dt^{1+a}/(1+a) dv under the substitution
            if (lo == 0.0) {
                s = dt * std::pow(v, p);
                jac_times_sa = std::pow(dt, 1.0 + a) * p;
            } else {
                s = lo + dt * v;
                jac_times_sa = std::pow(s, a) * dt;
            }
            sum += 0.5 * gl_w[i] * jac_times_sa * std::pow(T - s, a);
        }
    }
    return sum / dt;
}

}  // namespace detail

// Nystrom application of the operator Gamma_T to nodal values f:
// (Gamma f)(t_i) = [white multiplicity] f(t_i) + sum_j f(t_j) * cell integral
// of K over the j-th cell shifted to t_i. The kernel singularity is absorbed
// by the exact cell integrals.
inline std::vector<double> gamma_apply(const CovarianceModel& model, const std::vector<double>& f,
                                       double T) {
    if (f.size() < 2) throw validation_error("gamma_apply: need at least 2 nodes");
    const std::size_t n = f.size();
    const detail::ToeplitzConvolver conv(detail::kernel_cell_column(model, T, n));
    std::vector<double> out = conv.apply(f);
    const double w = static_cast<double>(model.white_multiplicity());
    if (w != 0.0)
        for (std::size_t k = 0; k < n; ++k) out[k] += w * f[k];
    return out;
}

// Closed-form weight for pure fBm with H in (1/2,1):
//   h_T(s) = C_H s^{1/2-H} (T-s)^{1/2-H},
//   C_H = (H(2H-1) B(H-1/2, 3/2-H))^{-1}.
// Nodal values are taken at cell midpoints, except the outermost cell on each
// side, which carries its exact cell average (the midpoint value badly
// misrepresents the singular endpoint mass in the product-integration
// operator). integral_h uses the exact Beta integral C_H T^{2-2H} B(3/2-H, 3/2-H).
inline WeightFunction ht_closed_form_fbm(double hurst, double T, std::size_t n) {
    if (!(hurst > 0.5 && hurst < 1.0))
        throw validation_error("ht_closed_form_fbm: requires H in (1/2,1)");
    if (n < 2) throw validation_error("ht_closed_form_fbm: need n >= 2");
    if (!(T > 0.0)) throw validation_error("ht_closed_form_fbm: need T > 0");

    const double a = 0.5 - hurst;
    const double c_h =
        1.0 / (hurst * (2.0 * hurst - 1.0) * detail::beta_function(hurst - 0.5, 1.5 - hurst));

    WeightFunction wf;
    wf.T = T;
    wf.n = n;
    wf.cell_width = T / static_cast<double>(n);
    wf.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = wf.node(i);
        wf.values[i] = c_h * std::pow(s, a) * std::pow(T - s, a);
    }
    const double edge = c_h * detail::singular_cell_average(a, T, 0.0, wf.cell_width);
    wf.values[0] = edge;
    wf.values[n - 1] = edge;  // s <-> T-s symmetry

    wf.integral_h = c_h * std::pow(T, 2.0 - 2.0 * hurst) * detail::beta_function(1.5 - hurst, 1.5 - hurst);
    wf.integral_midpoint = 0.0;
    for (double v : wf.values) wf.integral_midpoint += v * wf.cell_width;

    const auto gh = gamma_apply(CovarianceModel::fbm(hurst), wf.values, T);
    double r = 0.0;
    for (std::size_t i = 2; i + 2 < n; ++i) r = std::max(r, std::abs(gh[i] - 1.0));
    wf.residual = r;
    wf.iterations = 0;
    return wf;
}

// Weight for models with a white component via the Neumann series of
// (wI + Gamma^C) h = 1:
//   h <- (w + s)^{-1} (1 + s h - Gamma^C h),  s = ||Gamma^C|| / 2,
// with the operator norm estimated by power iteration and clamped by the L1
// bound on the kernel.
inline WeightFunction ht_neumann(const CovarianceModel& model, double T, std::size_t n,
                                 double tol = 1e-10, std::size_t max_iter = 100000) {
    model.require_continuous();
    const double w = static_cast<double>(model.white_multiplicity());
    if (w < 1.0)
        throw validation_error(
            "ht_neumann: model " + model.to_string() +
            " has no white component; the Neumann series is not guaranteed to converge "
            "(use ht_closed_form_fbm for pure fBm)");
    if (n < 2) throw validation_error("ht_neumann: need n >= 2");
    if (!(T > 0.0)) throw validation_error("ht_neumann: need T > 0");

    const double dt = T / static_cast<double>(n);
    const detail::ToeplitzConvolver conv(detail::kernel_cell_column(model, T, n));

    // ||Gamma^C|| by 50 power-iteration steps, clamped by ||K||_{L1[-T,T]}
    double norm_est = 0.0;
    {
        std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
        for (int it = 0; it < 50; ++it) {
            v = conv.apply(v);
            double nrm = 0.0;
            for (double x : v) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm == 0.0) break;
            norm_est = nrm;
            for (double& x : v) x /= nrm;
        }
        norm_est = std::min(norm_est, kernel_l1_bound(model, T));
    }
    const double s = 0.5 * norm_est;

    std::vector<double> h(n, 0.0);
    double res = 1.0;
    std::size_t it = 0;
    for (; it < max_iter; ++it) {
        const std::vector<double> gch = conv.apply(h);
        res = 0.0;
        for (std::size_t k = 0; k < n; ++k) res = std::max(res, std::abs(w * h[k] + gch[k] - 1.0));
        if (res <= tol) break;
        for (std::size_t k = 0; k < n; ++k) h[k] = (1.0 + s * h[k] - gch[k]) / (w + s);
    }
    if (res > tol) {
        std::ostringstream msg;
        msg << "ht_neumann: no convergence after " << max_iter << " iterations (residual " << res
            << ", tol " << tol << ")";
        throw numeric_error(msg.str());
    }

    WeightFunction wf;
    wf.T = T;
    wf.n = n;
    wf.cell_width = dt;
    wf.values = std::move(h);
    wf.integral_h = 0.0;
    for (double v : wf.values) wf.integral_h += v * dt;
    wf.integral_midpoint = wf.integral_h;
    wf.residual = res;
    wf.iterations = it;
    if (!(wf.integral_h > 0.0)) throw numeric_error("ht_neumann: nonpositive integral of h_T");
    return wf;
}

// Solves Gamma_T h = 1 with the method the model admits.
inline WeightFunction solve_weight(const CovarianceModel& model, double T, std::size_t n,
                                   double tol = 1e-10, std::size_t max_iter = 100000) {
    model.require_continuous();
    if (model.white_multiplicity() >= 1) return ht_neumann(model, T, n, tol, max_iter);
    const auto hursts = model.fbm_hursts();
    if (hursts.size() == 1) return ht_closed_form_fbm(hursts[0], T, n);
    throw validation_error("solve_weight: no weight solver for model " + model.to_string() +
                           " (sum of fBms without a white component is out of scope)");
}

namespace detail {

// h_T at time t: linear interpolation between midpoint nodes, nearest node
// value beyond the outermost nodes.
inline double interp_weight(const WeightFunction& wf, double t) {
    const double x = t / wf.cell_width - 0.5;
    if (x <= 0.0) return wf.values.front();
    if (x >= static_cast<double>(wf.n - 1)) return wf.values.back();
    const std::size_t j = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(j);
    return wf.values[j] * (1.0 - frac) + wf.values[j + 1] * frac;
}

// Riemann-Stieltjes sum of h_T against the path increments, midpoint-in-cell
// evaluation of the integrand.
inline double stieltjes_weight_integral(const SamplePath& path, const WeightFunction& wf) {
    path.validate();
    if (std::abs(path.duration() - wf.T) > 1e-9 * wf.T)
        throw validation_error("continuous estimate: path horizon differs from the weight horizon");
    double num = 0.0;
    for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
        const double mid = 0.5 * (path.times[k] + path.times[k + 1]);
        num += interp_weight(wf, mid) * (path.values[k + 1] - path.values[k]);
    }
    return num;
}

}  // namespace detail

// Continuous-observation MLE:
//   theta_hat = int h_T dX / int h_T dt,   Var = 1 / int h_T dt.
inline EstimateReport estimate_continuous(const SamplePath& path, const WeightFunction& wf,
                                          const CovarianceModel& model) {
    if (!(wf.integral_h > 0.0)) throw numeric_error("estimate_continuous: nonpositive integral of h_T");
    const double num = detail::stieltjes_weight_integral(path, wf);
    EstimateReport rep;
    rep.theta_hat = num / wf.integral_h;
    rep.theoretical_variance = 1.0 / wf.integral_h;
    rep.scheme = Scheme::Continuous;
    rep.model = model;
    rep.n_increments = path.n_increments();
    rep.horizon = wf.T;
    rep.weight_cells = wf.n;
    return rep;
}

// log L(theta) = theta int h_T dX - (theta^2/2) int h_T dt.
inline double loglik_continuous(const SamplePath& path, const WeightFunction& wf,
                                const CovarianceModel& /*model*/, double theta) {
    const double num = detail::stieltjes_weight_integral(path, wf);
    return theta * num - 0.5 * theta * theta * wf.integral_h;
}

// ---- on-disk weight cache ------------------------------------------------
//
// CSV with one metadata header line; doubles at 17 significant digits so a
// reload is bit-identical.

inline void write_weight_csv(const WeightFunction& wf, const CovarianceModel& model, double tol,
                             const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw io_error("cannot open '" + filename + "' for writing");
    out.precision(17);
    out << "# model=" << model.to_string() << " T=" << wf.T << " n=" << wf.n << " tol=" << tol
        << " integral_h=" << wf.integral_h << " integral_midpoint=" << wf.integral_midpoint
        << " residual=" << wf.residual << " iterations=" << wf.iterations << '\n';
    out << "node,value\n";
    for (std::size_t i = 0; i < wf.n; ++i) out << wf.node(i) << ',' << wf.values[i] << '\n';
    if (!out) throw io_error("failed writing '" + filename + "'");
}

inline WeightFunction read_weight_csv(const std::string& filename, std::string* model_out = nullptr,
                                      double* tol_out = nullptr) {
    std::ifstream in(filename);
    if (!in) throw io_error("cannot open '" + filename + "' for reading");
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
        throw io_error("'" + filename + "': missing weight metadata header");
    WeightFunction wf;
    std::string model_str;
    double tol = 0.0;
    {
        std::istringstream hdr(line.substr(2));
        std::string field;
        while (hdr >> field) {
            const auto eq = field.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = field.substr(0, eq);
            const std::string val = field.substr(eq + 1);
            if (key == "model") model_str = val;
            else if (key == "T") wf.T = std::stod(val);
            else if (key == "n") wf.n = std::stoul(val);
            else if (key == "tol") tol = std::stod(val);
            else if (key == "integral_h") wf.integral_h = std::stod(val);
            else if (key == "integral_midpoint") wf.integral_midpoint = std::stod(val);
            else if (key == "residual") wf.residual = std::stod(val);
            else if (key == "iterations") wf.iterations = std::stoul(val);
        }
    }
    if (!std::getline(in, line) || line != "node,value")
        throw io_error("'" + filename + "': expected header 'node,value'");
    wf.values.reserve(wf.n);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw io_error("'" + filename + "': malformed row '" + line + "'");
        wf.values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (wf.values.size() != wf.n) throw io_error("'" + filename + "': node count mismatch");
    wf.cell_width = wf.T / static_cast<double>(wf.n);
    if (model_out) *model_out = model_str;
    if (tol_out) *tol_out = tol;
    return wf;
}

inline std::string weight_cache_filename(const std::string& dir, const CovarianceModel& model,
                                         double T, std::size_t n, double tol) {
    std::ostringstream name;
    name.precision(17);
    std::string m = model.to_string();
    for (char& c : m)
        if (c == ':' || c == '+') c = '_';
    name << dir << '/' << "ht_" << m << "_T" << T << "_n" << n << "_tol" << tol << ".csv";
    return name.str();
}

// Loads a cached weight when present and matching, solves and caches otherwise.
inline WeightFunction solve_weight_cached(const CovarianceModel& model, double T, std::size_t n,
                                          double tol, std::size_t max_iter, const std::string& cache_dir) {
    const std::string file = weight_cache_filename(cache_dir, model, T, n, tol);
    {
        std::ifstream probe(file);
        if (probe) {
            std::string cached_model;
            double cached_tol = 0.0;
            WeightFunction wf = read_weight_csv(file, &cached_model, &cached_tol);
            if (cached_model == model.to_string() && wf.n == n && cached_tol == tol) return wf;
        }
    }
    WeightFunction wf = solve_weight(model, T, n, tol, max_iter);
    write_weight_csv(wf, model, tol, file);
    return wf;
}

}  // namespace driftmle
