#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "driftmle/errors.hpp"

namespace driftmle {

enum class NoiseKind { Wiener, Fbm, FbmPlusWiener, TwoFbm };

// Specification of the noise process B: a sum of independent components, each
// either a standard Wiener process or a fractional Brownian motion. The single
// source of covariance truth for both observation schemes.
class CovarianceModel {
public:
    static CovarianceModel wiener() { return CovarianceModel(NoiseKind::Wiener, 0.0, 0.0); }

    static CovarianceModel fbm(double hurst) {
        check_hurst(hurst);
        // H = 1/2 is Brownian motion; normalize to avoid the removable
        // singularity of the kernel density at H = 1/2.
        if (hurst == 0.5) return wiener();
        return CovarianceModel(NoiseKind::Fbm, hurst, 0.0);
    }

    static CovarianceModel fbm_plus_wiener(double hurst) {
        check_hurst(hurst);
        return CovarianceModel(NoiseKind::FbmPlusWiener, hurst, 0.0);
    }

    static CovarianceModel two_fbm(double hurst1, double hurst2) {
        check_hurst(hurst1);
        check_hurst(hurst2);
        return CovarianceModel(NoiseKind::TwoFbm, hurst1, hurst2);
    }

    NoiseKind kind() const { return kind_; }
    double hurst1() const { return hurst1_; }
    double hurst2() const { return hurst2_; }

    // Number of Brownian components (including fBm components with H = 1/2).
    int white_multiplicity() const {
        int w = kind_ == NoiseKind::Wiener || kind_ == NoiseKind::FbmPlusWiener ? 1 : 0;
        for (double h : raw_hursts())
            if (h == 0.5) ++w;
        return w;
    }

    // Hurst indices of the genuinely fractional components (H != 1/2).
    std::vector<double> fbm_hursts() const {
        std::vector<double> out;
        for (double h : raw_hursts())
            if (h != 0.5) out.push_back(h);
        return out;
    }

    // The continuous scheme needs an integrable kernel density: every fBm
    // component must have H > 1/2 (Brownian components are carried as the
    // identity summand of the operator instead).
    bool continuous_admissible() const {
        for (double h : fbm_hursts())
            if (h < 0.5) return false;
        return true;
    }

    void require_continuous() const {
        if (!continuous_admissible())
            throw validation_error(
                "model " + to_string() +
                " is not admissible for the continuous scheme: every fBm component needs H > 1/2");
    }

    std::string to_string() const {
        switch (kind_) {
            case NoiseKind::Wiener: return "wiener";
            case NoiseKind::Fbm: return "fbm:" + fmt(hurst1_);
            case NoiseKind::FbmPlusWiener: return "fbm:" + fmt(hurst1_) + "+wiener";
            case NoiseKind::TwoFbm: return "fbm:" + fmt(hurst1_) + "+fbm:" + fmt(hurst2_);
        }
        return "?";
    }

    // Grammar: `wiener`, `fbm:H`, `fbm:H+wiener`, `fbm:H1+fbm:H2`.
    static CovarianceModel parse(const std::string& spec) {
        std::vector<std::string> terms;
        std::size_t start = 0;
        while (true) {
            const std::size_t plus = spec.find('+', start);
            terms.push_back(spec.substr(start, plus == std::string::npos ? plus : plus - start));
            if (plus == std::string::npos) break;
            start = plus + 1;
        }
        int n_wiener = 0;
        std::vector<double> hursts;
        for (const auto& term : terms) {
            if (term == "wiener") {
                ++n_wiener;
            } else if (term.rfind("fbm:", 0) == 0) {
                hursts.push_back(parse_hurst(term.substr(4)));
            } else {
                throw validation_error("cannot parse model term '" + term + "' in '" + spec + "'");
            }
        }
        if (n_wiener == 1 && hursts.empty()) return wiener();
        if (n_wiener == 0 && hursts.size() == 1) return fbm(hursts[0]);
        if (n_wiener == 1 && hursts.size() == 1) return fbm_plus_wiener(hursts[0]);
        if (n_wiener == 0 && hursts.size() == 2) return two_fbm(hursts[0], hursts[1]);
        throw validation_error("unsupported model combination '" + spec + "'");
    }

    // Covariance R(t,s) = E B_t B_s for t,s >= 0.
    double covariance(double t, double s) const {
        double r = static_cast<double>(white_multiplicity()) * std::min(t, s);
        for (double h : fbm_hursts())
            r += 0.5 * (std::pow(t, 2 * h) + std::pow(s, 2 * h) - std::pow(std::abs(t - s), 2 * h));
        return r;
    }

private:
    CovarianceModel(NoiseKind kind, double h1, double h2) : kind_(kind), hurst1_(h1), hurst2_(h2) {}

    std::vector<double> raw_hursts() const {
        switch (kind_) {
            case NoiseKind::Wiener: return {};
            case NoiseKind::Fbm: return {hurst1_};
            case NoiseKind::FbmPlusWiener: return {hurst1_};
            case NoiseKind::TwoFbm: return {hurst1_, hurst2_};
        }
        return {};
    }

    static void check_hurst(double h) {
        if (!(h > 0.0 && h < 1.0))
            throw validation_error("Hurst index must lie strictly inside (0,1), got " + fmt(h));
    }

    static double parse_hurst(const std::string& s) {
        try {
            std::size_t pos = 0;
            const double h = std::stod(s, &pos);
            if (pos != s.size()) throw validation_error("trailing characters in Hurst index '" + s + "'");
            check_hurst(h);
            return h;
        } catch (const std::logic_error& e) {
            if (dynamic_cast<const validation_error*>(&e)) throw;
            throw validation_error("cannot parse Hurst index '" + s + "'");
        }
    }

    static std::string fmt(double x) {
        std::string s = std::to_string(x);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    NoiseKind kind_;
    double hurst1_;
    double hurst2_;
};

// Autocovariance sequence of the increments of B on a regular grid:
// gamma(k) = E (B_{(k+1)h} - B_{kh}) B_h.
struct IncrementAutocov {
    double step_h = 0.0;
    std::vector<double> gamma;
};

namespace detail {

// gamma(k) for a single fBm component,
// (h^{2H}/2) ((k+1)^{2H} - 2 k^{2H} + |k-1|^{2H}).
// For large k the second difference cancels catastrophically; switch to the
// binomial series of (1+x)^a + (1-x)^a - 2 at x = 1/k.
inline double fbm_increment_autocov(double hurst, double step, std::uint64_t k) {
    const double a = 2.0 * hurst;
    const double scale = 0.5 * std::pow(step, a);
    if (k == 0) return scale * 2.0;
    if (k < 1000000) {
        const double kd = static_cast<double>(k);
        return scale * (std::pow(kd + 1.0, a) - 2.0 * std::pow(kd, a) + std::pow(kd - 1.0, a));
    }
    const double kd = static_cast<double>(k);
    const double x2 = 1.0 / (kd * kd);
    const double series = a * (a - 1.0) * x2 * (1.0 + (a - 2.0) * (a - 3.0) * x2 / 12.0);
    return scale * std::pow(kd, a) * series;
}

}  // namespace detail

inline IncrementAutocov increment_autocov(const CovarianceModel& model, double h, std::size_t n) {
    if (n == 0) throw validation_error("increment_autocov: n must be positive");
    if (!(h > 0.0)) throw validation_error("increment_autocov: step h must be positive");
    IncrementAutocov out;
    out.step_h = h;
    out.gamma.assign(n, 0.0);
    out.gamma[0] += static_cast<double>(model.white_multiplicity()) * h;
    for (double hurst : model.fbm_hursts())
        for (std::size_t k = 0; k < n; ++k)
            out.gamma[k] += detail::fbm_increment_autocov(hurst, h, k);
    return out;
}

// Kernel density K(t) = d^2/(ds dt) E B_t B_s at t-s: the non-white part,
// sum over fBm components of H(2H-1)|t|^{2H-2}. Even in t.
inline double kernel_K(const CovarianceModel& model, double t) {
    model.require_continuous();
    if (t == 0.0) throw validation_error("kernel_K: singular at t = 0");
    double k = 0.0;
    for (double h : model.fbm_hursts())
        k += h * (2.0 * h - 1.0) * std::pow(std::abs(t), 2.0 * h - 2.0);
    return k;
}

// Exact integral of K over [a,b] from the antiderivative H sign(u) |u|^{2H-1},
// valid even when the cell straddles the origin.
inline double kernel_cell_integral(const CovarianceModel& model, double a, double b) {
    model.require_continuous();
    if (!(a < b)) throw validation_error("kernel_cell_integral: requires a < b");
    auto anti = [](double hurst, double u) {
        return hurst * (u >= 0.0 ? 1.0 : -1.0) * std::pow(std::abs(u), 2.0 * hurst - 1.0);
    };
    double v = 0.0;
    for (double h : model.fbm_hursts()) v += anti(h, b) - anti(h, a);
    return v;
}

// Upper bound ||K||_{L1[-T,T]} = 2 sum_i H_i T^{2H_i - 1}.
inline double kernel_l1_bound(const CovarianceModel& model, double T) {
    double v = 0.0;
    for (double h : model.fbm_hursts()) v += 2.0 * h * std::pow(T, 2.0 * h - 1.0);
    return v;
}

}  // namespace driftmle
