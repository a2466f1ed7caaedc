#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <vector>

#include "driftmle/errors.hpp"
#include "driftmle/fft.hpp"
#include "driftmle/models.hpp"
#include "driftmle/path.hpp"
#include "driftmle/rng.hpp"

namespace driftmle {

struct SimConfig {
    CovarianceModel model = CovarianceModel::wiener();
    double theta = 0.0;
    double T = 1.0;
    std::size_t n_steps = 1;
    std::uint64_t seed = 0;
};

// Exact-in-distribution fractional Gaussian noise sampler by circulant
// embedding (Davies-Harte). The embedding eigenvalues are precomputed once;
// each sample costs one FFT.
class FgnSampler {
public:
    FgnSampler(double hurst, std::size_t n, double h) : n_(n) {
        if (n == 0) throw validation_error("FgnSampler: n must be positive");
        if (!(h > 0.0)) throw validation_error("FgnSampler: step must be positive");
        m_ = next_power_of_two(2 * n);
        const std::size_t half = m_ / 2;
        const auto ac = increment_autocov(CovarianceModel::fbm(hurst), h, half + 1);
        std::vector<std::complex<double>> c(m_);
        for (std::size_t k = 0; k <= half; ++k) c[k] = ac.gamma[k];
        for (std::size_t k = 1; k < half; ++k) c[m_ - k] = ac.gamma[k];
        fft_inplace(c, false);
        sqrt_eig_.resize(m_);
        for (std::size_t k = 0; k < m_; ++k) {
            double lam = c[k].real();
            if (lam < -1e-9) {
                std::ostringstream msg;
                msg << "FgnSampler: negative circulant eigenvalue " << lam
                    << " (theoretically impossible for fGn; covariance bug?)";
                throw numeric_error(msg.str());
            }
            sqrt_eig_[k] = std::sqrt(std::max(lam, 0.0));
        }
    }

    std::size_t size() const { return n_; }

    // n fGn increments. Normal draw order is pinned: k = 0, then the pairs
    // k = 1 .. m/2-1, then k = m/2.
    std::vector<double> sample(Xoshiro256pp& rng) const {
        const std::size_t half = m_ / 2;
        const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m_));
        std::vector<std::complex<double>> v(m_);
        v[0] = sqrt_eig_[0] * rng.normal();
        for (std::size_t k = 1; k < half; ++k) {
            const double a = rng.normal();
            const double b = rng.normal();
            const double scale = sqrt_eig_[k] * 0.7071067811865476;  // 1/sqrt(2)
            v[k] = std::complex<double>(scale * a, scale * b);
            v[m_ - k] = std::conj(v[k]);
        }
        v[half] = sqrt_eig_[half] * rng.normal();
        fft_inplace(v, false);
        std::vector<double> out(n_);
        for (std::size_t k = 0; k < n_; ++k) out[k] = v[k].real() * inv_sqrt_m;
        return out;
    }

private:
    std::size_t n_;
    std::size_t m_;
    std::vector<double> sqrt_eig_;
};

inline std::vector<double> simulate_fgn(double hurst, std::size_t n, double h, std::uint64_t seed) {
    const FgnSampler sampler(hurst, n, h);
    Xoshiro256pp rng(seed);
    return sampler.sample(rng);
}

// Path simulator with per-component samplers precomputed; suited to Monte
// Carlo loops where only the seed varies. Component substreams are seeded by
// substream_seed(seed, component_index), white components first.
class PathSimulator {
public:
    PathSimulator(const CovarianceModel& model, double theta, double T, std::size_t n_steps)
        : theta_(theta), T_(T), n_(n_steps), white_(model.white_multiplicity()) {
        if (n_steps == 0) throw validation_error("PathSimulator: n_steps must be positive");
        if (!(T > 0.0)) throw validation_error("PathSimulator: T must be positive");
        h_ = T / static_cast<double>(n_steps);
        for (double hurst : model.fbm_hursts()) fgn_.emplace_back(hurst, n_steps, h_);
    }

    SamplePath simulate(std::uint64_t seed) const {
        std::vector<double> incr(n_, 0.0);
        std::size_t component = 0;
        const double sqrt_h = std::sqrt(h_);
        for (int w = 0; w < white_; ++w, ++component) {
            Xoshiro256pp rng(substream_seed(seed, component));
            for (std::size_t k = 0; k < n_; ++k) incr[k] += sqrt_h * rng.normal();
        }
        for (const auto& sampler : fgn_) {
            Xoshiro256pp rng(substream_seed(seed, component++));
            const auto x = sampler.sample(rng);
            for (std::size_t k = 0; k < n_; ++k) incr[k] += x[k];
        }
        SamplePath path;
        path.times.resize(n_ + 1);
        path.values.resize(n_ + 1);
        path.times[0] = 0.0;
        path.values[0] = 0.0;
        double cum = 0.0;
        for (std::size_t k = 0; k < n_; ++k) {
            const double t = static_cast<double>(k + 1) * h_;
            cum += incr[k];
            path.times[k + 1] = t;
            path.values[k + 1] = theta_ * t + cum;
        }
        path.times[n_] = T_;  // exact horizon
        return path;
    }

private:
    double theta_;
    double T_;
    std::size_t n_;
    double h_;
    int white_;
    std::vector<FgnSampler> fgn_;
};

inline SamplePath simulate_path(const SimConfig& cfg) {
    return PathSimulator(cfg.model, cfg.theta, cfg.T, cfg.n_steps).simulate(cfg.seed);
}

}  // namespace driftmle
