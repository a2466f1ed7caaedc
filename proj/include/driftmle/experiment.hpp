#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "driftmle/continuous.hpp"
#include "driftmle/discrete.hpp"
#include "driftmle/errors.hpp"
#include "driftmle/models.hpp"
#include "driftmle/rng.hpp"
#include "driftmle/sim.hpp"
#include "driftmle/toeplitz.hpp"

namespace driftmle {

struct ExperimentRow {
    double H = 0.0;
    double T = 0.0;
    std::string scheme;
    std::size_t n_reps = 0;
    double sample_mean = 0.0;
    double sample_variance = 0.0;
    double theoretical_variance = 0.0;
};

struct ConsistencyRow {
    std::size_t N = 0;
    double sample_mse = 0.0;
    double theoretical_variance = 0.0;
};

namespace detail {

// Runs fn(rep) for rep = 0..n_reps-1 on up to `threads` workers. Each
// replication depends only on its index, so results are independent of
// scheduling; callers aggregate in index order.
template <typename Fn>
void parallel_reps(std::size_t n_reps, unsigned threads, Fn&& fn) {
    if (threads <= 1) {
        for (std::size_t r = 0; r < n_reps; ++r) fn(r);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&fn, t, threads, n_reps] {
            for (std::size_t r = t; r < n_reps; r += threads) fn(r);
        });
    for (auto& th : pool) th.join();
}

inline void mean_and_variance(const std::vector<double>& xs, double& mean, double& var) {
    mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() > 1 ? xs.size() - 1 : 1);  // unbiased, divisor n-1
}

}  // namespace detail

struct Table1Config {
    std::vector<double> H_list{0.6, 0.7, 0.8, 0.9};
    std::vector<double> T_list{1.0, 10.0};
    double theta = 2.0;
    std::size_t n_reps = 1000;
    std::size_t steps_per_unit_T = 1000;
    std::size_t cells_per_unit_T = 4096;
    std::size_t max_cells = 16384;
    double tol = 1e-10;
    std::size_t max_iter = 100000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// Monte Carlo study of the continuous MLE for the mixed fBm + Wiener model:
// one row per (H, T), reporting sample mean/variance over the replications
// and the theoretical variance 1 / int h_T.
inline std::vector<ExperimentRow> run_table1(const Table1Config& cfg) {
    if (cfg.n_reps < 2) throw validation_error("run_table1: need at least 2 replications");
    std::vector<ExperimentRow> rows;
    std::size_t row_index = 0;
    for (double H : cfg.H_list) {
        for (double T : cfg.T_list) {
            const CovarianceModel model = CovarianceModel::fbm_plus_wiener(H);
            const std::size_t n_cells =
                std::min(cfg.max_cells,
                         static_cast<std::size_t>(static_cast<double>(cfg.cells_per_unit_T) * T + 0.5));
            const WeightFunction wf = ht_neumann(model, T, n_cells, cfg.tol, cfg.max_iter);
            const std::size_t n_steps =
                static_cast<std::size_t>(static_cast<double>(cfg.steps_per_unit_T) * T + 0.5);
            const PathSimulator sim(model, cfg.theta, T, n_steps);
            const std::uint64_t row_seed = substream_seed(cfg.seed, row_index++);

            std::vector<double> estimates(cfg.n_reps);
            detail::parallel_reps(cfg.n_reps, cfg.threads, [&](std::size_t rep) {
                const SamplePath path = sim.simulate(substream_seed(row_seed, rep));
                estimates[rep] = estimate_continuous(path, wf, model).theta_hat;
            });

            ExperimentRow row;
            row.H = H;
            row.T = T;
            row.scheme = scheme_name(Scheme::Continuous);
            row.n_reps = cfg.n_reps;
            detail::mean_and_variance(estimates, row.sample_mean, row.sample_variance);
            row.theoretical_variance = 1.0 / wf.integral_h;
            rows.push_back(row);
        }
    }
    return rows;
}

// Empirical MSE of the discrete MLE against its theoretical variance along a
// list of sample sizes; both columns must decay for a consistent estimator.
inline std::vector<ConsistencyRow> run_discrete_consistency(
    const CovarianceModel& model, double h, const std::vector<std::size_t>& N_list, double theta,
    std::size_t n_reps, std::uint64_t seed, unsigned threads = 1) {
    if (N_list.empty()) throw validation_error("run_discrete_consistency: empty N list");
    std::size_t n_max = 0;
    for (std::size_t n : N_list) n_max = std::max(n_max, n);
    if (n_max == 0) throw validation_error("run_discrete_consistency: N must be positive");

    const SymToeplitz gamma = build_gamma(model, h, n_max);
    // per-N estimator weights w_N = Gamma_N^{-1} z_N; the estimator is linear
    struct Weights {
        std::vector<double> w;
        double z_dot_w = 0.0;
    };
    std::vector<Weights> weights;
    weights.reserve(N_list.size());
    for (std::size_t n : N_list) {
        SymToeplitz head{{gamma.first_row.begin(), gamma.first_row.begin() + static_cast<std::ptrdiff_t>(n)}};
        Weights ws;
        ws.w = solve_spd_toeplitz(head, std::vector<double>(n, h));
        for (double v : ws.w) ws.z_dot_w += v * h;
        weights.push_back(std::move(ws));
    }

    const PathSimulator sim(model, theta, h * static_cast<double>(n_max), n_max);
    std::vector<std::vector<double>> sq_err(N_list.size(), std::vector<double>(n_reps, 0.0));
    detail::parallel_reps(n_reps, threads, [&](std::size_t rep) {
        const SamplePath path = sim.simulate(substream_seed(seed, rep));
        const std::vector<double> dx = path.increments();
        for (std::size_t i = 0; i < N_list.size(); ++i) {
            double num = 0.0;
            for (std::size_t k = 0; k < weights[i].w.size(); ++k) num += weights[i].w[k] * dx[k];
            const double est = num / weights[i].z_dot_w;
            sq_err[i][rep] = (est - theta) * (est - theta);
        }
    });

    std::vector<ConsistencyRow> rows;
    rows.reserve(N_list.size());
    for (std::size_t i = 0; i < N_list.size(); ++i) {
        ConsistencyRow row;
        row.N = N_list[i];
        double mse = 0.0;
        for (double e : sq_err[i]) mse += e;
        row.sample_mse = mse / static_cast<double>(n_reps);
        row.theoretical_variance = 1.0 / weights[i].z_dot_w;
        rows.push_back(row);
    }
    return rows;
}

// Report CSV, deterministic and byte-identical for identical inputs.
inline void write_report_csv(const std::vector<ExperimentRow>& rows, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw io_error("cannot open '" + filename + "' for writing");
    out.precision(17);
    out << "H,T,scheme,n_reps,sample_mean,sample_variance,theoretical_variance\n";
    for (const auto& r : rows)
        out << r.H << ',' << r.T << ',' << r.scheme << ',' << r.n_reps << ',' << r.sample_mean << ','
            << r.sample_variance << ',' << r.theoretical_variance << '\n';
    if (!out) throw io_error("failed writing '" + filename + "'");
}

inline void write_consistency_csv(const std::vector<ConsistencyRow>& rows, const std::string& filename) {
    std::ofstream out(filename);
    if (!out) throw io_error("cannot open '" + filename + "' for writing");
    out.precision(17);
    out << "N,sample_mse,theoretical_variance\n";
    for (const auto& r : rows)
        out << r.N << ',' << r.sample_mse << ',' << r.theoretical_variance << '\n';
    if (!out) throw io_error("failed writing '" + filename + "'");
}

}  // namespace driftmle
