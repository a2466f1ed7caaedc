// driftmle command line: simulate sample paths of X_t = theta t + B_t,
// estimate theta from a path CSV, solve the continuous-scheme weight
// function, and run the Monte Carlo studies.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftmle/driftmle.hpp"

namespace {

using nlohmann::json;

std::string resolve_out(const std::string& path) {
    if (path.empty() || path.find('/') != std::string::npos) return path;
    if (const char* dir = std::getenv("DRIFTMLE_OUTDIR")) return std::string(dir) + "/" + path;
    return path;
}

json report_to_json(const driftmle::EstimateReport& rep) {
    json j;
    j["theta_hat"] = rep.theta_hat;
    j["theoretical_variance"] = rep.theoretical_variance;
    j["scheme"] = driftmle::scheme_name(rep.scheme);
    j["model"] = rep.model.to_string();
    j["n_increments"] = rep.n_increments;
    j["horizon"] = rep.horizon;
    if (rep.scheme == driftmle::Scheme::Continuous) j["weight_cells"] = rep.weight_cells;
    return j;
}

std::size_t default_cells(double T, std::size_t per_unit, std::size_t cap) {
    const double raw = static_cast<double>(per_unit) * std::max(T, 1.0);
    return std::min(cap, static_cast<std::size_t>(raw + 0.5));
}

int run(int argc, char** argv) {
    CLI::App app{"Maximum likelihood drift estimation for Gaussian processes with stationary increments"};
    app.require_subcommand(1);

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate a path of X_t = theta t + B_t");
    std::string sim_model = "wiener", sim_out;
    double sim_theta = 0.0, sim_T = 1.0;
    std::size_t sim_steps = 1000;
    std::uint64_t sim_seed = 1;
    sim_cmd->add_option("--model", sim_model, "Noise model (wiener, fbm:H, fbm:H+wiener, fbm:H1+fbm:H2)");
    sim_cmd->add_option("--theta", sim_theta, "Drift parameter");
    sim_cmd->add_option("--T", sim_T, "Horizon")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--steps", sim_steps, "Number of grid steps")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--seed", sim_seed, "RNG seed");
    sim_cmd->add_option("--out", sim_out, "Output path CSV")->required();

    // estimate
    auto* est_cmd = app.add_subcommand("estimate", "Estimate theta from a path CSV");
    std::string est_model, est_scheme = "discrete", est_in, est_out, est_cache;
    std::size_t est_cells = 4096, est_max_iter = 100000;
    double est_tol = 1e-10;
    bool est_cells_set = false;
    est_cmd->add_option("--model", est_model, "Noise model")->required();
    est_cmd->add_option("--scheme", est_scheme, "discrete or continuous")
        ->check(CLI::IsMember({"discrete", "continuous"}));
    est_cmd->add_option("--in", est_in, "Input path CSV")->required();
    est_cmd->add_option("--out", est_out, "Output JSON (stdout when omitted)");
    est_cmd->add_option("--cells", est_cells, "Weight grid cells (continuous scheme)")
        ->each([&](const std::string&) { est_cells_set = true; });
    est_cmd->add_option("--tol", est_tol, "Weight solver tolerance");
    est_cmd->add_option("--max-iter", est_max_iter, "Weight solver iteration cap");
    est_cmd->add_option("--cache-dir", est_cache, "Directory for the weight cache");

    // solve-ht
    auto* ht_cmd = app.add_subcommand("solve-ht", "Solve the weight equation Gamma_T h = 1");
    std::string ht_model, ht_out;
    double ht_T = 1.0, ht_tol = 1e-10;
    std::size_t ht_cells = 4096, ht_max_iter = 100000;
    ht_cmd->add_option("--model", ht_model, "Noise model")->required();
    ht_cmd->add_option("--T", ht_T, "Horizon")->check(CLI::PositiveNumber);
    ht_cmd->add_option("--cells", ht_cells, "Grid cells")->check(CLI::PositiveNumber);
    ht_cmd->add_option("--tol", ht_tol, "Residual tolerance");
    ht_cmd->add_option("--max-iter", ht_max_iter, "Iteration cap");
    ht_cmd->add_option("--out", ht_out, "Output weight CSV")->required();

    // table1
    auto* t1_cmd = app.add_subcommand("table1", "Monte Carlo study of the continuous MLE (fBm + Wiener)");
    std::vector<double> t1_H{0.6, 0.7, 0.8, 0.9}, t1_T{1.0, 10.0};
    driftmle::Table1Config t1;
    std::string t1_out;
    t1_cmd->add_option("--H-list", t1_H, "Hurst indices");
    t1_cmd->add_option("--T-list", t1_T, "Horizons");
    t1_cmd->add_option("--theta", t1.theta, "Drift parameter");
    t1_cmd->add_option("--reps", t1.n_reps, "Replications")->check(CLI::PositiveNumber);
    t1_cmd->add_option("--steps", t1.steps_per_unit_T, "Path steps per unit of T");
    t1_cmd->add_option("--cells", t1.cells_per_unit_T, "Weight cells per unit of T");
    t1_cmd->add_option("--tol", t1.tol, "Weight solver tolerance");
    t1_cmd->add_option("--seed", t1.seed, "RNG seed");
    t1_cmd->add_option("--threads", t1.threads, "Worker threads");
    t1_cmd->add_option("--out", t1_out, "Output report CSV")->required();

    // consistency
    auto* co_cmd = app.add_subcommand("consistency", "Discrete-scheme consistency study");
    std::string co_model = "wiener", co_out;
    double co_h = 1.0, co_theta = 2.0;
    std::vector<std::size_t> co_N{10, 100, 1000};
    std::size_t co_reps = 1000;
    std::uint64_t co_seed = 1;
    unsigned co_threads = 1;
    co_cmd->add_option("--model", co_model, "Noise model");
    co_cmd->add_option("--step", co_h, "Grid step")->check(CLI::PositiveNumber);
    co_cmd->add_option("--N-list", co_N, "Sample sizes");
    co_cmd->add_option("--theta", co_theta, "Drift parameter");
    co_cmd->add_option("--reps", co_reps, "Replications")->check(CLI::PositiveNumber);
    co_cmd->add_option("--seed", co_seed, "RNG seed");
    co_cmd->add_option("--threads", co_threads, "Worker threads");
    co_cmd->add_option("--out", co_out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (sim_cmd->parsed()) {
        driftmle::SimConfig cfg;
        cfg.model = driftmle::CovarianceModel::parse(sim_model);
        cfg.theta = sim_theta;
        cfg.T = sim_T;
        cfg.n_steps = sim_steps;
        cfg.seed = sim_seed;
        driftmle::write_path_csv(driftmle::simulate_path(cfg), resolve_out(sim_out));
        return 0;
    }

    if (est_cmd->parsed()) {
        const auto model = driftmle::CovarianceModel::parse(est_model);
        const auto path = driftmle::read_path_csv(est_in);
        driftmle::EstimateReport rep;
        if (est_scheme == "discrete") {
            rep = driftmle::estimate_discrete(path, model);
        } else {
            const double T = path.duration();
            const std::size_t cells = est_cells_set ? est_cells : default_cells(T, 4096, 16384);
            const driftmle::WeightFunction wf =
                est_cache.empty()
                    ? driftmle::solve_weight(model, T, cells, est_tol, est_max_iter)
                    : driftmle::solve_weight_cached(model, T, cells, est_tol, est_max_iter, est_cache);
            rep = driftmle::estimate_continuous(path, wf, model);
        }
        const std::string text = report_to_json(rep).dump(2) + "\n";
        if (est_out.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(resolve_out(est_out));
            if (!out) throw driftmle::io_error("cannot open '" + est_out + "' for writing");
            out << text;
        }
        return 0;
    }

    if (ht_cmd->parsed()) {
        const auto model = driftmle::CovarianceModel::parse(ht_model);
        const auto wf = driftmle::solve_weight(model, ht_T, ht_cells, ht_tol, ht_max_iter);
        driftmle::write_weight_csv(wf, model, ht_tol, resolve_out(ht_out));
        json j;
        j["integral_h"] = wf.integral_h;
        j["theoretical_variance"] = 1.0 / wf.integral_h;
        j["residual"] = wf.residual;
        j["iterations"] = wf.iterations;
        std::cout << j.dump(2) << "\n";
        return 0;
    }

    if (t1_cmd->parsed()) {
        t1.H_list = t1_H;
        t1.T_list = t1_T;
        driftmle::write_report_csv(driftmle::run_table1(t1), resolve_out(t1_out));
        return 0;
    }

    if (co_cmd->parsed()) {
        const auto model = driftmle::CovarianceModel::parse(co_model);
        const auto rows =
            driftmle::run_discrete_consistency(model, co_h, co_N, co_theta, co_reps, co_seed, co_threads);
        driftmle::write_consistency_csv(rows, resolve_out(co_out));
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const driftmle::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const driftmle::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const driftmle::numeric_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
