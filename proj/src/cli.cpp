#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "twincal/background.hpp"
#include "twincal/errors.hpp"
#include "twincal/estimation.hpp"
#include "twincal/io.hpp"
#include "twincal/simulation.hpp"

namespace twincal {

namespace {

std::vector<double> linspace01(int points) {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) v[i] = points > 1 ? i / double(points - 1) : 0.0;
    return v;
}

void apply_truncation(ExperimentConfig& cfg, int truncation) {
    cfg.source.truncation = truncation;
    cfg.detector1.multiplex.max_photons = truncation - 1;
    cfg.detector2.multiplex.max_photons = truncation - 1;
}

struct SimulateArgs {
    std::string config;
    std::string out;
    bool exact = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int truncation = 0;
    bool truncation_set = false;
};

void do_simulate(const SimulateArgs& args) {
    auto cfg = load_experiment_config(args.config);
    if (args.seed_set) cfg.rng_seed = args.seed;
    if (args.truncation_set) apply_truncation(cfg, args.truncation);

    ClickHistogramFile file;
    file.truncation = cfg.source.truncation;
    file.detector1 = cfg.detector1.multiplex;
    file.detector2 = cfg.detector2.multiplex;
    if (args.exact) {
        file.data = simulate_clicks_exact(cfg);
        file.label = "exact click probabilities";
    } else {
        auto mc = simulate_clicks_mc(cfg);
        file.data = mc.histogram;
        file.pair_overflow = mc.pair_overflow;
        file.seed = cfg.rng_seed;
        file.seeded = true;
        file.rng_algorithm = "mt19937_64";
        file.label = "sampled click counts";
    }
    save_click_histogram(args.out, file);
    std::cout << "wrote " << args.out << "\n";
}

struct EstimateArgs {
    std::string histogram;
    std::string detectors;
    std::string out;
    int grid = 21;
    double tolerance = 1e-6;
};

void do_estimate(const EstimateArgs& args) {
    const auto start = std::chrono::steady_clock::now();
    auto hist = load_click_histogram(args.histogram);
    auto det = load_detector_config(args.detectors);
    auto c1 = build_convolution_matrix(det.detector1);
    auto c2 = build_convolution_matrix(det.detector2);

    EstimateOptions options;
    options.grid = args.grid;
    options.simplex_tolerance = args.tolerance;
    auto result = estimate_efficiencies(hist.data, c1, c2, options);
    const auto stop = std::chrono::steady_clock::now();

    ResultFile file;
    file.result = result;
    file.settings = options;
    file.truncation = det.truncation;
    file.input_digest = digest_file(args.histogram);
    file.timing_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    save_result(args.out, file);

    std::printf("eta1 = %.6f\neta2 = %.6f\nresidual = %.3e\n", result.eta1, result.eta2,
                result.residual);
    if (result.ambiguous) std::printf("warning: several efficiency pairs fit comparably well\n");
}

void do_klyshko(const std::string& histogram) {
    auto hist = load_click_histogram(histogram);
    auto rates = klyshko_rates_from_histogram(hist.data);
    auto eff = klyshko_efficiency(rates);
    std::printf("singles_1 = %.6g\nsingles_2 = %.6g\ncoincidences = %.6g\n", rates.R_s,
                rates.R_i, rates.R_c);
    std::printf("eta1 = %.6f\neta2 = %.6f\n", eff.eta_s, eff.eta_i);
}

struct ScanArgs {
    std::string histogram;
    std::string out;
    int grid = 21;
};

void do_scan(const ScanArgs& args) {
    auto hist = load_click_histogram(args.histogram);
    auto c1 = build_convolution_matrix(hist.detector1);
    auto c2 = build_convolution_matrix(hist.detector2);
    auto etas = linspace01(args.grid);
    auto landscape = scan_residual_landscape(hist.data, c1, c2, etas, etas);
    std::vector<std::vector<double>> rows;
    rows.reserve(etas.size() * etas.size());
    for (std::size_t i = 0; i < etas.size(); ++i) {
        for (std::size_t j = 0; j < etas.size(); ++j) {
            rows.push_back({etas[i], etas[j], landscape(i, j)});
        }
    }
    write_csv(args.out, {"eta1", "eta2", "residual"}, rows);
    std::cout << "wrote " << args.out << " (" << count_landscape_basins(landscape)
              << " basin(s))\n";
}

struct EquivalenceArgs {
    std::string out;
    int max_photons = 1;
    double alpha_max = 1.0;
    int steps = 11;
};

void do_equivalence(const EquivalenceArgs& args) {
    if (args.steps < 1) throw std::invalid_argument("steps must be positive");
    std::vector<double> alphas(args.steps);
    for (int i = 0; i < args.steps; ++i) {
        alphas[i] = args.steps > 1 ? args.alpha_max * i / double(args.steps - 1) : args.alpha_max;
    }
    auto points = solve_loss_background_equivalence(args.max_photons, alphas);
    std::vector<std::vector<double>> rows;
    rows.reserve(points.size());
    for (const auto& p : points) rows.push_back({p.alpha, p.loss, p.residual});
    write_csv(args.out, {"alpha", "loss", "residual"}, rows);
    std::cout << "wrote " << args.out << "\n";
}

struct SubtractArgs {
    std::string measured;
    std::string background;
    std::string out;
};

void do_subtract(const SubtractArgs& args) {
    auto measured = load_click_histogram(args.measured);
    auto background = load_click_histogram(args.background);
    auto c1 = build_convolution_matrix(measured.detector1);
    auto c2 = build_convolution_matrix(measured.detector2);
    auto result = subtract_background(measured.data, background.data, c1, c2);

    ClickHistogramFile file;
    file.data = result.statistics;
    file.truncation = measured.truncation;
    file.detector1 = measured.detector1;
    file.detector2 = measured.detector2;
    file.label = "background subtracted";
    save_click_histogram(args.out, file);
    std::printf("wrote %s (clipped mass %.3e, %d spectrum cells passed through)\n",
                args.out.c_str(), result.clipped_mass, result.floored_frequencies);
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"click statistics toolkit for multiplexed photon-number detectors"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* sim_cmd = app.add_subcommand("simulate", "sample or compute click statistics");
    sim_cmd->add_option("--config", sim.config, "experiment description (json)")->required();
    sim_cmd->add_option("--out", sim.out, "histogram output path")->required();
    sim_cmd->add_flag("--exact", sim.exact, "exact probabilities instead of sampling");
    auto* seed_opt = sim_cmd->add_option("--seed", sim.seed, "override the configured seed");
    auto* trunc_opt =
        sim_cmd->add_option("--truncation", sim.truncation, "override the photon truncation");

    EstimateArgs est;
    auto* est_cmd = app.add_subcommand("estimate", "fit both efficiencies and the pair state");
    est_cmd->add_option("--histogram", est.histogram, "measured click histogram")->required();
    est_cmd->add_option("--detectors", est.detectors, "detector geometry (json)")->required();
    est_cmd->add_option("--out", est.out, "result output path")->required();
    est_cmd->add_option("--grid", est.grid, "coarse search grid points per axis");
    est_cmd->add_option("--tolerance", est.tolerance, "simplex termination size");

    std::string klyshko_hist;
    auto* kly_cmd = app.add_subcommand("klyshko", "coincidence-ratio efficiencies");
    kly_cmd->add_option("--histogram", klyshko_hist, "measured click histogram")->required();

    ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("scan", "residual landscape over both efficiencies");
    scan_cmd->add_option("--histogram", scan.histogram, "measured click histogram")->required();
    scan_cmd->add_option("--out", scan.out, "csv output path")->required();
    scan_cmd->add_option("--grid", scan.grid, "grid points per axis");

    EquivalenceArgs equiv;
    auto* equiv_cmd =
        app.add_subcommand("equivalence", "loss level indistinguishable from background");
    equiv_cmd->add_option("--out", equiv.out, "csv output path")->required();
    equiv_cmd->add_option("--max-photons", equiv.max_photons, "resolvable photon number");
    equiv_cmd->add_option("--alpha-max", equiv.alpha_max, "largest background mean");
    equiv_cmd->add_option("--steps", equiv.steps, "number of sweep points");

    SubtractArgs sub;
    auto* sub_cmd = app.add_subcommand("subtract", "remove independently measured background");
    sub_cmd->add_option("--measured", sub.measured, "histogram with background")->required();
    sub_cmd->add_option("--background", sub.background, "background-only histogram")->required();
    sub_cmd->add_option("--out", sub.out, "histogram output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    }

    sim.seed_set = seed_opt->count() > 0;
    sim.truncation_set = trunc_opt->count() > 0;

    try {
        if (sim_cmd->parsed()) do_simulate(sim);
        if (est_cmd->parsed()) do_estimate(est);
        if (kly_cmd->parsed()) do_klyshko(klyshko_hist);
        if (scan_cmd->parsed()) do_scan(scan);
        if (equiv_cmd->parsed()) do_equivalence(equiv);
        if (sub_cmd->parsed()) do_subtract(sub);
    } catch (const AmbiguousEstimateError& e) {
        std::cerr << "ambiguous: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace twincal
