#pragma once

#include <cstdint>
#include <vector>

#include "twincal/detector_model.hpp"
#include "twincal/forward_model.hpp"

namespace twincal {

enum class SourceKind {
    TwoModeSqueezedVacuum,   // geometric pair distribution, parameter lambda
    PoissonianCorrelated,    // Poisson pair distribution, parameter mean_pairs
    CustomDiagonal,
};

struct SourceConfig {
    SourceKind kind = SourceKind::TwoModeSqueezedVacuum;
    double lambda = 0.0;       // |lambda| < 1
    double mean_pairs = 0.0;
    std::vector<double> custom;
    int truncation = 9;
    // When >= 0, overrides lambda via lambda^2 = pump_power (arbitrary units).
    double pump_power = -1.0;
};

struct DetectorArm {
    MultiplexConfig multiplex;
    double efficiency = 1.0;
};

struct ExperimentConfig {
    SourceConfig source;
    DetectorArm detector1;
    DetectorArm detector2;
    double background1 = 0.0;  // mean background photons per pulse, beam 1
    double background2 = 0.0;
    long long trials = 1;
    std::uint64_t rng_seed = 0;
};

CorrelatedState make_source_state(const SourceConfig& config);

// Exact click probabilities through the matrix pipeline (no sampling).
JointOutcomeStatistics simulate_clicks_exact(const ExperimentConfig& config);

struct McSimulationResult {
    JointOutcomeStatistics histogram;  // integer counts, trials set
    long long pair_overflow = 0;       // pulses whose pair number was clipped
};

// Per pulse: sample the pair number, add Poisson background per arm, thin
// each arm binomially, route survivors to bins, count occupied bins.
// Deterministic for a fixed seed.
McSimulationResult simulate_clicks_mc(const ExperimentConfig& config);

}  // namespace twincal
