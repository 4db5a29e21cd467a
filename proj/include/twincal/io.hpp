#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "twincal/estimation.hpp"
#include "twincal/forward_model.hpp"
#include "twincal/simulation.hpp"

namespace twincal {

inline constexpr const char* kToolVersion = "0.1.0";

// On-disk click histogram: counts (or probabilities) plus the metadata
// needed to re-run and to interpret the axes.
struct ClickHistogramFile {
    JointOutcomeStatistics data;
    int truncation = 9;
    MultiplexConfig detector1;
    MultiplexConfig detector2;
    std::string label;
    std::string rng_algorithm;
    std::uint64_t seed = 0;
    bool seeded = false;
    long long pair_overflow = 0;
    std::string tool_version = kToolVersion;
};

// Self-contained calibration record: result plus the settings and input
// digest required to reproduce it.
struct ResultFile {
    CalibrationResult result;
    EstimateOptions settings;
    int truncation = 9;
    std::string input_digest;
    double timing_ms = 0.0;
    std::string tool_version = kToolVersion;
};

ExperimentConfig load_experiment_config(const std::string& path);

// Detector geometry + truncation only (no efficiencies): used by commands
// that estimate or post-process.
struct DetectorFileConfig {
    int truncation = 9;
    MultiplexConfig detector1;
    MultiplexConfig detector2;
};
DetectorFileConfig load_detector_config(const std::string& path);

void save_click_histogram(const std::string& path, const ClickHistogramFile& file);
ClickHistogramFile load_click_histogram(const std::string& path);

void save_result(const std::string& path, const ResultFile& file);
ResultFile load_result(const std::string& path);

// Tidy CSV, one row per point, with a header line.
void write_csv(const std::string& path, const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

// FNV-1a over the file bytes, as "fnv1a:<hex>".
std::string digest_file(const std::string& path);

int run_cli(int argc, char** argv);

}  // namespace twincal
