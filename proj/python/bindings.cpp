#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "twincal/background.hpp"
#include "twincal/errors.hpp"
#include "twincal/estimation.hpp"
#include "twincal/io.hpp"
#include "twincal/nnls.hpp"
#include "twincal/simulation.hpp"

namespace py = pybind11;
using namespace twincal;

PYBIND11_MODULE(twincal, m) {
    m.doc() = "calibration of photon-number detectors from twin-beam click statistics";

    py::register_exception<AmbiguousEstimateError>(m, "AmbiguousEstimateError");
    py::register_exception<NumericalError>(m, "NumericalError");
    py::register_exception<ParseError>(m, "FileFormatError");

    py::class_<LossMatrix>(m, "LossMatrix")
        .def_readonly("eta", &LossMatrix::eta)
        .def_readonly("entries", &LossMatrix::entries)
        .def_property_readonly("dim", &LossMatrix::dim);

    py::class_<MultiplexConfig>(m, "MultiplexConfig")
        .def(py::init<>())
        .def_readwrite("bin_probabilities", &MultiplexConfig::bin_probabilities)
        .def_readwrite("max_photons", &MultiplexConfig::max_photons)
        .def_property_readonly("bins", &MultiplexConfig::bins);

    py::class_<ConvolutionMatrix>(m, "ConvolutionMatrix")
        .def_readonly("entries", &ConvolutionMatrix::entries)
        .def_property_readonly("bins", &ConvolutionMatrix::bins)
        .def_property_readonly("max_photons", &ConvolutionMatrix::max_photons);

    py::class_<JointPhotonStatistics>(m, "JointPhotonStatistics")
        .def(py::init<>())
        .def_readwrite("entries", &JointPhotonStatistics::entries)
        .def_property_readonly("dim", &JointPhotonStatistics::dim)
        .def("off_diagonal_mass", &JointPhotonStatistics::off_diagonal_mass)
        .def("unpaired_fraction", &JointPhotonStatistics::unpaired_fraction);

    py::class_<CorrelatedState>(m, "CorrelatedState")
        .def(py::init<>())
        .def(py::init<Eigen::VectorXd>())
        .def_readwrite("diagonal", &CorrelatedState::diagonal)
        .def_property_readonly("dim", &CorrelatedState::dim)
        .def("as_joint", &CorrelatedState::as_joint);

    py::class_<JointOutcomeStatistics>(m, "JointOutcomeStatistics")
        .def(py::init<>())
        .def_readwrite("entries", &JointOutcomeStatistics::entries)
        .def_readwrite("trials", &JointOutcomeStatistics::trials)
        .def("probabilities", &JointOutcomeStatistics::probabilities)
        .def_property_readonly("bins1", &JointOutcomeStatistics::bins1)
        .def_property_readonly("bins2", &JointOutcomeStatistics::bins2);

    py::class_<KlyshkoRates>(m, "KlyshkoRates")
        .def(py::init<>())
        .def_readwrite("R_i", &KlyshkoRates::R_i)
        .def_readwrite("R_s", &KlyshkoRates::R_s)
        .def_readwrite("R_c", &KlyshkoRates::R_c);

    py::class_<EfficiencyPair>(m, "EfficiencyPair")
        .def_readonly("eta_s", &EfficiencyPair::eta_s)
        .def_readonly("eta_i", &EfficiencyPair::eta_i);

    py::class_<DiagonalFit>(m, "DiagonalFit")
        .def_readonly("diagonal", &DiagonalFit::diagonal)
        .def_readonly("residual", &DiagonalFit::residual)
        .def_readonly("converged", &DiagonalFit::converged);

    py::class_<EstimateOptions>(m, "EstimateOptions")
        .def(py::init<>())
        .def_readwrite("grid", &EstimateOptions::grid)
        .def_readwrite("simplex_tolerance", &EstimateOptions::simplex_tolerance)
        .def_readwrite("max_evaluations", &EstimateOptions::max_evaluations)
        .def_readwrite("flat_tolerance", &EstimateOptions::flat_tolerance);

    py::class_<CalibrationResult>(m, "CalibrationResult")
        .def_readonly("eta1", &CalibrationResult::eta1)
        .def_readonly("eta2", &CalibrationResult::eta2)
        .def_readonly("c", &CalibrationResult::c)
        .def_readonly("fitted_diagonal", &CalibrationResult::fitted_diagonal)
        .def_readonly("residual", &CalibrationResult::residual)
        .def_readonly("evaluations", &CalibrationResult::evaluations)
        .def_readonly("ambiguous", &CalibrationResult::ambiguous)
        .def_readonly("flat_parameters", &CalibrationResult::flat_parameters);

    py::class_<JointReconstruction>(m, "JointReconstruction")
        .def_readonly("sigma", &JointReconstruction::sigma)
        .def_readonly("residual", &JointReconstruction::residual)
        .def_readonly("unpaired_fraction", &JointReconstruction::unpaired_fraction)
        .def_readonly("converged", &JointReconstruction::converged);

    py::class_<BackgroundModel>(m, "BackgroundModel")
        .def(py::init<>())
        .def_readwrite("mean_photons", &BackgroundModel::mean_photons)
        .def_readwrite("dim", &BackgroundModel::dim);

    py::class_<EquivalencePoint>(m, "EquivalencePoint")
        .def_readonly("alpha", &EquivalencePoint::alpha)
        .def_readonly("loss", &EquivalencePoint::loss)
        .def_readonly("residual", &EquivalencePoint::residual)
        .def_readonly("sigma_a", &EquivalencePoint::sigma_a)
        .def_readonly("sigma_b", &EquivalencePoint::sigma_b)
        .def_readonly("found", &EquivalencePoint::found);

    py::class_<SubtractionResult>(m, "SubtractionResult")
        .def_readonly("statistics", &SubtractionResult::statistics)
        .def_readonly("clipped_mass", &SubtractionResult::clipped_mass)
        .def_readonly("floored_frequencies", &SubtractionResult::floored_frequencies);

    py::enum_<SourceKind>(m, "SourceKind")
        .value("TwoModeSqueezedVacuum", SourceKind::TwoModeSqueezedVacuum)
        .value("PoissonianCorrelated", SourceKind::PoissonianCorrelated)
        .value("CustomDiagonal", SourceKind::CustomDiagonal);

    py::class_<SourceConfig>(m, "SourceConfig")
        .def(py::init<>())
        .def_readwrite("kind", &SourceConfig::kind)
        .def_readwrite("lambda_", &SourceConfig::lambda)
        .def_readwrite("mean_pairs", &SourceConfig::mean_pairs)
        .def_readwrite("custom", &SourceConfig::custom)
        .def_readwrite("truncation", &SourceConfig::truncation)
        .def_readwrite("pump_power", &SourceConfig::pump_power);

    py::class_<DetectorArm>(m, "DetectorArm")
        .def(py::init<>())
        .def_readwrite("multiplex", &DetectorArm::multiplex)
        .def_readwrite("efficiency", &DetectorArm::efficiency);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("source", &ExperimentConfig::source)
        .def_readwrite("detector1", &ExperimentConfig::detector1)
        .def_readwrite("detector2", &ExperimentConfig::detector2)
        .def_readwrite("background1", &ExperimentConfig::background1)
        .def_readwrite("background2", &ExperimentConfig::background2)
        .def_readwrite("trials", &ExperimentConfig::trials)
        .def_readwrite("rng_seed", &ExperimentConfig::rng_seed);

    py::class_<McSimulationResult>(m, "McSimulationResult")
        .def_readonly("histogram", &McSimulationResult::histogram)
        .def_readonly("pair_overflow", &McSimulationResult::pair_overflow);

    py::class_<NnlsResult>(m, "NnlsResult")
        .def_readonly("x", &NnlsResult::x)
        .def_readonly("residual_norm", &NnlsResult::residual_norm)
        .def_readonly("iterations", &NnlsResult::iterations)
        .def_readonly("converged", &NnlsResult::converged);

    m.def("build_loss_matrix", &build_loss_matrix, py::arg("eta"), py::arg("dim"));
    m.def("build_convolution_matrix", &build_convolution_matrix, py::arg("config"));
    m.def("compose_povm_diagonals", &compose_povm_diagonals, py::arg("c"), py::arg("l"));
    m.def("uniform_bins", &uniform_bins, py::arg("bins"), py::arg("max_photons"));

    m.def("predict_single", &predict_single, py::arg("c"), py::arg("l"), py::arg("sigma"));
    m.def("predict_joint", &predict_joint, py::arg("c1"), py::arg("eta1"), py::arg("sigma"),
          py::arg("eta2"), py::arg("c2"));

    m.def("nnls", &nnls, py::arg("A"), py::arg("b"), py::arg("max_iterations") = 0);

    m.def("klyshko_efficiency", &klyshko_efficiency, py::arg("rates"));
    m.def("klyshko_rates_from_histogram", &klyshko_rates_from_histogram, py::arg("histogram"));
    m.def("biased_klyshko", &biased_klyshko, py::arg("sigma11"), py::arg("sigma22"),
          py::arg("eta_s"), py::arg("eta_i"));
    m.def("fit_diagonal_state", &fit_diagonal_state, py::arg("histogram"), py::arg("eta1"),
          py::arg("eta2"), py::arg("c1"), py::arg("c2"));
    m.def("estimate_efficiencies", &estimate_efficiencies, py::arg("histogram"), py::arg("c1"),
          py::arg("c2"), py::arg("options") = EstimateOptions{});
    m.def("scan_residual_landscape", &scan_residual_landscape, py::arg("histogram"),
          py::arg("c1"), py::arg("c2"), py::arg("eta1_grid"), py::arg("eta2_grid"));
    m.def("count_landscape_basins", &count_landscape_basins, py::arg("landscape"),
          py::arg("plateau_tolerance") = 1e-12);
    m.def("reconstruct_joint_statistics", &reconstruct_joint_statistics, py::arg("histogram"),
          py::arg("eta1"), py::arg("eta2"), py::arg("c1"), py::arg("c2"));

    m.def("background_matrix", &background_matrix, py::arg("model"));
    m.def("add_background", &add_background, py::arg("sigma"), py::arg("alpha1"),
          py::arg("alpha2"));
    m.def("solve_loss_background_equivalence", &solve_loss_background_equivalence,
          py::arg("max_photons"), py::arg("alpha_grid"));
    m.def("subtract_background", &subtract_background, py::arg("measured"),
          py::arg("background"), py::arg("c1"), py::arg("c2"));

    m.def("make_source_state", &make_source_state, py::arg("config"));
    m.def("simulate_clicks_exact", &simulate_clicks_exact, py::arg("config"));
    m.def("simulate_clicks_mc", &simulate_clicks_mc, py::arg("config"));

    m.def("load_experiment_config", &load_experiment_config, py::arg("path"));
    m.def("load_click_histogram",
          [](const std::string& path) { return load_click_histogram(path); }, py::arg("path"));
    m.def("save_click_histogram",
          [](const std::string& path, const JointOutcomeStatistics& data, int truncation,
             const MultiplexConfig& detector1, const MultiplexConfig& detector2,
             const std::string& label) {
              ClickHistogramFile file;
              file.data = data;
              file.truncation = truncation;
              file.detector1 = detector1;
              file.detector2 = detector2;
              file.label = label;
              save_click_histogram(path, file);
          },
          py::arg("path"), py::arg("data"), py::arg("truncation"), py::arg("detector1"),
          py::arg("detector2"), py::arg("label") = "");

    py::class_<ClickHistogramFile>(m, "ClickHistogramFile")
        .def(py::init<>())
        .def_readwrite("data", &ClickHistogramFile::data)
        .def_readwrite("truncation", &ClickHistogramFile::truncation)
        .def_readwrite("detector1", &ClickHistogramFile::detector1)
        .def_readwrite("detector2", &ClickHistogramFile::detector2)
        .def_readwrite("label", &ClickHistogramFile::label)
        .def_readwrite("seed", &ClickHistogramFile::seed)
        .def_readwrite("seeded", &ClickHistogramFile::seeded)
        .def_readwrite("pair_overflow", &ClickHistogramFile::pair_overflow)
        .def_readwrite("tool_version", &ClickHistogramFile::tool_version);

    m.attr("__version__") = kToolVersion;
}
