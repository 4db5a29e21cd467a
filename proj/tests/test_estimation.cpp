#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "twincal/background.hpp"
#include "twincal/detector_model.hpp"
#include "twincal/errors.hpp"
#include "twincal/estimation.hpp"
#include "twincal/forward_model.hpp"
#include "twincal/rng.hpp"
#include "twincal/simulation.hpp"

using namespace twincal;

namespace {

// Binary-detector coincidence and singles probabilities for a source that
// emits n pairs with weight c[n], each photon surviving independently.
// Independent oracle for the multi-pair quotient formula.
double enumerated_quotient(const std::vector<double>& c, double eta_s, double eta_i) {
    double coincidences = 0.0, idler_singles = 0.0;
    for (std::size_t n = 0; n < c.size(); ++n) {
        const double click_s = 1.0 - std::pow(1.0 - eta_s, static_cast<double>(n));
        const double click_i = 1.0 - std::pow(1.0 - eta_i, static_cast<double>(n));
        coincidences += c[n] * click_s * click_i;
        idler_singles += c[n] * click_i;
    }
    return coincidences / idler_singles;
}

JointOutcomeStatistics exact_statistics(const Eigen::VectorXd& diagonal, double eta1,
                                        double eta2, const ConvolutionMatrix& c1,
                                        const ConvolutionMatrix& c2, double alpha1 = 0.0,
                                        double alpha2 = 0.0) {
    CorrelatedState state{diagonal};
    auto sigma = state.as_joint();
    if (alpha1 > 0.0 || alpha2 > 0.0) sigma = add_background(sigma, alpha1, alpha2);
    return predict_joint(c1, eta1, sigma, eta2, c2);
}

Eigen::VectorXd thermal_diagonal(double lambda, int dim) {
    Eigen::VectorXd d(dim);
    for (int n = 0; n < dim; ++n) d[n] = std::pow(lambda * lambda, n);
    return d / d.sum();
}

}  // namespace

TEST_CASE("klyshko quotients") {
    auto lossless = klyshko_efficiency({1000.0, 1000.0, 1000.0});
    CHECK(lossless.eta_s == doctest::Approx(1.0));
    CHECK(lossless.eta_i == doctest::Approx(1.0));

    auto typical = klyshko_efficiency({1000.0, 800.0, 80.0});
    CHECK(typical.eta_s == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(typical.eta_i == doctest::Approx(0.1).epsilon(1e-12));

    auto none = klyshko_efficiency({1000.0, 800.0, 0.0});
    CHECK(none.eta_s == 0.0);
    CHECK(none.eta_i == 0.0);

    CHECK_THROWS_AS(klyshko_efficiency({0.0, 800.0, 0.0}), std::invalid_argument);
}

TEST_CASE("klyshko rates from a histogram") {
    JointOutcomeStatistics r;
    r.entries = (Eigen::MatrixXd(2, 2) << 10, 20, 30, 40).finished();
    r.trials = 100;
    auto rates = klyshko_rates_from_histogram(r);
    CHECK(rates.R_s == doctest::Approx(70.0));  // detector 1 clicked
    CHECK(rates.R_i == doctest::Approx(60.0));  // detector 2 clicked
    CHECK(rates.R_c == doctest::Approx(40.0));  // both clicked
}

TEST_CASE("multi-pair quotient bias formula") {
    CHECK(biased_klyshko(0.9, 0.0, 0.3, 0.4) == doctest::Approx(0.3).epsilon(1e-12));

    // 15/28: one extra two-pair term at equal efficiencies 0.5
    CHECK(biased_klyshko(0.9, 0.1, 0.5, 0.5) ==
          doctest::Approx(0.5357142857142857).epsilon(1e-12));

    // the same number from exhaustive enumeration of binary detection
    CHECK(enumerated_quotient({0.0, 0.9, 0.1}, 0.5, 0.5) ==
          doctest::Approx(0.5357142857142857).epsilon(1e-12));

    // formula == enumeration for random weights and efficiencies
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const double s11 = 0.5 + 0.5 * rng.uniform();
        const double s22 = 0.5 * rng.uniform();
        const double es = 0.05 + 0.9 * rng.uniform();
        const double ei = 0.05 + 0.9 * rng.uniform();
        CHECK(biased_klyshko(s11, s22, es, ei) ==
              doctest::Approx(enumerated_quotient({0.0, s11, s22}, es, ei)).epsilon(1e-10));
        if (es < 1.0 && ei < 1.0 && s22 > 0.0) {
            CHECK(biased_klyshko(s11, s22, es, ei) > es);
        }
    }
}

TEST_CASE("diagonal fit recovers the generating state") {
    auto c1 = build_convolution_matrix(uniform_bins(8, 4));
    auto c2 = build_convolution_matrix(uniform_bins(8, 4));
    Eigen::VectorXd diag(5);
    diag << 0.4, 0.3, 0.15, 0.1, 0.05;
    auto r = exact_statistics(diag, 0.7, 0.6, c1, c2);
    auto fit = fit_diagonal_state(r, 0.7, 0.6, c1, c2);
    CHECK(fit.converged);
    CHECK((fit.diagonal - diag).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(fit.residual < 1e-10);

    // evaluating at the wrong efficiencies must fit worse
    auto wrong = fit_diagonal_state(r, 0.5, 0.6, c1, c2);
    CHECK(wrong.residual > fit.residual + 1e-6);
}

TEST_CASE("diagonal fit of pure vacuum clicks") {
    auto c = build_convolution_matrix(uniform_bins(8, 4));
    JointOutcomeStatistics r;
    r.entries = Eigen::MatrixXd::Zero(9, 9);
    r.entries(0, 0) = 1.0;
    auto fit = fit_diagonal_state(r, 0.5, 0.5, c, c);
    CHECK(fit.diagonal[0] == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 1; i < 5; ++i) CHECK(fit.diagonal[i] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("efficiency estimation round trip, noiseless") {
    const int dim = 9;
    auto c1 = build_convolution_matrix(uniform_bins(8, dim - 1));
    auto c2 = build_convolution_matrix(uniform_bins(8, dim - 1));
    auto r = exact_statistics(thermal_diagonal(0.3, dim), 0.094, 0.080, c1, c2);
    auto est = estimate_efficiencies(r, c1, c2);
    CHECK(std::abs(est.eta1 - 0.094) < 1e-3);
    CHECK(std::abs(est.eta2 - 0.080) < 1e-3);
    CHECK_FALSE(est.ambiguous);

    // the stored residual must be reproducible from the stored solution
    CorrelatedState raw{est.fitted_diagonal};
    auto back = predict_joint(c1, est.eta1, raw.as_joint(), est.eta2, c2);
    const double again = (r.probabilities() - back.entries).norm();
    CHECK(std::abs(again - est.residual) < 1e-9);
}

TEST_CASE("estimation reduces to the klyshko quotient on single-pair data") {
    const int dim = 5;
    auto c1 = build_convolution_matrix(uniform_bins(8, dim - 1));
    auto c2 = build_convolution_matrix(uniform_bins(8, dim - 1));
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(dim);
    diag[0] = 0.7;
    diag[1] = 0.3;
    auto r = exact_statistics(diag, 0.21, 0.34, c1, c2);
    auto est = estimate_efficiencies(r, c1, c2);
    auto kly = klyshko_efficiency(klyshko_rates_from_histogram(r));
    CHECK(std::abs(est.eta1 - kly.eta_s) < 1e-6);
    CHECK(std::abs(est.eta2 - kly.eta_i) < 1e-6);
}

TEST_CASE("count scaling does not move the estimate") {
    const int dim = 6;
    auto c1 = build_convolution_matrix(uniform_bins(4, dim - 1));
    auto c2 = build_convolution_matrix(uniform_bins(4, dim - 1));
    auto p = exact_statistics(thermal_diagonal(0.35, dim), 0.4, 0.3, c1, c2);

    JointOutcomeStatistics counts;
    counts.entries = (p.entries * 1e6).array().round();
    counts.trials = static_cast<long long>(counts.entries.sum());
    auto est1 = estimate_efficiencies(counts, c1, c2);

    JointOutcomeStatistics scaled;
    scaled.entries = counts.entries * 7.0;
    scaled.trials = counts.trials * 7;
    auto est2 = estimate_efficiencies(scaled, c1, c2);
    CHECK(std::abs(est1.eta1 - est2.eta1) < 1e-9);
    CHECK(std::abs(est1.eta2 - est2.eta2) < 1e-9);
}

TEST_CASE("vacuum data cannot identify the efficiencies") {
    auto c = build_convolution_matrix(uniform_bins(4, 4));
    JointOutcomeStatistics r;
    r.entries = Eigen::MatrixXd::Zero(5, 5);
    r.entries(0, 0) = 1.0;
    CHECK_THROWS_AS(estimate_efficiencies(r, c, c), AmbiguousEstimateError);
    try {
        estimate_efficiencies(r, c, c);
    } catch (const AmbiguousEstimateError& e) {
        CHECK(e.unidentifiable.size() == 2);
    }
}

TEST_CASE("residual landscape basics") {
    const int dim = 7;
    auto c1 = build_convolution_matrix(uniform_bins(8, dim - 1));
    auto c2 = build_convolution_matrix(uniform_bins(8, dim - 1));
    auto r = exact_statistics(thermal_diagonal(0.3, dim), 0.4, 0.6, c1, c2);

    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i / 20.0);
    auto land = scan_residual_landscape(r, c1, c2, grid, grid);

    // the generating point lies on this grid and must fit essentially exactly
    CHECK(land(8, 12) < 1e-8);

    // swapping the detectors transposes the landscape
    JointOutcomeStatistics rt;
    rt.entries = r.entries.transpose();
    rt.trials = r.trials;
    auto swapped = scan_residual_landscape(rt, c2, c1, grid, grid);
    CHECK((land - swapped.transpose()).cwiseAbs().maxCoeff() < 1e-10);

    CHECK(count_landscape_basins(land) == 1);
}

TEST_CASE("basin counting on synthetic landscapes") {
    Eigen::MatrixXd one(3, 3);
    one << 5, 4, 5, 4, 1, 4, 5, 4, 5;
    CHECK(count_landscape_basins(one) == 1);

    Eigen::MatrixXd two(3, 5);
    two << 5, 4, 9, 4, 5, 4, 1, 9, 1, 4, 5, 4, 9, 4, 5;
    CHECK(count_landscape_basins(two) == 2);

    // a flat valley within tolerance merges into a single basin
    Eigen::MatrixXd plateau(3, 4);
    plateau << 5, 5, 5, 5, 5, 1.0, 1.0 + 1e-13, 5, 5, 5, 5, 5;
    CHECK(count_landscape_basins(plateau) == 1);
}

TEST_CASE("joint reconstruction round trip") {
    const int dim = 6;
    auto c1 = build_convolution_matrix(uniform_bins(8, dim - 1));
    auto c2 = build_convolution_matrix(uniform_bins(8, dim - 1));
    auto r = exact_statistics(thermal_diagonal(0.35, dim), 0.5, 0.45, c1, c2);
    auto rec = reconstruct_joint_statistics(r, 0.5, 0.45, c1, c2);
    CHECK(rec.converged);
    CHECK(rec.sigma.off_diagonal_mass() < 1e-6);
    CHECK(rec.unpaired_fraction < 1e-6);

    // uncorrelated background must show up off the diagonal
    auto noisy = exact_statistics(thermal_diagonal(0.35, dim), 0.5, 0.45, c1, c2, 0.4, 0.0);
    auto rec2 = reconstruct_joint_statistics(noisy, 0.5, 0.45, c1, c2);
    CHECK(rec2.sigma.off_diagonal_mass() > 0.05);
    CHECK(rec2.unpaired_fraction > 0.05);
}
