#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "twincal/simulation.hpp"

using namespace twincal;

namespace {

ExperimentConfig small_experiment() {
    ExperimentConfig cfg;
    cfg.source.kind = SourceKind::TwoModeSqueezedVacuum;
    cfg.source.lambda = 0.4;
    cfg.source.truncation = 12;
    cfg.detector1 = {uniform_bins(8, 11), 0.3};
    cfg.detector2 = {uniform_bins(8, 11), 0.7};
    cfg.background1 = 0.1;
    cfg.background2 = 0.05;
    cfg.trials = 200000;
    cfg.rng_seed = 777;
    return cfg;
}

}  // namespace

TEST_CASE("squeezed vacuum source diagonals") {
    SourceConfig vac;
    vac.lambda = 0.0;
    vac.truncation = 4;
    auto v = make_source_state(vac);
    CHECK(v.diagonal[0] == doctest::Approx(1.0));

    SourceConfig half;
    half.lambda = 0.5;
    half.truncation = 3;
    auto s = make_source_state(half);
    // geometric weights 0.75, 0.1875, 0.046875 renormalized on three terms
    CHECK(s.diagonal[0] == doctest::Approx(16.0 / 21.0).epsilon(1e-12));
    CHECK(s.diagonal[1] == doctest::Approx(4.0 / 21.0).epsilon(1e-12));
    CHECK(s.diagonal[2] == doctest::Approx(1.0 / 21.0).epsilon(1e-12));

    SourceConfig bad;
    bad.lambda = 1.0;
    CHECK_THROWS_AS(make_source_state(bad), std::invalid_argument);
}

TEST_CASE("squeezed vacuum mean photon number") {
    for (double lambda : {0.2, 0.35, 0.5}) {
        SourceConfig cfg;
        cfg.lambda = lambda;
        cfg.truncation = 15;
        auto s = make_source_state(cfg);
        double mean = 0.0;
        for (int n = 0; n < 15; ++n) mean += n * s.diagonal[n];
        const double r = lambda * lambda;
        CHECK(mean == doctest::Approx(r / (1.0 - r)).epsilon(1e-6));
    }
}

TEST_CASE("poissonian and custom sources") {
    SourceConfig pois;
    pois.kind = SourceKind::PoissonianCorrelated;
    pois.mean_pairs = 0.8;
    pois.truncation = 12;
    auto p = make_source_state(pois);
    CHECK(p.diagonal[1] / p.diagonal[0] == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(p.diagonal[2] / p.diagonal[1] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(p.diagonal.sum() == doctest::Approx(1.0).epsilon(1e-12));

    SourceConfig custom;
    custom.kind = SourceKind::CustomDiagonal;
    custom.custom = {0.5, 0.25, 0.25};
    custom.truncation = 3;
    auto c = make_source_state(custom);
    CHECK(c.diagonal[0] == doctest::Approx(0.5));

    SourceConfig negative;
    negative.kind = SourceKind::CustomDiagonal;
    negative.custom = {0.5, -0.1, 0.6};
    negative.truncation = 3;
    CHECK_THROWS_AS(make_source_state(negative), std::invalid_argument);
}

TEST_CASE("pump power drives the squeezing parameter") {
    SourceConfig cfg;
    cfg.lambda = 0.1;  // overridden below
    cfg.pump_power = 0.09;
    cfg.truncation = 10;
    auto s = make_source_state(cfg);
    // lambda^2 = 0.09, so the weight ratio between successive terms is 0.09
    CHECK(s.diagonal[1] / s.diagonal[0] == doctest::Approx(0.09).epsilon(1e-9));
}

TEST_CASE("exact simulation limits") {
    auto cfg = small_experiment();
    cfg.source.lambda = 0.0;
    cfg.background1 = cfg.background2 = 0.0;
    auto p = simulate_clicks_exact(cfg);
    CHECK(p.entries(0, 0) == doctest::Approx(1.0).epsilon(1e-9));

    auto cfg2 = small_experiment();
    cfg2.detector1.efficiency = 0.0;
    cfg2.detector2.efficiency = 0.0;
    auto p2 = simulate_clicks_exact(cfg2);
    CHECK(p2.entries(0, 0) == doctest::Approx(1.0).epsilon(1e-9));

    auto p3 = simulate_clicks_exact(small_experiment());
    CHECK(p3.entries.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p3.trials == 0);
}

TEST_CASE("monte carlo accounting and determinism") {
    auto cfg = small_experiment();
    cfg.trials = 50000;
    auto a = simulate_clicks_mc(cfg);
    CHECK(a.histogram.trials == 50000);
    CHECK(a.histogram.entries.sum() == doctest::Approx(50000.0));

    auto b = simulate_clicks_mc(cfg);
    CHECK(a.histogram.entries == b.histogram.entries);

    cfg.rng_seed = 778;
    auto c = simulate_clicks_mc(cfg);
    CHECK(a.histogram.entries != c.histogram.entries);
}

TEST_CASE("pair overflow is counted") {
    ExperimentConfig cfg;
    cfg.source.lambda = 0.7;
    cfg.source.truncation = 2;
    cfg.detector1 = {uniform_bins(2, 1), 0.9};
    cfg.detector2 = {uniform_bins(2, 1), 0.9};
    cfg.trials = 10000;
    cfg.rng_seed = 5;
    auto r = simulate_clicks_mc(cfg);
    // P(n >= 2) = lambda^4 is about 0.24 here
    CHECK(r.pair_overflow > 1500);
    CHECK(r.pair_overflow < 3500);
}

TEST_CASE("sampler tracks the matrix pipeline") {
    auto cfg = small_experiment();
    auto exact = simulate_clicks_exact(cfg);
    auto mc = simulate_clicks_mc(cfg);
    auto phat = mc.histogram.probabilities();

    int total = 0, agreeing = 0;
    for (int i = 0; i < exact.entries.rows(); ++i) {
        for (int j = 0; j < exact.entries.cols(); ++j) {
            const double p = exact.entries(i, j);
            const double bound = 3.0 * std::sqrt(p * (1.0 - p) / cfg.trials);
            ++total;
            if (std::abs(phat(i, j) - p) <= bound + 1e-12) ++agreeing;
        }
    }
    CHECK(static_cast<double>(agreeing) / total >= 0.99);
}
