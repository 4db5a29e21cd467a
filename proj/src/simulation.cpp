#include "twincal/simulation.hpp"

#include <cmath>
#include <stdexcept>

#include "twincal/background.hpp"
#include "twincal/rng.hpp"

namespace twincal {

namespace {

double effective_lambda(const SourceConfig& config) {
    if (config.pump_power >= 0.0) return std::sqrt(config.pump_power);
    return config.lambda;
}

void check_arm(const DetectorArm& arm) {
    if (arm.efficiency < 0.0 || arm.efficiency > 1.0) {
        throw std::invalid_argument("detector efficiency outside [0, 1]");
    }
}

}  // namespace

CorrelatedState make_source_state(const SourceConfig& config) {
    if (config.truncation < 1) throw std::invalid_argument("truncation must be at least 1");
    const int n = config.truncation;
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n);

    switch (config.kind) {
        case SourceKind::TwoModeSqueezedVacuum: {
            const double lambda = effective_lambda(config);
            if (lambda < 0.0 || lambda >= 1.0) {
                throw std::invalid_argument("squeezing parameter must satisfy 0 <= lambda < 1");
            }
            const double r = lambda * lambda;
            double w = 1.0;
            for (int k = 0; k < n; ++k) {
                d[k] = w;
                w *= r;
            }
            break;
        }
        case SourceKind::PoissonianCorrelated: {
            if (config.mean_pairs < 0.0) throw std::invalid_argument("negative mean pair number");
            double w = 1.0;
            for (int k = 0; k < n; ++k) {
                d[k] = w;
                w *= config.mean_pairs / (k + 1);
            }
            break;
        }
        case SourceKind::CustomDiagonal: {
            if (config.custom.empty() || static_cast<int>(config.custom.size()) > n) {
                throw std::invalid_argument("custom diagonal length does not fit the truncation");
            }
            for (std::size_t k = 0; k < config.custom.size(); ++k) {
                if (config.custom[k] < 0.0) {
                    throw std::invalid_argument("custom diagonal has a negative weight");
                }
                d[static_cast<int>(k)] = config.custom[k];
            }
            break;
        }
    }

    const double total = d.sum();
    if (total <= 0.0) throw std::invalid_argument("source weights sum to zero");
    return CorrelatedState{d / total};
}

JointOutcomeStatistics simulate_clicks_exact(const ExperimentConfig& config) {
    check_arm(config.detector1);
    check_arm(config.detector2);
    auto state = make_source_state(config.source);
    auto sigma = add_background(state.as_joint(), config.background1, config.background2);
    auto c1 = build_convolution_matrix(config.detector1.multiplex);
    auto c2 = build_convolution_matrix(config.detector2.multiplex);
    return predict_joint(c1, config.detector1.efficiency, sigma,
                         config.detector2.efficiency, c2);
}

McSimulationResult simulate_clicks_mc(const ExperimentConfig& config) {
    check_arm(config.detector1);
    check_arm(config.detector2);
    if (config.trials < 0) throw std::invalid_argument("negative trial count");
    auto state = make_source_state(config.source);

    // custom diagonals sample from the explicit weights; the parametric
    // sources sample their untruncated laws and clip into the top level
    std::vector<double> weights;
    if (config.source.kind == SourceKind::CustomDiagonal) {
        weights.assign(state.diagonal.data(), state.diagonal.data() + state.dim());
    }
    const double lambda = effective_lambda(config.source);
    const int max_pairs = config.source.truncation - 1;

    const int bins1 = config.detector1.multiplex.bins();
    const int bins2 = config.detector2.multiplex.bins();
    if (bins1 < 1 || bins2 < 1) throw std::invalid_argument("detector needs at least one bin");

    Rng rng(config.rng_seed);
    McSimulationResult result;
    result.histogram.entries = Eigen::MatrixXd::Zero(bins1 + 1, bins2 + 1);
    result.histogram.trials = config.trials;

    std::vector<char> occupied1(bins1), occupied2(bins2);
    auto route = [&rng](int photons, const std::vector<double>& probs,
                        std::vector<char>& occupied) {
        std::fill(occupied.begin(), occupied.end(), 0);
        for (int i = 0; i < photons; ++i) occupied[rng.categorical(probs)] = 1;
        int clicks = 0;
        for (char o : occupied) clicks += o;
        return clicks;
    };

    for (long long t = 0; t < config.trials; ++t) {
        int pairs = 0;
        switch (config.source.kind) {
            case SourceKind::TwoModeSqueezedVacuum:
                pairs = rng.geometric_pairs(lambda);
                break;
            case SourceKind::PoissonianCorrelated:
                pairs = rng.poisson(config.source.mean_pairs);
                break;
            case SourceKind::CustomDiagonal:
                pairs = rng.categorical(weights);
                break;
        }
        if (pairs > max_pairs) {
            pairs = max_pairs;
            ++result.pair_overflow;
        }

        const int n1 = pairs + rng.poisson(config.background1);
        const int n2 = pairs + rng.poisson(config.background2);
        const int k1 = rng.binomial(n1, config.detector1.efficiency);
        const int k2 = rng.binomial(n2, config.detector2.efficiency);
        const int clicks1 = route(k1, config.detector1.multiplex.bin_probabilities, occupied1);
        const int clicks2 = route(k2, config.detector2.multiplex.bin_probabilities, occupied2);
        result.histogram.entries(clicks1, clicks2) += 1.0;
    }
    return result;
}

}  // namespace twincal
