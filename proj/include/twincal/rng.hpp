#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace twincal {

// mt19937_64 with hand-rolled distributions so that a seed produces the same
// stream on every platform (the standard library's distribution objects are
// implementation defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1) with 53 random bits.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    int bernoulli(double p) { return uniform() < p ? 1 : 0; }

    int binomial(int n, double p) {
        int k = 0;
        for (int i = 0; i < n; ++i) k += bernoulli(p);
        return k;
    }

    // Multiplication method; fine for the small means used here.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    // Geometric photon-pair number with P(n) = (1 - r) r^n, r = lambda^2.
    int geometric_pairs(double lambda) {
        const double r = lambda * lambda;
        if (r <= 0.0) return 0;
        const double u = 1.0 - uniform();  // in (0, 1]
        return static_cast<int>(std::floor(std::log(u) / std::log(r)));
    }

    // Index from an explicit probability vector by CDF inversion; the last
    // index absorbs any rounding slack.
    int categorical(const std::vector<double>& p) {
        double u = uniform();
        for (std::size_t i = 0; i + 1 < p.size(); ++i) {
            if (u < p[i]) return static_cast<int>(i);
            u -= p[i];
        }
        return static_cast<int>(p.size()) - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace twincal
