#pragma once

#include <vector>

namespace dsqkd {

inline constexpr double kDefaultTailTolerance = 1e-12;

// Truncated photon-number distribution: weights a_k for k = 0..J plus the
// probability mass beyond the cutoff, kept explicit so downstream bounds
// can treat it as worst-case multiphoton.
struct FockDistribution {
    std::vector<double> weights;  // a_k, k = 0..truncation
    int truncation = 0;           // J
    double tail_mass = 0.0;       // 1 - sum(weights)

    double weight(int k) const {
        return (k >= 0 && k <= truncation) ? weights[static_cast<size_t>(k)]
                                           : 0.0;
    }
};

// Poissonian a_k = e^{-mu} mu^k / k! for an attenuated-laser source.
// Throws TailTooLarge if the mass beyond J exceeds tail_tol.
FockDistribution coherent_fock(double mu, int truncation,
                               double tail_tol = kDefaultTailTolerance);

// Thermal (single-mode PDC) number distribution X_k = mu^k (1+mu)^{-(k+1)},
// tail mass (mu/(1+mu))^{J+1}.
FockDistribution pdc_number_dist(double mu, int truncation,
                                 double tail_tol = kDefaultTailTolerance);

// Point mass on the vacuum state.
FockDistribution vacuum_fock(int truncation);

}  // namespace dsqkd
