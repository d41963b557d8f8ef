#include "dsqkd/fock.hpp"

#include <cmath>
#include <stdexcept>

#include "dsqkd/errors.hpp"

namespace dsqkd {

namespace {

void check_tail(const FockDistribution& d, double tail_tol) {
    if (d.tail_mass > tail_tol) throw TailTooLarge(d.truncation, d.tail_mass);
}

}  // namespace

FockDistribution coherent_fock(double mu, int truncation, double tail_tol) {
    if (mu < 0.0) throw std::invalid_argument("coherent_fock: mu < 0");
    if (truncation < 1) throw std::invalid_argument("coherent_fock: J < 1");

    FockDistribution d;
    d.truncation = truncation;
    d.weights.resize(static_cast<size_t>(truncation) + 1, 0.0);

    double sum = 0.0;
    for (int k = 0; k <= truncation; ++k) {
        // Log space: mu^k / k! underflows long before k = J for large J.
        double w;
        if (mu == 0.0) {
            w = (k == 0) ? 1.0 : 0.0;
        } else {
            w = std::exp(-mu + k * std::log(mu) - std::lgamma(k + 1.0));
        }
        d.weights[static_cast<size_t>(k)] = w;
        sum += w;
    }
    d.tail_mass = std::max(0.0, 1.0 - sum);
    check_tail(d, tail_tol);
    return d;
}

FockDistribution pdc_number_dist(double mu, int truncation, double tail_tol) {
    if (mu < 0.0) throw std::invalid_argument("pdc_number_dist: mu < 0");
    if (truncation < 1) throw std::invalid_argument("pdc_number_dist: J < 1");

    FockDistribution d;
    d.truncation = truncation;
    d.weights.resize(static_cast<size_t>(truncation) + 1, 0.0);

    const double q = mu / (1.0 + mu);
    double w = 1.0 / (1.0 + mu);  // X_0
    for (int k = 0; k <= truncation; ++k) {
        d.weights[static_cast<size_t>(k)] = w;
        w *= q;
    }
    d.tail_mass = std::pow(q, truncation + 1);
    check_tail(d, tail_tol);
    return d;
}

FockDistribution vacuum_fock(int truncation) {
    FockDistribution d;
    d.truncation = truncation;
    d.weights.resize(static_cast<size_t>(truncation) + 1, 0.0);
    d.weights[0] = 1.0;
    d.tail_mass = 0.0;
    return d;
}

}  // namespace dsqkd
