#include "dsqkd/source.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dsqkd/errors.hpp"

namespace dsqkd {

void FluctuationBounds::validate() const {
    if (delta < 0.0 || eps_d < 0.0 || eps_s < 0.0)
        throw std::invalid_argument("fluctuation bounds must be >= 0");
    if (delta >= 1.0 || eps_d >= 1.0 || eps_s >= 1.0)
        throw std::invalid_argument(
            "fluctuation bounds must be < 1 (intensity would reach 0)");
    if (draw_law == DrawLaw::kSineDrift && drift_period <= 0.0)
        throw std::invalid_argument("drift_period must be > 0");
}

void PulseEnsembleSpec::validate() const {
    if (p < 0.0 || p_prime < 0.0 || p_0 < 0.0)
        throw std::invalid_argument("selection probabilities must be >= 0");
    if (std::abs(p + p_prime + p_0 - 1.0) > 1e-12)
        throw std::invalid_argument("selection probabilities must sum to 1");
    if (mu < 0.0 || mu_prime < 0.0)
        throw std::invalid_argument("intensities must be >= 0");
    if (truncation < 1) throw std::invalid_argument("truncation must be >= 1");
    fluctuation.validate();
}

void AykiSourceParams::validate() const {
    if (d_A < 0.0 || d_A >= 1.0)
        throw std::invalid_argument("d_A must be in [0,1)");
    if (eta_A < 0.0 || eta_A > 1.0)
        throw std::invalid_argument("eta_A must be in [0,1]");
    if (mu_nominal <= 0.0)
        throw std::invalid_argument("mu_nominal must be > 0");
    if (mu_fluct < 0.0 || mu_fluct >= 1.0)
        throw std::invalid_argument("mu_fluct must be in [0,1)");
    if (gamma_click(1, d_A, eta_A) <= 0.0)
        throw DegenerateSource("gamma_1 = 0: need d_A > 0 or eta_A > 0");
}

FluctuationStream::FluctuationStream(FluctuationBounds bounds,
                                     std::uint64_t master_seed)
    : bounds_(bounds), rng_(master_seed, "fluctuation") {
    bounds_.validate();
}

double FluctuationStream::draw_component(double bound, double phase_scale) {
    if (bound == 0.0) return 0.0;
    switch (bounds_.draw_law) {
        case DrawLaw::kUniform:
            return rng_.uniform_symmetric(bound);
        case DrawLaw::kClippedGaussian: {
            std::normal_distribution<double> n(0.0, bound / 2.0);
            double v = n(rng_.engine());
            return std::clamp(v, -bound, bound);
        }
        case DrawLaw::kSineDrift:
            return bound * std::sin(2.0 * std::numbers::pi * phase_scale *
                                    static_cast<double>(pulse_index_) /
                                    bounds_.drift_period);
    }
    return 0.0;
}

FluctuationDraw FluctuationStream::next() {
    FluctuationDraw d;
    d.delta_i = draw_component(bounds_.delta, 1.0);
    // Device components drift at incommensurate phases so they do not lock
    // to the father pulse.
    d.eps_id = draw_component(bounds_.eps_d, 1.3);
    d.eps_is = draw_component(bounds_.eps_s, 1.7);
    ++pulse_index_;
    return d;
}

double gamma_click(int k, double d_A, double eta_A) {
    if (k < 0) throw std::invalid_argument("gamma_click: k < 0");
    return 1.0 - (1.0 - d_A) * std::pow(1.0 - eta_A, k);
}

AykiSplit ayki_split(const AykiSourceParams& params, double mu_i,
                     int truncation, double tail_tol) {
    if (mu_i < 0.0) throw std::invalid_argument("ayki_split: mu_i < 0");
    const double d_A = params.d_A;
    const double eta_A = params.eta_A;

    AykiSplit out;
    out.p_signal = (d_A + mu_i * eta_A) / (1.0 + mu_i * eta_A);
    out.p_decoy = (1.0 - d_A) / (1.0 + mu_i * eta_A);
    if (out.p_signal == 0.0)
        throw DegenerateSource("ayki_split: click probability is zero");

    const FockDistribution joint = pdc_number_dist(mu_i, truncation, 1.0);

    out.decoy.truncation = truncation;
    out.signal.truncation = truncation;
    out.decoy.weights.resize(static_cast<size_t>(truncation) + 1);
    out.signal.weights.resize(static_cast<size_t>(truncation) + 1);

    const double decoy_norm = (1.0 + mu_i * eta_A) / (1.0 - d_A);
    const double signal_norm = (1.0 + mu_i * eta_A) / (d_A + mu_i * eta_A);
    double decoy_sum = 0.0;
    double signal_sum = 0.0;
    for (int k = 0; k <= truncation; ++k) {
        const double g = gamma_click(k, d_A, eta_A);
        const double x = joint.weight(k);
        const double a = decoy_norm * x * (1.0 - g);
        const double ap = signal_norm * x * g;
        out.decoy.weights[static_cast<size_t>(k)] = a;
        out.signal.weights[static_cast<size_t>(k)] = ap;
        decoy_sum += a;
        signal_sum += ap;
    }
    out.decoy.tail_mass = std::max(0.0, 1.0 - decoy_sum);
    out.signal.tail_mass = std::max(0.0, 1.0 - signal_sum);
    if (out.decoy.tail_mass > tail_tol)
        throw TailTooLarge(truncation, out.decoy.tail_mass);
    if (out.signal.tail_mass > tail_tol)
        throw TailTooLarge(truncation, out.signal.tail_mass);
    return out;
}

RealizedIntensities realized_intensities(const PulseEnsembleSpec& spec,
                                         const FluctuationDraw& draw) {
    RealizedIntensities r;
    r.mu_i = spec.mu * (1.0 + draw.delta_i) * (1.0 + draw.eps_id);
    r.mu_i_prime = spec.mu_prime * (1.0 + draw.delta_i) * (1.0 + draw.eps_is);
    return r;
}

}  // namespace dsqkd
