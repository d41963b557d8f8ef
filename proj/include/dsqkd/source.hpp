#pragma once

#include <cstdint>

#include "dsqkd/fock.hpp"
#include "dsqkd/rng.hpp"

namespace dsqkd {

// Per-pulse draw laws for the bounded fluctuation components. The bounds
// are hard (support bounds), whatever the law; correlated patterns such as
// a slow drift must be covered because pulses need not be independent.
enum class DrawLaw {
    kUniform,          // independent uniform on [-bound, bound]
    kClippedGaussian,  // N(0, bound/2) clipped to [-bound, bound]
    kSineDrift,        // bound * sin(2 pi i / period), deterministic in i
};

struct FluctuationBounds {
    double delta = 0.0;  // father-pulse relative bound
    double eps_d = 0.0;  // decoy attenuator relative bound
    double eps_s = 0.0;  // signal attenuator relative bound
    DrawLaw draw_law = DrawLaw::kUniform;
    double drift_period = 1000.0;  // pulses per cycle for kSineDrift

    void validate() const;
};

struct FluctuationDraw {
    double delta_i = 0.0;
    double eps_id = 0.0;
    double eps_is = 0.0;
};

// Stateful per-run draw source; owns its RNG sub-stream and pulse counter.
class FluctuationStream {
  public:
    FluctuationStream(FluctuationBounds bounds, std::uint64_t master_seed);

    FluctuationDraw next();

  private:
    double draw_component(double bound, double phase_scale);

    FluctuationBounds bounds_;
    RngStream rng_;
    std::uint64_t pulse_index_ = 0;
};

// Sources of a 2- or 3-intensity coherent-state protocol: selection
// probabilities, nominal intensities, and fluctuation bounds.
struct PulseEnsembleSpec {
    double p = 0.0;        // decoy selection probability
    double p_prime = 0.0;  // signal selection probability
    double p_0 = 0.0;      // vacuum selection probability (0 for 2-intensity)
    double mu = 0.0;       // nominal decoy intensity
    double mu_prime = 0.0; // nominal signal intensity
    FluctuationBounds fluctuation;
    int truncation = 30;

    void validate() const;
};

// Heralded (PDC) source of the passive 2-intensity protocol.
struct AykiSourceParams {
    double mu_nominal = 1.0;
    double mu_fluct = 0.20;  // relative pump-intensity fluctuation bound
    double eta_A = 0.5;      // Alice detector efficiency
    double d_A = 0.0;        // Alice dark count rate
    DrawLaw draw_law = DrawLaw::kUniform;

    void validate() const;
};

// gamma_k = 1 - (1 - d_A)(1 - eta_A)^k: probability Alice's detector clicks
// given k photons in her mode.
double gamma_click(int k, double d_A, double eta_A);

struct AykiSplit {
    double p_decoy;           // no-click probability p_i
    double p_signal;          // click probability p'_i
    FockDistribution decoy;   // a_ki, no-click branch
    FockDistribution signal;  // a'_ki, click branch
};

// Conditional source decomposition of the heralded state at realized pump
// intensity mu_i. The click branch carries the gamma_k weights and is the
// signal source; the no-click branch is the decoy source.
AykiSplit ayki_split(const AykiSourceParams& params, double mu_i,
                     int truncation, double tail_tol = kDefaultTailTolerance);

// Realized would-be intensities of the i-th pulse:
// mu_i = mu (1+delta_i)(1+eps_id), mu'_i = mu' (1+delta_i)(1+eps_is).
struct RealizedIntensities {
    double mu_i;
    double mu_i_prime;
};

RealizedIntensities realized_intensities(const PulseEnsembleSpec& spec,
                                         const FluctuationDraw& draw);

}  // namespace dsqkd
