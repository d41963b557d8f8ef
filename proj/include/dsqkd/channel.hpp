#pragma once

namespace dsqkd {

// Honest lossy channel plus threshold detector at Bob's side. The estimator
// never reads these parameters; they exist only to generate ground truth.
struct ChannelParams {
    double distance_km = 50.0;
    double alpha_db_per_km = 0.2;
    double eta_bob = 0.045;   // Bob-side detection efficiency
    double d_B = 1.0e-5;      // dark count probability per pulse
    double e_det = 0.015;     // misalignment error probability
    double e_0 = 0.5;         // dark-count error rate

    void validate() const;
};

// Representative 50 km parameter set used as the simulation default; the
// numbers are typical for that distance, not a reproduction of any
// published dataset.
ChannelParams peng50km_like();

// Overall single-photon transmittance eta = eta_bob * 10^{-alpha d / 10}.
double transmittance(const ChannelParams& params);

// Y_k = 1 - (1 - d_B)(1 - eta)^k.
double yield_k(int k, const ChannelParams& params);

// Conditional bit-error probability given a click on a k-photon pulse:
// [e_0 d_B + e_det (Y_k - d_B)] / Y_k.
double error_prob_k(int k, const ChannelParams& params);

}  // namespace dsqkd
