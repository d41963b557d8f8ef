#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dsqkd {

// One pulse of an explicit micro-scale instance. Photon number and click
// are adversary-chosen, not drawn from a channel: the derivation must hold
// for arbitrary click sets.
struct MicroPulse {
    double p_decoy = 0.5;   // p_i
    double p_signal = 0.5;  // p'_i
    std::vector<double> a_decoy;   // a_ki, k = 0..J, sums to 1
    std::vector<double> a_signal;  // a'_ki
    int photon_number = 0;
    bool clicked = false;
    double single_photon_error = 0.0;  // e_1i
};

struct MicroInstance {
    std::vector<MicroPulse> pulses;
    int truncation = 0;  // J <= 6

    void validate() const;
    // p_j a_kj / (p'_j a'_kj) for pulse j.
    double ratio(int k, size_t j) const;
    // Click-set ratio extremes; returns false when c_k is empty.
    bool max_ratio_over_ck(int k, double* out) const;
};

// Exact expected attributions over the click sets.
struct MicroCounts {
    std::vector<double> n_kd;  // k = 0..J
    std::vector<double> n_ks;
    double N_d = 0.0;
    double N_s = 0.0;
    std::vector<size_t> click_set_sizes;  // |c_k|
};

MicroCounts exact_counts(const MicroInstance& instance);

struct SlackTerms {
    double xi1 = 0.0;
    double xi2 = 0.0;
    double xi3 = 0.0;
    double lambda = 0.0;        // multiphoton decoy attribution
    double lambda_prime = 0.0;  // multiphoton signal attribution
    double lambda_tilde = 0.0;  // its click-set lower bound
    double n1s_tilde = 0.0;
    double r1_max = 0.0;  // max over c_1
    double r2_max = 0.0;  // max over c_2
};

// Throws ConditionViolated unless the click-set ratio ordering holds.
SlackTerms slack_terms(const MicroInstance& instance);

struct AuditStep {
    std::string name;
    bool pass;
    double residual;
};

struct AuditRecord {
    std::vector<AuditStep> steps;
    bool all_pass = true;

    std::string pretty() const;
};

// Certifies every intermediate inequality and identity of the
// single-photon-count derivation on the instance, as exact arithmetic.
AuditRecord verify_chain(const MicroInstance& instance);

// Exact e_1d, e_1s from the per-pulse error probabilities; true iff the
// ratio sandwich min/max e1d <= e1s <= max/min e1d holds.
bool error_bound_check(const MicroInstance& instance);

// Hwang's per-photon-number yield-equality check s_k = s'_k; returns true
// iff it holds for every k within tol. The derivation above does not
// require it.
bool hwang_proposition_holds(const MicroInstance& instance,
                             double tol = 1e-9);

// Random valid instance (satisfies the ratio-ordering condition) drawn
// from fluctuating coherent-like pulse families.
MicroInstance random_valid_instance(std::uint64_t seed);

// The worked 10-pulse illustration: photon numbers
// 0,0,1,2,0,1,3,2,1,0 with clicks at pulses 2,3,5,6,9,10 (1-indexed).
MicroInstance ten_pulse_instance();

// Correlated stress instance: clicks land only on the extreme-ratio
// pulses.
MicroInstance adversarial_instance(std::uint64_t seed);

// Instance violating Hwang's proposition while the chain still passes.
MicroInstance hwang_violation_instance();

}  // namespace dsqkd
