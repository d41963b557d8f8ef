#pragma once

#include <string>
#include <vector>

#include "dsqkd/simulator.hpp"
#include "dsqkd/source.hpp"

namespace dsqkd {

enum class EnvelopeProvenance {
    kCoherentClosedForm,
    kAykiConstant,
    kNormalWorstCase,
    kUserSupplied,
};

// Worst-case ratio envelope over the click set: r_max[k] upper-bounds
// p_j a_kj / (p'_j a'_kj) over all pulses, r1_min lower-bounds it at k = 1.
struct RatioEnvelope {
    std::vector<double> r_max;  // index k = 0..K
    double r1_min = 0.0;
    EnvelopeProvenance provenance = EnvelopeProvenance::kUserSupplied;

    double at(int k) const { return r_max[static_cast<size_t>(k)]; }
    int max_k() const { return static_cast<int>(r_max.size()) - 1; }
};

// Every bound plus the intermediate terms needed to audit it.
struct BoundReport {
    double n1s_lb = 0.0;        // lower bound on single-photon signal counts
    double delta1s_lb = 0.0;    // lower bound on n_1s / N_s
    double delta1d_lb = 0.0;    // decoy-side fraction, count-normalized
    double delta1d_lb_raw = 0.0;  // r1_min * delta1s_lb, ratio form
    double e1s_lb = 0.0;
    double e1s_ub = 0.0;
    double e1d = 0.0;
    double n0d_ub = 0.0;
    double n0s_lb = 0.0;
    bool condition_ok = false;
    bool clamped = false;  // any bound hit its physical range
    // Audit fields.
    double r1_max = 0.0;
    double r2_max = 0.0;
    double r1_min = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;

    std::string to_kv_text() const;
    std::string to_csv_row() const;
    static std::string csv_header();
};

// Closed-form economic envelope for the fluctuating coherent source:
// r_max[k] = (p/p') (mu(1+eps_d) / mu'(1-eps_s))^k
//            exp{(1+delta)[mu'(1-eps_s) - mu(1+eps_d)]}   for k >= 1,
// with the k = 0 entry and r1_min taken at the opposite corners of the
// fluctuation box. Throws ConditionViolated unless
// mu(1+eps_d) < mu'(1-eps_s).
RatioEnvelope coherent_ratio_envelope(const PulseEnsembleSpec& spec, int K);

// Constant envelope (1-gamma_k)/gamma_k of the heralded source; independent
// of pump intensity, so fluctuation never enters.
RatioEnvelope ayki_ratio_envelope(const AykiSourceParams& params, int K);

// Baseline worst case with max and min taken independently:
// r_max[k] = p max_box a_k / (p' min_box a'_k). Always >= the economic
// envelope entrywise.
RatioEnvelope normal_worstcase_envelope(const PulseEnsembleSpec& spec, int K);

// True iff r_max is nonincreasing from k = 1 and r_max[k] <= r_max[2] for
// k > 2.
bool check_condition(const RatioEnvelope& env, int K);

struct ClampedValue {
    double value;
    bool clamped;
};

// Lower bound on the single-photon signal counts:
// (N_d - r2 N_s + r2 n0s_lb - n0d_ub) / (r1 - r2), clamped to [0, N_s].
ClampedValue bound_n1s(const ObservedStats& obs, const RatioEnvelope& env,
                       double n0d_ub, double n0s_lb);

// Decoy-side single-photon fraction from the signal-side one,
// count-normalized: r1_min * delta1s_lb * N_s / N_d.
double bound_delta1_decoy(double delta1s_lb, const RatioEnvelope& env,
                          const ObservedStats& obs);

struct ErrorBounds {
    double lower;
    double upper;
};

// (r1_min/r1_max) e1d <= e_1s <= (r1_max/r1_min) e1d, upper clamped to 1.
ErrorBounds bound_e1s(double e1d, const RatioEnvelope& env);

struct VacuumBounds {
    double n0d_ub;
    double n0s_lb;
    bool clamped;
};

// 3-intensity vacuum-count bracket from the observed vacuum-source clicks:
// n0d <= (p/p_0) e^{-min mu_i} N_0, n0s >= (p'/p_0) e^{-max mu'_i} N_0.
VacuumBounds bound_vacuum_3intensity(const ObservedStats& obs,
                                     const PulseEnsembleSpec& spec);

// Passive-protocol closed form for the signal-side single-photon fraction;
// depends only on (N_d, N_s, n_0d, gamma_1, gamma_2, d_A), never on the
// pump fluctuation. n0d_ub is the caller's worst-case vacuum-count
// estimate.
ClampedValue ayki_delta1(const ObservedStats& obs, double n0d_ub,
                         const AykiSourceParams& params);

struct KeyRateParams {
    double sifting = 0.5;          // basis-sifting factor q
    double ec_efficiency = 1.16;   // error-correction inefficiency f
};

// GLLP-style rate per pulse:
// q Q [ -f H2(E) + delta1s_lb (1 - H2(e1s_ub)) ], clamped to >= 0,
// with Q and E the signal-source gain and QBER.
double key_rate(const ObservedStats& obs, const BoundReport& report,
                const KeyRateParams& params);

double binary_entropy(double x);

}  // namespace dsqkd
