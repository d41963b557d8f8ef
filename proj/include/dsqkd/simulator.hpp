#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dsqkd/channel.hpp"
#include "dsqkd/quadrature.hpp"
#include "dsqkd/source.hpp"

namespace dsqkd {

enum class SourceTag { kDecoy, kSignal, kVacuum };

struct PulseRecord {
    std::uint64_t index;
    SourceTag source;
    int photon_number;
    bool clicked;
    bool bit_error;
    double mu_i;        // would-be decoy intensity at this index
    double mu_i_prime;  // would-be signal intensity at this index
};

// Full ground-truth count bookkeeping from a run. Real-valued so the same
// type serves the exact-expectation engine; Monte-Carlo fills it with
// integers. Photon numbers beyond the cutoff land in the overflow slots so
// the count identities stay exact.
struct Tally {
    double total_pulses = 0.0;  // M
    int truncation = 0;         // J

    double counts_decoy = 0.0;   // N_d
    double counts_signal = 0.0;  // N_s
    double counts_vacuum = 0.0;  // N_0

    std::vector<double> counts_decoy_by_k;   // n_kd, k = 0..J
    std::vector<double> counts_signal_by_k;  // n_ks
    double counts_decoy_overflow = 0.0;
    double counts_signal_overflow = 0.0;

    std::vector<double> emitted_decoy_by_k;   // N_kd
    std::vector<double> emitted_signal_by_k;  // N_ks
    double emitted_decoy_overflow = 0.0;
    double emitted_signal_overflow = 0.0;

    double errors_decoy = 0.0;   // total error counts among decoy counts
    double errors_signal = 0.0;
    double errors_vacuum = 0.0;
    double single_errors_decoy = 0.0;   // errors among single-photon counts
    double single_errors_signal = 0.0;

    void init(int trunc);
};

// The projection of a Tally visible to Alice and Bob: totals and QBERs
// only, never per-photon-number ground truth.
struct ObservedStats {
    double total_pulses = 0.0;
    double counts_decoy = 0.0;
    double counts_signal = 0.0;
    double counts_vacuum = 0.0;
    std::optional<double> qber_decoy;   // empty when no decoy counts
    std::optional<double> qber_signal;
    double p_decoy = 0.0;
    double p_signal = 0.0;
    double p_vacuum = 0.0;
};

ObservedStats observe(const Tally& tally, double p_decoy, double p_signal,
                      double p_vacuum);

struct MonteCarloResult {
    Tally tally;
    std::vector<PulseRecord> records;  // first record_limit pulses
};

MonteCarloResult run_monte_carlo(const PulseEnsembleSpec& spec,
                                 const ChannelParams& channel,
                                 std::uint64_t pulses, std::uint64_t seed,
                                 std::size_t record_limit = 0);

MonteCarloResult run_monte_carlo(const AykiSourceParams& params,
                                 const ChannelParams& channel,
                                 std::uint64_t pulses, std::uint64_t seed,
                                 std::size_t record_limit = 0);

// Exact expected counts over a finite fluctuation quadrature; the
// asymptotic count identities hold with equality on the output.
Tally run_expectation(const PulseEnsembleSpec& spec,
                      const ChannelParams& channel, double pulses,
                      const FluctuationGrid& grid);

// AYKI variant; the grid's delta component is the pump fluctuation, the
// eps components are ignored.
Tally run_expectation(const AykiSourceParams& params,
                      const ChannelParams& channel, double pulses,
                      const FluctuationGrid& grid);

// AYKI decoy/signal selection probabilities averaged over the pump grid
// (they vary with mu_i; the averages are what a long run realizes).
struct AykiSelection {
    double p_decoy;
    double p_signal;
};
AykiSelection ayki_mean_selection(const AykiSourceParams& params,
                                  const FluctuationGrid& grid);

}  // namespace dsqkd
