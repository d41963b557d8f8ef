#include "dsqkd/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "dsqkd/errors.hpp"

namespace dsqkd {

namespace {

constexpr int kAykiTruncation = 60;

// Click/error probabilities cached per photon number.
class ChannelTable {
  public:
    explicit ChannelTable(const ChannelParams& params) : params_(params) {
        params_.validate();
    }

    double yield(int k) {
        grow(k);
        return yields_[static_cast<size_t>(k)];
    }
    double error(int k) {
        grow(k);
        return errors_[static_cast<size_t>(k)];
    }

  private:
    void grow(int k) {
        while (static_cast<int>(yields_.size()) <= k) {
            int kk = static_cast<int>(yields_.size());
            yields_.push_back(yield_k(kk, params_));
            errors_.push_back(error_prob_k(kk, params_));
        }
    }
    ChannelParams params_;
    std::vector<double> yields_;
    std::vector<double> errors_;
};

void record_click(Tally& t, SourceTag tag, int k, bool error) {
    const bool in_range = k <= t.truncation;
    switch (tag) {
        case SourceTag::kDecoy:
            t.counts_decoy += 1;
            if (in_range)
                t.counts_decoy_by_k[static_cast<size_t>(k)] += 1;
            else
                t.counts_decoy_overflow += 1;
            if (error) {
                t.errors_decoy += 1;
                if (k == 1) t.single_errors_decoy += 1;
            }
            break;
        case SourceTag::kSignal:
            t.counts_signal += 1;
            if (in_range)
                t.counts_signal_by_k[static_cast<size_t>(k)] += 1;
            else
                t.counts_signal_overflow += 1;
            if (error) {
                t.errors_signal += 1;
                if (k == 1) t.single_errors_signal += 1;
            }
            break;
        case SourceTag::kVacuum:
            t.counts_vacuum += 1;
            if (error) t.errors_vacuum += 1;
            break;
    }
}

void record_emitted(Tally& t, SourceTag tag, int k) {
    const bool in_range = k <= t.truncation;
    if (tag == SourceTag::kDecoy) {
        if (in_range)
            t.emitted_decoy_by_k[static_cast<size_t>(k)] += 1;
        else
            t.emitted_decoy_overflow += 1;
    } else if (tag == SourceTag::kSignal) {
        if (in_range)
            t.emitted_signal_by_k[static_cast<size_t>(k)] += 1;
        else
            t.emitted_signal_overflow += 1;
    }
}

}  // namespace

void Tally::init(int trunc) {
    truncation = trunc;
    counts_decoy_by_k.assign(static_cast<size_t>(trunc) + 1, 0.0);
    counts_signal_by_k.assign(static_cast<size_t>(trunc) + 1, 0.0);
    emitted_decoy_by_k.assign(static_cast<size_t>(trunc) + 1, 0.0);
    emitted_signal_by_k.assign(static_cast<size_t>(trunc) + 1, 0.0);
}

ObservedStats observe(const Tally& tally, double p_decoy, double p_signal,
                      double p_vacuum) {
    ObservedStats o;
    o.total_pulses = tally.total_pulses;
    o.counts_decoy = tally.counts_decoy;
    o.counts_signal = tally.counts_signal;
    o.counts_vacuum = tally.counts_vacuum;
    if (tally.counts_decoy > 0.0)
        o.qber_decoy = tally.errors_decoy / tally.counts_decoy;
    if (tally.counts_signal > 0.0)
        o.qber_signal = tally.errors_signal / tally.counts_signal;
    o.p_decoy = p_decoy;
    o.p_signal = p_signal;
    o.p_vacuum = p_vacuum;
    return o;
}

MonteCarloResult run_monte_carlo(const PulseEnsembleSpec& spec,
                                 const ChannelParams& channel,
                                 std::uint64_t pulses, std::uint64_t seed,
                                 std::size_t record_limit) {
    spec.validate();
    if (pulses < 1) throw std::invalid_argument("run_monte_carlo: M < 1");

    ChannelTable table(channel);
    FluctuationStream fluct(spec.fluctuation, seed);
    RngStream src_rng(seed, "source-choice");
    RngStream photon_rng(seed, "photon-number");
    RngStream click_rng(seed, "click");
    RngStream error_rng(seed, "error");

    MonteCarloResult out;
    out.tally.init(spec.truncation);
    out.tally.total_pulses = static_cast<double>(pulses);
    out.records.reserve(std::min<std::size_t>(record_limit, 1 << 20));

    for (std::uint64_t i = 0; i < pulses; ++i) {
        const FluctuationDraw draw = fluct.next();
        const RealizedIntensities mu = realized_intensities(spec, draw);

        const double u = src_rng.uniform01();
        SourceTag tag;
        int k = 0;
        if (u < spec.p) {
            tag = SourceTag::kDecoy;
            k = std::poisson_distribution<int>(mu.mu_i)(photon_rng.engine());
        } else if (u < spec.p + spec.p_prime) {
            tag = SourceTag::kSignal;
            k = std::poisson_distribution<int>(mu.mu_i_prime)(
                photon_rng.engine());
        } else {
            tag = SourceTag::kVacuum;
        }
        record_emitted(out.tally, tag, k);

        const bool clicked = click_rng.uniform01() < table.yield(k);
        const bool error = clicked && error_rng.uniform01() < table.error(k);
        if (clicked) record_click(out.tally, tag, k, error);

        if (out.records.size() < record_limit)
            out.records.push_back(
                {i, tag, k, clicked, error, mu.mu_i, mu.mu_i_prime});
    }
    return out;
}

MonteCarloResult run_monte_carlo(const AykiSourceParams& params,
                                 const ChannelParams& channel,
                                 std::uint64_t pulses, std::uint64_t seed,
                                 std::size_t record_limit) {
    params.validate();
    if (pulses < 1) throw std::invalid_argument("run_monte_carlo: M < 1");

    ChannelTable table(channel);
    FluctuationBounds pump;
    pump.delta = params.mu_fluct;
    pump.draw_law = params.draw_law;
    FluctuationStream fluct(pump, seed);
    RngStream photon_rng(seed, "photon-number");
    RngStream herald_rng(seed, "source-choice");
    RngStream click_rng(seed, "click");
    RngStream error_rng(seed, "error");

    MonteCarloResult out;
    out.tally.init(kAykiTruncation);
    out.tally.total_pulses = static_cast<double>(pulses);

    for (std::uint64_t i = 0; i < pulses; ++i) {
        const double mu_i =
            params.mu_nominal * (1.0 + fluct.next().delta_i);
        // Joint pair number: X_k = mu^k (1+mu)^{-(k+1)} is geometric with
        // success probability 1/(1+mu).
        const int k = std::geometric_distribution<int>(1.0 / (1.0 + mu_i))(
            photon_rng.engine());
        // Alice's detector clicks with gamma_k; click tags signal.
        const double g = gamma_click(k, params.d_A, params.eta_A);
        const SourceTag tag = herald_rng.uniform01() < g ? SourceTag::kSignal
                                                         : SourceTag::kDecoy;
        record_emitted(out.tally, tag, k);

        const bool clicked = click_rng.uniform01() < table.yield(k);
        const bool error = clicked && error_rng.uniform01() < table.error(k);
        if (clicked) record_click(out.tally, tag, k, error);

        if (out.records.size() < record_limit)
            out.records.push_back({i, tag, k, clicked, error, mu_i, mu_i});
    }
    return out;
}

Tally run_expectation(const PulseEnsembleSpec& spec,
                      const ChannelParams& channel, double pulses,
                      const FluctuationGrid& grid) {
    spec.validate();
    channel.validate();
    grid.validate();
    if (pulses <= 0.0) throw std::invalid_argument("run_expectation: M <= 0");

    ChannelTable table(channel);
    const int trunc = spec.truncation;

    Tally t;
    t.init(trunc);
    t.total_pulses = pulses;

    for (size_t g = 0; g < grid.size(); ++g) {
        const double w = grid.weights[g] * pulses;
        const RealizedIntensities mu =
            realized_intensities(spec, grid.nodes[g]);
        const FockDistribution decoy = coherent_fock(mu.mu_i, trunc, 1.0);
        const FockDistribution signal =
            coherent_fock(mu.mu_i_prime, trunc, 1.0);

        for (int k = 0; k <= trunc; ++k) {
            const double yk = table.yield(k);
            const double ek = table.error(k);
            const double ed = w * spec.p * decoy.weight(k);
            const double es = w * spec.p_prime * signal.weight(k);
            t.emitted_decoy_by_k[static_cast<size_t>(k)] += ed;
            t.emitted_signal_by_k[static_cast<size_t>(k)] += es;
            t.counts_decoy_by_k[static_cast<size_t>(k)] += ed * yk;
            t.counts_signal_by_k[static_cast<size_t>(k)] += es * yk;
            t.errors_decoy += ed * yk * ek;
            t.errors_signal += es * yk * ek;
            if (k == 1) {
                t.single_errors_decoy += ed * yk * ek;
                t.single_errors_signal += es * yk * ek;
            }
        }
        // Truncation tails, counted as always-clicking worst case.
        t.emitted_decoy_overflow += w * spec.p * decoy.tail_mass;
        t.emitted_signal_overflow += w * spec.p_prime * signal.tail_mass;
        t.counts_decoy_overflow += w * spec.p * decoy.tail_mass;
        t.counts_signal_overflow += w * spec.p_prime * signal.tail_mass;
    }

    for (int k = 0; k <= trunc; ++k) {
        t.counts_decoy += t.counts_decoy_by_k[static_cast<size_t>(k)];
        t.counts_signal += t.counts_signal_by_k[static_cast<size_t>(k)];
    }
    t.counts_decoy += t.counts_decoy_overflow;
    t.counts_signal += t.counts_signal_overflow;

    t.counts_vacuum = pulses * spec.p_0 * table.yield(0);
    t.errors_vacuum = t.counts_vacuum * table.error(0);
    return t;
}

Tally run_expectation(const AykiSourceParams& params,
                      const ChannelParams& channel, double pulses,
                      const FluctuationGrid& grid) {
    params.validate();
    channel.validate();
    grid.validate();
    if (pulses <= 0.0) throw std::invalid_argument("run_expectation: M <= 0");

    ChannelTable table(channel);
    const int trunc = kAykiTruncation;

    Tally t;
    t.init(trunc);
    t.total_pulses = pulses;

    for (size_t g = 0; g < grid.size(); ++g) {
        const double w = grid.weights[g] * pulses;
        const double mu_i =
            params.mu_nominal * (1.0 + grid.nodes[g].delta_i);
        const AykiSplit split = ayki_split(params, mu_i, trunc, 1.0);

        for (int k = 0; k <= trunc; ++k) {
            const double yk = table.yield(k);
            const double ek = table.error(k);
            const double ed = w * split.p_decoy * split.decoy.weight(k);
            const double es = w * split.p_signal * split.signal.weight(k);
            t.emitted_decoy_by_k[static_cast<size_t>(k)] += ed;
            t.emitted_signal_by_k[static_cast<size_t>(k)] += es;
            t.counts_decoy_by_k[static_cast<size_t>(k)] += ed * yk;
            t.counts_signal_by_k[static_cast<size_t>(k)] += es * yk;
            t.errors_decoy += ed * yk * ek;
            t.errors_signal += es * yk * ek;
            if (k == 1) {
                t.single_errors_decoy += ed * yk * ek;
                t.single_errors_signal += es * yk * ek;
            }
        }
        t.emitted_decoy_overflow += w * split.p_decoy * split.decoy.tail_mass;
        t.emitted_signal_overflow +=
            w * split.p_signal * split.signal.tail_mass;
        t.counts_decoy_overflow += w * split.p_decoy * split.decoy.tail_mass;
        t.counts_signal_overflow +=
            w * split.p_signal * split.signal.tail_mass;
    }

    for (int k = 0; k <= trunc; ++k) {
        t.counts_decoy += t.counts_decoy_by_k[static_cast<size_t>(k)];
        t.counts_signal += t.counts_signal_by_k[static_cast<size_t>(k)];
    }
    t.counts_decoy += t.counts_decoy_overflow;
    t.counts_signal += t.counts_signal_overflow;
    return t;
}

AykiSelection ayki_mean_selection(const AykiSourceParams& params,
                                  const FluctuationGrid& grid) {
    params.validate();
    grid.validate();
    AykiSelection sel{0.0, 0.0};
    for (size_t g = 0; g < grid.size(); ++g) {
        const double mu_i =
            params.mu_nominal * (1.0 + grid.nodes[g].delta_i);
        sel.p_decoy += grid.weights[g] * (1.0 - params.d_A) /
                       (1.0 + mu_i * params.eta_A);
        sel.p_signal += grid.weights[g] * (params.d_A + mu_i * params.eta_A) /
                        (1.0 + mu_i * params.eta_A);
    }
    return sel;
}

}  // namespace dsqkd
