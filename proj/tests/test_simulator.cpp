#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dsqkd/channel.hpp"
#include "dsqkd/simulator.hpp"

using namespace dsqkd;

namespace {

PulseEnsembleSpec three_intensity_spec() {
    PulseEnsembleSpec spec;
    spec.p = 0.25;
    spec.p_prime = 0.70;
    spec.p_0 = 0.05;
    spec.mu = 0.2;
    spec.mu_prime = 0.6;
    spec.truncation = 30;
    return spec;
}

double tally_sum_decoy(const Tally& t) {
    double s = t.counts_decoy_overflow;
    for (double v : t.counts_decoy_by_k) s += v;
    return s;
}

double tally_sum_signal(const Tally& t) {
    double s = t.counts_signal_overflow;
    for (double v : t.counts_signal_by_k) s += v;
    return s;
}

}  // namespace

TEST_CASE("monte carlo: vacuum-only source through dark-free detector") {
    PulseEnsembleSpec spec = three_intensity_spec();
    spec.p = 0.0;
    spec.p_prime = 0.0;
    spec.p_0 = 1.0;
    ChannelParams ch = peng50km_like();
    ch.d_B = 0.0;
    const Tally t = run_monte_carlo(spec, ch, 10000, 1).tally;
    CHECK(t.counts_vacuum == 0.0);
    CHECK(t.counts_decoy == 0.0);
    CHECK(t.counts_signal == 0.0);
    CHECK(tally_sum_decoy(t) == 0.0);
    CHECK(tally_sum_signal(t) == 0.0);
}

TEST_CASE("monte carlo: signal click rate at unit transmittance") {
    PulseEnsembleSpec spec = three_intensity_spec();
    ChannelParams ch;
    ch.distance_km = 0.0;
    ch.eta_bob = 1.0;
    ch.d_B = 0.0;
    const std::uint64_t m = 1000000;
    const Tally t = run_monte_carlo(spec, ch, m, 3).tally;
    double emitted_signal = t.emitted_signal_overflow;
    for (double v : t.emitted_signal_by_k) emitted_signal += v;
    // Every non-vacuum photon clicks: click fraction is 1 - e^{-mu'}.
    const double q = 1.0 - std::exp(-0.6);
    const double sigma = std::sqrt(q * (1.0 - q) * emitted_signal);
    CHECK(std::abs(t.counts_signal - q * emitted_signal) <= 5.0 * sigma);
}

TEST_CASE("monte carlo: determinism and count identities") {
    PulseEnsembleSpec spec = three_intensity_spec();
    spec.fluctuation.delta = 0.05;
    spec.fluctuation.eps_d = 0.01;
    spec.fluctuation.eps_s = 0.01;
    const ChannelParams ch = peng50km_like();

    const Tally a = run_monte_carlo(spec, ch, 200000, 77).tally;
    const Tally b = run_monte_carlo(spec, ch, 200000, 77).tally;
    CHECK(a.counts_decoy == b.counts_decoy);
    CHECK(a.counts_signal == b.counts_signal);
    CHECK(a.counts_vacuum == b.counts_vacuum);
    CHECK(a.errors_signal == b.errors_signal);
    for (size_t k = 0; k < a.counts_decoy_by_k.size(); ++k) {
        CHECK(a.counts_decoy_by_k[k] == b.counts_decoy_by_k[k]);
        CHECK(a.counts_signal_by_k[k] == b.counts_signal_by_k[k]);
    }

    // Exact integer identities N_d = sum_k n_kd, N_s = sum_k n_ks.
    CHECK(a.counts_decoy == tally_sum_decoy(a));
    CHECK(a.counts_signal == tally_sum_signal(a));
}

TEST_CASE("expectation: closed-form single-photon signal counts") {
    PulseEnsembleSpec spec = three_intensity_spec();
    const ChannelParams ch = peng50km_like();
    const FluctuationGrid grid = make_uniform_grid(spec.fluctuation, 4);
    REQUIRE(grid.size() == 1);  // zero bounds collapse the grid

    const double m = 1e6;
    const Tally t = run_expectation(spec, ch, m, grid);
    const double y1 = yield_k(1, ch);
    const double expected = m * 0.70 * std::exp(-0.6) * 0.6 * y1;
    CHECK(t.counts_signal_by_k[1] ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(t.counts_decoy == doctest::Approx(tally_sum_decoy(t)).epsilon(1e-12));
}

TEST_CASE("expectation: one-point grid equals the zero-fluctuation case") {
    PulseEnsembleSpec fluct = three_intensity_spec();
    fluct.fluctuation.delta = 0.06;
    PulseEnsembleSpec stable = three_intensity_spec();
    const ChannelParams ch = peng50km_like();

    FluctuationGrid one;
    one.nodes = {{0.0, 0.0, 0.0}};
    one.weights = {1.0};
    const Tally a = run_expectation(fluct, ch, 1e6, one);
    const Tally b = run_expectation(
        stable, ch, 1e6, make_uniform_grid(stable.fluctuation, 4));
    CHECK(a.counts_signal == b.counts_signal);
    CHECK(a.counts_decoy == b.counts_decoy);
    CHECK(a.counts_signal_by_k[1] == b.counts_signal_by_k[1]);
}

TEST_CASE("expectation: per-photon decoy share matches the grid average") {
    PulseEnsembleSpec spec = three_intensity_spec();
    spec.fluctuation.delta = 0.06;
    spec.fluctuation.eps_d = 0.02;
    spec.fluctuation.eps_s = 0.02;
    const ChannelParams ch = peng50km_like();
    const FluctuationGrid grid = make_uniform_grid(spec.fluctuation, 5);
    const Tally t = run_expectation(spec, ch, 1e6, grid);

    for (int k = 0; k <= 4; ++k) {
        double num = 0.0, den = 0.0;
        for (size_t g = 0; g < grid.size(); ++g) {
            const RealizedIntensities mu =
                realized_intensities(spec, grid.nodes[g]);
            const double ak = coherent_fock(mu.mu_i, 30, 1.0).weight(k);
            const double apk =
                coherent_fock(mu.mu_i_prime, 30, 1.0).weight(k);
            num += grid.weights[g] * spec.p * ak;
            den += grid.weights[g] * (spec.p * ak + spec.p_prime * apk);
        }
        const double share =
            t.counts_decoy_by_k[static_cast<size_t>(k)] /
            (t.counts_decoy_by_k[static_cast<size_t>(k)] +
             t.counts_signal_by_k[static_cast<size_t>(k)]);
        CHECK(share == doctest::Approx(num / den).epsilon(1e-10));
    }
}

TEST_CASE("monte carlo converges to the expectation engine") {
    PulseEnsembleSpec spec = three_intensity_spec();
    spec.fluctuation.delta = 0.03;
    const ChannelParams ch = peng50km_like();
    const Tally exact = run_expectation(
        spec, ch, 1.0, make_uniform_grid(spec.fluctuation, 8));
    const double rate = exact.counts_signal;  // per pulse

    double err_small = 0.0, err_large = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Tally small = run_monte_carlo(spec, ch, 10000, seed).tally;
        const Tally large = run_monte_carlo(spec, ch, 1000000, seed).tally;
        err_small += std::abs(small.counts_signal / 10000.0 - rate);
        err_large += std::abs(large.counts_signal / 1000000.0 - rate);
    }
    CHECK(err_large < err_small);
}

TEST_CASE("observe projects and guards zero clicks") {
    PulseEnsembleSpec spec = three_intensity_spec();
    const Tally t = run_monte_carlo(spec, peng50km_like(), 100000, 5).tally;
    const ObservedStats obs = observe(t, spec.p, spec.p_prime, spec.p_0);
    CHECK(obs.counts_decoy == t.counts_decoy);
    CHECK(obs.counts_signal == t.counts_signal);
    CHECK(obs.qber_signal.has_value());

    Tally empty;
    empty.init(4);
    empty.total_pulses = 10;
    const ObservedStats none = observe(empty, 0.5, 0.5, 0.0);
    CHECK_FALSE(none.qber_decoy.has_value());
    CHECK_FALSE(none.qber_signal.has_value());
}

TEST_CASE("ayki: monte carlo matches expectation at 20% pump fluctuation") {
    AykiSourceParams params;
    params.mu_nominal = 1.0;
    params.mu_fluct = 0.20;
    params.eta_A = 0.5;
    params.d_A = 1e-3;
    ChannelParams ch;
    ch.distance_km = 0.0;
    ch.eta_bob = 0.2;
    ch.d_B = 1e-5;

    FluctuationBounds pump;
    pump.delta = params.mu_fluct;
    const double m = 1e6;
    const Tally exact =
        run_expectation(params, ch, m, make_uniform_grid(pump, 8));
    const Tally mc = run_monte_carlo(params, ch, 1000000, 21).tally;

    auto within5 = [m](double observed, double expected) {
        const double q = expected / m;
        const double sigma = std::sqrt(m * q * (1.0 - q));
        return std::abs(observed - expected) <= 5.0 * sigma + 1.0;
    };
    CHECK(within5(mc.counts_decoy, exact.counts_decoy));
    CHECK(within5(mc.counts_signal, exact.counts_signal));
    CHECK(within5(mc.counts_signal_by_k[1], exact.counts_signal_by_k[1]));
    CHECK(within5(mc.counts_decoy_by_k[0], exact.counts_decoy_by_k[0]));
}
