#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "dsqkd/channel.hpp"
#include "dsqkd/errors.hpp"
#include "dsqkd/estimator.hpp"
#include "dsqkd/quadrature.hpp"
#include "dsqkd/simulator.hpp"

using namespace dsqkd;

namespace {

PulseEnsembleSpec base_spec() {
    PulseEnsembleSpec spec;
    spec.p = 0.25;
    spec.p_prime = 0.70;
    spec.p_0 = 0.05;
    spec.mu = 0.2;
    spec.mu_prime = 0.6;
    spec.truncation = 30;
    return spec;
}

// Brute-force ratio extremes over a dense grid of the fluctuation box,
// corners included. The independent reference for the closed forms.
struct GridExtremes {
    double max_ratio;
    double min_ratio;
};

GridExtremes grid_ratio_extremes(const PulseEnsembleSpec& spec, int k,
                                 int steps) {
    GridExtremes out{0.0, 1e300};
    const FluctuationBounds& b = spec.fluctuation;
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
            for (int l = 0; l <= steps; ++l) {
                FluctuationDraw d;
                d.delta_i = -b.delta + 2.0 * b.delta * i / steps;
                d.eps_id = -b.eps_d + 2.0 * b.eps_d * j / steps;
                d.eps_is = -b.eps_s + 2.0 * b.eps_s * l / steps;
                const RealizedIntensities mu = realized_intensities(spec, d);
                const double ak = std::exp(-mu.mu_i) *
                                  std::pow(mu.mu_i, k) / std::tgamma(k + 1.0);
                const double apk = std::exp(-mu.mu_i_prime) *
                                   std::pow(mu.mu_i_prime, k) /
                                   std::tgamma(k + 1.0);
                const double r = spec.p * ak / (spec.p_prime * apk);
                out.max_ratio = std::max(out.max_ratio, r);
                out.min_ratio = std::min(out.min_ratio, r);
            }
        }
    }
    return out;
}

}  // namespace

TEST_CASE("coherent envelope: closed form at delta=0.06, equal priors") {
    PulseEnsembleSpec spec = base_spec();
    spec.p = 0.475;
    spec.p_prime = 0.475;
    spec.fluctuation.delta = 0.06;
    const RatioEnvelope env = coherent_ratio_envelope(spec, 6);

    // r_max[1] = (mu/mu') exp{(1+delta)(mu' - mu)} with eps = 0.
    const double r1 = (0.2 / 0.6) * std::exp(1.06 * 0.4);
    CHECK(env.at(1) == doctest::Approx(r1).epsilon(1e-14));
    CHECK(env.at(2) ==
          doctest::Approx((0.2 / 0.6) * r1).epsilon(1e-14));
    CHECK(env.at(0) == doctest::Approx(std::exp(1.06 * 0.4)).epsilon(1e-14));
    CHECK(env.r1_min ==
          doctest::Approx((0.2 / 0.6) * std::exp(0.94 * 0.4)).epsilon(1e-14));
    CHECK(env.provenance == EnvelopeProvenance::kCoherentClosedForm);
}

TEST_CASE("coherent envelope: grid search confirms the extremal corners") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> umu(0.05, 0.5);
    std::uniform_real_distribution<double> umup(0.3, 0.9);
    std::uniform_real_distribution<double> ud(0.0, 0.1);
    std::uniform_real_distribution<double> ue(0.0, 0.05);
    int tested = 0;
    while (tested < 40) {
        PulseEnsembleSpec spec = base_spec();
        spec.mu = umu(rng);
        spec.mu_prime = umup(rng);
        spec.fluctuation.delta = ud(rng);
        spec.fluctuation.eps_d = ue(rng);
        spec.fluctuation.eps_s = ue(rng);
        if (spec.mu * (1.0 + spec.fluctuation.eps_d) >=
            spec.mu_prime * (1.0 - spec.fluctuation.eps_s) - 0.05) {
            continue;
        }
        ++tested;
        const RatioEnvelope env = coherent_ratio_envelope(spec, 5);
        for (int k = 0; k <= 5; ++k) {
            const GridExtremes ext = grid_ratio_extremes(spec, k, 8);
            // Closed form must dominate the grid and touch it at a corner.
            CHECK(env.at(k) >= ext.max_ratio * (1.0 - 1e-12));
            CHECK(env.at(k) == doctest::Approx(ext.max_ratio).epsilon(1e-9));
            if (k == 1) {
                CHECK(env.r1_min <= ext.min_ratio * (1.0 + 1e-12));
                CHECK(env.r1_min ==
                      doctest::Approx(ext.min_ratio).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("coherent envelope: intensity ordering is enforced") {
    PulseEnsembleSpec spec = base_spec();
    spec.mu = 0.5;
    spec.mu_prime = 0.6;
    spec.fluctuation.eps_s = 0.3;  // 0.6 * 0.7 = 0.42 < 0.5
    CHECK_THROWS_AS(coherent_ratio_envelope(spec, 4), ConditionViolated);
}

TEST_CASE("normal worst-case envelope dominates the joint-corner form") {
    PulseEnsembleSpec spec = base_spec();
    spec.fluctuation.delta = 0.06;
    spec.fluctuation.eps_d = 0.02;
    spec.fluctuation.eps_s = 0.02;
    const RatioEnvelope eco = coherent_ratio_envelope(spec, 6);
    const RatioEnvelope wc = normal_worstcase_envelope(spec, 6);
    for (int k = 0; k <= 6; ++k) {
        CHECK(wc.at(k) >= eco.at(k) * (1.0 - 1e-12));
    }
    CHECK(wc.r1_min <= eco.r1_min * (1.0 + 1e-12));
    CHECK(wc.provenance == EnvelopeProvenance::kNormalWorstCase);
}

TEST_CASE("stable source: both envelopes reduce to the exact ratios") {
    PulseEnsembleSpec spec = base_spec();
    const RatioEnvelope eco = coherent_ratio_envelope(spec, 6);
    const RatioEnvelope wc = normal_worstcase_envelope(spec, 6);
    for (int k = 0; k <= 6; ++k) {
        const double exact = (spec.p / spec.p_prime) *
                             std::pow(0.2 / 0.6, k) * std::exp(0.4);
        CHECK(eco.at(k) == doctest::Approx(exact).epsilon(1e-12));
        CHECK(wc.at(k) == doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK(eco.r1_min == doctest::Approx(eco.at(1)).epsilon(1e-12));
}

TEST_CASE("check_condition") {
    RatioEnvelope env;
    env.r_max = {2.0, 1.0, 0.5, 0.25, 0.125};
    CHECK(check_condition(env, 4));

    env.r_max = {2.0, 1.0, 0.5, 0.6, 0.1};  // r_3 > r_2
    CHECK_FALSE(check_condition(env, 4));

    env.r_max = {2.0, 0.4, 0.5, 0.25, 0.1};  // r_1 < r_2
    CHECK_FALSE(check_condition(env, 4));
}

TEST_CASE("bound_n1s: hand-computed example") {
    RatioEnvelope env;
    env.r_max = {4.0, 2.0, 0.5};
    env.r1_min = 2.0;
    ObservedStats obs;
    obs.counts_decoy = 100.0;
    obs.counts_signal = 400.0;
    // (N_d - r2 N_s + r2 n0s - n0d) / (r1 - r2)
    // = (100 - 200 + 0.5*40 - 10) / 1.5 = -90 / 1.5 -> clamps to 0.
    ClampedValue v = bound_n1s(obs, env, 10.0, 40.0);
    CHECK(v.value == 0.0);
    CHECK(v.clamped);

    obs.counts_decoy = 300.0;
    // (300 - 200 + 20 - 10) / 1.5 = 73.333...
    v = bound_n1s(obs, env, 10.0, 40.0);
    CHECK(v.value == doctest::Approx(110.0 / 1.5).epsilon(1e-14));
    CHECK_FALSE(v.clamped);
}

TEST_CASE("bound_n1s: degenerate denominator") {
    RatioEnvelope env;
    env.r_max = {1.0, 0.5, 0.5};
    env.r1_min = 0.5;
    ObservedStats obs;
    obs.counts_decoy = 10.0;
    obs.counts_signal = 10.0;
    CHECK_THROWS_AS(bound_n1s(obs, env, 0.0, 0.0), DegenerateDenominator);
}

TEST_CASE("bound soundness against exact expected counts") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> umu(0.05, 0.5);
    std::uniform_real_distribution<double> umup(0.3, 0.9);
    std::uniform_real_distribution<double> ud(0.0, 0.1);
    std::uniform_real_distribution<double> ue(0.0, 0.05);
    std::uniform_real_distribution<double> ukm(0.0, 120.0);

    int tested = 0;
    while (tested < 60) {
        PulseEnsembleSpec spec = base_spec();
        spec.mu = umu(rng);
        spec.mu_prime = umup(rng);
        spec.fluctuation.delta = ud(rng);
        spec.fluctuation.eps_d = ue(rng);
        spec.fluctuation.eps_s = ue(rng);
        if (spec.mu * (1.0 + spec.fluctuation.eps_d) >=
            spec.mu_prime * (1.0 - spec.fluctuation.eps_s) - 0.02) {
            continue;
        }
        ++tested;
        ChannelParams ch = peng50km_like();
        ch.distance_km = ukm(rng);

        const FluctuationGrid grid = make_uniform_grid(spec.fluctuation, 5);
        const Tally t = run_expectation(spec, ch, 1e9, grid);
        const ObservedStats obs = observe(t, spec.p, spec.p_prime, spec.p_0);
        const VacuumBounds vac = bound_vacuum_3intensity(obs, spec);

        // The vacuum bracket must cover the exact counts.
        CHECK(vac.n0d_ub >= t.counts_decoy_by_k[0] * (1.0 - 1e-12));
        CHECK(vac.n0s_lb <= t.counts_signal_by_k[0] * (1.0 + 1e-12));

        std::vector<RatioEnvelope> envelopes;
        envelopes.push_back(coherent_ratio_envelope(spec, spec.truncation));
        try {
            // The independent-extremes envelope can lose the ratio ordering
            // when the common fluctuation closes the intensity gap; the
            // joint-corner envelope never does under the draw filter above.
            envelopes.push_back(
                normal_worstcase_envelope(spec, spec.truncation));
        } catch (const ConditionViolated&) {
        }
        for (const RatioEnvelope& env : envelopes) {
            if (!check_condition(env, spec.truncation)) continue;
            const ClampedValue v =
                bound_n1s(obs, env, vac.n0d_ub, vac.n0s_lb);
            CHECK(v.value <= t.counts_signal_by_k[1] * (1.0 + 1e-12) + 1e-9);
        }
    }
}

TEST_CASE("bound_delta1_decoy normalization") {
    RatioEnvelope env;
    env.r_max = {4.0, 2.0, 0.5};
    env.r1_min = 1.5;
    ObservedStats obs;
    obs.counts_decoy = 200.0;
    obs.counts_signal = 400.0;
    // r1_min * delta1s * N_s / N_d = 1.5 * 0.3 * 2 = 0.9.
    CHECK(bound_delta1_decoy(0.3, env, obs) ==
          doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("bound_e1s sandwich") {
    RatioEnvelope env;
    env.r_max = {4.0, 0.024};
    env.r1_min = 0.02;
    const ErrorBounds b = bound_e1s(0.02, env);
    CHECK(b.lower == doctest::Approx(0.02 * (0.02 / 0.024)).epsilon(1e-14));
    CHECK(b.upper == doctest::Approx(0.024).epsilon(1e-14));

    // Upper clamps to 1 for wildly spread ratios.
    RatioEnvelope wide;
    wide.r_max = {4.0, 100.0};
    wide.r1_min = 0.001;
    CHECK(bound_e1s(0.5, wide).upper == 1.0);
}

TEST_CASE("vacuum bounds: grid search over the intensity box") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> umu(0.05, 0.5);
    std::uniform_real_distribution<double> umup(0.3, 0.9);
    std::uniform_real_distribution<double> ud(0.0, 0.1);
    std::uniform_real_distribution<double> ue(0.0, 0.05);
    for (int trial = 0; trial < 100; ++trial) {
        PulseEnsembleSpec spec = base_spec();
        spec.mu = umu(rng);
        spec.mu_prime = umup(rng);
        spec.fluctuation.delta = ud(rng);
        spec.fluctuation.eps_d = ue(rng);
        spec.fluctuation.eps_s = ue(rng);
        ObservedStats obs;
        obs.counts_vacuum = 1000.0;
        obs.counts_decoy = 1e9;   // keep the clamps inactive
        obs.counts_signal = 1e9;
        const VacuumBounds vac = bound_vacuum_3intensity(obs, spec);

        const FluctuationBounds& b = spec.fluctuation;
        double max_dec = 0.0, min_sig = 1e300;
        for (int i = 0; i <= 6; ++i) {
            for (int j = 0; j <= 6; ++j) {
                FluctuationDraw d;
                d.delta_i = -b.delta + 2.0 * b.delta * i / 6.0;
                d.eps_id = -b.eps_d + 2.0 * b.eps_d * j / 6.0;
                d.eps_is = -b.eps_s + 2.0 * b.eps_s * j / 6.0;
                const RealizedIntensities mu = realized_intensities(spec, d);
                max_dec = std::max(max_dec, std::exp(-mu.mu_i));
                min_sig = std::min(min_sig, std::exp(-mu.mu_i_prime));
            }
        }
        CHECK(vac.n0d_ub == doctest::Approx(spec.p / spec.p_0 * max_dec *
                                            1000.0)
                                .epsilon(1e-9));
        CHECK(vac.n0s_lb == doctest::Approx(spec.p_prime / spec.p_0 *
                                            min_sig * 1000.0)
                                .epsilon(1e-9));
    }
}

TEST_CASE("ayki envelope is independent of pump fluctuation") {
    AykiSourceParams a;
    a.mu_nominal = 1.0;
    a.eta_A = 0.5;
    a.d_A = 1e-3;
    a.mu_fluct = 0.0;
    const RatioEnvelope quiet = ayki_ratio_envelope(a, 8);
    a.mu_fluct = 0.30;
    const RatioEnvelope noisy = ayki_ratio_envelope(a, 8);
    for (int k = 0; k <= 8; ++k) {
        CHECK(quiet.at(k) == noisy.at(k));  // bit-identical
        const double g = gamma_click(k, a.d_A, a.eta_A);
        CHECK(quiet.at(k) == doctest::Approx((1.0 - g) / g).epsilon(1e-14));
    }
    CHECK(quiet.r1_min == noisy.r1_min);
    CHECK(quiet.r1_min == quiet.at(1));
    CHECK(check_condition(quiet, 8));
}

TEST_CASE("ayki_delta1: degenerate for a blind heralding detector") {
    AykiSourceParams a;
    a.eta_A = 0.0;  // gamma_k constant in k -> r_1 = r_2
    a.d_A = 0.1;
    ObservedStats obs;
    obs.counts_decoy = 100.0;
    obs.counts_signal = 100.0;
    CHECK_THROWS_AS(ayki_delta1(obs, 10.0, a), DegenerateDenominator);
}

TEST_CASE("ayki_delta1 lower-bounds the exact fraction under fluctuation") {
    AykiSourceParams a;
    // Low pair rate and a short link: multiphoton yields stay close enough
    // to Y_1 that the count bound lands strictly inside (0, n_1s].
    a.mu_nominal = 0.2;
    a.mu_fluct = 0.20;
    a.eta_A = 0.5;
    a.d_A = 1e-4;
    ChannelParams ch;
    ch.distance_km = 0.0;
    ch.eta_bob = 0.1;
    ch.d_B = 1e-5;

    FluctuationBounds pump;
    pump.delta = a.mu_fluct;
    const Tally t = run_expectation(a, ch, 1e9, make_uniform_grid(pump, 8));
    const FluctuationGrid grid = make_uniform_grid(pump, 8);
    const AykiSelection sel = ayki_mean_selection(a, grid);
    const ObservedStats obs = observe(t, sel.p_decoy, sel.p_signal, 0.0);

    const ClampedValue v = ayki_delta1(obs, t.counts_decoy_by_k[0], a);
    const double exact = t.counts_signal_by_k[1] / t.counts_signal;
    CHECK(v.value <= exact * (1.0 + 1e-12));
    CHECK(v.value > 0.0);
}

TEST_CASE("key_rate") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.11) ==
          doctest::Approx(0.499915958164528).epsilon(1e-12));

    ObservedStats obs;
    obs.total_pulses = 1e6;
    obs.counts_signal = 1e4;
    obs.p_signal = 0.7;
    obs.qber_signal = 0.02;
    BoundReport rep;
    rep.condition_ok = true;  // the rate is zero otherwise
    rep.delta1s_lb = 0.6;
    rep.e1s_ub = 0.03;
    KeyRateParams kp;

    // q Q [ -f H2(E) + delta1 (1 - H2(e1)) ] per signal pulse.
    const double q_gain = 1e4 / (1e6 * 0.7);
    const double expected =
        0.5 * q_gain *
        (-1.16 * binary_entropy(0.02) + 0.6 * (1.0 - binary_entropy(0.03)));
    CHECK(key_rate(obs, rep, kp) == doctest::Approx(expected).epsilon(1e-12));

    // Hopeless error rate clamps to zero.
    rep.e1s_ub = 0.5;
    obs.qber_signal = 0.25;
    CHECK(key_rate(obs, rep, kp) == 0.0);

    // Rate decreases as the single-photon error bound grows.
    obs.qber_signal = 0.02;
    double prev = 1e9;
    for (double e1 = 0.01; e1 <= 0.11; e1 += 0.02) {
        rep.e1s_ub = e1;
        const double r = key_rate(obs, rep, kp);
        CHECK(r <= prev);
        prev = r;
    }
}

TEST_CASE("bound report serialization round trip fields") {
    BoundReport rep;
    rep.n1s_lb = 123.5;
    rep.delta1s_lb = 0.25;
    rep.condition_ok = true;
    const std::string kv = rep.to_kv_text();
    CHECK(kv.find("n1s_lb") != std::string::npos);
    CHECK(kv.find("123.5") != std::string::npos);
    CHECK(kv.find("condition_ok = true") != std::string::npos);

    const std::string header = BoundReport::csv_header();
    const std::string row = rep.to_csv_row();
    const auto commas = [](const std::string& s) {
        size_t n = 0;
        for (char c : s) n += (c == ',');
        return n;
    };
    CHECK(commas(header) == commas(row));
}
