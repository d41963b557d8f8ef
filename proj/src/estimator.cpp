#include "dsqkd/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "dsqkd/errors.hpp"

namespace dsqkd {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// e^{-m} m^k / k!
double poisson_weight(int k, double m) {
    if (m == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(-m + k * std::log(m) - std::lgamma(k + 1.0));
}

double poisson_max_on(int k, double lo, double hi) {
    double best = std::max(poisson_weight(k, lo), poisson_weight(k, hi));
    // e^{-m} m^k is unimodal with its peak at m = k.
    if (k >= lo && k <= hi) best = std::max(best, poisson_weight(k, k));
    return best;
}

double poisson_min_on(int k, double lo, double hi) {
    return std::min(poisson_weight(k, lo), poisson_weight(k, hi));
}

}  // namespace

std::string BoundReport::to_kv_text() const {
    std::string s;
    auto put = [&s](const char* key, const std::string& v) {
        s += key;
        s += " = ";
        s += v;
        s += "\n";
    };
    put("n1s_lb", fmt(n1s_lb));
    put("delta1s_lb", fmt(delta1s_lb));
    put("delta1d_lb", fmt(delta1d_lb));
    put("delta1d_lb_raw", fmt(delta1d_lb_raw));
    put("e1s_lb", fmt(e1s_lb));
    put("e1s_ub", fmt(e1s_ub));
    put("e1d", fmt(e1d));
    put("n0d_ub", fmt(n0d_ub));
    put("n0s_lb", fmt(n0s_lb));
    put("condition_ok", condition_ok ? "true" : "false");
    put("clamped", clamped ? "true" : "false");
    put("r1_max", fmt(r1_max));
    put("r2_max", fmt(r2_max));
    put("r1_min", fmt(r1_min));
    put("numerator", fmt(numerator));
    put("denominator", fmt(denominator));
    return s;
}

std::string BoundReport::csv_header() {
    return "n1s_lb,delta1s_lb,delta1d_lb,delta1d_lb_raw,e1s_lb,e1s_ub,e1d,"
           "n0d_ub,n0s_lb,condition_ok,clamped,r1_max,r2_max,r1_min,"
           "numerator,denominator";
}

std::string BoundReport::to_csv_row() const {
    std::string s;
    auto add = [&s](const std::string& v) {
        if (!s.empty()) s += ",";
        s += v;
    };
    add(fmt(n1s_lb));
    add(fmt(delta1s_lb));
    add(fmt(delta1d_lb));
    add(fmt(delta1d_lb_raw));
    add(fmt(e1s_lb));
    add(fmt(e1s_ub));
    add(fmt(e1d));
    add(fmt(n0d_ub));
    add(fmt(n0s_lb));
    add(condition_ok ? "true" : "false");
    add(clamped ? "true" : "false");
    add(fmt(r1_max));
    add(fmt(r2_max));
    add(fmt(r1_min));
    add(fmt(numerator));
    add(fmt(denominator));
    return s;
}

RatioEnvelope coherent_ratio_envelope(const PulseEnsembleSpec& spec, int K) {
    spec.validate();
    if (K < 2) throw std::invalid_argument("envelope needs K >= 2");
    if (spec.mu <= 0.0 || spec.mu >= spec.mu_prime)
        throw ConditionViolated("coherent envelope needs 0 < mu < mu'");

    const double delta = spec.fluctuation.delta;
    const double eps_d = spec.fluctuation.eps_d;
    const double eps_s = spec.fluctuation.eps_s;
    const double mu_hi = spec.mu * (1.0 + eps_d);
    const double mup_lo = spec.mu_prime * (1.0 - eps_s);
    if (!(mu_hi < mup_lo))
        throw ConditionViolated(
            "mu(1+eps_d) >= mu'(1-eps_s): ratio ordering fails");

    RatioEnvelope env;
    env.provenance = EnvelopeProvenance::kCoherentClosedForm;
    env.r_max.resize(static_cast<size_t>(K) + 1);

    const double pref = spec.p / spec.p_prime;
    // k = 0: the ratio is a pure exponential in mu'_i - mu_i, maximized at
    // the opposite device corner.
    env.r_max[0] = pref * std::exp((1.0 + delta) *
                                   (spec.mu_prime * (1.0 + eps_s) -
                                    spec.mu * (1.0 - eps_d)));
    const double expo = std::exp((1.0 + delta) * (mup_lo - mu_hi));
    for (int k = 1; k <= K; ++k)
        env.r_max[static_cast<size_t>(k)] =
            pref * std::pow(mu_hi / mup_lo, k) * expo;

    // Minimizing corner: by the same monotonicity argument the minimum of
    // (mu_i/mu'_i) e^{mu'_i - mu_i} sits at (-delta, -eps_d, +eps_s).
    const double mu_lo = spec.mu * (1.0 - eps_d);
    const double mup_hi = spec.mu_prime * (1.0 + eps_s);
    env.r1_min = pref * (mu_lo / mup_hi) *
                 std::exp((1.0 - delta) * (mup_hi - mu_lo));
    return env;
}

RatioEnvelope ayki_ratio_envelope(const AykiSourceParams& params, int K) {
    params.validate();
    if (K < 2) throw std::invalid_argument("envelope needs K >= 2");
    const double g1 = gamma_click(1, params.d_A, params.eta_A);
    if (g1 <= 0.0) throw DegenerateSource("gamma_1 = 0");

    RatioEnvelope env;
    env.provenance = EnvelopeProvenance::kAykiConstant;
    env.r_max.resize(static_cast<size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const double g = gamma_click(k, params.d_A, params.eta_A);
        env.r_max[static_cast<size_t>(k)] =
            g > 0.0 ? (1.0 - g) / g
                    : std::numeric_limits<double>::infinity();
    }
    env.r1_min = env.r_max[1];
    return env;
}

RatioEnvelope normal_worstcase_envelope(const PulseEnsembleSpec& spec,
                                        int K) {
    spec.validate();
    if (K < 2) throw std::invalid_argument("envelope needs K >= 2");
    if (spec.mu <= 0.0 || spec.mu >= spec.mu_prime)
        throw ConditionViolated("normal envelope needs 0 < mu < mu'");

    const double delta = spec.fluctuation.delta;
    const double eps_d = spec.fluctuation.eps_d;
    const double eps_s = spec.fluctuation.eps_s;
    const double mu_lo = spec.mu * (1.0 - delta) * (1.0 - eps_d);
    const double mu_hi = spec.mu * (1.0 + delta) * (1.0 + eps_d);
    const double mup_lo = spec.mu_prime * (1.0 - delta) * (1.0 - eps_s);
    const double mup_hi = spec.mu_prime * (1.0 + delta) * (1.0 + eps_s);

    RatioEnvelope env;
    env.provenance = EnvelopeProvenance::kNormalWorstCase;
    env.r_max.resize(static_cast<size_t>(K) + 1);
    for (int k = 0; k <= K; ++k) {
        const double num = spec.p * poisson_max_on(k, mu_lo, mu_hi);
        const double den =
            spec.p_prime * poisson_min_on(k, mup_lo, mup_hi);
        if (den <= 0.0)
            throw ConditionViolated("normal envelope: zero denominator");
        env.r_max[static_cast<size_t>(k)] = num / den;
    }
    env.r1_min = spec.p * poisson_min_on(1, mu_lo, mu_hi) /
                 (spec.p_prime * poisson_max_on(1, mup_lo, mup_hi));
    if (!check_condition(env, K))
        throw ConditionViolated("normal envelope: ordering fails");
    return env;
}

bool check_condition(const RatioEnvelope& env, int K) {
    if (K < 2 || env.max_k() < 2) return false;
    const int upto = std::min(K, env.max_k());
    if (env.at(2) > env.at(1)) return false;
    for (int k = 3; k <= upto; ++k)
        if (env.at(k) > env.at(2)) return false;
    return true;
}

ClampedValue bound_n1s(const ObservedStats& obs, const RatioEnvelope& env,
                       double n0d_ub, double n0s_lb) {
    if (!check_condition(env, env.max_k()))
        throw ConditionViolated("bound_n1s: envelope ordering fails");
    const double r1 = env.at(1);
    const double r2 = env.at(2);
    if (r1 - r2 < 1e-15)
        throw DegenerateDenominator("bound_n1s: r_max[1] - r_max[2] ~ 0");

    const double numerator = obs.counts_decoy - r2 * obs.counts_signal +
                             r2 * n0s_lb - n0d_ub;
    const double raw = numerator / (r1 - r2);
    const double clamped = std::clamp(raw, 0.0, obs.counts_signal);
    return {clamped, clamped != raw};
}

double bound_delta1_decoy(double delta1s_lb, const RatioEnvelope& env,
                          const ObservedStats& obs) {
    if (obs.counts_decoy <= 0.0) return 0.0;
    return env.r1_min * delta1s_lb * obs.counts_signal / obs.counts_decoy;
}

ErrorBounds bound_e1s(double e1d, const RatioEnvelope& env) {
    if (e1d < 0.0 || e1d > 1.0)
        throw std::invalid_argument("bound_e1s: e1d outside [0,1]");
    if (e1d == 0.0) return {0.0, 0.0};
    const double r1 = env.at(1);
    if (env.r1_min <= 0.0 || r1 <= 0.0) return {0.0, 1.0};
    // Degenerate ratio interval (stable source): the sandwich collapses to
    // equality, and dividing r/r would cost an ulp.
    if (env.r1_min == r1) return {e1d, e1d};
    const double lower = e1d * env.r1_min / r1;
    const double upper = std::min(1.0, e1d * r1 / env.r1_min);
    return {lower, upper};
}

VacuumBounds bound_vacuum_3intensity(const ObservedStats& obs,
                                     const PulseEnsembleSpec& spec) {
    spec.validate();
    if (spec.p_0 <= 0.0)
        throw MissingVacuumSource("3-intensity vacuum bound needs p_0 > 0");

    const double delta = spec.fluctuation.delta;
    const double eps_d = spec.fluctuation.eps_d;
    const double eps_s = spec.fluctuation.eps_s;
    const double mu_min = spec.mu * (1.0 - delta) * (1.0 - eps_d);
    const double mup_max = spec.mu_prime * (1.0 + delta) * (1.0 + eps_s);

    const double raw_ub =
        (spec.p / spec.p_0) * std::exp(-mu_min) * obs.counts_vacuum;
    const double raw_lb =
        (spec.p_prime / spec.p_0) * std::exp(-mup_max) * obs.counts_vacuum;

    VacuumBounds b;
    b.n0d_ub = std::clamp(raw_ub, 0.0, obs.counts_decoy);
    b.n0s_lb = std::clamp(raw_lb, 0.0, obs.counts_signal);
    b.clamped = b.n0d_ub != raw_ub || b.n0s_lb != raw_lb;
    return b;
}

ClampedValue ayki_delta1(const ObservedStats& obs, double n0d_ub,
                         const AykiSourceParams& params) {
    params.validate();
    const double g1 = gamma_click(1, params.d_A, params.eta_A);
    const double g2 = gamma_click(2, params.d_A, params.eta_A);
    if (g1 <= 0.0 || g2 <= 0.0)
        throw DegenerateSource("ayki_delta1: gamma_k = 0");
    const double r1 = (1.0 - g1) / g1;
    const double r2 = (1.0 - g2) / g2;
    if (std::abs(r1 - r2) < 1e-15 || obs.counts_signal <= 0.0)
        throw DegenerateDenominator("ayki_delta1: gamma_1 = gamma_2");

    // n_0s / n_0d = d_A / (1 - d_A), so the vacuum terms fold into one.
    const double vac_coeff =
        1.0 - r2 * params.d_A / (1.0 - params.d_A);
    const double numerator =
        obs.counts_decoy - r2 * obs.counts_signal - vac_coeff * n0d_ub;
    const double raw = numerator / (obs.counts_signal * (r1 - r2));
    const double clamped = std::clamp(raw, 0.0, 1.0);
    return {clamped, clamped != raw};
}

double binary_entropy(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double key_rate(const ObservedStats& obs, const BoundReport& report,
                const KeyRateParams& params) {
    if (!report.condition_ok) return 0.0;
    if (obs.total_pulses <= 0.0 || obs.p_signal <= 0.0) return 0.0;
    const double gain =
        obs.counts_signal / (obs.total_pulses * obs.p_signal);
    const double qber = obs.qber_signal.value_or(0.0);
    const double rate =
        params.sifting * gain *
        (-params.ec_efficiency * binary_entropy(qber) +
         report.delta1s_lb * (1.0 - binary_entropy(report.e1s_ub)));
    return std::max(0.0, rate);
}

}  // namespace dsqkd
