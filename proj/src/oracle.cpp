#include "dsqkd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>

#include "dsqkd/errors.hpp"
#include "dsqkd/rng.hpp"

namespace dsqkd {

namespace {

constexpr int kMaxTruncation = 6;
constexpr size_t kMaxPulses = 10000;

double poisson_weight(int k, double m) {
    if (m == 0.0) return k == 0 ? 1.0 : 0.0;
    return std::exp(-m + k * std::log(m) - std::lgamma(k + 1.0));
}

// Truncated and renormalized Poisson vector; exact sum 1 by construction.
std::vector<double> truncated_poisson(double mu, int truncation) {
    std::vector<double> a(static_cast<size_t>(truncation) + 1);
    double sum = 0.0;
    for (int k = 0; k <= truncation; ++k) {
        a[static_cast<size_t>(k)] = poisson_weight(k, mu);
        sum += a[static_cast<size_t>(k)];
    }
    for (double& v : a) v /= sum;
    return a;
}

}  // namespace

void MicroInstance::validate() const {
    if (pulses.empty() || pulses.size() > kMaxPulses)
        throw std::invalid_argument("instance size out of range");
    if (truncation < 1 || truncation > kMaxTruncation)
        throw std::invalid_argument("instance truncation out of range");
    const size_t n = static_cast<size_t>(truncation) + 1;
    for (const MicroPulse& p : pulses) {
        if (std::abs(p.p_decoy + p.p_signal - 1.0) > 1e-12)
            throw std::invalid_argument("p_i + p'_i != 1");
        if (p.a_decoy.size() != n || p.a_signal.size() != n)
            throw std::invalid_argument("a-vector size mismatch");
        double sd = 0.0, ss = 0.0;
        for (size_t k = 0; k < n; ++k) {
            if (p.a_decoy[k] < 0.0 || p.a_signal[k] < 0.0)
                throw std::invalid_argument("negative a-weight");
            sd += p.a_decoy[k];
            ss += p.a_signal[k];
        }
        if (std::abs(sd - 1.0) > 1e-9 || std::abs(ss - 1.0) > 1e-9)
            throw std::invalid_argument("a-vector not normalized");
        if (p.photon_number < 0 || p.photon_number > truncation)
            throw std::invalid_argument("photon number beyond cutoff");
        if (p.single_photon_error < 0.0 || p.single_photon_error > 1.0)
            throw std::invalid_argument("e_1i outside [0,1]");
    }
}

double MicroInstance::ratio(int k, size_t j) const {
    const MicroPulse& p = pulses[j];
    const double num = p.p_decoy * p.a_decoy[static_cast<size_t>(k)];
    const double den = p.p_signal * p.a_signal[static_cast<size_t>(k)];
    if (den <= 0.0)
        throw std::invalid_argument("ratio undefined: p'_j a'_kj = 0");
    return num / den;
}

bool MicroInstance::max_ratio_over_ck(int k, double* out) const {
    bool any = false;
    double best = 0.0;
    for (size_t j = 0; j < pulses.size(); ++j) {
        if (!pulses[j].clicked || pulses[j].photon_number != k) continue;
        best = any ? std::max(best, ratio(k, j)) : ratio(k, j);
        any = true;
    }
    if (any) *out = best;
    return any;
}

MicroCounts exact_counts(const MicroInstance& instance) {
    instance.validate();
    MicroCounts c;
    const size_t n = static_cast<size_t>(instance.truncation) + 1;
    c.n_kd.assign(n, 0.0);
    c.n_ks.assign(n, 0.0);
    c.click_set_sizes.assign(n, 0);
    for (const MicroPulse& p : instance.pulses) {
        if (!p.clicked) continue;
        const size_t k = static_cast<size_t>(p.photon_number);
        const double d = 1.0 / (p.p_decoy * p.a_decoy[k] +
                                p.p_signal * p.a_signal[k]);
        c.n_kd[k] += p.p_decoy * p.a_decoy[k] * d;
        c.n_ks[k] += p.p_signal * p.a_signal[k] * d;
        c.click_set_sizes[k] += 1;
    }
    for (size_t k = 0; k < n; ++k) {
        c.N_d += c.n_kd[k];
        c.N_s += c.n_ks[k];
    }
    return c;
}

SlackTerms slack_terms(const MicroInstance& instance) {
    instance.validate();
    const MicroCounts counts = exact_counts(instance);

    SlackTerms s;
    const bool have_c1 = instance.max_ratio_over_ck(1, &s.r1_max);
    const bool have_c2 = instance.max_ratio_over_ck(2, &s.r2_max);

    // Per-k click-set maxima for k >= 2.
    std::vector<double> rk_max(static_cast<size_t>(instance.truncation) + 1,
                               0.0);
    std::vector<bool> rk_present(rk_max.size(), false);
    for (int k = 2; k <= instance.truncation; ++k)
        rk_present[static_cast<size_t>(k)] =
            instance.max_ratio_over_ck(k, &rk_max[static_cast<size_t>(k)]);

    // When c_2 is empty the comparison anchor falls back to the largest
    // multiphoton click-set maximum; the slack definitions stay valid.
    if (!have_c2) {
        s.r2_max = 0.0;
        for (int k = 2; k <= instance.truncation; ++k)
            if (rk_present[static_cast<size_t>(k)])
                s.r2_max = std::max(s.r2_max, rk_max[static_cast<size_t>(k)]);
    }

    // Ratio-ordering condition over the click sets.
    for (int k = 2; k <= instance.truncation; ++k) {
        if (!rk_present[static_cast<size_t>(k)]) continue;
        if (rk_max[static_cast<size_t>(k)] > s.r2_max + 1e-15)
            throw ConditionViolated(
                "max over c_" + std::to_string(k) + " exceeds max over c_2");
    }
    if (have_c1 && s.r2_max > s.r1_max + 1e-15)
        throw ConditionViolated("max over c_2 exceeds max over c_1");

    const double n1_clicks =
        static_cast<double>(counts.click_set_sizes[1]);
    s.n1s_tilde = have_c1 ? n1_clicks / (1.0 + s.r1_max) : 0.0;
    s.xi1 = counts.n_ks[1] - s.n1s_tilde;

    for (int k = 2; k <= instance.truncation; ++k) {
        s.lambda += counts.n_kd[static_cast<size_t>(k)];
        s.lambda_prime += counts.n_ks[static_cast<size_t>(k)];
        if (rk_present[static_cast<size_t>(k)]) {
            const double ck =
                static_cast<double>(counts.click_set_sizes[static_cast<size_t>(k)]);
            const double rk = rk_max[static_cast<size_t>(k)];
            s.lambda_tilde += ck / (1.0 + rk);
            s.xi3 += ck * (s.r2_max - rk) / (1.0 + rk);
        }
    }
    s.xi2 = s.lambda_prime - s.lambda_tilde;
    return s;
}

std::string AuditRecord::pretty() const {
    std::string out;
    for (const AuditStep& step : steps) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "[%s] %-28s residual=%.3e\n",
                      step.pass ? "PASS" : "FAIL", step.name.c_str(),
                      step.residual);
        out += buf;
    }
    return out;
}

AuditRecord verify_chain(const MicroInstance& instance) {
    const MicroCounts counts = exact_counts(instance);
    const SlackTerms s = slack_terms(instance);
    const double tol =
        1e-12 * std::max<double>(1.0, static_cast<double>(
                                          instance.pulses.size()));

    AuditRecord rec;
    auto check_ge = [&](const std::string& name, double lhs, double rhs) {
        const double residual = lhs - rhs;
        rec.steps.push_back({name, residual >= -tol, residual});
        rec.all_pass = rec.all_pass && rec.steps.back().pass;
    };
    auto check_eq = [&](const std::string& name, double lhs, double rhs) {
        const double residual = lhs - rhs;
        rec.steps.push_back({name, std::abs(residual) <= tol, residual});
        rec.all_pass = rec.all_pass && rec.steps.back().pass;
    };

    const double n_0d = counts.n_kd[0];
    const double n_0s = counts.n_ks[0];
    const double n_1s = counts.n_ks[1];

    check_ge("xi1_nonneg", s.xi1, 0.0);
    check_ge("xi2_nonneg", s.xi2, 0.0);
    check_ge("xi3_nonneg", s.xi3, 0.0);
    check_ge("n1s_ge_n1s_tilde", n_1s, s.n1s_tilde);
    check_ge("lambda_prime_ge_lambda_tilde", s.lambda_prime, s.lambda_tilde);
    check_eq("lambda_decomposition", s.lambda,
             s.r2_max * s.lambda_tilde - s.xi2 - s.xi3);
    check_eq("nd_identity", counts.N_d,
             n_0d + s.r1_max * s.n1s_tilde + s.lambda - s.xi1);
    check_eq("ns_identity", counts.N_s,
             n_0s + s.n1s_tilde + s.lambda_prime + s.xi1);
    check_eq("rearranged_nd", counts.N_d,
             n_0d + s.r1_max * s.n1s_tilde + s.r2_max * s.lambda_tilde -
                 s.xi1 - s.xi2 - s.xi3);
    check_eq("rearranged_ns", counts.N_s,
             n_0s + s.n1s_tilde + s.lambda_tilde + s.xi1 + s.xi2);

    if (s.r1_max - s.r2_max > 1e-15) {
        const double exact =
            (counts.N_d - s.r2_max * counts.N_s + s.r2_max * n_0s - n_0d +
             s.r2_max * (s.xi1 + s.xi2) + s.xi1 + s.xi2 + s.xi3) /
            (s.r1_max - s.r2_max);
        check_eq("n1s_tilde_solution", s.n1s_tilde, exact);
        const double bound =
            (counts.N_d - s.r2_max * counts.N_s + s.r2_max * n_0s - n_0d) /
            (s.r1_max - s.r2_max);
        check_ge("final_bound_le_n1s_tilde", s.n1s_tilde, bound);
        check_ge("final_bound_le_n1s", n_1s, bound);
    }
    return rec;
}

bool error_bound_check(const MicroInstance& instance) {
    instance.validate();
    double n_1d = 0.0, n_1s = 0.0, werr_d = 0.0, werr_s = 0.0;
    double r_min = 0.0, r_max = 0.0;
    bool any_click = false;
    for (size_t j = 0; j < instance.pulses.size(); ++j) {
        const MicroPulse& p = instance.pulses[j];
        if (!p.clicked) continue;
        const double r = instance.ratio(1, j);
        r_min = any_click ? std::min(r_min, r) : r;
        r_max = any_click ? std::max(r_max, r) : r;
        any_click = true;
        if (p.photon_number != 1) continue;
        const double d =
            1.0 / (p.p_decoy * p.a_decoy[1] + p.p_signal * p.a_signal[1]);
        n_1d += p.p_decoy * p.a_decoy[1] * d;
        n_1s += p.p_signal * p.a_signal[1] * d;
        werr_d += p.p_decoy * p.a_decoy[1] * p.single_photon_error * d;
        werr_s += p.p_signal * p.a_signal[1] * p.single_photon_error * d;
    }
    if (n_1d <= 0.0 || n_1s <= 0.0) return true;  // nothing to bound
    const double e_1d = werr_d / n_1d;
    const double e_1s = werr_s / n_1s;
    if (r_max <= 0.0) return e_1d <= 1e-12 && e_1s <= 1e-12;
    const double lower = (r_min / r_max) * e_1d;
    const double upper = r_min > 0.0
                             ? (r_max / r_min) * e_1d
                             : std::numeric_limits<double>::infinity();
    return e_1s >= lower - 1e-12 && e_1s <= upper + 1e-12;
}

bool hwang_proposition_holds(const MicroInstance& instance, double tol) {
    instance.validate();
    const MicroCounts counts = exact_counts(instance);
    const size_t n = static_cast<size_t>(instance.truncation) + 1;
    std::vector<double> emitted_d(n, 0.0), emitted_s(n, 0.0);
    for (const MicroPulse& p : instance.pulses) {
        const size_t k = static_cast<size_t>(p.photon_number);
        const double d = 1.0 / (p.p_decoy * p.a_decoy[k] +
                                p.p_signal * p.a_signal[k]);
        emitted_d[k] += p.p_decoy * p.a_decoy[k] * d;
        emitted_s[k] += p.p_signal * p.a_signal[k] * d;
    }
    for (size_t k = 0; k < n; ++k) {
        if (emitted_d[k] <= 0.0 || emitted_s[k] <= 0.0) continue;
        const double s_kd = counts.n_kd[k] / emitted_d[k];
        const double s_ks = counts.n_ks[k] / emitted_s[k];
        if (std::abs(s_kd - s_ks) > tol) return false;
    }
    return true;
}

MicroInstance random_valid_instance(std::uint64_t seed) {
    for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
        RngStream rng(seed + attempt, "oracle-instance");
        auto& eng = rng.engine();
        MicroInstance inst;
        inst.truncation =
            std::uniform_int_distribution<int>(3, 6)(eng);
        const size_t m =
            std::uniform_int_distribution<size_t>(20, 200)(eng);
        const double mu =
            std::uniform_real_distribution<double>(0.1, 0.4)(eng);
        const double mu_prime =
            std::uniform_real_distribution<double>(0.5, 0.9)(eng);
        const double p =
            std::uniform_real_distribution<double>(0.2, 0.8)(eng);

        std::uniform_real_distribution<double> fluct(-0.10, 0.10);
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        inst.pulses.resize(m);
        for (size_t j = 0; j < m; ++j) {
            MicroPulse& pulse = inst.pulses[j];
            pulse.p_decoy = p;
            pulse.p_signal = 1.0 - p;
            const double f = fluct(eng);
            pulse.a_decoy =
                truncated_poisson(mu * (1.0 + f), inst.truncation);
            pulse.a_signal = truncated_poisson(
                mu_prime * (1.0 + f) * (1.0 + 0.5 * fluct(eng)),
                inst.truncation);
            // Photon number from the marginal of the mixed source.
            double u = u01(eng);
            int k = inst.truncation;
            for (int kk = 0; kk <= inst.truncation; ++kk) {
                const double w =
                    p * pulse.a_decoy[static_cast<size_t>(kk)] +
                    (1.0 - p) * pulse.a_signal[static_cast<size_t>(kk)];
                if (u < w) {
                    k = kk;
                    break;
                }
                u -= w;
            }
            pulse.photon_number = k;
            // Click probability correlated with the fluctuation draw, so
            // the click set is biased rather than independent.
            pulse.clicked = u01(eng) < 0.3 + 3.0 * std::abs(f);
            pulse.single_photon_error = 0.1 * u01(eng);
        }
        // Guarantee nonempty c_1 and c_2.
        inst.pulses[0].photon_number = 1;
        inst.pulses[0].clicked = true;
        inst.pulses[1].photon_number = 2;
        inst.pulses[1].clicked = true;

        try {
            (void)slack_terms(inst);
            return inst;
        } catch (const ConditionViolated&) {
            continue;
        }
    }
    throw std::runtime_error("random_valid_instance: no valid draw found");
}

MicroInstance ten_pulse_instance() {
    MicroInstance inst;
    inst.truncation = 4;
    const int photon_numbers[10] = {0, 0, 1, 2, 0, 1, 3, 2, 1, 0};
    const bool clicked[10] = {false, true, true, false, true,
                              true,  false, false, true, true};
    const std::vector<double> a = truncated_poisson(0.2, inst.truncation);
    const std::vector<double> ap = truncated_poisson(0.6, inst.truncation);
    inst.pulses.resize(10);
    for (size_t j = 0; j < 10; ++j) {
        inst.pulses[j].p_decoy = 0.5;
        inst.pulses[j].p_signal = 0.5;
        inst.pulses[j].a_decoy = a;
        inst.pulses[j].a_signal = ap;
        inst.pulses[j].photon_number = photon_numbers[j];
        inst.pulses[j].clicked = clicked[j];
        inst.pulses[j].single_photon_error = 0.02;
    }
    return inst;
}

MicroInstance adversarial_instance(std::uint64_t seed) {
    for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
        RngStream rng(seed + attempt, "oracle-adversarial");
        auto& eng = rng.engine();
        std::uniform_real_distribution<double> fluct(-0.10, 0.10);
        std::uniform_real_distribution<double> u01(0.0, 1.0);

        MicroInstance inst;
        inst.truncation = 4;
        const size_t m = 120;
        inst.pulses.resize(m);
        for (size_t j = 0; j < m; ++j) {
            MicroPulse& pulse = inst.pulses[j];
            pulse.p_decoy = 0.5;
            pulse.p_signal = 0.5;
            const double f = fluct(eng);
            pulse.a_decoy =
                truncated_poisson(0.2 * (1.0 + f), inst.truncation);
            pulse.a_signal =
                truncated_poisson(0.6 * (1.0 - f), inst.truncation);
            pulse.photon_number =
                std::uniform_int_distribution<int>(0, 3)(eng);
            pulse.single_photon_error = 0.05 * u01(eng);
            pulse.clicked = false;
        }
        // Clicks land only on the largest-ratio pulses of each photon
        // class: the worst correlated pattern for the bound.
        for (int k = 0; k <= 3; ++k) {
            std::vector<size_t> idx;
            for (size_t j = 0; j < m; ++j)
                if (inst.pulses[j].photon_number == k) idx.push_back(j);
            std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
                return inst.ratio(std::max(k, 1), a) >
                       inst.ratio(std::max(k, 1), b);
            });
            const size_t take = std::max<size_t>(1, idx.size() / 5);
            for (size_t t = 0; t < take && t < idx.size(); ++t)
                inst.pulses[idx[t]].clicked = true;
        }
        try {
            (void)slack_terms(inst);
            return inst;
        } catch (const ConditionViolated&) {
            continue;
        }
    }
    throw std::runtime_error("adversarial_instance: no valid draw found");
}

MicroInstance hwang_violation_instance() {
    MicroInstance inst;
    inst.truncation = 2;

    auto make_family = [](double q) {
        // Signal vector fixed; decoy vector proportional to q^k a'_k, so
        // the per-pulse ratio decays geometrically with base q.
        MicroPulse p;
        p.p_decoy = 0.5;
        p.p_signal = 0.5;
        p.a_signal = {0.3, 0.4, 0.3};
        p.a_decoy = {0.3, 0.4 * q, 0.3 * q * q};
        double sum = p.a_decoy[0] + p.a_decoy[1] + p.a_decoy[2];
        for (double& v : p.a_decoy) v /= sum;
        p.single_photon_error = 0.03;
        return p;
    };
    const MicroPulse fam_a = make_family(0.5);
    const MicroPulse fam_b = make_family(0.6);

    auto add = [&inst](MicroPulse p, int k, bool clicked) {
        p.photon_number = k;
        p.clicked = clicked;
        inst.pulses.push_back(std::move(p));
    };
    // Single-photon clicks only on family A; family B single-photon pulses
    // never click, so the per-class yields differ between sources.
    add(fam_a, 1, true);
    add(fam_a, 1, true);
    add(fam_b, 1, false);
    add(fam_b, 1, false);
    add(fam_a, 2, true);
    add(fam_b, 2, true);
    add(fam_a, 0, true);
    add(fam_b, 0, false);
    return inst;
}

}  // namespace dsqkd
