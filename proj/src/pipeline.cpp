#include "dsqkd/pipeline.hpp"

#include <cmath>
#include <stdexcept>

#include "dsqkd/errors.hpp"
#include "dsqkd/quadrature.hpp"

namespace dsqkd {

namespace {

FluctuationGrid grid_for(const RunConfig& config) {
    if (config.protocol == Protocol::kAyki) {
        FluctuationBounds pump;
        pump.delta = config.ayki.mu_fluct;
        return make_uniform_grid(pump, config.expectation_points);
    }
    return make_uniform_grid(config.source.fluctuation,
                             config.expectation_points);
}

}  // namespace

SimulationRun simulate_run(const RunConfig& config) {
    SimulationRun run;
    if (config.protocol == Protocol::kAyki) {
        if (config.engine == Engine::kMonteCarlo) {
            run.tally = run_monte_carlo(config.ayki, config.channel,
                                        config.pulses, config.seed)
                            .tally;
        } else {
            run.tally = run_expectation(
                config.ayki, config.channel,
                static_cast<double>(config.pulses), grid_for(config));
        }
        const AykiSelection sel =
            ayki_mean_selection(config.ayki, grid_for(config));
        run.observed =
            observe(run.tally, sel.p_decoy, sel.p_signal, 0.0);
        return run;
    }

    PulseEnsembleSpec spec = config.source;
    if (config.protocol == Protocol::kTwoIntensityCoherent &&
        spec.p_0 != 0.0) {
        // Fold the vacuum share back into the other two sources.
        const double scale = 1.0 / (spec.p + spec.p_prime);
        spec.p *= scale;
        spec.p_prime *= scale;
        spec.p_0 = 0.0;
    }
    if (config.engine == Engine::kMonteCarlo) {
        run.tally = run_monte_carlo(spec, config.channel, config.pulses,
                                    config.seed)
                        .tally;
    } else {
        run.tally =
            run_expectation(spec, config.channel,
                            static_cast<double>(config.pulses),
                            grid_for(config));
    }
    run.observed = observe(run.tally, spec.p, spec.p_prime, spec.p_0);
    return run;
}

BoundReport estimate_bounds(const RunConfig& config,
                            const ObservedStats& obs,
                            EstimatorVariant variant, double n0d_hint) {
    if (variant == EstimatorVariant::kBoth)
        throw std::invalid_argument("estimate_bounds: pick one variant");

    BoundReport report;
    report.e1d = config.e1d >= 0.0 ? config.e1d
                                   : error_prob_k(1, config.channel);

    if (config.protocol == Protocol::kAyki) {
        const RatioEnvelope env = ayki_ratio_envelope(config.ayki, 2);
        report.condition_ok = check_condition(env, 2);
        report.r1_max = env.at(1);
        report.r2_max = env.at(2);
        report.r1_min = env.r1_min;
        report.n0d_ub = n0d_hint >= 0.0 ? n0d_hint : obs.counts_decoy;
        report.n0s_lb = 0.0;

        const ClampedValue d1 =
            ayki_delta1(obs, report.n0d_ub, config.ayki);
        report.delta1s_lb = d1.value;
        report.clamped = d1.clamped;
        report.n1s_lb = d1.value * obs.counts_signal;
        report.delta1d_lb_raw = env.r1_min * report.delta1s_lb;
        report.delta1d_lb =
            bound_delta1_decoy(report.delta1s_lb, env, obs);
        const ErrorBounds e = bound_e1s(report.e1d, env);
        report.e1s_lb = e.lower;
        report.e1s_ub = e.upper;
        return report;
    }

    const RatioEnvelope env =
        variant == EstimatorVariant::kNormal
            ? normal_worstcase_envelope(config.source, 2)
            : coherent_ratio_envelope(config.source, 2);
    report.condition_ok = check_condition(env, 2);
    report.r1_max = env.at(1);
    report.r2_max = env.at(2);
    report.r1_min = env.r1_min;

    if (config.protocol == Protocol::kThreeIntensityCoherent) {
        const VacuumBounds vac = bound_vacuum_3intensity(obs, config.source);
        report.n0d_ub = vac.n0d_ub;
        report.n0s_lb = vac.n0s_lb;
        report.clamped = vac.clamped;
    } else {
        report.n0d_ub = n0d_hint >= 0.0 ? n0d_hint : obs.counts_decoy;
        report.n0s_lb = 0.0;
    }

    report.numerator = obs.counts_decoy - env.at(2) * obs.counts_signal +
                       env.at(2) * report.n0s_lb - report.n0d_ub;
    report.denominator = env.at(1) - env.at(2);

    const ClampedValue n1s =
        bound_n1s(obs, env, report.n0d_ub, report.n0s_lb);
    report.n1s_lb = n1s.value;
    report.clamped = report.clamped || n1s.clamped;
    report.delta1s_lb =
        obs.counts_signal > 0.0 ? n1s.value / obs.counts_signal : 0.0;
    report.delta1d_lb_raw = env.r1_min * report.delta1s_lb;
    report.delta1d_lb = bound_delta1_decoy(report.delta1s_lb, env, obs);

    const ErrorBounds e = bound_e1s(report.e1d, env);
    report.e1s_lb = e.lower;
    report.e1s_ub = e.upper;
    return report;
}

double pipeline_key_rate(const RunConfig& config, const ObservedStats& obs,
                         const BoundReport& report) {
    return key_rate(obs, report, config.key_rate);
}

std::vector<SweepRow> run_sweep(const RunConfig& config) {
    if (config.sweep_grid.empty())
        throw ConfigError("sweep: empty grid");
    if (config.protocol == Protocol::kAyki)
        throw ConfigError("sweep: coherent protocols only");

    auto rate_at = [&](double delta, double eps,
                       EstimatorVariant variant) -> double {
        RunConfig point = config;
        point.source.fluctuation.delta = delta;
        point.source.fluctuation.eps_d = eps;
        point.source.fluctuation.eps_s = eps;
        const SimulationRun run = simulate_run(point);
        const BoundReport report =
            estimate_bounds(point, run.observed, variant);
        return pipeline_key_rate(point, run.observed, report);
    };

    std::vector<EstimatorVariant> variants;
    if (config.variant == EstimatorVariant::kEconomic ||
        config.variant == EstimatorVariant::kBoth)
        variants.push_back(EstimatorVariant::kEconomic);
    if (config.variant == EstimatorVariant::kNormal ||
        config.variant == EstimatorVariant::kBoth)
        variants.push_back(EstimatorVariant::kNormal);

    std::vector<SweepRow> rows;
    for (EstimatorVariant variant : variants) {
        // Relative rates are against the fully stable source.
        const double base = rate_at(0.0, 0.0, variant);
        for (double g : config.sweep_grid) {
            const double delta =
                config.sweep_axis == SweepAxis::kDelta ? g
                                                       : config.sweep_fixed_delta;
            const double eps = config.sweep_axis == SweepAxis::kEpsilon
                                   ? g
                                   : config.sweep_fixed_eps;
            const double rate = rate_at(delta, eps, variant);
            rows.push_back({delta, eps,
                            variant == EstimatorVariant::kEconomic
                                ? "economic"
                                : "normal",
                            rate, base > 0.0 ? rate / base : 0.0});
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string csv = "delta,epsilon,variant,key_rate,relative_rate\n";
    for (const SweepRow& row : rows) {
        csv += format_double(row.delta);
        csv += ",";
        csv += format_double(row.epsilon);
        csv += ",";
        csv += row.variant;
        csv += ",";
        csv += format_double(row.rate);
        csv += ",";
        csv += format_double(row.relative_rate);
        csv += "\n";
    }
    return csv;
}

std::string records_csv(const std::vector<PulseRecord>& records) {
    std::string csv = "i,source,k,clicked,error,mu_i,mu_prime_i\n";
    for (const PulseRecord& r : records) {
        csv += std::to_string(r.index);
        csv += ",";
        csv += r.source == SourceTag::kDecoy
                   ? "decoy"
                   : (r.source == SourceTag::kSignal ? "signal" : "vacuum");
        csv += ",";
        csv += std::to_string(r.photon_number);
        csv += ",";
        csv += r.clicked ? "1" : "0";
        csv += ",";
        csv += r.bit_error ? "1" : "0";
        csv += ",";
        csv += format_double(r.mu_i);
        csv += ",";
        csv += format_double(r.mu_i_prime);
        csv += "\n";
    }
    return csv;
}

}  // namespace dsqkd
