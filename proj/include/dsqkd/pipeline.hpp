#pragma once

#include <string>
#include <vector>

#include "dsqkd/config.hpp"
#include "dsqkd/estimator.hpp"
#include "dsqkd/simulator.hpp"

namespace dsqkd {

// Shared driver logic behind the CLI subcommands; tests exercise it
// directly.

struct SimulationRun {
    Tally tally;
    ObservedStats observed;
};

SimulationRun simulate_run(const RunConfig& config);

// Bound pipeline for one estimator variant (economic or normal). n0d_hint
// supplies the vacuum-count estimate where the protocol has no vacuum
// source; < 0 means the most pessimistic choice n0d = N_d.
BoundReport estimate_bounds(const RunConfig& config,
                            const ObservedStats& obs,
                            EstimatorVariant variant,
                            double n0d_hint = -1.0);

double pipeline_key_rate(const RunConfig& config, const ObservedStats& obs,
                         const BoundReport& report);

struct SweepRow {
    double delta;
    double epsilon;
    std::string variant;
    double rate;
    double relative_rate;
};

std::vector<SweepRow> run_sweep(const RunConfig& config);

std::string sweep_csv(const std::vector<SweepRow>& rows);

std::string records_csv(const std::vector<PulseRecord>& records);

}  // namespace dsqkd
