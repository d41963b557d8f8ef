#pragma once

#include <stdexcept>
#include <string>

namespace dsqkd {

// Photon-number cutoff too small for the requested distribution.
struct TailTooLarge : std::runtime_error {
    int truncation;
    double tail_mass;
    TailTooLarge(int j, double tail)
        : std::runtime_error("photon-number cutoff J=" + std::to_string(j) +
                             " leaves tail mass " + std::to_string(tail)),
          truncation(j),
          tail_mass(tail) {}
};

// The ratio-ordering condition (r_max nonincreasing from k=1) fails.
struct ConditionViolated : std::runtime_error {
    explicit ConditionViolated(const std::string& what)
        : std::runtime_error(what) {}
};

// Heralded source with zero click probability on one branch.
struct DegenerateSource : std::runtime_error {
    explicit DegenerateSource(const std::string& what)
        : std::runtime_error(what) {}
};

struct DegenerateDenominator : std::runtime_error {
    explicit DegenerateDenominator(const std::string& what)
        : std::runtime_error(what) {}
};

struct MissingVacuumSource : std::runtime_error {
    explicit MissingVacuumSource(const std::string& what)
        : std::runtime_error(what) {}
};

// Fluctuation quadrature whose weights do not sum to one.
struct GridTooCoarse : std::runtime_error {
    explicit GridTooCoarse(const std::string& what)
        : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what)
        : std::runtime_error(what) {}
};

}  // namespace dsqkd
