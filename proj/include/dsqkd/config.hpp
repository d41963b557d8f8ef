#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dsqkd/channel.hpp"
#include "dsqkd/estimator.hpp"
#include "dsqkd/source.hpp"

namespace dsqkd {

// Flat "key = value" text with [section] headers and '#' comments.
class KeyValueFile {
  public:
    static KeyValueFile parse_file(const std::string& path);
    static KeyValueFile parse_text(const std::string& text,
                                   const std::string& origin = "<string>");

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
    double get_double(const std::string& section,
                      const std::string& key) const;
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const;

  private:
    std::map<std::string, std::string> values_;  // "section.key" -> value
    std::string origin_;
};

enum class Protocol {
    kTwoIntensityCoherent,
    kThreeIntensityCoherent,
    kAyki,
};

enum class Engine { kMonteCarlo, kExpectation };
enum class EstimatorVariant { kEconomic, kNormal, kBoth };
enum class SweepAxis { kDelta, kEpsilon };

struct RunConfig {
    Protocol protocol = Protocol::kThreeIntensityCoherent;
    Engine engine = Engine::kExpectation;
    std::uint64_t pulses = 1000000;
    std::uint64_t seed = 1;
    EstimatorVariant variant = EstimatorVariant::kBoth;

    PulseEnsembleSpec source;      // coherent protocols
    AykiSourceParams ayki;         // AYKI protocol
    ChannelParams channel;
    KeyRateParams key_rate;
    double e1d = -1.0;             // < 0 means derive from the channel
    int expectation_points = 8;    // quadrature points per axis

    SweepAxis sweep_axis = SweepAxis::kDelta;
    std::vector<double> sweep_grid;
    double sweep_fixed_delta = 0.0;
    double sweep_fixed_eps = 0.0;

    std::string out_path;
};

RunConfig load_run_config(const KeyValueFile& file);

std::string protocol_name(Protocol p);
Protocol parse_protocol(const std::string& name);

// Observed-stats file round trip (flat key = value block).
std::string observed_to_text(const ObservedStats& obs, Protocol protocol);
ObservedStats observed_from_file(const std::string& path,
                                 Protocol* protocol_out = nullptr);

std::string tally_to_text(const Tally& tally);

std::string format_double(double v);

}  // namespace dsqkd
