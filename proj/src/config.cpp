#include "dsqkd/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dsqkd/errors.hpp"

namespace dsqkd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> parse_grid(const std::string& csv,
                               const std::string& what) {
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            grid.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError(what + ": bad number '" + item + "'");
        }
    }
    if (grid.empty()) throw ConfigError(what + ": empty grid");
    return grid;
}

DrawLaw parse_draw_law(const std::string& name) {
    if (name == "uniform") return DrawLaw::kUniform;
    if (name == "clipped-gaussian") return DrawLaw::kClippedGaussian;
    if (name == "sine-drift") return DrawLaw::kSineDrift;
    throw ConfigError("unknown draw_law '" + name + "'");
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

KeyValueFile KeyValueFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

KeyValueFile KeyValueFile::parse_text(const std::string& text,
                                      const std::string& origin) {
    KeyValueFile f;
    f.origin_ = origin;
    std::stringstream ss(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty key");
        f.values_[section + "." + key] = value;
    }
    return f;
}

bool KeyValueFile::has(const std::string& section,
                       const std::string& key) const {
    return values_.count(section + "." + key) > 0;
}

std::string KeyValueFile::get(const std::string& section,
                              const std::string& key) const {
    const auto it = values_.find(section + "." + key);
    if (it == values_.end())
        throw ConfigError(origin_ + ": missing key '" + section + "." + key +
                          "'");
    return it->second;
}

std::string KeyValueFile::get_or(const std::string& section,
                                 const std::string& key,
                                 const std::string& fallback) const {
    const auto it = values_.find(section + "." + key);
    return it == values_.end() ? fallback : it->second;
}

double KeyValueFile::get_double(const std::string& section,
                                const std::string& key) const {
    const std::string v = get(section, key);
    try {
        return std::stod(v);
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + section + "." + key +
                          "' is not a number: '" + v + "'");
    }
}

double KeyValueFile::get_double_or(const std::string& section,
                                   const std::string& key,
                                   double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

std::string protocol_name(Protocol p) {
    switch (p) {
        case Protocol::kTwoIntensityCoherent: return "two-intensity-coherent";
        case Protocol::kThreeIntensityCoherent:
            return "three-intensity-coherent";
        case Protocol::kAyki: return "ayki";
    }
    return "?";
}

Protocol parse_protocol(const std::string& name) {
    if (name == "two-intensity-coherent")
        return Protocol::kTwoIntensityCoherent;
    if (name == "three-intensity-coherent")
        return Protocol::kThreeIntensityCoherent;
    if (name == "ayki") return Protocol::kAyki;
    throw ConfigError("unknown protocol '" + name + "'");
}

RunConfig load_run_config(const KeyValueFile& f) {
    RunConfig c;
    c.protocol =
        parse_protocol(f.get_or("run", "protocol", "three-intensity-coherent"));
    const std::string engine = f.get_or("run", "engine", "expectation");
    if (engine == "monte-carlo" || engine == "mc")
        c.engine = Engine::kMonteCarlo;
    else if (engine == "expectation" || engine == "exp")
        c.engine = Engine::kExpectation;
    else
        throw ConfigError("unknown engine '" + engine + "'");
    c.pulses = static_cast<std::uint64_t>(
        f.get_double_or("run", "pulses", 1000000.0));
    c.seed =
        static_cast<std::uint64_t>(f.get_double_or("run", "seed", 1.0));
    const std::string variant = f.get_or("run", "variant", "both");
    if (variant == "economic")
        c.variant = EstimatorVariant::kEconomic;
    else if (variant == "normal")
        c.variant = EstimatorVariant::kNormal;
    else if (variant == "both")
        c.variant = EstimatorVariant::kBoth;
    else
        throw ConfigError("unknown variant '" + variant + "'");

    c.source.p = f.get_double_or("source", "p_decoy", 0.25);
    c.source.p_prime = f.get_double_or("source", "p_signal", 0.70);
    c.source.p_0 = f.get_double_or("source", "p_vacuum", 0.05);
    c.source.mu = f.get_double_or("source", "mu_decoy", 0.2);
    c.source.mu_prime = f.get_double_or("source", "mu_signal", 0.6);
    c.source.fluctuation.delta = f.get_double_or("source", "delta", 0.0);
    c.source.fluctuation.eps_d = f.get_double_or("source", "eps_decoy", 0.0);
    c.source.fluctuation.eps_s =
        f.get_double_or("source", "eps_signal", 0.0);
    c.source.fluctuation.draw_law =
        parse_draw_law(f.get_or("source", "draw_law", "uniform"));
    c.source.fluctuation.drift_period =
        f.get_double_or("source", "drift_period", 1000.0);
    c.source.truncation =
        static_cast<int>(f.get_double_or("source", "truncation", 30.0));

    c.ayki.mu_nominal = f.get_double_or("ayki", "mu", 1.0);
    c.ayki.mu_fluct = f.get_double_or("ayki", "mu_fluct", 0.20);
    c.ayki.eta_A = f.get_double_or("ayki", "eta_alice", 0.5);
    c.ayki.d_A = f.get_double_or("ayki", "dark_alice", 1.0e-6);
    c.ayki.draw_law =
        parse_draw_law(f.get_or("ayki", "draw_law", "uniform"));

    const std::string preset = f.get_or("channel", "preset", "peng50km-like");
    if (preset == "peng50km-like")
        c.channel = peng50km_like();
    else if (preset != "none")
        throw ConfigError("unknown channel preset '" + preset + "'");
    c.channel.distance_km =
        f.get_double_or("channel", "distance_km", c.channel.distance_km);
    c.channel.alpha_db_per_km = f.get_double_or("channel", "alpha_db_per_km",
                                                c.channel.alpha_db_per_km);
    c.channel.eta_bob =
        f.get_double_or("channel", "eta_bob", c.channel.eta_bob);
    c.channel.d_B = f.get_double_or("channel", "dark_bob", c.channel.d_B);
    c.channel.e_det =
        f.get_double_or("channel", "e_misalign", c.channel.e_det);

    c.key_rate.sifting = f.get_double_or("estimator", "sifting", 0.5);
    c.key_rate.ec_efficiency =
        f.get_double_or("estimator", "ec_efficiency", 1.16);
    const std::string e1d = f.get_or("estimator", "e1d", "auto");
    c.e1d = e1d == "auto" ? -1.0 : std::stod(e1d);

    c.expectation_points = static_cast<int>(
        f.get_double_or("expectation", "grid_points", 8.0));

    const std::string axis = f.get_or("sweep", "axis", "delta");
    if (axis == "delta")
        c.sweep_axis = SweepAxis::kDelta;
    else if (axis == "epsilon")
        c.sweep_axis = SweepAxis::kEpsilon;
    else
        throw ConfigError("unknown sweep axis '" + axis + "'");
    if (f.has("sweep", "grid"))
        c.sweep_grid = parse_grid(f.get("sweep", "grid"), "sweep.grid");
    c.sweep_fixed_delta = f.get_double_or("sweep", "fixed_delta", 0.0);
    c.sweep_fixed_eps = f.get_double_or("sweep", "fixed_eps", 0.0);

    c.out_path = f.get_or("output", "path", "");
    return c;
}

std::string observed_to_text(const ObservedStats& obs, Protocol protocol) {
    std::string s;
    auto put = [&s](const char* key, const std::string& v) {
        s += key;
        s += " = ";
        s += v;
        s += "\n";
    };
    put("format", "dsqkd-observed-v1");
    put("protocol", protocol_name(protocol));
    put("total_pulses", format_double(obs.total_pulses));
    put("counts_decoy", format_double(obs.counts_decoy));
    put("counts_signal", format_double(obs.counts_signal));
    put("counts_vacuum", format_double(obs.counts_vacuum));
    put("qber_decoy",
        obs.qber_decoy ? format_double(*obs.qber_decoy) : "undefined");
    put("qber_signal",
        obs.qber_signal ? format_double(*obs.qber_signal) : "undefined");
    put("p_decoy", format_double(obs.p_decoy));
    put("p_signal", format_double(obs.p_signal));
    put("p_vacuum", format_double(obs.p_vacuum));
    return s;
}

ObservedStats observed_from_file(const std::string& path,
                                 Protocol* protocol_out) {
    const KeyValueFile f = KeyValueFile::parse_file(path);
    if (f.get_or("", "format", "") != "dsqkd-observed-v1")
        throw ConfigError(path + ": not a dsqkd-observed-v1 file");
    ObservedStats o;
    o.total_pulses = f.get_double("", "total_pulses");
    o.counts_decoy = f.get_double("", "counts_decoy");
    o.counts_signal = f.get_double("", "counts_signal");
    o.counts_vacuum = f.get_double("", "counts_vacuum");
    if (f.get("", "qber_decoy") != "undefined")
        o.qber_decoy = f.get_double("", "qber_decoy");
    if (f.get("", "qber_signal") != "undefined")
        o.qber_signal = f.get_double("", "qber_signal");
    o.p_decoy = f.get_double("", "p_decoy");
    o.p_signal = f.get_double("", "p_signal");
    o.p_vacuum = f.get_double("", "p_vacuum");
    if (protocol_out) *protocol_out = parse_protocol(f.get("", "protocol"));
    return o;
}

std::string tally_to_text(const Tally& t) {
    std::string s;
    auto put = [&s](const std::string& key, double v) {
        s += key;
        s += " = ";
        s += format_double(v);
        s += "\n";
    };
    put("total_pulses", t.total_pulses);
    put("truncation", t.truncation);
    put("counts_decoy", t.counts_decoy);
    put("counts_signal", t.counts_signal);
    put("counts_vacuum", t.counts_vacuum);
    put("errors_decoy", t.errors_decoy);
    put("errors_signal", t.errors_signal);
    put("errors_vacuum", t.errors_vacuum);
    put("single_errors_decoy", t.single_errors_decoy);
    put("single_errors_signal", t.single_errors_signal);
    for (int k = 0; k <= t.truncation; ++k) {
        put("counts_decoy_k" + std::to_string(k),
            t.counts_decoy_by_k[static_cast<size_t>(k)]);
        put("counts_signal_k" + std::to_string(k),
            t.counts_signal_by_k[static_cast<size_t>(k)]);
    }
    put("counts_decoy_overflow", t.counts_decoy_overflow);
    put("counts_signal_overflow", t.counts_signal_overflow);
    return s;
}

}  // namespace dsqkd
