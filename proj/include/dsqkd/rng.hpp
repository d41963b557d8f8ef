#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace dsqkd {

// All randomness flows from one master seed through named sub-streams
// (source-choice, photon-number, click, error, fluctuation), so each
// component stays reproducible independently of the others.
class RngStream {
  public:
    RngStream(std::uint64_t master_seed, std::string_view name)
        : engine_(derive_seed(master_seed, name)) {}

    std::mt19937_64& engine() { return engine_; }

    double uniform01() {
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
    }

    // Uniform on [-bound, bound].
    double uniform_symmetric(double bound) {
        if (bound == 0.0) return 0.0;
        return std::uniform_real_distribution<double>(-bound, bound)(engine_);
    }

    static std::uint64_t derive_seed(std::uint64_t master,
                                     std::string_view name) {
        // FNV-1a over the stream name, mixed with the master seed via
        // splitmix64 finalization.
        std::uint64_t h = 14695981039346656037ull;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        std::uint64_t z = master + 0x9e3779b97f4a7c15ull + h;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace dsqkd
