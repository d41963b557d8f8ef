#include "dsqkd/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace dsqkd {

void ChannelParams::validate() const {
    auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!prob(eta_bob) || !prob(d_B) || !prob(e_det) || !prob(e_0))
        throw std::invalid_argument("channel probabilities must be in [0,1]");
    if (alpha_db_per_km < 0.0 || distance_km < 0.0)
        throw std::invalid_argument("alpha and distance must be >= 0");
}

ChannelParams peng50km_like() {
    ChannelParams p;
    p.distance_km = 50.0;
    p.alpha_db_per_km = 0.2;
    p.eta_bob = 0.045;
    p.d_B = 1.0e-5;
    p.e_det = 0.015;
    p.e_0 = 0.5;
    return p;
}

double transmittance(const ChannelParams& params) {
    return params.eta_bob *
           std::pow(10.0, -params.alpha_db_per_km * params.distance_km / 10.0);
}

double yield_k(int k, const ChannelParams& params) {
    if (k < 0) throw std::invalid_argument("yield_k: k < 0");
    if (k == 0) return params.d_B;  // exact: only dark counts
    const double eta = transmittance(params);
    return 1.0 - (1.0 - params.d_B) * std::pow(1.0 - eta, k);
}

double error_prob_k(int k, const ChannelParams& params) {
    const double yk = yield_k(k, params);
    if (yk <= 0.0) return params.e_0;  // no clicks; value never weighted
    const double e =
        (params.e_0 * params.d_B + params.e_det * (yk - params.d_B)) / yk;
    return e;
}

}  // namespace dsqkd
