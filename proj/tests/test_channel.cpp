#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dsqkd/channel.hpp"

using namespace dsqkd;

TEST_CASE("transmittance") {
    ChannelParams p;
    p.distance_km = 0.0;
    p.eta_bob = 0.1;
    CHECK(transmittance(p) == doctest::Approx(0.1).epsilon(1e-15));

    p.distance_km = 50.0;
    p.alpha_db_per_km = 0.2;
    p.eta_bob = 1.0;
    CHECK(transmittance(p) == doctest::Approx(0.1).epsilon(1e-12));

    p.eta_bob = 0.0;
    CHECK(transmittance(p) == 0.0);
}

TEST_CASE("yield_k") {
    ChannelParams p = peng50km_like();
    CHECK(yield_k(0, p) == p.d_B);

    ChannelParams unit;
    unit.distance_km = 0.0;
    unit.eta_bob = 0.1;
    unit.d_B = 1e-5;
    CHECK(yield_k(1, unit) ==
          doctest::Approx(1.0 - (1.0 - 1e-5) * 0.9).epsilon(1e-12));
    CHECK(yield_k(500, unit) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("error_prob_k") {
    ChannelParams p;
    p.distance_km = 0.0;
    p.eta_bob = 0.1;
    p.d_B = 1e-5;
    p.e_det = 0.01;
    CHECK(error_prob_k(0, p) == doctest::Approx(0.5).epsilon(1e-12));

    ChannelParams no_dark = p;
    no_dark.d_B = 0.0;
    CHECK(error_prob_k(1, no_dark) == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(error_prob_k(7, no_dark) == doctest::Approx(0.01).epsilon(1e-12));

    // [e_0 d_B + e_det (Y_1 - d_B)] / Y_1 evaluated directly.
    const double y1 = yield_k(1, p);
    CHECK(error_prob_k(1, p) ==
          doctest::Approx((0.5 * 1e-5 + 0.01 * (y1 - 1e-5)) / y1)
              .epsilon(1e-12));
}

TEST_CASE("channel outputs stay in range over random parameters") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        ChannelParams p;
        p.distance_km = 200.0 * u(rng);
        p.alpha_db_per_km = 0.5 * u(rng);
        p.eta_bob = u(rng);
        p.d_B = 0.01 * u(rng);
        p.e_det = 0.4 * u(rng);
        double prev_y = -1.0;
        double prev_e = 2.0;
        for (int k = 0; k <= 12; ++k) {
            const double y = yield_k(k, p);
            const double e = error_prob_k(k, p);
            CHECK(y >= 0.0);
            CHECK(y <= 1.0);
            CHECK(e >= 0.0);
            CHECK(e <= 1.0);
            CHECK(y >= prev_y);           // nondecreasing
            CHECK(e <= prev_e + 1e-15);   // nonincreasing for e_det < e_0
            prev_y = y;
            prev_e = e;
        }
    }
}
