#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hric/topology.hpp"

using namespace hric;

TEST_SUITE("topology") {

TEST_CASE("build_topology is deterministic and sized") {
    NetworkConfig c;
    c.num_mbs = 1;
    c.num_sbs_per_mbs = 1;
    c.users_per_sbs = 1;
    CHECK(build_topology(c, 42) == build_topology(c, 42));

    NetworkConfig d;  // M=3, N=6, K=2
    const Topology t = build_topology(d, 7);
    CHECK(t.sbs_positions.size() == 18);
    CHECK(t.user_positions.size() == 18 * d.users_per_sbs);
    CHECK(t.subcarrier_index.size() == 18);
    CHECK(t.subcarrier_index[t.sbs_index(2, 4)] == 4);
    CHECK(build_topology(d, 7) != build_topology(d, 8));
}

TEST_CASE("MBS positions distinct and inside the area") {
    NetworkConfig c;
    c.num_mbs = 2;
    const Topology t = build_topology(c, 3);
    REQUIRE(t.mbs_positions.size() == 2);
    CHECK(distance(t.mbs_positions[0], t.mbs_positions[1]) > 1.0);
    for (const Point& p : t.mbs_positions) {
        CHECK(p.x >= 0.0);
        CHECK(p.x <= c.area_side);
        CHECK(p.y >= 0.0);
        CHECK(p.y <= c.area_side);
    }
}

TEST_CASE("SBS ring and user disc radii") {
    NetworkConfig c;
    c.area_side = 10000.0;  // keep reflection out of the way
    const Topology t = build_topology(c, 5);
    for (std::size_t m = 0; m < c.num_mbs; ++m) {
        for (std::size_t n = 0; n < c.num_sbs_per_mbs; ++n) {
            const double d = distance(t.mbs_positions[m], t.sbs(m, n));
            CHECK(d >= c.sbs_ring_min - 1e-9);
            CHECK(d <= c.sbs_ring_max + 1e-9);
            for (std::size_t k = 0; k < c.users_per_sbs; ++k) {
                CHECK(distance(t.sbs(m, n), t.user(m, n, k)) <= c.user_disc_radius + 1e-9);
            }
        }
    }
}

TEST_CASE("gauss_markov_step analytic cases") {
    std::mt19937_64 rng(1);
    MobilityParams p;
    p.memory_alpha_gm = 1.0;
    p.speed_stddev = 0.7;
    const Point v{2.0, -1.0};
    const Point same = gauss_markov_step(v, p, rng);
    CHECK(same.x == doctest::Approx(2.0));
    CHECK(same.y == doctest::Approx(-1.0));

    p.memory_alpha_gm = 0.0;
    p.speed_stddev = 0.0;
    p.mean_speed = 1.5;
    p.mean_direction = 0.0;
    const Point mu = gauss_markov_step(v, p, rng);
    CHECK(mu.x == doctest::Approx(1.5));
    CHECK(mu.y == doctest::Approx(0.0));

    p.memory_alpha_gm = 0.5;
    p.mean_speed = 1.0;
    const Point half = gauss_markov_step({2.0, 0.0}, p, rng);
    CHECK(half.x == doctest::Approx(1.5));
}

TEST_CASE("gauss_markov long-run mean") {
    MobilityParams p;
    p.memory_alpha_gm = 0.9;
    p.mean_speed = 1.5;
    p.speed_stddev = 0.3;
    p.mean_direction = std::numbers::pi / 3.0;
    std::mt19937_64 rng(99);
    const int steps = 100'000;
    Point v{0.0, 0.0};
    for (int i = 0; i < 1000; ++i) v = gauss_markov_step(v, p, rng);  // burn-in
    double sx = 0.0, sy = 0.0;
    for (int i = 0; i < steps; ++i) {
        v = gauss_markov_step(v, p, rng);
        sx += v.x;
        sy += v.y;
    }
    const double a = p.memory_alpha_gm;
    const double se = p.speed_stddev * std::sqrt((1.0 + a) / ((1.0 - a) * steps));
    CHECK(std::abs(sx / steps - 1.5 * std::cos(p.mean_direction)) < 3.0 * se);
    CHECK(std::abs(sy / steps - 1.5 * std::sin(p.mean_direction)) < 3.0 * se);
}

TEST_CASE("advance_users") {
    NetworkConfig c;
    c.num_mbs = 1;
    c.num_sbs_per_mbs = 1;
    c.users_per_sbs = 1;
    c.mobility.memory_alpha_gm = 1.0;
    c.mobility.speed_stddev = 0.0;
    std::mt19937_64 rng(4);

    Topology t = build_topology(c, 1);
    t.user_velocities[0] = {0.0, 0.0};
    const Point before = t.user_positions[0];
    t = advance_users(t, c, rng);
    CHECK(t.user_positions[0] == before);

    t.user_velocities[0] = {1.0, 0.0};
    t.user_positions[0] = {500.0, 500.0};
    t = advance_users(t, c, rng);
    CHECK(t.user_positions[0].x == doctest::Approx(500.2));
    CHECK(t.user_positions[0].y == doctest::Approx(500.0));
}

TEST_CASE("advance_users reproducible and keeps users inside") {
    NetworkConfig c;
    c.mobility.mean_speed = 30.0;  // fast enough to hit walls
    c.mobility.speed_stddev = 5.0;
    const auto run = [&](std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        Topology t = build_topology(c, 2);
        for (int i = 0; i < 500; ++i) {
            t = advance_users(std::move(t), c, rng);
            for (const Point& p : t.user_positions) {
                REQUIRE(p.x >= 0.0);
                REQUIRE(p.x <= c.area_side);
                REQUIRE(p.y >= 0.0);
                REQUIRE(p.y <= c.area_side);
            }
        }
        return t;
    };
    CHECK(run(10) == run(10));
}

TEST_CASE("interference_sources uses the identity sub-carrier rule") {
    NetworkConfig one;
    one.num_mbs = 1;
    CHECK(interference_sources(0, 3, build_topology(one, 1)).empty());

    NetworkConfig three;
    const Topology t = build_topology(three, 1);
    const auto src = interference_sources(0, 2, t);
    REQUIRE(src.size() == 2);
    CHECK(src[0] == SbsId{1, 2});
    CHECK(src[1] == SbsId{2, 2});
    for (std::size_t m = 0; m < 3; ++m) {
        for (std::size_t n = 0; n < 6; ++n) {
            CHECK(interference_sources(m, n, t).size() == 2);
        }
    }
    CHECK_THROWS_AS((void)interference_sources(3, 0, t), std::out_of_range);
}

TEST_CASE("topology text round-trip") {
    NetworkConfig c;
    const Topology t = build_topology(c, 17);
    std::stringstream ss;
    write_topology(ss, t);
    const Topology back = read_topology(ss);
    REQUIRE(back.sbs_positions.size() == t.sbs_positions.size());
    for (std::size_t i = 0; i < t.user_positions.size(); ++i) {
        CHECK(back.user_positions[i].x == t.user_positions[i].x);
        CHECK(back.user_positions[i].y == t.user_positions[i].y);
    }
}

TEST_CASE("network config validation names the key") {
    NetworkConfig c;
    c.backhaul_fraction_alpha = 1.5;
    try {
        c.validate();
        FAIL("expected a validation error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("backhaul_fraction_alpha") != std::string::npos);
    }
    NetworkConfig d;
    d.guidance_period_slots = 0;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    CHECK(NetworkConfig{}.backhaul_link_bandwidth() == doctest::Approx(100e6 * 0.5 / 6));
    CHECK(NetworkConfig{}.access_user_bandwidth() == doctest::Approx(100e6 * 0.5 / 12));
}

}
