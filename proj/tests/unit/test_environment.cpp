#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "hric/environment.hpp"
#include "oracles.hpp"

using namespace hric;
using hric::testing::oracle_total_throughput;
using hric::testing::random_simplex;
using hric::testing::random_snapshot;
using hric::testing::relative_error;

namespace {

NetworkConfig tiny(std::size_t M, std::size_t N, std::size_t K) {
    NetworkConfig c;
    c.num_mbs = M;
    c.num_sbs_per_mbs = N;
    c.users_per_sbs = K;
    return c;
}

std::vector<Action> uniform_actions(const NetworkConfig& c) {
    return std::vector<Action>(c.num_mbs, Action{uniform_simplex(c.num_sbs_per_mbs)});
}

std::vector<double> flat(const std::vector<Action>& actions) {
    std::vector<double> out;
    for (const auto& a : actions) out.insert(out.end(), a.power_ratios.begin(), a.power_ratios.end());
    return out;
}

}  // namespace

TEST_SUITE("environment") {

TEST_CASE("reset is deterministic with uniform initial guidance") {
    const NetworkConfig c;
    const Environment a(c, 5), b(c, 5);
    CHECK(a.observations() == b.observations());
    REQUIRE(a.observations().size() == 3);
    for (const auto& o : a.observations()) {
        CHECK(o.flatten().size() == 24);
        for (double p : o.guidance) CHECK(p == doctest::Approx(1.0 / 6.0));
    }
    const Environment other_episode(c, 5, 1);
    CHECK(other_episode.topology() == a.topology());
}

TEST_CASE("backhaul_rate reductions") {
    std::mt19937_64 rng(3);
    NetworkConfig c = tiny(1, 2, 1);
    const ChannelSnapshot s = random_snapshot(1, 2, 1, rng);
    std::vector<double> powers{0.0, 5.0};
    CHECK(backhaul_rate(0, 0, powers, s, c) == 0.0);
    const double bw = c.backhaul_link_bandwidth();
    const double expected =
        shannon_rate(bw, 5.0 * s.backhaul_link(0, 0, 1).combined(), 0.0, noise_power_watts(bw, c.channel));
    CHECK(backhaul_rate(0, 1, powers, s, c) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("backhaul symmetry for mirrored two-MBS layout") {
    NetworkConfig c = tiny(2, 1, 1);
    ChannelSnapshot s(2, 1, 1);
    for (std::size_t tx = 0; tx < 2; ++tx) {
        for (std::size_t m = 0; m < 2; ++m) {
            s.backhaul_link(tx, m, 0).large_scale_gain_linear = tx == m ? 1e-8 : 1e-11;
        }
    }
    const std::vector<double> powers{10.0, 10.0};
    CHECK(backhaul_rate(0, 0, powers, s, c) == backhaul_rate(1, 0, powers, s, c));
}

TEST_CASE("access_rates reductions and monotonicity") {
    std::mt19937_64 rng(8);
    NetworkConfig c = tiny(1, 1, 1);
    ChannelSnapshot s = random_snapshot(1, 1, 1, rng);
    const double bw = c.access_user_bandwidth();
    const double p = dbm_to_watts(c.sbs_access_power_dbm);
    const auto r = access_rates(0, 0, s, c);
    REQUIRE(r.size() == 1);
    CHECK(r[0] == doctest::Approx(shannon_rate(bw, p * s.access_link(0, 0, 0, 0).combined(), 0.0,
                                               noise_power_watts(bw, c.channel)))
                      .epsilon(1e-14));

    NetworkConfig full_backhaul = tiny(2, 2, 2);
    full_backhaul.backhaul_fraction_alpha = 1.0;
    const ChannelSnapshot s2 = random_snapshot(2, 2, 2, rng);
    for (double v : access_rates(1, 1, s2, full_backhaul)) CHECK(v == 0.0);

    NetworkConfig no_interf = tiny(2, 2, 3);
    no_interf.access_interference = false;
    ChannelSnapshot s3 = random_snapshot(2, 2, 3, rng);
    const auto base = access_rates(0, 1, s3, no_interf);
    for (auto& l : s3.access) l.large_scale_gain_linear *= 2.0;
    const auto doubled = access_rates(0, 1, s3, no_interf);
    for (std::size_t k = 0; k < 3; ++k) CHECK(doubled[k] > base[k]);
}

TEST_CASE("step matches the throughput oracle on frozen instances") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t M = 1 + trial % 2, N = 1 + (trial / 2) % 2, K = 1 + (trial / 4) % 2;
        NetworkConfig c = tiny(M, N, K);
        c.backhaul_fraction_alpha = 0.2 + 0.03 * trial;
        Environment env(c, 100 + trial);
        const ChannelSnapshot s = random_snapshot(M, N, K, rng);
        env.set_snapshot(s);
        std::vector<Action> actions;
        for (std::size_t m = 0; m < M; ++m) actions.push_back({random_simplex(N, rng)});
        std::vector<double> per_mbs;
        const double expected = oracle_total_throughput(s, c, flat(actions), &per_mbs);
        const StepOutcome out = env.step(actions);
        CHECK(relative_error(out.total_throughput, expected) < 1e-12);
        for (std::size_t m = 0; m < M; ++m) CHECK(relative_error(out.per_mbs_throughput[m], per_mbs[m]) < 1e-12);
    }
}

TEST_CASE("zero power SBS contributes nothing") {
    std::mt19937_64 rng(5);
    NetworkConfig c = tiny(1, 3, 2);
    Environment env(c, 1);
    env.set_snapshot(random_snapshot(1, 3, 2, rng));
    const StepOutcome out = env.step(std::vector<Action>{{{0.0, 0.5, 0.5}}});
    CHECK(out.per_sbs_backhaul_rate[0] == 0.0);
    const double t = std::min(out.per_sbs_backhaul_rate[1], out.per_sbs_access_sum[1]) +
                     std::min(out.per_sbs_backhaul_rate[2], out.per_sbs_access_sum[2]);
    CHECK(out.total_throughput == doctest::Approx(t).epsilon(1e-14));
}

TEST_CASE("reward decomposition") {
    NetworkConfig one = tiny(1, 2, 1);
    Environment env1(one, 3);
    const StepOutcome a = env1.step(uniform_actions(one));
    CHECK(a.rewards[0] == doctest::Approx(2.0 * a.per_mbs_throughput[0] / one.total_bandwidth_hz).epsilon(1e-14));

    NetworkConfig c;
    Environment env(c, 3);
    const StepOutcome out = env.step(uniform_actions(c));
    const double shared = out.rewards[0] - out.per_mbs_throughput[0] / c.total_bandwidth_hz;
    for (std::size_t m = 1; m < c.num_mbs; ++m) {
        CHECK(out.rewards[m] - out.per_mbs_throughput[m] / c.total_bandwidth_hz ==
              doctest::Approx(shared).epsilon(1e-12));
    }
}

TEST_CASE("min coupling caps each SBS at its backhaul rate") {
    std::mt19937_64 rng(9);
    NetworkConfig c = tiny(2, 2, 2);
    for (int i = 0; i < 10; ++i) {
        Environment env(c, i);
        ChannelSnapshot s = random_snapshot(2, 2, 2, rng);
        for (auto& l : s.access) l.large_scale_gain_linear *= 1e4;  // access-rich
        env.set_snapshot(s);
        const StepOutcome out = env.step(uniform_actions(c));
        double backhaul_sum = 0.0;
        for (double r : out.per_sbs_backhaul_rate) backhaul_sum += r;
        CHECK(out.total_throughput <= backhaul_sum * (1.0 + 1e-12));
    }
}

TEST_CASE("bandwidth partition extremes give zero throughput") {
    for (double alpha : {0.0, 1.0}) {
        NetworkConfig c;
        c.backhaul_fraction_alpha = alpha;
        Environment env(c, 4);
        const StepOutcome out = env.step(uniform_actions(c));
        CHECK(out.total_throughput == 0.0);
    }
}

TEST_CASE("realized power sums to the MBS budget") {
    NetworkConfig c;
    std::mt19937_64 rng(1);
    std::vector<Action> actions;
    for (std::size_t m = 0; m < c.num_mbs; ++m) actions.push_back({random_simplex(c.num_sbs_per_mbs, rng)});
    const auto powers = mbs_transmit_powers(actions, c);
    for (std::size_t m = 0; m < c.num_mbs; ++m) {
        double sum = 0.0;
        for (std::size_t n = 0; n < c.num_sbs_per_mbs; ++n) sum += powers[m * c.num_sbs_per_mbs + n];
        CHECK(relative_error(sum, dbm_to_watts(c.mbs_max_power_dbm)) < 1e-6);
    }
}

TEST_CASE("step rejects off-simplex actions") {
    NetworkConfig c;
    Environment env(c, 1);
    auto actions = uniform_actions(c);
    actions[1].power_ratios[0] += 0.1;
    CHECK_THROWS_AS((void)env.step(actions), ContractError);
    actions.pop_back();
    CHECK_THROWS_AS((void)env.step(actions), ContractError);
}

TEST_CASE("install_guidance echoes rows and rejects bad ones") {
    NetworkConfig c;
    Environment env(c, 1);
    env.install_guidance(GuidancePolicy::uniform(3, 6));
    for (const auto& o : env.observations()) {
        for (double p : o.guidance) CHECK(p == doctest::Approx(1.0 / 6.0));
    }
    const std::vector<double> row{0.5, 0.5, 0.0, 0.0, 0.0, 0.0};
    env.install_guidance(GuidancePolicy({row, row, row}));
    CHECK(env.observations()[2].guidance == row);
    const std::vector<double> short_row{0.4, 0.4, 0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(GuidancePolicy({short_row, row, row}), ContractError);
    CHECK_THROWS_AS(env.install_guidance(GuidancePolicy::uniform(2, 6)), ContractError);
}

TEST_CASE("observation statistics") {
    std::mt19937_64 rng(12);
    NetworkConfig c = tiny(3, 2, 2);
    Environment env(c, 2);
    ChannelSnapshot s = random_snapshot(3, 2, 2, rng);
    env.set_snapshot(s);
    const GuidanceInput one = env.observation_statistics(10);
    for (std::size_t m = 0; m < 3; ++m) {
        for (std::size_t n = 0; n < 2; ++n) {
            const auto& e = one.at(m, n);
            CHECK(e.avg_channel_gain == doctest::Approx(s.backhaul_link(m, m, n).large_scale_gain_linear));
            CHECK(e.connected_users == 2);
            CHECK(e.interference.size() == 2);
        }
    }

    GuidanceInput g1 = one, g3 = one;
    for (auto& e : g3.sbs) e.avg_channel_gain *= 3.0;
    const std::vector<GuidanceInput> window{g1, g3};
    const GuidanceInput avg = average_inputs(window);
    CHECK(avg.at(1, 1).avg_channel_gain == doctest::Approx(2.0 * g1.at(1, 1).avg_channel_gain));
    const std::vector<GuidanceInput> constant{g1, g1, g1};
    CHECK(average_inputs(constant).at(0, 0).avg_channel_gain == doctest::Approx(g1.at(0, 0).avg_channel_gain));
}

TEST_CASE("episodes differ in dynamics but not deployment") {
    NetworkConfig c;
    Environment a(c, 9, 0), b(c, 9, 1);
    const auto actions = uniform_actions(c);
    const double ta = a.step(actions).total_throughput;
    const double tb = b.step(actions).total_throughput;
    CHECK(ta != tb);
}

TEST_CASE("step metrics CSV") {
    std::ostringstream out;
    StepMetricsWriter writer(out);
    NetworkConfig c;
    Environment env(c, 1);
    writer.write(0, 0, env.step(uniform_actions(c)), 0.5, 1);
    const std::string text = out.str();
    CHECK(text.rfind("epoch,slot,m,throughput_bps,reward,alpha,seed\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}

}
