#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "gradcheck.hpp"

using namespace hric;
using namespace hric::testing;

TEST_SUITE("agent") {

TEST_CASE("actor output examples") {
    constexpr std::size_t N = 6;
    MlpD actor({4 * N, 16, 16, N});
    std::mt19937_64 rng(1);
    const MatD states = random_matrix(4 * N, 5, rng);
    const MatD zero = actor_forward<double>(actor, states);
    for (Eigen::Index i = 0; i < zero.size(); ++i) CHECK(zero.data()[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));

    actor.initialize(rng, false);
    const MatD before = actor_forward<double>(actor, states);
    actor.bias(2).array() += 3.7;
    const MatD after = actor_forward<double>(actor, states);
    CHECK((before - after).cwiseAbs().maxCoeff() < 1e-12);

    for (int trial = 0; trial < 50; ++trial) {
        actor.initialize(rng, false);
        const MatD a = actor_forward<double>(actor, random_matrix(4 * N, 8, rng));
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            CHECK(std::abs(a.col(c).sum() - 1.0) < 1e-9);
            CHECK(a.col(c).minCoeff() > 0.0);
            CHECK(a.col(c).maxCoeff() < 1.0);
        }
    }
}

TEST_CASE("action floor keeps every share above floor / N") {
    constexpr std::size_t N = 6;
    MlpD actor({4 * N, 16, 16, N});
    std::mt19937_64 rng(4);
    const MatD states = random_matrix(4 * N, 5, rng);
    const MatD zero = actor_forward<double>(actor, states, 0.1);
    for (Eigen::Index i = 0; i < zero.size(); ++i) CHECK(zero.data()[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));

    actor.initialize(rng, false);
    actor.bias(2)(0) += 50.0;  // saturate towards SBS 0
    const MatD a = actor_forward<double>(actor, states, 0.1);
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        CHECK(std::abs(a.col(c).sum() - 1.0) < 1e-12);
        CHECK(a.col(c).minCoeff() >= 0.1 / 6.0 - 1e-15);
    }
    const MatD raw = actor_forward<double>(actor, states);
    CHECK((a - (0.9 * raw.array() + 0.1 / 6.0).matrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("reward scale multiplies the regression target") {
    AgentConfig config;
    config.discount_gamma = 0.0;
    config.reward_scale = 0.05;
    config.batch_size = 1;
    config.buffer_capacity = 1;
    config.hidden_width = 16;
    BasicDdpgAgent<double> agent(3, config, 9);
    const Transition t = fixed_transition(3, 40.0);
    const MatD s = Eigen::Map<const MatD>(t.state.data(), 12, 1);
    const MatD a = Eigen::Map<const MatD>(t.action.data(), 3, 1);
    const MatD q = critic_forward<double>(agent.critic(), s, a);
    const std::vector<const Transition*> batch{&t};
    CHECK(agent.train_step(batch).critic_loss == doctest::Approx((q(0, 0) - 2.0) * (q(0, 0) - 2.0)).epsilon(1e-12));
}

TEST_CASE("actor rejects a wrong state length") {
    DdpgAgent agent(6, AgentConfig{}, 1);
    const std::vector<double> bad(10, 0.0);
    CHECK_THROWS_AS((void)agent.act(bad), std::invalid_argument);
}

TEST_CASE("critic output examples") {
    constexpr std::size_t N = 3;
    MlpD critic({5 * N, 16, 16, 1});
    std::mt19937_64 rng(2);
    const MatD s = random_matrix(4 * N, 4, rng), a = random_actions(N, 4, rng);
    CHECK(critic_forward<double>(critic, s, a).cwiseAbs().maxCoeff() == 0.0);

    critic.initialize(rng, false);
    critic.bias(2).setZero();
    const MatD q = critic_forward<double>(critic, s, a);
    critic.weight(2) *= 2.0;
    const MatD q2 = critic_forward<double>(critic, s, a);
    CHECK((q2 - 2.0 * q).cwiseAbs().maxCoeff() < 1e-12);

    // |Q(x) - Q(y)| <= prod ||W_l||_2 * ||x - y|| since ReLU is 1-Lipschitz.
    for (int trial = 0; trial < 20; ++trial) {
        critic.initialize(rng, false);
        double bound = 1.0;
        for (std::size_t l = 0; l < critic.num_layers(); ++l) {
            Eigen::JacobiSVD<MatD> svd(MatD(critic.weight(l)));
            bound *= svd.singularValues()(0);
        }
        const MatD s2 = s + random_matrix(4 * N, 4, rng, 0.1);
        const MatD a2 = random_actions(N, 4, rng);
        const MatD dq = critic_forward<double>(critic, s2, a2) - critic_forward<double>(critic, s, a);
        for (Eigen::Index c = 0; c < 4; ++c) {
            MatD dx(5 * N, 1);
            dx << s2.col(c) - s.col(c), a2.col(c) - a.col(c);
            CHECK(std::abs(dq(0, c)) <= bound * dx.norm() * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("analytic gradients match finite differences") {
    for (const double floor : {0.0, 0.1}) {
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const GradientErrors e = gradient_check(seed, 16, floor);
            CHECK(e.critic < 1e-4);
            CHECK(e.actor < 1e-4);
        }
    }
}

TEST_CASE("repeated training on one transition overfits the critic") {
    CHECK(overfit_one_transition() < 1e-4);
}

TEST_CASE("gamma zero makes the target the reward") {
    AgentConfig config;
    config.discount_gamma = 0.0;
    config.reward_scale = 1.0;
    config.batch_size = 1;
    config.buffer_capacity = 1;
    config.hidden_width = 16;
    BasicDdpgAgent<double> agent(3, config, 9);
    const Transition t = fixed_transition(3, 2.5);
    const MatD s = Eigen::Map<const MatD>(t.state.data(), 12, 1);
    const MatD a = Eigen::Map<const MatD>(t.action.data(), 3, 1);
    const MatD q = critic_forward<double>(agent.critic(), s, a);
    const MatD y = MatD::Constant(1, 1, 2.5);
    std::vector<double> grad(agent.critic().parameter_count());
    const double expected = critic_loss_gradient<double>(agent.critic(), s, a, y, grad);
    const std::vector<const Transition*> batch{&t};
    CHECK(agent.train_step(batch).critic_loss == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx((q(0, 0) - 2.5) * (q(0, 0) - 2.5)).epsilon(1e-12));
}

TEST_CASE("replay buffer") {
    ReplayBuffer ring(3);
    for (int i = 0; i < 4; ++i) ring.push(fixed_transition(1, i));
    CHECK(ring.size() == 3);
    CHECK(ring.at(0).reward == 3.0);
    CHECK(ring.at(1).reward == 1.0);

    std::mt19937_64 rng(3);
    CHECK_FALSE(ring.sample(4, rng).has_value());

    std::mt19937_64 r1(11), r2(11);
    const auto b1 = *ring.sample(3, r1), b2 = *ring.sample(3, r2);
    CHECK(b1 == b2);

    constexpr int K = 10;
    ReplayBuffer buffer(K);
    for (int i = 0; i < K; ++i) buffer.push(fixed_transition(1, i));
    std::vector<int> counts(K, 0);
    std::mt19937_64 draw(12);
    for (int i = 0; i < 10000; ++i) {
        const auto batch = buffer.sample(10, draw);
        for (const Transition* t : *batch) ++counts[static_cast<int>(t->reward)];
    }
    double chi2 = 0.0;
    const double expected = 1e5 / K;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 27.88);  // chi-square, 9 dof, p = 0.001
}

TEST_CASE("agent train is a no-op while the buffer is underfull") {
    AgentConfig config;
    config.batch_size = 4;
    config.buffer_capacity = 8;
    config.hidden_width = 8;
    DdpgAgent agent(2, config, 1);
    agent.remember(fixed_transition(2, 1.0));
    const auto before = agent.actor();
    CHECK_FALSE(agent.train().has_value());
    CHECK(agent.actor() == before);
    for (int i = 0; i < 3; ++i) agent.remember(fixed_transition(2, 1.0));
    CHECK(agent.train().has_value());
}

TEST_CASE("adam and soft update") {
    AdamState<double> state(1);
    std::vector<double> p{0.0};
    const std::vector<double> g{1.0};
    adam_step<double>(state, p, g, 1e-4);
    CHECK(p[0] == doctest::Approx(-1e-4 / (1.0 + 1e-8)).epsilon(1e-12));

    AdamState<double> still(2);
    std::vector<double> q{1.0, 2.0};
    const std::vector<double> zero{0.0, 0.0};
    for (int i = 0; i < 5; ++i) adam_step<double>(still, q, zero, 1e-2);
    CHECK(q == std::vector<double>{1.0, 2.0});

    AdamState<double> a(1), b(1);
    std::vector<double> pa{0.5}, pb{0.5};
    adam_step<double>(a, pa, g, 1e-3);
    adam_step<double>(b, pb, g, 1e-3);
    CHECK(pa == pb);
    CHECK(a == b);

    const std::vector<double> nan{std::nan("")};
    const auto saved = a;
    CHECK_THROWS_AS(adam_step<double>(a, pa, nan, 1e-3), std::domain_error);
    CHECK(a == saved);

    std::vector<double> target{0.0};
    const std::vector<double> online{2.0};
    soft_update<double>(target, online, 0.5);
    CHECK(target[0] == 1.0);
    soft_update<double>(target, online, 1.0);
    CHECK(target[0] == 2.0);
    std::vector<double> kept{3.0};
    soft_update<double>(kept, online, 0.0);
    CHECK(kept[0] == 3.0);
}

TEST_CASE("agent config validation") {
    AgentConfig c;
    c.discount_gamma = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = AgentConfig{};
    c.buffer_capacity = 10;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = AgentConfig{};
    c.action_floor = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = AgentConfig{};
    c.reward_scale = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

}
