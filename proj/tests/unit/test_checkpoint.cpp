#include <doctest.h>

#include <sstream>
#include <stdexcept>

#include "hric/checkpoint.hpp"
#include "hric/trainer.hpp"

using namespace hric;

TEST_SUITE("checkpoint") {

TEST_CASE("save and load restore bit-identical actions") {
    TrainingSetup setup;
    setup.scenario.num_mbs = 2;
    setup.scenario.num_sbs_per_mbs = 3;
    setup.scenario.episode_slots = 5;
    setup.agent.batch_size = 4;
    setup.agent.buffer_capacity = 32;
    setup.agent.hidden_width = 8;
    setup.epochs = 3;
    setup.schedule = PhaseSchedule::proportional(3);
    HeuristicProvider provider;
    const auto trained = run_training(setup, Method::parse("dln"), 1, provider);

    std::stringstream buf;
    write_checkpoint(buf, trained.agents);
    const LoadedCheckpoint loaded = read_checkpoint(buf);
    REQUIRE(loaded.agents.size() == 2);
    CHECK(loaded.buffers[0].size == 15);
    CHECK(loaded.buffers[0].capacity == 32);

    const std::vector<double> features(12, 0.3);
    for (std::size_t m = 0; m < 2; ++m) {
        CHECK(loaded.agents[m].act(features) == trained.agents[m].act(features));
        CHECK(loaded.agents[m].actor() == trained.agents[m].actor());
        CHECK(loaded.agents[m].target_critic() == trained.agents[m].target_critic());
        CHECK(loaded.agents[m].critic_optimizer() == trained.agents[m].critic_optimizer());
        CHECK(loaded.agents[m].rng() == trained.agents[m].rng());
        CHECK(loaded.agents[m].config() == trained.agents[m].config());
    }
}

TEST_CASE("corrupt checkpoints are rejected") {
    std::stringstream bad("NOTACKPT and more");
    CHECK_THROWS_AS((void)read_checkpoint(bad), std::runtime_error);

    const std::vector<DdpgAgent> agents{DdpgAgent(2, AgentConfig{.batch_size = 2, .buffer_capacity = 4, .hidden_width = 4}, 1)};
    std::stringstream good;
    write_checkpoint(good, agents);
    const std::string bytes = good.str();
    std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS((void)read_checkpoint(truncated), std::runtime_error);
}

}
