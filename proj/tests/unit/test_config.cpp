#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "hric/config.hpp"

using namespace hric;

TEST_SUITE("config") {

TEST_CASE("empty text gives the default scenario") {
    const ExperimentConfig c = parse_config("");
    CHECK(c == ExperimentConfig::defaults(Profile::Desk));
    CHECK(c.scenario.num_mbs == 3);
    CHECK(c.scenario.num_sbs_per_mbs == 6);
    CHECK(c.scenario.users_per_sbs == 2);
    CHECK(c.scenario.backhaul_fraction_alpha == 0.5);
    CHECK(c.scenario.mbs_max_power_dbm == 44.0);
    CHECK(c.epochs == 200);
    CHECK(c.schedule.total_epochs() == 200);
    CHECK(parse_config("{}") == c);
}

TEST_CASE("out-of-range alpha names the key and bound") {
    try {
        (void)parse_config(R"({"scenario": {"backhaul_fraction_alpha": 1.5}})");
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("scenario.backhaul_fraction_alpha") != std::string::npos);
        CHECK(msg.find("[0, 1]") != std::string::npos);
    }
}

TEST_CASE("dump and parse round-trip") {
    ExperimentConfig c = ExperimentConfig::defaults(Profile::Paper);
    c.scenario.backhaul_fraction_alpha = 0.3;
    c.methods = {"hric", "hric-fixed-w0.9"};
    c.seeds = {11, 12};
    c.agent.hidden_width = 64;
    CHECK(parse_config(dump_config(c)) == c);
    CHECK(config_hash(parse_config(dump_config(c))) == config_hash(c));
    CHECK(config_hash(c) != config_hash(ExperimentConfig::defaults(Profile::Desk)));
}

TEST_CASE("unknown keys and wrong types are rejected with a path") {
    CHECK_THROWS_WITH_AS((void)parse_config(R"({"agent": {"hidden": 3}})"), doctest::Contains("agent.hidden"),
                         std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)parse_config(R"({"epochs": "many"})"), doctest::Contains("epochs"),
                         std::invalid_argument);
    CHECK_THROWS_AS((void)parse_config("{not json"), std::invalid_argument);
}

TEST_CASE("epochs override rescales the phases") {
    const ExperimentConfig c = parse_config(R"({"epochs": 50})");
    CHECK(c.schedule.total_epochs() == 50);
    CHECK(c.schedule.phase1_epochs == 10);
}

TEST_CASE("profiles") {
    CHECK(parse_config(R"({"profile": "paper"})").epochs == 500);
    CHECK(ExperimentConfig::defaults(Profile::Paper).scenario.episode_slots == 50);
}

TEST_CASE("load_config reads a file") {
    const auto path = std::filesystem::temp_directory_path() / "hric_config_test.json";
    std::ofstream(path) << R"({"seeds": [3]})";
    CHECK(load_config(path).seeds == std::vector<std::uint64_t>{3});
    std::filesystem::remove(path);
    CHECK_THROWS((void)load_config(path));
}

}
