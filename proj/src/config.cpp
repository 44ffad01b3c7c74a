#include "hric/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "hric/guidance.hpp"

namespace hric {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument(path + ": " + what);
}

std::string_view to_string(Profile profile) noexcept { return profile == Profile::Paper ? "paper" : "desk"; }

json to_json(const ExperimentConfig& c) {
    const NetworkConfig& s = c.scenario;
    const ChannelParams& ch = s.channel;
    const MobilityParams& mo = s.mobility;
    const PhaseSchedule& ps = c.schedule;
    const LlmEndpointConfig& ep = c.endpoint;
    return json{
        {"profile", to_string(c.profile)},
        {"scenario",
         {{"num_mbs", s.num_mbs},
          {"num_sbs_per_mbs", s.num_sbs_per_mbs},
          {"users_per_sbs", s.users_per_sbs},
          {"total_bandwidth_hz", s.total_bandwidth_hz},
          {"backhaul_fraction_alpha", s.backhaul_fraction_alpha},
          {"mbs_max_power_dbm", s.mbs_max_power_dbm},
          {"sbs_access_power_dbm", s.sbs_access_power_dbm},
          {"area_side", s.area_side},
          {"sbs_ring_min", s.sbs_ring_min},
          {"sbs_ring_max", s.sbs_ring_max},
          {"user_disc_radius", s.user_disc_radius},
          {"access_los_resample_distance", s.access_los_resample_distance},
          {"slot_duration", s.slot_duration},
          {"guidance_period_slots", s.guidance_period_slots},
          {"episode_slots", s.episode_slots},
          {"backhaul_interference", s.backhaul_interference},
          {"access_interference", s.access_interference},
          {"fading_enabled", s.fading_enabled},
          {"channel",
           {{"los_range_constant_rho", ch.los_range_constant_rho},
            {"pathloss_exponent_los", ch.pathloss_exponent_los},
            {"pathloss_exponent_nlos", ch.pathloss_exponent_nlos},
            {"reference_loss_db", ch.reference_loss_db},
            {"nakagami_shape_los", ch.nakagami_shape_los},
            {"nakagami_shape_nlos", ch.nakagami_shape_nlos},
            {"noise_density_dbm_per_hz", ch.noise_density_dbm_per_hz},
            {"noise_figure_db", ch.noise_figure_db},
            {"min_distance", ch.min_distance}}},
          {"mobility",
           {{"memory_alpha_gm", mo.memory_alpha_gm},
            {"mean_speed", mo.mean_speed},
            {"speed_stddev", mo.speed_stddev},
            {"mean_direction", mo.mean_direction}}}}},
        {"agent",
         {{"learning_rate", c.agent.learning_rate},
          {"batch_size", c.agent.batch_size},
          {"discount_gamma", c.agent.discount_gamma},
          {"soft_update_tau", c.agent.soft_update_tau},
          {"buffer_capacity", c.agent.buffer_capacity},
          {"hidden_width", c.agent.hidden_width},
          {"reward_scale", c.agent.reward_scale},
          {"action_floor", c.agent.action_floor}}},
        {"schedule",
         {{"phase1_epochs", ps.phase1_epochs},
          {"phase2_epochs", ps.phase2_epochs},
          {"phase3_epochs", ps.phase3_epochs},
          {"w_start", ps.w_start},
          {"w_end", ps.w_end},
          {"noise_sigma_start", ps.noise_sigma_start},
          {"noise_sigma_end", ps.noise_sigma_end}}},
        {"methods", c.methods},
        {"seeds", c.seeds},
        {"epochs", c.epochs},
        {"exploration_sigma0", c.exploration_sigma0},
        {"guidance_provider", to_string(c.provider)},
        {"endpoint",
         {{"base_url", ep.base_url},
          {"model_name", ep.model_name},
          {"temperature", ep.temperature},
          {"top_p", ep.top_p},
          {"timeout_seconds", ep.timeout_seconds},
          {"max_retries", ep.max_retries},
          {"api_key_env_var", ep.api_key_env_var}}},
        {"output_dir", c.output_dir.string()},
        {"alpha_grid", c.alpha_grid},
        {"test_drops", c.test_drops},
        {"bench_samples", c.bench_samples},
    };
}

// Copies `user` over `base`, rejecting unknown keys and kind mismatches.
void overlay(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) {
        fail(path.empty() ? "<root>" : path, "expected an object");
    }
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) {
            fail(key, "unknown key");
        }
        json& slot = base[it.key()];
        const json& value = it.value();
        if (slot.is_object()) {
            overlay(slot, value, key);
        } else if (slot.is_boolean()) {
            if (!value.is_boolean()) fail(key, "expected true or false");
            slot = value;
        } else if (slot.is_number_unsigned() || slot.is_number_integer()) {
            if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
                fail(key, "expected a non-negative integer");
            }
            slot = value;
        } else if (slot.is_number()) {
            if (!value.is_number()) fail(key, "expected a number");
            slot = value.get<double>();
        } else if (slot.is_string()) {
            if (!value.is_string()) fail(key, "expected a string");
            slot = value;
        } else if (slot.is_array()) {
            if (!value.is_array()) fail(key, "expected a list");
            slot = value;
        }
    }
}

template <typename T>
std::vector<T> read_list(const json& j, const std::string& key) {
    std::vector<T> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const json& v = j[i];
        const std::string path = key + "[" + std::to_string(i) + "]";
        if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(path, "expected a string");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_unsigned()) fail(path, "expected a non-negative integer");
        } else {
            if (!v.is_number()) fail(path, "expected a number");
        }
        out.push_back(v.get<T>());
    }
    return out;
}

Profile parse_profile(std::string_view name) {
    if (name == "desk") return Profile::Desk;
    if (name == "paper") return Profile::Paper;
    fail("profile", "expected desk or paper");
}

ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    c.profile = parse_profile(j["profile"].get<std::string>());
    const json& s = j["scenario"];
    NetworkConfig& n = c.scenario;
    n.num_mbs = s["num_mbs"];
    n.num_sbs_per_mbs = s["num_sbs_per_mbs"];
    n.users_per_sbs = s["users_per_sbs"];
    n.total_bandwidth_hz = s["total_bandwidth_hz"];
    n.backhaul_fraction_alpha = s["backhaul_fraction_alpha"];
    n.mbs_max_power_dbm = s["mbs_max_power_dbm"];
    n.sbs_access_power_dbm = s["sbs_access_power_dbm"];
    n.area_side = s["area_side"];
    n.sbs_ring_min = s["sbs_ring_min"];
    n.sbs_ring_max = s["sbs_ring_max"];
    n.user_disc_radius = s["user_disc_radius"];
    n.access_los_resample_distance = s["access_los_resample_distance"];
    n.slot_duration = s["slot_duration"];
    n.guidance_period_slots = s["guidance_period_slots"];
    n.episode_slots = s["episode_slots"];
    n.backhaul_interference = s["backhaul_interference"];
    n.access_interference = s["access_interference"];
    n.fading_enabled = s["fading_enabled"];
    const json& ch = s["channel"];
    n.channel.los_range_constant_rho = ch["los_range_constant_rho"];
    n.channel.pathloss_exponent_los = ch["pathloss_exponent_los"];
    n.channel.pathloss_exponent_nlos = ch["pathloss_exponent_nlos"];
    n.channel.reference_loss_db = ch["reference_loss_db"];
    n.channel.nakagami_shape_los = ch["nakagami_shape_los"];
    n.channel.nakagami_shape_nlos = ch["nakagami_shape_nlos"];
    n.channel.noise_density_dbm_per_hz = ch["noise_density_dbm_per_hz"];
    n.channel.noise_figure_db = ch["noise_figure_db"];
    n.channel.min_distance = ch["min_distance"];
    const json& mo = s["mobility"];
    n.mobility.memory_alpha_gm = mo["memory_alpha_gm"];
    n.mobility.mean_speed = mo["mean_speed"];
    n.mobility.speed_stddev = mo["speed_stddev"];
    n.mobility.mean_direction = mo["mean_direction"];

    const json& a = j["agent"];
    c.agent.learning_rate = a["learning_rate"];
    c.agent.batch_size = a["batch_size"];
    c.agent.discount_gamma = a["discount_gamma"];
    c.agent.soft_update_tau = a["soft_update_tau"];
    c.agent.buffer_capacity = a["buffer_capacity"];
    c.agent.hidden_width = a["hidden_width"];
    c.agent.reward_scale = a["reward_scale"];
    c.agent.action_floor = a["action_floor"];

    const json& ps = j["schedule"];
    c.schedule.phase1_epochs = ps["phase1_epochs"];
    c.schedule.phase2_epochs = ps["phase2_epochs"];
    c.schedule.phase3_epochs = ps["phase3_epochs"];
    c.schedule.w_start = ps["w_start"];
    c.schedule.w_end = ps["w_end"];
    c.schedule.noise_sigma_start = ps["noise_sigma_start"];
    c.schedule.noise_sigma_end = ps["noise_sigma_end"];

    c.methods = read_list<std::string>(j["methods"], "methods");
    c.seeds = read_list<std::uint64_t>(j["seeds"], "seeds");
    c.epochs = j["epochs"];
    c.exploration_sigma0 = j["exploration_sigma0"];
    c.provider = parse_provider(j["guidance_provider"].get<std::string>());

    const json& ep = j["endpoint"];
    c.endpoint.base_url = ep["base_url"];
    c.endpoint.model_name = ep["model_name"];
    c.endpoint.temperature = ep["temperature"];
    c.endpoint.top_p = ep["top_p"];
    c.endpoint.timeout_seconds = ep["timeout_seconds"];
    c.endpoint.max_retries = ep["max_retries"];
    c.endpoint.api_key_env_var = ep["api_key_env_var"];

    c.output_dir = j["output_dir"].get<std::string>();
    c.alpha_grid = read_list<double>(j["alpha_grid"], "alpha_grid");
    c.test_drops = j["test_drops"];
    c.bench_samples = j["bench_samples"];
    return c;
}

void prefixed(const char* section, auto&& check) {
    try {
        check();
    } catch (const std::invalid_argument& e) {
        const std::string what = e.what();
        const std::string prefix = std::string(section) + ".";
        throw std::invalid_argument(what.rfind(prefix, 0) == 0 ? what : prefix + what);
    }
}

}  // namespace

std::string_view to_string(ProviderKind kind) noexcept {
    return kind == ProviderKind::Endpoint ? "endpoint" : "heuristic";
}

ProviderKind parse_provider(std::string_view name) {
    if (name == "heuristic") return ProviderKind::Heuristic;
    if (name == "endpoint") return ProviderKind::Endpoint;
    fail("guidance_provider", "expected heuristic or endpoint");
}

ExperimentConfig ExperimentConfig::defaults(Profile profile) {
    ExperimentConfig c;
    c.profile = profile;
    if (profile == Profile::Paper) {
        c.epochs = 500;
        c.test_drops = 50;
        c.scenario.episode_slots = 50;
    } else {
        c.epochs = 200;
        c.test_drops = 20;
        c.scenario.episode_slots = 20;
    }
    const PhaseSchedule split = PhaseSchedule::proportional(c.epochs);
    c.schedule.phase1_epochs = split.phase1_epochs;
    c.schedule.phase2_epochs = split.phase2_epochs;
    c.schedule.phase3_epochs = split.phase3_epochs;
    return c;
}

void ExperimentConfig::validate() const {
    prefixed("scenario", [&] { scenario.validate(); });
    prefixed("agent", [&] { agent.validate(); });
    prefixed("schedule", [&] { schedule.validate(); });
    prefixed("endpoint", [&] { endpoint.validate(); });
    if (methods.empty()) fail("methods", "at least one method is required");
    for (std::size_t i = 0; i < methods.size(); ++i) {
        try {
            (void)Method::parse(methods[i]);
        } catch (const std::invalid_argument& e) {
            fail("methods[" + std::to_string(i) + "]", e.what());
        }
    }
    if (seeds.empty()) fail("seeds", "at least one seed is required");
    if (epochs < 1) fail("epochs", "must be >= 1");
    if (schedule.total_epochs() != epochs) {
        fail("schedule", "phase1_epochs + phase2_epochs + phase3_epochs must equal epochs (" + std::to_string(epochs) +
                             ")");
    }
    if (!(exploration_sigma0 >= 0.0)) fail("exploration_sigma0", "must be >= 0");
    for (std::size_t i = 0; i < alpha_grid.size(); ++i) {
        if (!(alpha_grid[i] > 0.0 && alpha_grid[i] < 1.0)) {
            fail("alpha_grid[" + std::to_string(i) + "]", "must lie in (0, 1)");
        }
    }
    if (test_drops < 1) fail("test_drops", "must be >= 1");
    if (bench_samples < 1) fail("bench_samples", "must be >= 1");
}

TrainingSetup ExperimentConfig::training_setup() const {
    TrainingSetup setup;
    setup.scenario = scenario;
    setup.agent = agent;
    setup.schedule = schedule;
    setup.epochs = epochs;
    setup.exploration_sigma0 = exploration_sigma0;
    return setup;
}

ExperimentConfig parse_config(std::string_view text) {
    json user = json::object();
    if (text.find_first_not_of(" \t\r\n") != std::string_view::npos) {
        try {
            user = json::parse(text);
        } catch (const json::parse_error& e) {
            throw std::invalid_argument(std::string("<root>: not valid JSON (") + e.what() + ")");
        }
    }
    if (!user.is_object()) {
        fail("<root>", "expected an object");
    }
    Profile profile = Profile::Desk;
    if (user.contains("profile")) {
        if (!user["profile"].is_string()) fail("profile", "expected desk or paper");
        profile = parse_profile(user["profile"].get<std::string>());
    }
    json merged = to_json(ExperimentConfig::defaults(profile));
    overlay(merged, user, "");

    // Phase lengths follow `epochs` unless the file pins them.
    const bool phases_given = user.contains("schedule") && user["schedule"].is_object() &&
                              (user["schedule"].contains("phase1_epochs") ||
                               user["schedule"].contains("phase2_epochs") ||
                               user["schedule"].contains("phase3_epochs"));
    if (!phases_given) {
        const PhaseSchedule split = PhaseSchedule::proportional(merged["epochs"].get<std::size_t>());
        merged["schedule"]["phase1_epochs"] = split.phase1_epochs;
        merged["schedule"]["phase2_epochs"] = split.phase2_epochs;
        merged["schedule"]["phase3_epochs"] = split.phase3_epochs;
    }
    ExperimentConfig config = from_json(merged);
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string dump_config(const ExperimentConfig& config) { return to_json(config).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& config) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a_64(dump_config(config))));
    return buf;
}

}  // namespace hric
