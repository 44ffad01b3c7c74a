#pragma once

// Experiment configuration: a JSON object whose omitted keys take defaults.
// Two profiles exist: "desk" (200 epochs, 5 seeds, 20 drops, 20-slot
// episodes) and "paper" (500 epochs, 50 drops, 50-slot episodes). Keys set
// explicitly in the file override the profile.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hric/ddpg.hpp"
#include "hric/llm_client.hpp"
#include "hric/topology.hpp"
#include "hric/trainer.hpp"

namespace hric {

enum class ProviderKind { Heuristic, Endpoint };

[[nodiscard]] std::string_view to_string(ProviderKind kind) noexcept;
[[nodiscard]] ProviderKind parse_provider(std::string_view name);

enum class Profile { Desk, Paper };

struct ExperimentConfig {
    Profile profile = Profile::Desk;
    NetworkConfig scenario;
    AgentConfig agent;
    PhaseSchedule schedule;
    std::vector<std::string> methods{"hric", "dln", "dcn", "epa"};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::size_t epochs = 200;
    double exploration_sigma0 = 0.15;
    ProviderKind provider = ProviderKind::Heuristic;
    LlmEndpointConfig endpoint;
    std::filesystem::path output_dir = "results";
    std::vector<double> alpha_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::size_t test_drops = 20;
    std::size_t bench_samples = 500;

    /// Defaults for a profile; the scenario is the same for both apart
    /// from episode length.
    [[nodiscard]] static ExperimentConfig defaults(Profile profile);

    /// Throws std::invalid_argument whose message starts with the key path.
    void validate() const;

    [[nodiscard]] TrainingSetup training_setup() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

[[nodiscard]] ExperimentConfig parse_config(std::string_view text);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// Full JSON dump with every key present.
[[nodiscard]] std::string dump_config(const ExperimentConfig& config);

/// fnv1a-64 of dump_config, as 16 hex digits.
[[nodiscard]] std::string config_hash(const ExperimentConfig& config);

}  // namespace hric
