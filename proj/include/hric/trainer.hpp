#pragma once

// Guidance-assisted training: phase 1 explores around the guidance row,
// phase 2 blends guidance with the learned policy under a decaying weight,
// phase 3 acts on the learned policy alone. Also hosts the DLN / DCN / EPA
// baselines and the evaluation loop.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hric/ddpg.hpp"
#include "hric/environment.hpp"
#include "hric/guidance.hpp"

namespace hric {

enum class Phase { Guided, Blending, SelfDirected };

[[nodiscard]] std::string_view to_string(Phase phase) noexcept;

struct PhaseSchedule {
    std::size_t phase1_epochs = 100;
    std::size_t phase2_epochs = 250;
    std::size_t phase3_epochs = 150;
    double w_start = 1.0;
    double w_end = 0.0;
    double noise_sigma_start = 0.15;
    double noise_sigma_end = 0.05;

    /// 20% / 50% / 30% split of `total_epochs` (remainder goes to phase 3).
    [[nodiscard]] static PhaseSchedule proportional(std::size_t total_epochs);

    [[nodiscard]] std::size_t total_epochs() const noexcept { return phase1_epochs + phase2_epochs + phase3_epochs; }
    [[nodiscard]] Phase phase_of(std::size_t epoch) const noexcept;

    /// Linear interpolation from noise_sigma_start to noise_sigma_end over phase 1.
    [[nodiscard]] double guided_sigma(std::size_t epoch) const noexcept;

    void validate() const;

    friend bool operator==(const PhaseSchedule&, const PhaseSchedule&) = default;
};

enum class MethodKind { Hric, Dln, Dcn, Epa };

/// A training method; `fixed_w` turns hric into the fixed-blend ablation.
struct Method {
    MethodKind kind = MethodKind::Hric;
    std::optional<double> fixed_w;

    /// "hric", "dln", "dcn", "epa" or "hric-fixed-w<value>".
    [[nodiscard]] static Method parse(std::string_view name);
    [[nodiscard]] std::string name() const;
    [[nodiscard]] bool learns() const noexcept { return kind != MethodKind::Epa; }
    [[nodiscard]] bool uses_guidance() const noexcept { return kind == MethodKind::Hric; }

    friend bool operator==(const Method&, const Method&) = default;
};

/// Guided: project(p_o + N(0, sigma^2)); Blending: w p_o + (1 - w) p_d;
/// SelfDirected: p_d. Throws ContractError on off-simplex inputs.
[[nodiscard]] std::vector<double> select_action(Phase phase, std::span<const double> guidance,
                                                std::span<const double> learned, double sigma, double w,
                                                std::mt19937_64& rng);

/// project(p + N(0, sigma^2)) as used by the noise-decay baselines.
[[nodiscard]] std::vector<double> perturb_on_simplex(std::span<const double> policy, double sigma,
                                                     std::mt19937_64& rng);

/// 1 - (epoch - phase1)/phase2, clamped to [0, 1].
[[nodiscard]] double blending_weight(std::size_t epoch, const PhaseSchedule& schedule) noexcept;

[[nodiscard]] double noise_sigma_linear(std::size_t epoch, std::size_t total_epochs, double sigma0) noexcept;
[[nodiscard]] double noise_sigma_cosine(std::size_t epoch, std::size_t total_epochs, double sigma0) noexcept;

struct EpochRecord {
    std::size_t epoch = 0;
    Phase phase = Phase::Guided;
    double w = 0.0;
    double sigma = 0.0;
    double total_throughput = 0.0;  // mean over the epoch's slots, bits/s
    std::vector<double> per_mbs_reward;
    bool fallback_used = false;
    std::size_t fallback_count = 0;

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainingSetup {
    NetworkConfig scenario;
    AgentConfig agent;
    PhaseSchedule schedule;
    std::size_t epochs = 200;
    double exploration_sigma0 = 0.15;

    void validate() const;
};

/// Optional observers of a training run.
struct TrainingSinks {
    StepMetricsWriter* step_metrics = nullptr;
    GuidanceAuditLog* audit = nullptr;
    /// Every action handed to the environment, for invariant checks.
    std::vector<std::vector<double>>* emitted_actions = nullptr;
};

struct TrainingResult {
    std::vector<EpochRecord> records;
    std::vector<DdpgAgent> agents;  // empty for epa
};

/// Runs `setup.epochs` episodes over the deployment drawn from `seed`.
/// Guidance failures fall back to uniform and never abort the run.
[[nodiscard]] TrainingResult run_training(const TrainingSetup& setup, const Method& method, std::uint64_t seed,
                                          GuidanceProvider& provider, const TrainingSinks& sinks = {});

struct SlotLog {
    std::vector<double> backhaul_rate;  // M x N
    std::vector<double> access_sum;     // M x N
    std::vector<double> per_mbs_throughput;
    double total_throughput = 0.0;
};

struct EpisodeSummary {
    std::size_t episode = 0;
    double mean_total_throughput = 0.0;
    std::vector<SlotLog> slots;
};

struct EvaluationResult {
    double mean_total_throughput = 0.0;
    std::vector<EpisodeSummary> episodes;
};

/// Exploration-free rollouts: actions are p_d for learned methods and
/// uniform for epa; guidance-using methods still refresh guidance.
[[nodiscard]] EvaluationResult evaluate(std::span<const DdpgAgent> agents, const Method& method,
                                        const NetworkConfig& config, std::size_t episodes, std::uint64_t seed,
                                        GuidanceProvider& provider);

/// Episode stream index used by evaluate(); disjoint from training epochs.
inline constexpr std::uint64_t kEvaluationEpisodeBase = 1'000'000;

/// Mean of the last `window` records' total throughput.
[[nodiscard]] double final_throughput(std::span<const EpochRecord> records, std::size_t window = 10);

}  // namespace hric
