#pragma once

// The per-slot power-allocation MDP: every MBS splits P_max over its SBSs,
// backhaul and access rates follow from the current channel snapshot, and
// each SBS delivers min(backhaul, sum of access).

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "hric/channel.hpp"
#include "hric/policy.hpp"
#include "hric/topology.hpp"

namespace hric {

/// Local RL state {h_m, n_m, R_m, p_o_m} of one MBS.
struct MbsObservation {
    std::vector<double> backhaul_gains;   // linear
    std::vector<double> user_counts;
    std::vector<double> avg_user_rate;    // bits/s
    std::vector<double> guidance;         // simplex row

    [[nodiscard]] std::size_t num_sbs() const noexcept { return backhaul_gains.size(); }

    /// Raw concatenation h | n | R | p_o (length 4N).
    [[nodiscard]] std::vector<double> flatten() const;

    friend bool operator==(const MbsObservation&, const MbsObservation&) = default;
};

struct Action {
    std::vector<double> power_ratios;
};

/// Links are stored per transmitter so interference lookups are direct:
/// backhaul(tx, m, n) is MBS tx -> SBS (m, n); access(tx, m, n, k) is
/// SBS (tx, n) -> user (m, n, k). Only same-sub-carrier pairs exist.
struct ChannelSnapshot {
    std::size_t num_mbs = 0;
    std::size_t num_sbs = 0;
    std::size_t users_per_sbs = 0;
    std::vector<LinkGain> backhaul;
    std::vector<LinkGain> access;

    ChannelSnapshot() = default;
    ChannelSnapshot(std::size_t m, std::size_t n, std::size_t k);

    [[nodiscard]] LinkGain& backhaul_link(std::size_t tx, std::size_t m, std::size_t n) {
        return backhaul[(tx * num_mbs + m) * num_sbs + n];
    }
    [[nodiscard]] const LinkGain& backhaul_link(std::size_t tx, std::size_t m, std::size_t n) const {
        return backhaul[(tx * num_mbs + m) * num_sbs + n];
    }
    [[nodiscard]] LinkGain& access_link(std::size_t tx, std::size_t m, std::size_t n, std::size_t k) {
        return access[((tx * num_mbs + m) * num_sbs + n) * users_per_sbs + k];
    }
    [[nodiscard]] const LinkGain& access_link(std::size_t tx, std::size_t m, std::size_t n, std::size_t k) const {
        return access[((tx * num_mbs + m) * num_sbs + n) * users_per_sbs + k];
    }
};

struct StepOutcome {
    std::vector<double> rewards;
    std::vector<double> per_mbs_throughput;   // bits/s
    double total_throughput = 0.0;            // bits/s
    std::vector<MbsObservation> next_observations;
    std::vector<double> per_sbs_backhaul_rate;  // M x N, bits/s
    std::vector<double> per_sbs_access_sum;     // M x N, bits/s
};

/// Transmit power per (m, n) in watts for the given ratio rows.
[[nodiscard]] std::vector<double> mbs_transmit_powers(std::span<const Action> actions, const NetworkConfig& config);

/// Backhaul rate of MBS m -> SBS (m, n). `powers_w` is M x N in watts.
[[nodiscard]] double backhaul_rate(std::size_t m, std::size_t n, std::span<const double> powers_w,
                                   const ChannelSnapshot& snapshot, const NetworkConfig& config);

/// Rates of the K users of SBS (m, n) under fixed SBS transmit power.
[[nodiscard]] std::vector<double> access_rates(std::size_t m, std::size_t n, const ChannelSnapshot& snapshot,
                                               const NetworkConfig& config);

/// Fading-free statistics of one snapshot: gains use the fading mean, rates
/// are computed from those mean gains.
[[nodiscard]] GuidanceInput snapshot_statistics(const ChannelSnapshot& snapshot, const NetworkConfig& config);

class Environment {
  public:
    /// Builds the deployment from `seed`; `episode` selects an independent
    /// mobility/fading stream over the same deployment.
    Environment(NetworkConfig config, std::uint64_t seed, std::uint64_t episode = 0);

    [[nodiscard]] const std::vector<MbsObservation>& observations() const noexcept { return observations_; }
    [[nodiscard]] const NetworkConfig& config() const noexcept { return config_; }
    [[nodiscard]] const Topology& topology() const noexcept { return topology_; }
    [[nodiscard]] const ChannelSnapshot& snapshot() const noexcept { return snapshot_; }
    [[nodiscard]] const GuidancePolicy& guidance() const noexcept { return guidance_; }
    [[nodiscard]] std::size_t slot() const noexcept { return slot_; }
    [[nodiscard]] std::size_t history_size() const noexcept { return history_.size(); }

    /// Applies one action per MBS, then moves users and redraws fading.
    /// Throws ContractError on wrong count or off-simplex actions.
    StepOutcome step(std::span<const Action> actions);

    /// Throws ContractError on shape mismatch; rows are simplex by type.
    void install_guidance(const GuidancePolicy& policy);

    /// Averages over the most recent `window` slots (fewer if not simulated yet).
    [[nodiscard]] GuidanceInput observation_statistics(std::size_t window) const;

    /// Replaces the current channel snapshot; used for frozen-channel studies.
    void set_snapshot(ChannelSnapshot snapshot);

  private:
    void refresh_access_large_scale();
    void draw_fading();
    void rebuild_observations();
    void record_statistics();

    NetworkConfig config_;
    Topology topology_;
    std::mt19937_64 rng_;
    ChannelSnapshot snapshot_;
    std::vector<double> moved_since_los_;
    GuidancePolicy guidance_;
    std::vector<MbsObservation> observations_;
    std::deque<GuidanceInput> history_;
    std::size_t slot_ = 0;
};

/// Per-step metrics stream: epoch,slot,m,throughput_bps,reward,alpha,seed.
class StepMetricsWriter {
  public:
    explicit StepMetricsWriter(std::ostream& out);
    void write(std::size_t epoch, std::size_t slot, const StepOutcome& outcome, double alpha, std::uint64_t seed);

  private:
    std::ostream* out_;
};

}  // namespace hric
