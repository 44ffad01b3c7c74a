#include "hric/environment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "hric/random.hpp"

namespace hric {

namespace {

constexpr std::uint64_t kDeploymentStream = 0xD1;
constexpr std::uint64_t kDynamicsStream = 0xD2;

double rate_or_zero(double bandwidth, double signal, double interference, const ChannelParams& channel) {
    if (!(bandwidth > 0.0)) {
        return 0.0;
    }
    return shannon_rate(bandwidth, signal, interference, noise_power_watts(bandwidth, channel));
}

bool sample_los(double d, const ChannelParams& channel, std::mt19937_64& rng) {
    std::bernoulli_distribution coin(los_probability(d, channel.los_range_constant_rho));
    return coin(rng);
}

}  // namespace

std::vector<double> MbsObservation::flatten() const {
    std::vector<double> out;
    out.reserve(4 * num_sbs());
    out.insert(out.end(), backhaul_gains.begin(), backhaul_gains.end());
    out.insert(out.end(), user_counts.begin(), user_counts.end());
    out.insert(out.end(), avg_user_rate.begin(), avg_user_rate.end());
    out.insert(out.end(), guidance.begin(), guidance.end());
    return out;
}

ChannelSnapshot::ChannelSnapshot(std::size_t m, std::size_t n, std::size_t k)
    : num_mbs(m), num_sbs(n), users_per_sbs(k), backhaul(m * m * n), access(m * m * n * k) {}

std::vector<double> mbs_transmit_powers(std::span<const Action> actions, const NetworkConfig& config) {
    const double p_max = dbm_to_watts(config.mbs_max_power_dbm);
    std::vector<double> powers;
    powers.reserve(config.num_sbs_total());
    for (const auto& action : actions) {
        for (double ratio : action.power_ratios) {
            powers.push_back(ratio * p_max);
        }
    }
    return powers;
}

double backhaul_rate(std::size_t m, std::size_t n, std::span<const double> powers_w, const ChannelSnapshot& snapshot,
                     const NetworkConfig& config) {
    const std::size_t N = config.num_sbs_per_mbs;
    const double signal = powers_w[m * N + n] * snapshot.backhaul_link(m, m, n).combined();
    double interference = 0.0;
    if (config.backhaul_interference) {
        for (std::size_t tx = 0; tx < config.num_mbs; ++tx) {
            if (tx != m) {
                interference += powers_w[tx * N + n] * snapshot.backhaul_link(tx, m, n).combined();
            }
        }
    }
    return rate_or_zero(config.backhaul_link_bandwidth(), signal, interference, config.channel);
}

std::vector<double> access_rates(std::size_t m, std::size_t n, const ChannelSnapshot& snapshot,
                                 const NetworkConfig& config) {
    const double p_sbs = dbm_to_watts(config.sbs_access_power_dbm);
    const double bandwidth = config.access_user_bandwidth();
    std::vector<double> rates(config.users_per_sbs, 0.0);
    for (std::size_t k = 0; k < config.users_per_sbs; ++k) {
        const double signal = p_sbs * snapshot.access_link(m, m, n, k).combined();
        double interference = 0.0;
        if (config.access_interference) {
            for (std::size_t tx = 0; tx < config.num_mbs; ++tx) {
                if (tx != m) {
                    interference += p_sbs * snapshot.access_link(tx, m, n, k).combined();
                }
            }
        }
        rates[k] = rate_or_zero(bandwidth, signal, interference, config.channel);
    }
    return rates;
}

GuidanceInput snapshot_statistics(const ChannelSnapshot& snapshot, const NetworkConfig& config) {
    // Fading has unit mean, so the mean channel is the large-scale gain.
    ChannelSnapshot mean = snapshot;
    for (auto& link : mean.backhaul) {
        link.fading_gain_linear = 1.0;
    }
    for (auto& link : mean.access) {
        link.fading_gain_linear = 1.0;
    }

    GuidanceInput input;
    input.num_mbs = config.num_mbs;
    input.num_sbs = config.num_sbs_per_mbs;
    input.sbs.resize(config.num_sbs_total());
    for (std::size_t m = 0; m < config.num_mbs; ++m) {
        for (std::size_t n = 0; n < config.num_sbs_per_mbs; ++n) {
            SbsGuidanceInput& entry = input.at(m, n);
            entry.avg_channel_gain = mean.backhaul_link(m, m, n).combined();
            entry.connected_users = static_cast<std::int64_t>(config.users_per_sbs);
            const auto rates = access_rates(m, n, mean, config);
            double sum = 0.0;
            for (double r : rates) {
                sum += r;
            }
            entry.avg_expected_rate_mbps = sum / static_cast<double>(rates.size()) / 1e6;
            for (std::size_t tx = 0; tx < config.num_mbs; ++tx) {
                if (tx != m) {
                    entry.interference.push_back({{tx, n}, mean.backhaul_link(tx, m, n).combined()});
                }
            }
        }
    }
    return input;
}

Environment::Environment(NetworkConfig config, std::uint64_t seed, std::uint64_t episode)
    : config_(std::move(config)),
      topology_(build_topology(config_, seed)),
      rng_(mix_seed(mix_seed(seed, kDynamicsStream), episode)),
      snapshot_(config_.num_mbs, config_.num_sbs_per_mbs, config_.users_per_sbs),
      moved_since_los_(config_.num_users_total(), 0.0),
      guidance_(GuidancePolicy::uniform(config_.num_mbs, config_.num_sbs_per_mbs)) {
    const std::size_t M = config_.num_mbs;
    const std::size_t N = config_.num_sbs_per_mbs;
    const std::size_t K = config_.users_per_sbs;

    // LoS states are a property of the deployment, not of the episode.
    std::mt19937_64 deployment(mix_seed(seed, kDeploymentStream));
    for (std::size_t tx = 0; tx < M; ++tx) {
        for (std::size_t m = 0; m < M; ++m) {
            for (std::size_t n = 0; n < N; ++n) {
                const double d = distance(topology_.mbs_positions[tx], topology_.sbs(m, n));
                LinkGain& link = snapshot_.backhaul_link(tx, m, n);
                link.is_los = sample_los(d, config_.channel, deployment);
                link.large_scale_gain_linear = path_loss_gain(d, link.is_los, config_.channel);
            }
        }
    }
    for (std::size_t tx = 0; tx < M; ++tx) {
        for (std::size_t m = 0; m < M; ++m) {
            for (std::size_t n = 0; n < N; ++n) {
                for (std::size_t k = 0; k < K; ++k) {
                    const double d = distance(topology_.sbs(tx, n), topology_.user(m, n, k));
                    snapshot_.access_link(tx, m, n, k).is_los = sample_los(d, config_.channel, deployment);
                }
            }
        }
    }
    refresh_access_large_scale();
    draw_fading();
    record_statistics();
    rebuild_observations();
}

void Environment::refresh_access_large_scale() {
    for (std::size_t tx = 0; tx < config_.num_mbs; ++tx) {
        for (std::size_t m = 0; m < config_.num_mbs; ++m) {
            for (std::size_t n = 0; n < config_.num_sbs_per_mbs; ++n) {
                for (std::size_t k = 0; k < config_.users_per_sbs; ++k) {
                    LinkGain& link = snapshot_.access_link(tx, m, n, k);
                    const double d = distance(topology_.sbs(tx, n), topology_.user(m, n, k));
                    link.large_scale_gain_linear = path_loss_gain(d, link.is_los, config_.channel);
                }
            }
        }
    }
}

void Environment::draw_fading() {
    auto fade = [&](LinkGain& link) {
        link.fading_gain_linear = config_.fading_enabled
                                      ? sample_nakagami_power(nakagami_shape_for(link.is_los, config_.channel), 1.0, rng_)
                                      : 1.0;
    };
    std::for_each(snapshot_.backhaul.begin(), snapshot_.backhaul.end(), fade);
    std::for_each(snapshot_.access.begin(), snapshot_.access.end(), fade);
}

void Environment::rebuild_observations() {
    const std::size_t N = config_.num_sbs_per_mbs;
    observations_.assign(config_.num_mbs, {});
    for (std::size_t m = 0; m < config_.num_mbs; ++m) {
        MbsObservation& obs = observations_[m];
        obs.backhaul_gains.resize(N);
        obs.user_counts.resize(N);
        obs.avg_user_rate.resize(N);
        const auto row = guidance_.row(m);
        obs.guidance.assign(row.begin(), row.end());
        for (std::size_t n = 0; n < N; ++n) {
            obs.backhaul_gains[n] = snapshot_.backhaul_link(m, m, n).combined();
            obs.user_counts[n] = static_cast<double>(config_.users_per_sbs);
            const auto rates = access_rates(m, n, snapshot_, config_);
            double sum = 0.0;
            for (double r : rates) {
                sum += r;
            }
            obs.avg_user_rate[n] = sum / static_cast<double>(rates.size());
        }
    }
}

void Environment::record_statistics() {
    history_.push_back(snapshot_statistics(snapshot_, config_));
    const std::size_t cap = std::max(config_.guidance_period_slots, config_.episode_slots) + 1;
    while (history_.size() > cap) {
        history_.pop_front();
    }
}

StepOutcome Environment::step(std::span<const Action> actions) {
    const std::size_t M = config_.num_mbs;
    const std::size_t N = config_.num_sbs_per_mbs;
    if (actions.size() != M) {
        throw ContractError("step: expected one action per MBS");
    }
    for (const auto& action : actions) {
        if (action.power_ratios.size() != N || !on_simplex(action.power_ratios)) {
            throw ContractError("step: action is not a length-N simplex vector");
        }
    }

    const auto powers = mbs_transmit_powers(actions, config_);
    StepOutcome outcome;
    outcome.per_mbs_throughput.assign(M, 0.0);
    outcome.per_sbs_backhaul_rate.assign(M * N, 0.0);
    outcome.per_sbs_access_sum.assign(M * N, 0.0);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t n = 0; n < N; ++n) {
            const double backhaul = backhaul_rate(m, n, powers, snapshot_, config_);
            double access = 0.0;
            for (double r : access_rates(m, n, snapshot_, config_)) {
                access += r;
            }
            outcome.per_sbs_backhaul_rate[m * N + n] = backhaul;
            outcome.per_sbs_access_sum[m * N + n] = access;
            outcome.per_mbs_throughput[m] += std::min(backhaul, access);
        }
        outcome.total_throughput += outcome.per_mbs_throughput[m];
    }

    const double W = config_.total_bandwidth_hz;
    const double global = outcome.total_throughput / (static_cast<double>(M) * W);
    outcome.rewards.resize(M);
    for (std::size_t m = 0; m < M; ++m) {
        outcome.rewards[m] = outcome.per_mbs_throughput[m] / W + global;
    }

    const Topology before = topology_;
    topology_ = advance_users(std::move(topology_), config_, rng_);
    for (std::size_t u = 0; u < topology_.user_positions.size(); ++u) {
        moved_since_los_[u] += distance(before.user_positions[u], topology_.user_positions[u]);
    }
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t k = 0; k < config_.users_per_sbs; ++k) {
                const std::size_t u = topology_.user_index(m, n, k);
                if (moved_since_los_[u] <= config_.access_los_resample_distance) {
                    continue;
                }
                moved_since_los_[u] = 0.0;
                for (std::size_t tx = 0; tx < M; ++tx) {
                    const double d = distance(topology_.sbs(tx, n), topology_.user(m, n, k));
                    snapshot_.access_link(tx, m, n, k).is_los = sample_los(d, config_.channel, rng_);
                }
            }
        }
    }
    refresh_access_large_scale();
    draw_fading();
    ++slot_;
    record_statistics();
    rebuild_observations();
    outcome.next_observations = observations_;
    return outcome;
}

void Environment::install_guidance(const GuidancePolicy& policy) {
    if (policy.num_mbs() != config_.num_mbs || policy.num_sbs() != config_.num_sbs_per_mbs) {
        throw ContractError("install_guidance: policy shape does not match the network");
    }
    guidance_ = policy;
    for (std::size_t m = 0; m < config_.num_mbs; ++m) {
        const auto row = guidance_.row(m);
        observations_[m].guidance.assign(row.begin(), row.end());
    }
}

GuidanceInput Environment::observation_statistics(std::size_t window) const {
    const std::size_t take = std::clamp<std::size_t>(window, 1, history_.size());
    const std::vector<GuidanceInput> recent(history_.end() - static_cast<std::ptrdiff_t>(take), history_.end());
    return average_inputs(recent);
}

void Environment::set_snapshot(ChannelSnapshot snapshot) {
    if (snapshot.num_mbs != config_.num_mbs || snapshot.num_sbs != config_.num_sbs_per_mbs ||
        snapshot.users_per_sbs != config_.users_per_sbs) {
        throw ContractError("set_snapshot: shape mismatch");
    }
    snapshot_ = std::move(snapshot);
    history_.clear();
    record_statistics();
    rebuild_observations();
}

StepMetricsWriter::StepMetricsWriter(std::ostream& out) : out_(&out) {
    *out_ << "epoch,slot,m,throughput_bps,reward,alpha,seed\n";
}

void StepMetricsWriter::write(std::size_t epoch, std::size_t slot, const StepOutcome& outcome, double alpha,
                              std::uint64_t seed) {
    char line[256];
    for (std::size_t m = 0; m < outcome.per_mbs_throughput.size(); ++m) {
        std::snprintf(line, sizeof(line), "%zu,%zu,%zu,%.10g,%.10g,%.6g,%llu\n", epoch, slot, m,
                      outcome.per_mbs_throughput[m], outcome.rewards[m], alpha,
                      static_cast<unsigned long long>(seed));
        *out_ << line;
    }
}

}  // namespace hric
