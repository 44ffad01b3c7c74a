#pragma once

// DDPG learner for one MBS: softmax actor, Q critic, target copies, Adam and
// a uniform replay buffer.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hric/environment.hpp"
#include "hric/mlp.hpp"

namespace hric {

struct AgentConfig {
    double learning_rate = 1e-4;
    std::size_t batch_size = 256;
    // Power shares never change the next state, so the default is myopic.
    double discount_gamma = 0.0;
    double soft_update_tau = 0.005;
    std::size_t buffer_capacity = 100000;
    std::size_t hidden_width = 256;
    // Multiplies rewards before the critic sees them (Mb/s -> critic units).
    double reward_scale = 0.05;
    // Every SBS keeps at least floor / N of the budget.
    double action_floor = 0.1;

    void validate() const;

    friend bool operator==(const AgentConfig&, const AgentConfig&) = default;
};

/// Network input for one observation: gains in scaled dB, user counts /4,
/// rates per 100 Mb/s, guidance times N (uniform guidance maps to ones).
[[nodiscard]] std::vector<double> observation_features(const MbsObservation& observation);

struct Transition {
    std::vector<double> state;
    std::vector<double> action;
    double reward = 0.0;
    std::vector<double> next_state;
};

/// Ring buffer; overwrites the oldest entry once full.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(std::size_t capacity = 100000);

    void push(Transition transition);

    /// Uniform with replacement; nullopt while fewer than `batch_size` stored.
    [[nodiscard]] std::optional<std::vector<const Transition*>> sample(std::size_t batch_size,
                                                                      std::mt19937_64& rng) const;

    [[nodiscard]] std::size_t size() const noexcept { return items_.size(); }
    [[nodiscard]] std::size_t capacity() const noexcept { return capacity_; }
    [[nodiscard]] std::size_t next_slot() const noexcept { return next_; }
    [[nodiscard]] const Transition& at(std::size_t i) const { return items_.at(i); }

  private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
};

template <typename Scalar>
struct AdamState {
    AlignedVector<Scalar> first_moment;
    AlignedVector<Scalar> second_moment;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    explicit AdamState(std::size_t size) : first_moment(size, Scalar(0)), second_moment(size, Scalar(0)) {}

    friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// Bias-corrected Adam descent step. Throws std::domain_error on a
/// non-finite gradient, leaving params and state untouched.
template <typename Scalar>
void adam_step(AdamState<Scalar>& state, std::span<Scalar> params, std::span<const Scalar> grads,
               double learning_rate);

/// target <- tau * online + (1 - tau) * target.
template <typename Scalar>
void soft_update(std::span<Scalar> target, std::span<const Scalar> online, double tau);

struct TrainStats {
    double critic_loss = 0.0;
    double actor_objective = 0.0;
};

template <typename Scalar>
class BasicDdpgAgent {
  public:
    using Network = Mlp<Scalar>;
    using Matrix = typename Network::Matrix;

    BasicDdpgAgent() = default;
    BasicDdpgAgent(std::size_t num_sbs, AgentConfig config, std::uint64_t seed);

    /// p_d for a feature vector of length 4N.
    [[nodiscard]] std::vector<double> act(std::span<const double> features) const;

    void remember(Transition transition) { buffer_.push(std::move(transition)); }

    /// Samples a batch from the buffer and trains; nullopt if underfull.
    std::optional<TrainStats> train();

    /// One critic + actor update on `batch`, then soft target updates.
    TrainStats train_step(std::span<const Transition* const> batch);

    [[nodiscard]] std::size_t num_sbs() const noexcept { return num_sbs_; }
    [[nodiscard]] const AgentConfig& config() const noexcept { return config_; }
    [[nodiscard]] Network& actor() noexcept { return actor_; }
    [[nodiscard]] const Network& actor() const noexcept { return actor_; }
    [[nodiscard]] Network& critic() noexcept { return critic_; }
    [[nodiscard]] const Network& critic() const noexcept { return critic_; }
    [[nodiscard]] Network& target_actor() noexcept { return target_actor_; }
    [[nodiscard]] const Network& target_actor() const noexcept { return target_actor_; }
    [[nodiscard]] Network& target_critic() noexcept { return target_critic_; }
    [[nodiscard]] const Network& target_critic() const noexcept { return target_critic_; }
    [[nodiscard]] AdamState<Scalar>& actor_optimizer() noexcept { return actor_adam_; }
    [[nodiscard]] const AdamState<Scalar>& actor_optimizer() const noexcept { return actor_adam_; }
    [[nodiscard]] AdamState<Scalar>& critic_optimizer() noexcept { return critic_adam_; }
    [[nodiscard]] const AdamState<Scalar>& critic_optimizer() const noexcept { return critic_adam_; }
    [[nodiscard]] ReplayBuffer& buffer() noexcept { return buffer_; }
    [[nodiscard]] const ReplayBuffer& buffer() const noexcept { return buffer_; }
    [[nodiscard]] std::mt19937_64& rng() noexcept { return rng_; }
    [[nodiscard]] const std::mt19937_64& rng() const noexcept { return rng_; }

  private:
    std::size_t num_sbs_ = 0;
    AgentConfig config_;
    Network actor_;
    Network critic_;
    Network target_actor_;
    Network target_critic_;
    AdamState<Scalar> actor_adam_;
    AdamState<Scalar> critic_adam_;
    ReplayBuffer buffer_;
    std::mt19937_64 rng_;
};

using DdpgAgent = BasicDdpgAgent<float>;

extern template class BasicDdpgAgent<float>;
extern template class BasicDdpgAgent<double>;

}  // namespace hric
