#include "hric/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hric/random.hpp"

namespace hric {

void AgentConfig::validate() const {
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("agent.learning_rate must be > 0");
    }
    if (batch_size == 0) {
        throw std::invalid_argument("agent.batch_size must be >= 1");
    }
    if (!(discount_gamma >= 0.0 && discount_gamma < 1.0)) {
        throw std::invalid_argument("agent.discount_gamma must lie in [0, 1)");
    }
    if (!(soft_update_tau > 0.0 && soft_update_tau <= 1.0)) {
        throw std::invalid_argument("agent.soft_update_tau must lie in (0, 1]");
    }
    if (buffer_capacity < batch_size) {
        throw std::invalid_argument("agent.buffer_capacity must be >= agent.batch_size");
    }
    if (hidden_width == 0) {
        throw std::invalid_argument("agent.hidden_width must be >= 1");
    }
    if (!(reward_scale > 0.0 && std::isfinite(reward_scale))) {
        throw std::invalid_argument("agent.reward_scale must be a finite value > 0");
    }
    if (!(action_floor >= 0.0 && action_floor < 1.0)) {
        throw std::invalid_argument("agent.action_floor must lie in [0, 1)");
    }
}

std::vector<double> observation_features(const MbsObservation& observation) {
    const std::size_t N = observation.num_sbs();
    std::vector<double> features;
    features.reserve(4 * N);
    for (double h : observation.backhaul_gains) {
        const double db = 10.0 * std::log10(std::max(h, 1e-30));
        features.push_back(std::clamp((db + 90.0) / 20.0, -3.0, 3.0));
    }
    for (double users : observation.user_counts) {
        features.push_back(users / 4.0);
    }
    for (double rate : observation.avg_user_rate) {
        features.push_back(rate / 1e8);
    }
    for (double p : observation.guidance) {
        features.push_back(p * static_cast<double>(N));
    }
    return features;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) {
        throw std::invalid_argument("ReplayBuffer: capacity must be positive");
    }
}

void ReplayBuffer::push(Transition transition) {
    if (items_.size() < capacity_) {
        items_.push_back(std::move(transition));
    } else {
        items_[next_] = std::move(transition);
    }
    next_ = (next_ + 1) % capacity_;
}

std::optional<std::vector<const Transition*>> ReplayBuffer::sample(std::size_t batch_size,
                                                                   std::mt19937_64& rng) const {
    if (batch_size == 0 || items_.size() < batch_size) {
        return std::nullopt;
    }
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const Transition*> batch;
    batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i) {
        batch.push_back(&items_[pick(rng)]);
    }
    return batch;
}

template <typename Scalar>
void adam_step(AdamState<Scalar>& state, std::span<Scalar> params, std::span<const Scalar> grads,
               double learning_rate) {
    if (params.size() != grads.size() || state.first_moment.size() != params.size() ||
        state.second_moment.size() != params.size()) {
        throw std::invalid_argument("adam_step: shape mismatch");
    }
    for (Scalar g : grads) {
        if (!std::isfinite(static_cast<double>(g))) {
            throw std::domain_error("adam_step: non-finite gradient");
        }
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);
    const auto b1 = static_cast<Scalar>(state.beta1);
    const auto b2 = static_cast<Scalar>(state.beta2);
    const auto step_size = static_cast<Scalar>(learning_rate / correction1);
    const auto inv_sqrt_c2 = static_cast<Scalar>(1.0 / std::sqrt(correction2));
    const auto eps = static_cast<Scalar>(state.epsilon);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Scalar& m = state.first_moment[i];
        Scalar& v = state.second_moment[i];
        m = b1 * m + (Scalar(1) - b1) * grads[i];
        v = b2 * v + (Scalar(1) - b2) * grads[i] * grads[i];
        params[i] -= step_size * m / (std::sqrt(v) * inv_sqrt_c2 + eps);
    }
}

template <typename Scalar>
void soft_update(std::span<Scalar> target, std::span<const Scalar> online, double tau) {
    if (target.size() != online.size()) {
        throw std::invalid_argument("soft_update: shape mismatch");
    }
    const auto t = static_cast<Scalar>(tau);
    for (std::size_t i = 0; i < target.size(); ++i) {
        target[i] = t * online[i] + (Scalar(1) - t) * target[i];
    }
}

template <typename Scalar>
BasicDdpgAgent<Scalar>::BasicDdpgAgent(std::size_t num_sbs, AgentConfig config, std::uint64_t seed)
    : num_sbs_(num_sbs),
      config_(config),
      actor_({4 * num_sbs, config.hidden_width, config.hidden_width, num_sbs}),
      critic_({5 * num_sbs, config.hidden_width, config.hidden_width, 1}),
      buffer_(config.buffer_capacity),
      rng_(mix_seed(seed, 0xA6)) {
    config_.validate();
    std::mt19937_64 init(mix_seed(seed, 0x1417));
    actor_.initialize(init, /*zero_output_layer=*/true);
    critic_.initialize(init, /*zero_output_layer=*/false);
    target_actor_ = actor_;
    target_critic_ = critic_;
    actor_adam_ = AdamState<Scalar>(actor_.parameter_count());
    critic_adam_ = AdamState<Scalar>(critic_.parameter_count());
}

template <typename Scalar>
std::vector<double> BasicDdpgAgent<Scalar>::act(std::span<const double> features) const {
    if (features.size() != 4 * num_sbs_) {
        throw std::invalid_argument("act: feature vector must have length 4N");
    }
    Matrix state(static_cast<Eigen::Index>(features.size()), 1);
    for (std::size_t i = 0; i < features.size(); ++i) {
        state(static_cast<Eigen::Index>(i), 0) = static_cast<Scalar>(features[i]);
    }
    const Matrix action = actor_forward<Scalar>(actor_, state, config_.action_floor);
    std::vector<double> out(num_sbs_);
    double sum = 0.0;
    for (std::size_t i = 0; i < num_sbs_; ++i) {
        out[i] = static_cast<double>(action(static_cast<Eigen::Index>(i), 0));
        sum += out[i];
    }
    // Re-normalize in double so float rounding never leaves the simplex.
    for (double& p : out) {
        p /= sum;
    }
    return out;
}

template <typename Scalar>
std::optional<TrainStats> BasicDdpgAgent<Scalar>::train() {
    auto batch = buffer_.sample(config_.batch_size, rng_);
    if (!batch) {
        return std::nullopt;
    }
    return train_step(*batch);
}

template <typename Scalar>
TrainStats BasicDdpgAgent<Scalar>::train_step(std::span<const Transition* const> batch) {
    const auto B = static_cast<Eigen::Index>(batch.size());
    const auto S = static_cast<Eigen::Index>(4 * num_sbs_);
    const auto A = static_cast<Eigen::Index>(num_sbs_);
    if (B == 0) {
        throw std::invalid_argument("train_step: empty batch");
    }
    Matrix states(S, B), actions(A, B), rewards(1, B), next_states(S, B);
    for (Eigen::Index c = 0; c < B; ++c) {
        const Transition& t = *batch[static_cast<std::size_t>(c)];
        if (t.state.size() != static_cast<std::size_t>(S) || t.next_state.size() != static_cast<std::size_t>(S) ||
            t.action.size() != static_cast<std::size_t>(A)) {
            throw std::invalid_argument("train_step: transition has the wrong shape");
        }
        for (Eigen::Index r = 0; r < S; ++r) {
            states(r, c) = static_cast<Scalar>(t.state[static_cast<std::size_t>(r)]);
            next_states(r, c) = static_cast<Scalar>(t.next_state[static_cast<std::size_t>(r)]);
        }
        for (Eigen::Index r = 0; r < A; ++r) {
            actions(r, c) = static_cast<Scalar>(t.action[static_cast<std::size_t>(r)]);
        }
        rewards(0, c) = static_cast<Scalar>(t.reward * config_.reward_scale);
    }

    const Matrix next_actions = actor_forward<Scalar>(target_actor_, next_states, config_.action_floor);
    const Matrix next_q = critic_forward<Scalar>(target_critic_, next_states, next_actions);
    const Matrix targets = rewards + static_cast<Scalar>(config_.discount_gamma) * next_q;

    AlignedVector<Scalar> critic_grad(critic_.parameter_count(), Scalar(0));
    const Scalar critic_loss = critic_loss_gradient<Scalar>(critic_, states, actions, targets, critic_grad);
    adam_step<Scalar>(critic_adam_, critic_.parameters(), critic_grad, config_.learning_rate);

    AlignedVector<Scalar> actor_grad(actor_.parameter_count(), Scalar(0));
    const Scalar objective = actor_objective_gradient<Scalar>(actor_, critic_, states, actor_grad, config_.action_floor);
    for (Scalar& g : actor_grad) {
        g = -g;  // ascend the objective
    }
    adam_step<Scalar>(actor_adam_, actor_.parameters(), actor_grad, config_.learning_rate);

    soft_update<Scalar>(target_critic_.parameters(), critic_.parameters(), config_.soft_update_tau);
    soft_update<Scalar>(target_actor_.parameters(), actor_.parameters(), config_.soft_update_tau);
    return {static_cast<double>(critic_loss), static_cast<double>(objective)};
}

template void adam_step<float>(AdamState<float>&, std::span<float>, std::span<const float>, double);
template void adam_step<double>(AdamState<double>&, std::span<double>, std::span<const double>, double);
template void soft_update<float>(std::span<float>, std::span<const float>, double);
template void soft_update<double>(std::span<double>, std::span<const double>, double);

template class BasicDdpgAgent<float>;
template class BasicDdpgAgent<double>;

}  // namespace hric
