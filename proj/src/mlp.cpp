#include "hric/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace hric {

template <typename Scalar>
Mlp<Scalar>::Mlp(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
    if (sizes_.size() < 2) {
        throw std::invalid_argument("Mlp: need at least input and output sizes");
    }
    std::size_t total = 0;
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        if (sizes_[l] == 0 || sizes_[l + 1] == 0) {
            throw std::invalid_argument("Mlp: layer sizes must be positive");
        }
        offsets_.push_back(total);
        total += sizes_[l + 1] * sizes_[l] + sizes_[l + 1];
    }
    params_.assign(total, Scalar(0));
}

template <typename Scalar>
void Mlp<Scalar>::initialize(std::mt19937_64& rng, bool zero_output_layer) {
    for (std::size_t l = 0; l < num_layers(); ++l) {
        const bool zero = zero_output_layer && l + 1 == num_layers();
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        auto [w_off, w_len] = weight_block(l);
        auto [b_off, b_len] = bias_block(l);
        for (std::size_t i = 0; i < w_len; ++i) {
            params_[w_off + i] = zero ? Scalar(0) : static_cast<Scalar>(dist(rng));
        }
        for (std::size_t i = 0; i < b_len; ++i) {
            params_[b_off + i] = zero ? Scalar(0) : static_cast<Scalar>(dist(rng));
        }
    }
}

template <typename Scalar>
std::pair<std::size_t, std::size_t> Mlp<Scalar>::weight_block(std::size_t l) const {
    return {offsets_.at(l), sizes_[l + 1] * sizes_[l]};
}

template <typename Scalar>
std::pair<std::size_t, std::size_t> Mlp<Scalar>::bias_block(std::size_t l) const {
    return {offsets_.at(l) + sizes_[l + 1] * sizes_[l], sizes_[l + 1]};
}

template <typename Scalar>
typename Mlp<Scalar>::MatrixMap Mlp<Scalar>::weight(std::size_t l) {
    return MatrixMap(params_.data() + weight_block(l).first, static_cast<Eigen::Index>(sizes_[l + 1]),
                     static_cast<Eigen::Index>(sizes_[l]));
}

template <typename Scalar>
typename Mlp<Scalar>::ConstMatrixMap Mlp<Scalar>::weight(std::size_t l) const {
    return ConstMatrixMap(params_.data() + weight_block(l).first, static_cast<Eigen::Index>(sizes_[l + 1]),
                          static_cast<Eigen::Index>(sizes_[l]));
}

template <typename Scalar>
typename Mlp<Scalar>::VectorMap Mlp<Scalar>::bias(std::size_t l) {
    return VectorMap(params_.data() + bias_block(l).first, static_cast<Eigen::Index>(sizes_[l + 1]));
}

template <typename Scalar>
typename Mlp<Scalar>::ConstVectorMap Mlp<Scalar>::bias(std::size_t l) const {
    return ConstVectorMap(params_.data() + bias_block(l).first, static_cast<Eigen::Index>(sizes_[l + 1]));
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix Mlp<Scalar>::forward(const Matrix& input, Cache* cache) const {
    if (static_cast<std::size_t>(input.rows()) != input_size()) {
        throw std::invalid_argument("Mlp::forward: input has the wrong number of rows");
    }
    if (cache != nullptr) {
        cache->inputs.resize(num_layers());
    }
    Matrix x = input;
    for (std::size_t l = 0; l < num_layers(); ++l) {
        Matrix z = weight(l) * x;
        z.colwise() += bias(l);
        if (l + 1 < num_layers()) {
            z = z.cwiseMax(Scalar(0));
        }
        if (cache != nullptr) {
            cache->inputs[l] = std::move(x);
        }
        x = std::move(z);
    }
    return x;
}

template <typename Scalar>
void Mlp<Scalar>::backward(const Cache& cache, const Matrix& grad_output, std::span<Scalar> grad,
                           Matrix* grad_input) const {
    if (grad.size() != params_.size() || cache.inputs.size() != num_layers()) {
        throw std::invalid_argument("Mlp::backward: gradient buffer or cache does not match the network");
    }
    Matrix delta = grad_output;
    for (std::size_t l = num_layers(); l-- > 0;) {
        const Matrix& a = cache.inputs[l];
        MatrixMap gw(grad.data() + weight_block(l).first, static_cast<Eigen::Index>(sizes_[l + 1]),
                     static_cast<Eigen::Index>(sizes_[l]));
        VectorMap gb(grad.data() + bias_block(l).first, static_cast<Eigen::Index>(sizes_[l + 1]));
        gw.noalias() += delta * a.transpose();
        gb.noalias() += delta.rowwise().sum();
        if (l == 0 && grad_input == nullptr) {
            break;
        }
        Matrix upstream = weight(l).transpose() * delta;
        if (l == 0) {
            *grad_input = std::move(upstream);
            break;
        }
        // a = relu(z_{l-1}), so relu'(z) is the indicator a > 0.
        delta = upstream.cwiseProduct((a.array() > Scalar(0)).template cast<Scalar>().matrix());
    }
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix softmax_columns(const typename Mlp<Scalar>::Matrix& logits) {
    typename Mlp<Scalar>::Matrix out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
        const auto col = logits.col(c);
        const Scalar peak = col.maxCoeff();
        auto e = (col.array() - peak).exp();
        out.col(c) = (e / e.sum()).matrix();
    }
    return out;
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix actor_forward(const Mlp<Scalar>& actor, const typename Mlp<Scalar>::Matrix& states,
                                           double floor) {
    auto soft = softmax_columns<Scalar>(actor.forward(states));
    if (floor == 0.0) {
        return soft;
    }
    const auto n = static_cast<double>(soft.rows());
    return (Scalar(1.0 - floor) * soft.array() + Scalar(floor / n)).matrix();
}

template <typename Scalar>
typename Mlp<Scalar>::Matrix critic_forward(const Mlp<Scalar>& critic, const typename Mlp<Scalar>::Matrix& states,
                                            const typename Mlp<Scalar>::Matrix& actions) {
    if (states.cols() != actions.cols()) {
        throw std::invalid_argument("critic_forward: batch sizes differ");
    }
    typename Mlp<Scalar>::Matrix input(states.rows() + actions.rows(), states.cols());
    input << states, actions;
    return critic.forward(input);
}

template <typename Scalar>
Scalar critic_loss_gradient(const Mlp<Scalar>& critic, const typename Mlp<Scalar>::Matrix& states,
                            const typename Mlp<Scalar>::Matrix& actions,
                            const typename Mlp<Scalar>::Matrix& targets, std::span<Scalar> grad) {
    using Matrix = typename Mlp<Scalar>::Matrix;
    Matrix input(states.rows() + actions.rows(), states.cols());
    input << states, actions;
    typename Mlp<Scalar>::Cache cache;
    const Matrix q = critic.forward(input, &cache);
    const Matrix error = q - targets;
    const auto batch = static_cast<Scalar>(states.cols());
    const Matrix grad_q = (Scalar(2) / batch) * error;
    critic.backward(cache, grad_q, grad);
    return error.squaredNorm() / batch;
}

template <typename Scalar>
Scalar actor_objective_gradient(const Mlp<Scalar>& actor, const Mlp<Scalar>& critic,
                                const typename Mlp<Scalar>::Matrix& states, std::span<Scalar> grad, double floor) {
    using Matrix = typename Mlp<Scalar>::Matrix;
    typename Mlp<Scalar>::Cache actor_cache;
    const Matrix logits = actor.forward(states, &actor_cache);
    const Matrix soft = softmax_columns<Scalar>(logits);
    const Matrix actions =
        (Scalar(1.0 - floor) * soft.array() + Scalar(floor / static_cast<double>(soft.rows()))).matrix();

    Matrix input(states.rows() + actions.rows(), states.cols());
    input << states, actions;
    typename Mlp<Scalar>::Cache critic_cache;
    const Matrix q = critic.forward(input, &critic_cache);
    const auto batch = static_cast<Scalar>(states.cols());

    // Only the input gradient of the critic is needed; its parameter
    // gradient goes to a scratch buffer.
    AlignedVector<Scalar> scratch(critic.parameter_count(), Scalar(0));
    Matrix grad_input;
    critic.backward(critic_cache, Matrix::Constant(1, states.cols(), Scalar(1) / batch), scratch, &grad_input);
    const Matrix grad_action = grad_input.bottomRows(actions.rows());

    // Softmax Jacobian-vector product (1 - floor) * p * (g - <p, g>), p the raw softmax.
    Matrix grad_logits(actions.rows(), actions.cols());
    for (Eigen::Index c = 0; c < actions.cols(); ++c) {
        const Scalar inner = soft.col(c).dot(grad_action.col(c));
        grad_logits.col(c) = Scalar(1.0 - floor) * soft.col(c).cwiseProduct(
            (grad_action.col(c).array() - inner).matrix());
    }
    actor.backward(actor_cache, grad_logits, grad);
    return q.sum() / batch;
}

template class Mlp<float>;
template class Mlp<double>;

#define HRIC_INSTANTIATE(S)                                                                                   \
    template Mlp<S>::Matrix softmax_columns<S>(const Mlp<S>::Matrix&);                                        \
    template Mlp<S>::Matrix actor_forward<S>(const Mlp<S>&, const Mlp<S>::Matrix&, double);                   \
    template Mlp<S>::Matrix critic_forward<S>(const Mlp<S>&, const Mlp<S>::Matrix&, const Mlp<S>::Matrix&);   \
    template S critic_loss_gradient<S>(const Mlp<S>&, const Mlp<S>::Matrix&, const Mlp<S>::Matrix&,           \
                                       const Mlp<S>::Matrix&, std::span<S>);                                  \
    template S actor_objective_gradient<S>(const Mlp<S>&, const Mlp<S>&, const Mlp<S>::Matrix&, std::span<S>, \
                                           double);

HRIC_INSTANTIATE(float)
HRIC_INSTANTIATE(double)

#undef HRIC_INSTANTIATE

}  // namespace hric
