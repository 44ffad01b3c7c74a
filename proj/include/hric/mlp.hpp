#pragma once

// Fully connected network with ReLU hidden layers and a linear head, plus
// the hand-derived gradients the DDPG update needs. All parameters live in
// one flat buffer so optimizers and target-network updates are elementwise.

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace hric {

// Eigen picks its vectorized split by address, so buffers it reads through
// Maps must sit on a fixed alignment or results drift with heap layout.
template <typename Scalar>
using AlignedVector = std::vector<Scalar, Eigen::aligned_allocator<Scalar>>;

template <typename Scalar>
class Mlp {
  public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using MatrixMap = Eigen::Map<Matrix>;
    using ConstMatrixMap = Eigen::Map<const Matrix>;
    using VectorMap = Eigen::Map<Vector>;
    using ConstVectorMap = Eigen::Map<const Vector>;

    /// Layer activations kept by forward() for backward().
    struct Cache {
        std::vector<Matrix> inputs;  // inputs[l] feeds layer l
    };

    Mlp() = default;

    /// `layer_sizes` = {input, hidden..., output}; parameters start at zero.
    explicit Mlp(std::vector<std::size_t> layer_sizes);

    /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) per layer; optionally zeroes
    /// the output layer.
    void initialize(std::mt19937_64& rng, bool zero_output_layer);

    [[nodiscard]] std::size_t num_layers() const noexcept { return sizes_.empty() ? 0 : sizes_.size() - 1; }
    [[nodiscard]] std::size_t input_size() const noexcept { return sizes_.front(); }
    [[nodiscard]] std::size_t output_size() const noexcept { return sizes_.back(); }
    [[nodiscard]] const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept { return params_.size(); }

    [[nodiscard]] std::span<Scalar> parameters() noexcept { return params_; }
    [[nodiscard]] std::span<const Scalar> parameters() const noexcept { return params_; }

    /// Weight of layer l, shape (out x in).
    [[nodiscard]] MatrixMap weight(std::size_t l);
    [[nodiscard]] ConstMatrixMap weight(std::size_t l) const;
    [[nodiscard]] VectorMap bias(std::size_t l);
    [[nodiscard]] ConstVectorMap bias(std::size_t l) const;

    /// Offset and length of the weight / bias block of layer l in parameters().
    [[nodiscard]] std::pair<std::size_t, std::size_t> weight_block(std::size_t l) const;
    [[nodiscard]] std::pair<std::size_t, std::size_t> bias_block(std::size_t l) const;

    /// Columns are samples: input is (in x batch), result (out x batch).
    [[nodiscard]] Matrix forward(const Matrix& input, Cache* cache = nullptr) const;

    /// Accumulates dL/dparams into `grad` (same layout as parameters()) and
    /// optionally writes dL/dinput.
    void backward(const Cache& cache, const Matrix& grad_output, std::span<Scalar> grad,
                  Matrix* grad_input = nullptr) const;

    friend bool operator==(const Mlp&, const Mlp&) = default;

  private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;  // start of layer l's weight block
    AlignedVector<Scalar> params_;
};

/// Column-wise softmax, numerically shifted.
template <typename Scalar>
[[nodiscard]] typename Mlp<Scalar>::Matrix softmax_columns(const typename Mlp<Scalar>::Matrix& logits);

/// Deterministic policy (1 - floor) * softmax(actor(states)) + floor / N.
/// states is (4N x batch); floor in [0, 1).
template <typename Scalar>
[[nodiscard]] typename Mlp<Scalar>::Matrix actor_forward(const Mlp<Scalar>& actor,
                                                         const typename Mlp<Scalar>::Matrix& states,
                                                         double floor = 0.0);

/// Q(s, a) for stacked columns [s; a]; returns a (1 x batch) row.
template <typename Scalar>
[[nodiscard]] typename Mlp<Scalar>::Matrix critic_forward(const Mlp<Scalar>& critic,
                                                          const typename Mlp<Scalar>::Matrix& states,
                                                          const typename Mlp<Scalar>::Matrix& actions);

/// Mean squared TD error mean((Q(s,a) - y)^2); writes its gradient into `grad`.
template <typename Scalar>
Scalar critic_loss_gradient(const Mlp<Scalar>& critic, const typename Mlp<Scalar>::Matrix& states,
                            const typename Mlp<Scalar>::Matrix& actions,
                            const typename Mlp<Scalar>::Matrix& targets, std::span<Scalar> grad);

/// Mean Q(s, actor_forward(s, floor)); writes d(objective)/d(actor params)
/// into `grad`. The critic is held fixed.
template <typename Scalar>
Scalar actor_objective_gradient(const Mlp<Scalar>& actor, const Mlp<Scalar>& critic,
                                const typename Mlp<Scalar>::Matrix& states, std::span<Scalar> grad,
                                double floor = 0.0);

extern template class Mlp<float>;
extern template class Mlp<double>;

}  // namespace hric
