#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "dgmarl/rng.hpp"

namespace dgmarl {

// Fully-connected net in 64-bit floats: rectifier on hidden layers, linear
// output, optional per-layer mean-variance normalization with learned scale
// and shift on the hidden layers. Parameters live in one flat vector so the
// optimizer and checkpoints treat every net the same way.
class DenseNet {
 public:
  DenseNet() = default;
  DenseNet(std::vector<int> layer_sizes, bool layer_norm);

  // Glorot-uniform weights, zero biases; normalization scale 1, shift 0.
  void init(Rng& rng);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  int n_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  bool layer_norm() const { return layer_norm_; }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // Everything backward needs from a forward pass. Inputs are column-major
  // batches: one sample per column.
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;   // input to each layer
    std::vector<Eigen::MatrixXd> lin;      // post-linear, pre-normalization
    std::vector<Eigen::MatrixXd> normed;   // post-normalization, pre-rectifier
    std::vector<Eigen::RowVectorXd> mean;  // per-column statistics
    std::vector<Eigen::RowVectorXd> inv_std;
  };

  // Rejects non-finite input. cache may be null when gradients are not needed.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Cache* cache = nullptr) const;
  Eigen::VectorXd forward1(const Eigen::VectorXd& input) const;

  // Exact reverse-mode gradient of sum_b loss_b given d(loss)/d(output).
  // input_grad, when non-null, receives d(loss)/d(input) for chaining.
  Eigen::VectorXd backward(const Cache& cache, const Eigen::MatrixXd& output_grad,
                           Eigen::MatrixXd* input_grad = nullptr) const;

  // Views into the flat parameter vector.
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

 private:
  static constexpr double kNormEps = 1e-5;

  int weight_offset(int layer) const { return offsets_[static_cast<size_t>(layer)]; }
  bool normalized_layer(int layer) const { return layer_norm_ && layer + 1 < n_layers(); }

  std::vector<int> sizes_;
  bool layer_norm_ = false;
  std::vector<int> offsets_;       // per layer: start of [W, b, (gain, shift)]
  Eigen::VectorXd params_;
};

// Adaptive-moment optimizer state over one flat parameter vector.
struct AdamState {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  int64_t step_count = 0;
  int64_t skipped_steps = 0;  // non-finite gradient incidents

  explicit AdamState(int n_params = 0, double lr = 5e-4)
      : learning_rate(lr), m(Eigen::VectorXd::Zero(n_params)), v(Eigen::VectorXd::Zero(n_params)) {}
};

// One update with bias correction. A non-finite gradient skips the step and
// bumps skipped_steps instead of poisoning the parameters.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state);

// Categorical distribution helpers over raw logits (natural log everywhere).
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);
Eigen::MatrixXd log_softmax_cols(const Eigen::MatrixXd& logits);
double categorical_entropy(const Eigen::VectorXd& logits);
int categorical_sample(const Eigen::VectorXd& logits, Rng& rng);

}  // namespace dgmarl
