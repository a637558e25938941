#include "dgmarl/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace dgmarl {

DenseNet::DenseNet(std::vector<int> layer_sizes, bool layer_norm)
    : sizes_(std::move(layer_sizes)), layer_norm_(layer_norm) {
  if (sizes_.size() < 2) throw std::invalid_argument("DenseNet: need at least one layer");
  for (int s : sizes_)
    if (s <= 0) throw std::invalid_argument("DenseNet: layer sizes must be positive");
  int offset = 0;
  for (int l = 0; l < n_layers(); ++l) {
    offsets_.push_back(offset);
    const int in = sizes_[static_cast<size_t>(l)];
    const int out = sizes_[static_cast<size_t>(l) + 1];
    offset += out * in + out;
    if (normalized_layer(l)) offset += 2 * out;
  }
  params_ = Eigen::VectorXd::Zero(offset);
  for (int l = 0; l < n_layers(); ++l)
    if (normalized_layer(l)) {
      const int in = sizes_[static_cast<size_t>(l)];
      const int out = sizes_[static_cast<size_t>(l) + 1];
      params_.segment(weight_offset(l) + out * in + out, out).setOnes();  // scale
    }
}

void DenseNet::init(Rng& rng) {
  for (int l = 0; l < n_layers(); ++l) {
    const int in = sizes_[static_cast<size_t>(l)];
    const int out = sizes_[static_cast<size_t>(l) + 1];
    const double a = std::sqrt(6.0 / (in + out));
    double* w = params_.data() + weight_offset(l);
    for (int k = 0; k < out * in; ++k) w[k] = (2.0 * rng.next_double() - 1.0) * a;
    params_.segment(weight_offset(l) + out * in, out).setZero();
    if (normalized_layer(l)) {
      params_.segment(weight_offset(l) + out * in + out, out).setOnes();
      params_.segment(weight_offset(l) + out * in + 2 * out, out).setZero();
    }
  }
}

Eigen::Map<const Eigen::MatrixXd> DenseNet::weight(int layer) const {
  const int in = sizes_[static_cast<size_t>(layer)];
  const int out = sizes_[static_cast<size_t>(layer) + 1];
  return {params_.data() + weight_offset(layer), out, in};
}

Eigen::Map<const Eigen::VectorXd> DenseNet::bias(int layer) const {
  const int in = sizes_[static_cast<size_t>(layer)];
  const int out = sizes_[static_cast<size_t>(layer) + 1];
  return {params_.data() + weight_offset(layer) + out * in, out};
}

Eigen::MatrixXd DenseNet::forward(const Eigen::MatrixXd& input, Cache* cache) const {
  if (input.rows() != input_size()) throw std::invalid_argument("DenseNet::forward: input size mismatch");
  if (!input.allFinite()) throw std::invalid_argument("DenseNet::forward: non-finite input");
  if (cache) {
    cache->inputs.clear();
    cache->lin.clear();
    cache->normed.clear();
    cache->mean.clear();
    cache->inv_std.clear();
  }

  Eigen::MatrixXd x = input;
  for (int l = 0; l < n_layers(); ++l) {
    const int out = sizes_[static_cast<size_t>(l) + 1];
    if (cache) cache->inputs.push_back(x);

    Eigen::MatrixXd u = (weight(l) * x).colwise() + bias(l);
    if (cache) cache->lin.push_back(u);

    Eigen::MatrixXd y;
    if (normalized_layer(l)) {
      const int in = sizes_[static_cast<size_t>(l)];
      const auto gain = Eigen::Map<const Eigen::VectorXd>(params_.data() + weight_offset(l) + out * in + out, out);
      const auto shift = Eigen::Map<const Eigen::VectorXd>(params_.data() + weight_offset(l) + out * in + 2 * out, out);
      const Eigen::RowVectorXd mean = u.colwise().mean();
      Eigen::MatrixXd centered = u.rowwise() - mean;
      const Eigen::RowVectorXd var = centered.array().square().colwise().mean();
      const Eigen::RowVectorXd inv_std = (var.array() + kNormEps).rsqrt();
      Eigen::MatrixXd xhat = centered.array().rowwise() * inv_std.array();
      y = (xhat.array().colwise() * gain.array()).colwise() + shift.array();
      if (cache) {
        cache->mean.push_back(mean);
        cache->inv_std.push_back(inv_std);
      }
    } else {
      y = u;
      if (cache) {
        cache->mean.emplace_back();
        cache->inv_std.emplace_back();
      }
    }
    if (cache) cache->normed.push_back(y);

    x = (l + 1 < n_layers()) ? y.cwiseMax(0.0) : std::move(y);
  }
  return x;
}

Eigen::VectorXd DenseNet::forward1(const Eigen::VectorXd& input) const {
  return forward(Eigen::MatrixXd(input)).col(0);
}

Eigen::VectorXd DenseNet::backward(const Cache& cache, const Eigen::MatrixXd& output_grad,
                                   Eigen::MatrixXd* input_grad) const {
  if (static_cast<int>(cache.inputs.size()) != n_layers())
    throw std::invalid_argument("DenseNet::backward: cache does not match this net");
  if (output_grad.rows() != output_size() || output_grad.cols() != cache.inputs.front().cols())
    throw std::invalid_argument("DenseNet::backward: output_grad shape mismatch");

  Eigen::VectorXd grads = Eigen::VectorXd::Zero(params_.size());
  Eigen::MatrixXd g = output_grad;
  for (int l = n_layers() - 1; l >= 0; --l) {
    const int in = sizes_[static_cast<size_t>(l)];
    const int out = sizes_[static_cast<size_t>(l) + 1];
    if (l + 1 < n_layers())
      g.array() *= (cache.normed[static_cast<size_t>(l)].array() > 0.0).cast<double>();

    Eigen::MatrixXd du;
    if (normalized_layer(l)) {
      const auto gain = Eigen::Map<const Eigen::VectorXd>(params_.data() + weight_offset(l) + out * in + out, out);
      const auto& mean = cache.mean[static_cast<size_t>(l)];
      const auto& inv_std = cache.inv_std[static_cast<size_t>(l)];
      Eigen::MatrixXd xhat =
          (cache.lin[static_cast<size_t>(l)].rowwise() - mean).array().rowwise() * inv_std.array();

      grads.segment(weight_offset(l) + out * in + out, out) += (g.array() * xhat.array()).rowwise().sum().matrix();
      grads.segment(weight_offset(l) + out * in + 2 * out, out) += g.rowwise().sum();

      Eigen::MatrixXd dxhat = g.array().colwise() * gain.array();
      const Eigen::RowVectorXd m1 = dxhat.colwise().mean();
      const Eigen::RowVectorXd m2 = (dxhat.array() * xhat.array()).colwise().mean();
      du = ((dxhat.rowwise() - m1).array() - (xhat.array().rowwise() * m2.array())).rowwise() * inv_std.array();
    } else {
      du = std::move(g);
    }

    Eigen::Map<Eigen::MatrixXd>(grads.data() + weight_offset(l), out, in) +=
        du * cache.inputs[static_cast<size_t>(l)].transpose();
    grads.segment(weight_offset(l) + out * in, out) += du.rowwise().sum();
    g = weight(l).transpose() * du;
  }
  if (input_grad) *input_grad = std::move(g);
  return grads;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (!grads.allFinite()) {
    ++state.skipped_steps;
    return;
  }
  ++state.step_count;
  state.m = state.beta1 * state.m + (1.0 - state.beta1) * grads;
  state.v = state.beta2 * state.v + (1.0 - state.beta2) * grads.array().square().matrix();
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  params.array() -= state.learning_rate * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + state.eps);
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

Eigen::MatrixXd log_softmax_cols(const Eigen::MatrixXd& logits) {
  const Eigen::RowVectorXd m = logits.colwise().maxCoeff();
  const Eigen::RowVectorXd lse =
      ((logits.rowwise() - m).array().exp().colwise().sum()).log().matrix() + m;
  return logits.rowwise() - lse;
}

double categorical_entropy(const Eigen::VectorXd& logits) {
  if (!logits.allFinite()) throw std::invalid_argument("categorical_entropy: non-finite logits");
  const Eigen::VectorXd logp = log_softmax(logits);
  return -(logp.array().exp() * logp.array()).sum();
}

int categorical_sample(const Eigen::VectorXd& logits, Rng& rng) {
  const Eigen::VectorXd p = log_softmax(logits).array().exp();
  double u = rng.next_double();
  for (int k = 0; k < p.size(); ++k) {
    u -= p[k];
    if (u < 0.0) return k;
  }
  return static_cast<int>(p.size()) - 1;
}

}  // namespace dgmarl
