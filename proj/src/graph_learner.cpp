#include "dgmarl/graph_learner.hpp"

#include <stdexcept>

namespace dgmarl {

namespace {
std::vector<int> with_bounds(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes{in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}

double column_entropy(const Eigen::MatrixXd& logp, int col) {
  return -(logp.col(col).array().exp() * logp.col(col).array()).sum();
}
}  // namespace

GraphLearner::GraphLearner(GraphLearnerConfig config, Rng rng) : config_(std::move(config)) {
  if (config_.obs_dim <= 0 || config_.n_actions <= 0)
    throw std::invalid_argument("GraphLearner: obs_dim and n_actions must be set");
  const int L = config_.latent_dim;
  encoder_ = DenseNet(with_bounds(config_.obs_dim, config_.encoder_hidden, L), /*layer_norm=*/true);
  single_reverse_ = DenseNet(with_bounds(2 * L, config_.model_hidden, config_.n_actions), true);
  action_pred_ = DenseNet(with_bounds(L, config_.model_hidden, config_.n_actions), true);
  pair_reverse_ = DenseNet(with_bounds(3 * L, config_.model_hidden, config_.n_actions), true);
  Rng r0 = rng.split("encoder"), r1 = rng.split("single"), r2 = rng.split("action"), r3 = rng.split("pair");
  encoder_.init(r0);
  single_reverse_.init(r1);
  action_pred_.init(r2);
  pair_reverse_.init(r3);
  opt_encoder_ = AdamState(static_cast<int>(encoder_.params().size()), config_.learning_rate);
  opt_single_ = AdamState(static_cast<int>(single_reverse_.params().size()), config_.learning_rate);
  opt_action_ = AdamState(static_cast<int>(action_pred_.params().size()), config_.learning_rate);
  opt_pair_ = AdamState(static_cast<int>(pair_reverse_.params().size()), config_.learning_rate);
}

Eigen::MatrixXd GraphLearner::encode(const EpisodeData& episode) const {
  const int n = episode.n_agents;
  Eigen::MatrixXd obs(config_.obs_dim, (episode.T + 1) * n);
  for (int t = 0; t <= episode.T; ++t)
    for (int i = 0; i < n; ++i)
      obs.col(t * n + i) = episode.obs[static_cast<size_t>(t)][static_cast<size_t>(i)];
  return encoder_.forward(obs);
}

AdjacencySequence GraphLearner::infer(const EpisodeData& episode) const {
  const int n = episode.n_agents;
  const int T = episode.T;
  const int L = config_.latent_dim;
  AdjacencySequence out;
  out.reserve(static_cast<size_t>(T));
  if (T == 0) return out;

  const Eigen::MatrixXd z = encode(episode);

  // H1 per (t, u): entropy of the unconditional action predictor.
  Eigen::MatrixXd pred_in(L, T * n);
  for (int t = 0; t < T; ++t)
    for (int u = 0; u < n; ++u) pred_in.col(t * n + u) = z.col(t * n + u);
  const Eigen::MatrixXd h1_logp = log_softmax_cols(action_pred_.forward(pred_in));

  // H2 per (t, u, v): entropy of the pairwise reverse model conditioned on
  // v's latent transition.
  const int pairs_per_t = n * (n - 1);
  Eigen::MatrixXd pair_in(3 * L, T * std::max(pairs_per_t, 1));
  int col = 0;
  for (int t = 0; t < T; ++t)
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v) {
        if (u == v) continue;
        pair_in.col(col).segment(0, L) = z.col(t * n + u);
        pair_in.col(col).segment(L, L) = z.col(t * n + v);
        pair_in.col(col).segment(2 * L, L) = z.col((t + 1) * n + v);
        ++col;
      }
  Eigen::MatrixXd h2_logp;
  if (pairs_per_t > 0) h2_logp = log_softmax_cols(pair_reverse_.forward(pair_in));

  col = 0;
  for (int t = 0; t < T; ++t) {
    AdjacencyMatrix a(n);
    for (int u = 0; u < n; ++u) {
      const double h1 = column_entropy(h1_logp, t * n + u);
      for (int v = 0; v < n; ++v) {
        if (u == v) continue;
        const double h2 = column_entropy(h2_logp, col++);
        if (h1 > config_.h1_floor && h2 / h1 < config_.threshold_c) a.set(u, v);
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

void GraphLearner::infer_into(RolloutBatch& batch) const {
  for (auto& e : batch.episodes) e.adj = infer(e);
}

double GraphLearner::update_encoder(const RolloutBatch& batch) {
  if (batch.total_steps() == 0) throw std::invalid_argument("update_encoder: empty batch");
  const int L = config_.latent_dim;
  const int n = batch.n_agents;

  // Forward the encoder over every stored observation with cache, episode by
  // episode stacked into one batch.
  int obs_cols = 0, sample_cols = 0;
  for (const auto& e : batch.episodes) {
    obs_cols += (e.T + 1) * n;
    sample_cols += e.T * n;
  }
  Eigen::MatrixXd obs(config_.obs_dim, obs_cols);
  std::vector<int> episode_base(batch.episodes.size(), 0);
  {
    int col = 0;
    for (size_t ei = 0; ei < batch.episodes.size(); ++ei) {
      const auto& e = batch.episodes[ei];
      episode_base[ei] = col;
      for (int t = 0; t <= e.T; ++t)
        for (int i = 0; i < n; ++i) obs.col(col++) = e.obs[static_cast<size_t>(t)][static_cast<size_t>(i)];
    }
  }
  DenseNet::Cache enc_cache;
  const Eigen::MatrixXd z = encoder_.forward(obs, &enc_cache);

  Eigen::MatrixXd sr_in(2 * L, sample_cols);
  std::vector<int> labels(static_cast<size_t>(sample_cols));
  std::vector<std::pair<int, int>> srcs(static_cast<size_t>(sample_cols));  // z columns (t, t+1)
  {
    int col = 0;
    for (size_t ei = 0; ei < batch.episodes.size(); ++ei) {
      const auto& e = batch.episodes[ei];
      for (int t = 0; t < e.T; ++t)
        for (int i = 0; i < n; ++i) {
          const int c0 = episode_base[ei] + t * n + i;
          const int c1 = episode_base[ei] + (t + 1) * n + i;
          sr_in.col(col).head(L) = z.col(c0);
          sr_in.col(col).tail(L) = z.col(c1);
          labels[static_cast<size_t>(col)] = e.actions(t, i);
          srcs[static_cast<size_t>(col)] = {c0, c1};
          ++col;
        }
    }
  }

  DenseNet::Cache sr_cache;
  const Eigen::MatrixXd logits = single_reverse_.forward(sr_in, &sr_cache);
  const Eigen::MatrixXd logp = log_softmax_cols(logits);
  double loss = 0.0;
  Eigen::MatrixXd dlogits = logp.array().exp();  // softmax
  for (int c = 0; c < sample_cols; ++c) {
    loss -= logp(labels[static_cast<size_t>(c)], c);
    dlogits(labels[static_cast<size_t>(c)], c) -= 1.0;
  }
  loss /= sample_cols;
  dlogits /= static_cast<double>(sample_cols);

  Eigen::MatrixXd d_sr_in;
  const Eigen::VectorXd sr_grads = single_reverse_.backward(sr_cache, dlogits, &d_sr_in);

  Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(L, obs_cols);
  for (int c = 0; c < sample_cols; ++c) {
    dz.col(srcs[static_cast<size_t>(c)].first) += d_sr_in.col(c).head(L);
    dz.col(srcs[static_cast<size_t>(c)].second) += d_sr_in.col(c).tail(L);
  }
  const Eigen::VectorXd enc_grads = encoder_.backward(enc_cache, dz);

  adam_step(single_reverse_.params(), sr_grads, opt_single_);
  adam_step(encoder_.params(), enc_grads, opt_encoder_);
  return loss;
}

std::pair<double, double> GraphLearner::update_reverse_models(const RolloutBatch& batch) {
  if (batch.total_steps() == 0) throw std::invalid_argument("update_reverse_models: empty batch");
  const int L = config_.latent_dim;
  const int n = batch.n_agents;

  int single_cols = 0;
  for (const auto& e : batch.episodes) single_cols += e.T * n;
  const int pair_cols = single_cols * n;  // ordered pairs, diagonal included

  Eigen::MatrixXd ap_in(L, single_cols);
  Eigen::MatrixXd pr_in(3 * L, pair_cols);
  std::vector<int> ap_labels(static_cast<size_t>(single_cols));
  std::vector<int> pr_labels(static_cast<size_t>(pair_cols));
  int ac = 0, pc = 0;
  for (const auto& e : batch.episodes) {
    const Eigen::MatrixXd z = encode(e);  // frozen: no cache, no encoder grads
    for (int t = 0; t < e.T; ++t)
      for (int u = 0; u < n; ++u) {
        ap_in.col(ac) = z.col(t * n + u);
        ap_labels[static_cast<size_t>(ac)] = e.actions(t, u);
        ++ac;
        for (int v = 0; v < n; ++v) {
          pr_in.col(pc).segment(0, L) = z.col(t * n + u);
          pr_in.col(pc).segment(L, L) = z.col(t * n + v);
          pr_in.col(pc).segment(2 * L, L) = z.col((t + 1) * n + v);
          pr_labels[static_cast<size_t>(pc)] = e.actions(t, u);
          ++pc;
        }
      }
  }

  auto ce_step = [](DenseNet& net, AdamState& opt, const Eigen::MatrixXd& in,
                    const std::vector<int>& labels) {
    DenseNet::Cache cache;
    const Eigen::MatrixXd logp = log_softmax_cols(net.forward(in, &cache));
    const int m = static_cast<int>(in.cols());
    double loss = 0.0;
    Eigen::MatrixXd dlogits = logp.array().exp();
    for (int c = 0; c < m; ++c) {
      loss -= logp(labels[static_cast<size_t>(c)], c);
      dlogits(labels[static_cast<size_t>(c)], c) -= 1.0;
    }
    loss /= m;
    dlogits /= static_cast<double>(m);
    adam_step(net.params(), net.backward(cache, dlogits), opt);
    return loss;
  };

  const double action_loss = ce_step(action_pred_, opt_action_, ap_in, ap_labels);
  const double pair_loss = ce_step(pair_reverse_, opt_pair_, pr_in, pr_labels);
  return {action_loss, pair_loss};
}

}  // namespace dgmarl
