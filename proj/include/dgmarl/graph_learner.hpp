#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "dgmarl/nn.hpp"
#include "dgmarl/rollout.hpp"

namespace dgmarl {

struct GraphLearnerConfig {
  int obs_dim = 0;
  int n_actions = 0;
  int latent_dim = 64;
  std::vector<int> encoder_hidden = {64, 64};
  std::vector<int> model_hidden = {256, 128, 128};
  double threshold_c = 0.9;   // edge u->v iff H2/H1 < c
  double h1_floor = 1e-6;     // below this the ratio is undefined: no edge
  double learning_rate = 5e-4;
};

// Learns the per-timestep interaction graph from data: a latent encoder
// trained through a single-agent reverse model, an unconditional action
// predictor, and a pairwise reverse model. An edge u->v is declared when
// conditioning on v's latent transition cuts the predicted entropy of u's
// action below the threshold ratio; self edges are always present.
class GraphLearner {
 public:
  GraphLearner() = default;
  GraphLearner(GraphLearnerConfig config, Rng rng);

  const GraphLearnerConfig& config() const { return config_; }

  // Latents for every stored observation of an episode: column (t * N + i).
  Eigen::MatrixXd encode(const EpisodeData& episode) const;

  AdjacencySequence infer(const EpisodeData& episode) const;
  void infer_into(RolloutBatch& batch) const;

  // Cross-entropy of the single-agent reverse model over all (agent, t);
  // gradients flow into the encoder. Returns the loss.
  double update_encoder(const RolloutBatch& batch);

  // Steps the action predictor and the pairwise reverse model on frozen
  // latents (the encoder is untouched, bit for bit). Returns both losses.
  std::pair<double, double> update_reverse_models(const RolloutBatch& batch);

  DenseNet& encoder() { return encoder_; }
  DenseNet& single_reverse() { return single_reverse_; }
  DenseNet& action_predictor() { return action_pred_; }
  DenseNet& pair_reverse() { return pair_reverse_; }
  const DenseNet& encoder() const { return encoder_; }
  const DenseNet& action_predictor() const { return action_pred_; }
  const DenseNet& pair_reverse() const { return pair_reverse_; }

 private:
  GraphLearnerConfig config_;
  DenseNet encoder_;         // obs -> latent
  DenseNet single_reverse_;  // (z_t, z_{t+1}) -> own action logits
  DenseNet action_pred_;     // z_t -> own action logits
  DenseNet pair_reverse_;    // (z_u_t, z_v_t, z_v_{t+1}) -> u's action logits
  AdamState opt_encoder_, opt_single_, opt_action_, opt_pair_;
};

}  // namespace dgmarl
