#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "dgmarl/nn.hpp"
#include "dgmarl/rollout.hpp"

namespace dgmarl {

// Actor shared across agents: the observation gets a one-hot agent-id suffix
// so one parameter set can act for everyone. Requires a uniform action count.
class SharedActor {
 public:
  SharedActor() = default;
  SharedActor(int obs_dim, int n_agents, int n_actions, const std::vector<int>& hidden, Rng rng);

  int action_count(int) const { return n_actions_; }
  int n_agents() const { return n_agents_; }
  int input_size() const { return obs_dim_ + n_agents_; }

  Eigen::VectorXd with_id(const Eigen::VectorXd& obs, int agent) const;
  Eigen::VectorXd logits(const Eigen::VectorXd& obs, int agent) const;

  // Sampled action with its log-probability (rollout interface).
  std::pair<int, double> act(const Eigen::VectorXd& obs, int agent, Rng& rng) const;
  int greedy(const Eigen::VectorXd& obs, int agent) const;

  DenseNet& net() { return net_; }
  const DenseNet& net() const { return net_; }

 private:
  DenseNet net_;
  int obs_dim_ = 0, n_agents_ = 0, n_actions_ = 0;
};

// Critic shared across reward owners, one-hot owner suffix. IPPO reads the
// owner's observation, MAPPO the concatenated joint observation.
class SharedCritic {
 public:
  enum class Mode { IPPO, MAPPO };

  SharedCritic() = default;
  SharedCritic(Mode mode, int obs_dim, int n_agents, const std::vector<int>& hidden, Rng rng);

  Mode mode() const { return mode_; }
  int input_size() const;

  // Critic input for reward owner `agent` at timestep t of an episode.
  Eigen::VectorXd input(const EpisodeData& episode, int t, int agent) const;
  double value(const Eigen::VectorXd& input) const { return net_.forward1(input)[0]; }

  // Fills episode.values for every (t, owner) in one batched pass.
  void fill_values(EpisodeData& episode) const;

  DenseNet& net() { return net_; }
  const DenseNet& net() const { return net_; }

 private:
  Mode mode_ = Mode::IPPO;
  DenseNet net_;
  int obs_dim_ = 0, n_agents_ = 0;
};

}  // namespace dgmarl
