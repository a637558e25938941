#pragma once

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgmarl/adjacency.hpp"
#include "dgmarl/rng.hpp"

namespace dgmarl {

using AgentId = int;

// One discrete action index per agent.
using JointAction = std::vector<int>;

// One scalar reward per agent.
using RewardVector = Eigen::VectorXd;

struct EnvSpec {
  int n_agents = 0;
  std::vector<int> action_counts;  // per agent
  int obs_dim = 0;
  int max_steps = 0;
  double reward_max = 1.0;

  void validate() const {
    if (n_agents <= 0) throw std::invalid_argument("EnvSpec: n_agents must be positive");
    if (static_cast<int>(action_counts.size()) != n_agents)
      throw std::invalid_argument("EnvSpec: action_counts size mismatch");
    for (int k : action_counts)
      if (k <= 0) throw std::invalid_argument("EnvSpec: action counts must be positive");
    if (obs_dim <= 0 || max_steps <= 0 || reward_max <= 0)
      throw std::invalid_argument("EnvSpec: dimensions must be positive");
  }
};

// Joint outcome of one environment transition.
template <class State>
struct StepResult {
  State next;
  RewardVector rewards;
  bool done = false;
  std::vector<Eigen::VectorXd> observations;  // per agent, of the next state
};

// Sum_t gamma^t r_t.
double discounted_return(std::span<const double> rewards, double gamma);

inline void check_joint_action(const EnvSpec& spec, const JointAction& a) {
  if (static_cast<int>(a.size()) != spec.n_agents)
    throw std::invalid_argument("joint action: wrong agent count");
  for (int i = 0; i < spec.n_agents; ++i)
    if (a[i] < 0 || a[i] >= spec.action_counts[i])
      throw std::invalid_argument("joint action: action index " + std::to_string(a[i]) +
                                  " out of range for agent " + std::to_string(i));
}

}  // namespace dgmarl
