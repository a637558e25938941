#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "dgmarl/adjacency.hpp"
#include "dgmarl/env_core.hpp"

namespace dgmarl {

// Tiny factored MDP for exact verification: per-agent substates and actions,
// transition tables with declared parent sets, local reward tables, finite
// horizon. Small enough that the full trajectory tree can be enumerated.
struct TabularMdp {
  int n_agents = 0;
  std::vector<int> n_states;   // substates per agent
  std::vector<int> n_actions;  // actions per agent

  // trans[i] has one row per (joint state, joint action), giving the
  // distribution of agent i's next substate. Rows must sum to 1.
  std::vector<Eigen::MatrixXd> trans;
  // parents[i][s_i]: bitmask of agents whose state-action the row may read.
  std::vector<std::vector<uint64_t>> parents;
  // reward[i](s_i, a_i), local by construction.
  std::vector<Eigen::MatrixXd> reward;
  RewardDependenceInit reward_deps;  // default: own state-action only

  double gamma = 0.99;
  int horizon = 4;
  std::vector<int> init_state;

  int joint_states() const;
  int joint_actions() const;
  int encode_state(const std::vector<int>& s) const;
  std::vector<int> decode_state(int code) const;
  int encode_action(const std::vector<int>& a) const;
  std::vector<int> decode_action(int code) const;
  int row_index(int s_code, int a_code) const { return s_code * joint_actions() + a_code; }

  // Adjacency induced by the declared parent sets at a joint state.
  AdjacencyMatrix adjacency_at(const std::vector<int>& s) const;

  // Rows sum to 1 and declared parent sets are consistent with the tables:
  // perturbing any non-parent's substate or action never changes a row.
  void validate() const;
};

// Per-agent logits per substate.
struct TabularPolicy {
  std::vector<Eigen::MatrixXd> logits;  // [agent]: n_states x n_actions

  static TabularPolicy uniform(const TabularMdp& mdp);
  static TabularPolicy random(const TabularMdp& mdp, Rng& rng, double scale = 0.5);

  Eigen::VectorXd probs(int agent, int substate) const;
  double log_prob(int agent, int substate, int action) const;
  int sample(int agent, int substate, Rng& rng) const;
  int grad_size(int agent) const {
    return static_cast<int>(logits[static_cast<size_t>(agent)].size());
  }
};

// Graph supplied per joint state (true, superset, subset, or custom).
using StateGraphFn = std::function<AdjacencyMatrix(const TabularMdp&, const std::vector<int>&)>;

StateGraphFn true_graph();
StateGraphFn full_graph();
StateGraphFn identity_graph();

// Exact finite-horizon score-function gradient of owner's return with respect
// to actor's logits: sum over all trajectories of
//   P(tau) * sum_t grad log pi_actor(a_t) * sum_{k>=t} gamma^k r^owner_k.
// Enumeration is exact; instances above the trajectory guard are rejected.
Eigen::VectorXd exact_policy_gradient(const TabularMdp& mdp, const TabularPolicy& policy, int owner,
                                      int actor);

// Same enumeration, but each trajectory's return-to-go for the term at t
// starts at that trajectory's meeting timestep on the supplied graph (the
// first time the actor's influence frontier reaches the owner); a trajectory
// with no meeting contributes nothing.
Eigen::VectorXd exact_truncated_gradient(const TabularMdp& mdp, const TabularPolicy& policy, int owner,
                                         int actor, const StateGraphFn& graph);

// Exact expected return of owner under the joint policy.
double exact_objective(const TabularMdp& mdp, const TabularPolicy& policy, int owner);

// Total probability mass of the enumerated trajectory tree (should be 1).
double enumeration_mass(const TabularMdp& mdp, const TabularPolicy& policy);

// || exact_policy_gradient - exact_truncated_gradient(subset_graph) ||_inf:
// zero when the edges missing from the subset carry no actual influence.
double missing_edge_gradient_gap(const TabularMdp& mdp, const TabularPolicy& policy, int owner,
                                 int actor, const StateGraphFn& subset_graph);

struct SampledGradient {
  Eigen::VectorXd mean;
  Eigen::VectorXd std_err;       // per-component standard error of the mean
  double variance_trace = 0.0;   // sum of per-component sample variances
  int64_t n_samples = 0;
};

// Monte-Carlo estimate of the truncated gradient with the sampled-trajectory
// estimator (lambda = 1, zero value baseline, so the per-lag weights reduce
// to plain reachability indicators). Mean converges to
// exact_truncated_gradient; the variance trace is what graph truncation is
// supposed to shrink.
SampledGradient sample_truncated_gradient(const TabularMdp& mdp, const TabularPolicy& policy, int owner,
                                          int actor, const StateGraphFn& graph, int64_t n_samples,
                                          Rng& rng);

// Aggregate over owners: per-trajectory gradient for the actor summed across
// all reward owners, as the trainer would use it.
SampledGradient sample_aggregate_gradient(const TabularMdp& mdp, const TabularPolicy& policy, int actor,
                                          const StateGraphFn& graph, int64_t n_samples, Rng& rng);

}  // namespace dgmarl
