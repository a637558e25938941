#pragma once

#include <string>

#include "dgmarl/tabular.hpp"

namespace dgmarl {

// Steps a TabularMdp as a regular environment (finite horizon, one-hot
// substate observations), exposing the declared dependence structure as the
// oracle adjacency.
class TabularEnv {
 public:
  struct State {
    std::vector<int> s;
    int step = 0;
    bool done = false;
  };

  TabularEnv(TabularMdp mdp, std::string id);

  const TabularMdp& mdp() const { return mdp_; }
  EnvSpec spec() const;
  const std::string& id() const { return id_; }
  double max_team_return() const;

  State reset(Rng& rng) const;
  StepResult<State> step(const State& state, const JointAction& actions, Rng& rng) const;

  Eigen::VectorXd observe(const State& state, int agent) const;
  std::vector<double> substate(const State& state, int agent) const;
  AdjacencyMatrix oracle_adjacency(const State& state) const { return mdp_.adjacency_at(state.s); }

 private:
  TabularMdp mdp_;
  std::string id_;
  int obs_dim_ = 0;
};

// Two-agent chain where agent 0's action writes its own next substate and,
// with probability `coupling`, agent 1's next substate as well (otherwise
// agent 1's own action does). Agent 1 earns 1.0 for pulling action 1 in
// substate 1; agent 0 earns 0.3 for matching its action to its substate.
TabularMdp lever_chain_mdp(double coupling, int horizon = 4, double gamma = 0.9);

TabularEnv lever_chain_coupled(int horizon = 4, double gamma = 0.9);
TabularEnv lever_chain_decoupled(int horizon = 4, double gamma = 0.9);

// One-step two-agent bandit: action 0 pays 1, action 1 pays 0, per agent.
TabularEnv two_agent_bandit();

// Build an environment from its id; recognizes LeverChain-coupled,
// LeverChain-decoupled and Bandit-2.
TabularEnv tabular_env_from_id(const std::string& id);

}  // namespace dgmarl
