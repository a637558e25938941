#include "dgmarl/tabular_env.hpp"

#include <algorithm>
#include <stdexcept>

namespace dgmarl {

TabularEnv::TabularEnv(TabularMdp mdp, std::string id) : mdp_(std::move(mdp)), id_(std::move(id)) {
  mdp_.validate();
  obs_dim_ = *std::max_element(mdp_.n_states.begin(), mdp_.n_states.end());
}

EnvSpec TabularEnv::spec() const {
  EnvSpec s;
  s.n_agents = mdp_.n_agents;
  s.action_counts = mdp_.n_actions;
  s.obs_dim = obs_dim_;
  s.max_steps = mdp_.horizon;
  double rmax = 0.0;
  for (const auto& r : mdp_.reward) rmax = std::max(rmax, r.maxCoeff());
  s.reward_max = std::max(rmax, 1e-12);
  return s;
}

double TabularEnv::max_team_return() const {
  double per_step = 0.0;
  for (const auto& r : mdp_.reward) per_step += r.maxCoeff();
  return std::max(per_step * mdp_.horizon, 1e-12);
}

TabularEnv::State TabularEnv::reset(Rng&) const { return {mdp_.init_state, 0, false}; }

StepResult<TabularEnv::State> TabularEnv::step(const State& state, const JointAction& actions,
                                               Rng& rng) const {
  if (state.done) throw std::logic_error("TabularEnv::step: episode already terminated");
  check_joint_action(spec(), actions);

  const int row = mdp_.row_index(mdp_.encode_state(state.s), mdp_.encode_action(actions));
  State next;
  next.s.resize(static_cast<size_t>(mdp_.n_agents));
  RewardVector rewards(mdp_.n_agents);
  for (int i = 0; i < mdp_.n_agents; ++i) {
    rewards[i] = mdp_.reward[static_cast<size_t>(i)](state.s[static_cast<size_t>(i)],
                                                     actions[static_cast<size_t>(i)]);
    double u = rng.next_double();
    int pick = mdp_.n_states[static_cast<size_t>(i)] - 1;
    for (int v = 0; v < mdp_.n_states[static_cast<size_t>(i)]; ++v) {
      u -= mdp_.trans[static_cast<size_t>(i)](row, v);
      if (u < 0.0) {
        pick = v;
        break;
      }
    }
    next.s[static_cast<size_t>(i)] = pick;
  }
  next.step = state.step + 1;
  next.done = next.step >= mdp_.horizon;

  StepResult<State> out;
  out.rewards = std::move(rewards);
  out.done = next.done;
  for (int i = 0; i < mdp_.n_agents; ++i) out.observations.push_back(observe(next, i));
  out.next = std::move(next);
  return out;
}

Eigen::VectorXd TabularEnv::observe(const State& state, int agent) const {
  Eigen::VectorXd obs = Eigen::VectorXd::Zero(obs_dim_);
  obs[state.s[static_cast<size_t>(agent)]] = 1.0;
  return obs;
}

std::vector<double> TabularEnv::substate(const State& state, int agent) const {
  return {static_cast<double>(state.s[static_cast<size_t>(agent)])};
}

TabularMdp lever_chain_mdp(double coupling, int horizon, double gamma) {
  if (!(coupling >= 0.0 && coupling <= 1.0))
    throw std::invalid_argument("lever_chain_mdp: coupling must lie in [0,1]");
  TabularMdp mdp;
  mdp.n_agents = 2;
  mdp.n_states = {2, 2};
  mdp.n_actions = {2, 2};
  mdp.gamma = gamma;
  mdp.horizon = horizon;
  mdp.init_state = {0, 0};

  const int S = mdp.joint_states(), A = mdp.joint_actions();
  mdp.trans = {Eigen::MatrixXd::Zero(S * A, 2), Eigen::MatrixXd::Zero(S * A, 2)};
  for (int sc = 0; sc < S; ++sc)
    for (int ac = 0; ac < A; ++ac) {
      const auto a = mdp.decode_action(ac);
      const int row = mdp.row_index(sc, ac);
      // Agent 0 drives its own substate.
      mdp.trans[0](row, a[0]) = 1.0;
      // Agent 1's substate follows agent 0's action with prob `coupling`,
      // otherwise its own action.
      mdp.trans[1](row, a[0]) += coupling;
      mdp.trans[1](row, a[1]) += 1.0 - coupling;
    }

  const uint64_t self0 = 1, self1 = 2;
  mdp.parents.resize(2);
  mdp.parents[0] = {self0, self0};
  const uint64_t pa1 = coupling > 0.0 ? (self0 | self1) : self1;
  mdp.parents[1] = {pa1, pa1};

  mdp.reward.resize(2);
  mdp.reward[0] = Eigen::MatrixXd::Zero(2, 2);
  mdp.reward[0](0, 0) = 0.3;
  mdp.reward[0](1, 1) = 0.3;
  mdp.reward[1] = Eigen::MatrixXd::Zero(2, 2);
  mdp.reward[1](1, 1) = 1.0;
  return mdp;
}

TabularEnv lever_chain_coupled(int horizon, double gamma) {
  return {lever_chain_mdp(1.0, horizon, gamma), "LeverChain-coupled"};
}

TabularEnv lever_chain_decoupled(int horizon, double gamma) {
  return {lever_chain_mdp(0.0, horizon, gamma), "LeverChain-decoupled"};
}

TabularEnv two_agent_bandit() {
  TabularMdp mdp;
  mdp.n_agents = 2;
  mdp.n_states = {1, 1};
  mdp.n_actions = {2, 2};
  mdp.gamma = 0.9;
  mdp.horizon = 1;
  mdp.init_state = {0, 0};
  const int A = mdp.joint_actions();
  mdp.trans = {Eigen::MatrixXd::Ones(A, 1), Eigen::MatrixXd::Ones(A, 1)};
  mdp.parents = {{1}, {2}};
  mdp.reward.resize(2);
  for (int i = 0; i < 2; ++i) {
    mdp.reward[static_cast<size_t>(i)] = Eigen::MatrixXd::Zero(1, 2);
    mdp.reward[static_cast<size_t>(i)](0, 0) = 1.0;
  }
  return {std::move(mdp), "Bandit-2"};
}

TabularEnv tabular_env_from_id(const std::string& id) {
  if (id == "LeverChain-coupled") return lever_chain_coupled();
  if (id == "LeverChain-decoupled") return lever_chain_decoupled();
  if (id == "Bandit-2") return two_agent_bandit();
  throw std::invalid_argument("tabular_env_from_id: unknown environment '" + id + "'");
}

}  // namespace dgmarl
