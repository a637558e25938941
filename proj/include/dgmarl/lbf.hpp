#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "dgmarl/env_core.hpp"

namespace dgmarl {

// Level-based foraging configuration. Scenario strings look like
// Foraging-8x8-2p-2f, optionally suffixed -coop (food levels above any single
// agent, so collections need at least two participants) and -wta (winner
// takes all: the whole collection reward goes to the highest-level
// participant, ties to the lower index).
struct LbfConfig {
  int grid_w = 8;
  int grid_h = 8;
  int n_agents = 2;
  int n_foods = 2;
  std::vector<int> agent_levels;  // fixed per scenario
  std::vector<int> food_levels;
  bool coop = false;
  bool winner_takes_all = false;
  int max_steps = 50;

  void validate() const;
  std::string scenario() const;
  static LbfConfig from_scenario(const std::string& name);
};

struct LbfState {
  struct Agent {
    int x = 0, y = 0, level = 1;
  };
  struct Food {
    int x = 0, y = 0, level = 1;
    bool taken = false;
  };
  std::vector<Agent> agents;
  std::vector<Food> foods;
  int step = 0;
  bool done = false;
};

// Actions: 0 noop, 1 up (y-1), 2 down (y+1), 3 left, 4 right, 5 load.
//
// Movement is simultaneous; a mover stays put when its target is off-grid, a
// food cell, another agent's current cell, or contested by another mover.
// A food is collected when the agents adjacent to it (L1 distance 1) that
// play load have a level sum at least the food level. Rewards are shares of
// food_level / sum of initial food levels, so a fully cleared episode pays
// the team exactly 1 in both reward variants.
class LbfEnv {
 public:
  using State = LbfState;
  static constexpr int kNoop = 0, kUp = 1, kDown = 2, kLeft = 3, kRight = 4, kLoad = 5;

  explicit LbfEnv(LbfConfig config);

  const LbfConfig& config() const { return config_; }
  EnvSpec spec() const;
  std::string id() const { return config_.scenario(); }
  double max_team_return() const { return 1.0; }

  State reset(Rng& rng) const;
  StepResult<State> step(const State& state, const JointAction& actions, Rng& rng) const;

  Eigen::VectorXd observe(const State& state, int agent) const;
  std::vector<double> substate(const State& state, int agent) const;
  AdjacencyMatrix oracle_adjacency(const State& state) const;

  int total_food_level() const { return total_food_level_; }

  // Reward increment for one collected food given the participating agents
  // (level sum already validated against the food level).
  RewardVector collection_reward(int food_level, const std::vector<int>& participants,
                                 const State& state) const;

 private:
  LbfConfig config_;
  int total_food_level_ = 0;
};

}  // namespace dgmarl
