#include "dgmarl/lbf.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace dgmarl {

void LbfConfig::validate() const {
  if (grid_w < 2 || grid_h < 2) throw std::invalid_argument("LbfConfig: grid must be at least 2x2");
  if (n_agents < 1 || n_foods < 1) throw std::invalid_argument("LbfConfig: need agents and foods");
  if (n_agents > AdjacencyMatrix::kMaxAgents) throw std::invalid_argument("LbfConfig: too many agents");
  if (static_cast<int>(agent_levels.size()) != n_agents || static_cast<int>(food_levels.size()) != n_foods)
    throw std::invalid_argument("LbfConfig: level lists must match agent/food counts");
  for (int l : agent_levels)
    if (l < 1) throw std::invalid_argument("LbfConfig: agent levels must be positive");
  for (int l : food_levels)
    if (l < 1) throw std::invalid_argument("LbfConfig: food levels must be positive");
  if (max_steps < 1) throw std::invalid_argument("LbfConfig: max_steps must be positive");
  if (grid_w * grid_h < n_agents + n_foods)
    throw std::invalid_argument("LbfConfig: grid too small for distinct spawn cells");
  if (coop) {
    const int max_agent = *std::max_element(agent_levels.begin(), agent_levels.end());
    const int min_food = *std::min_element(food_levels.begin(), food_levels.end());
    if (min_food <= max_agent)
      throw std::invalid_argument("LbfConfig: coop requires every food level above any single agent level");
  }
}

std::string LbfConfig::scenario() const {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "Foraging-%dx%d-%dp-%df%s%s", grid_w, grid_h, n_agents, n_foods,
                coop ? "-coop" : "", winner_takes_all ? "-wta" : "");
  return buf;
}

LbfConfig LbfConfig::from_scenario(const std::string& name) {
  LbfConfig cfg;
  int w = 0, h = 0, p = 0, f = 0, consumed = 0;
  if (std::sscanf(name.c_str(), "Foraging-%dx%d-%dp-%df%n", &w, &h, &p, &f, &consumed) != 4)
    throw std::invalid_argument("LbfConfig: cannot parse scenario '" + name + "'");
  std::string rest = name.substr(static_cast<size_t>(consumed));
  cfg.grid_w = w;
  cfg.grid_h = h;
  cfg.n_agents = p;
  cfg.n_foods = f;
  if (rest.rfind("-coop", 0) == 0) {
    cfg.coop = true;
    rest = rest.substr(5);
  }
  if (rest.rfind("-wta", 0) == 0) {
    cfg.winner_takes_all = true;
    rest = rest.substr(4);
  }
  if (!rest.empty()) throw std::invalid_argument("LbfConfig: trailing junk in scenario '" + name + "'");

  // Default level scheme: agents alternate levels 1 and 2; vanilla foods
  // alternate 1 and 2 (each collectable by a single level-2 agent); coop
  // foods sit one above the strongest agent so nobody collects alone.
  cfg.agent_levels.resize(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) cfg.agent_levels[static_cast<size_t>(i)] = 1 + (i % 2);
  const int max_agent = *std::max_element(cfg.agent_levels.begin(), cfg.agent_levels.end());
  cfg.food_levels.resize(static_cast<size_t>(f));
  for (int k = 0; k < f; ++k)
    cfg.food_levels[static_cast<size_t>(k)] = cfg.coop ? max_agent + 1 : 1 + (k % 2);
  cfg.validate();
  return cfg;
}

LbfEnv::LbfEnv(LbfConfig config) : config_(std::move(config)) {
  config_.validate();
  total_food_level_ = std::accumulate(config_.food_levels.begin(), config_.food_levels.end(), 0);
}

EnvSpec LbfEnv::spec() const {
  EnvSpec s;
  s.n_agents = config_.n_agents;
  s.action_counts.assign(static_cast<size_t>(config_.n_agents), 6);
  s.obs_dim = 3 * (config_.n_foods + config_.n_agents);
  s.max_steps = config_.max_steps;
  s.reward_max = 1.0;
  return s;
}

LbfEnv::State LbfEnv::reset(Rng& rng) const {
  State st;
  // Distinct spawn cells for agents then foods: partial Fisher-Yates over the
  // flattened grid.
  const int cells = config_.grid_w * config_.grid_h;
  const int wanted = config_.n_agents + config_.n_foods;
  std::vector<int> pool(static_cast<size_t>(cells));
  std::iota(pool.begin(), pool.end(), 0);
  for (int k = 0; k < wanted; ++k) {
    const int j = k + rng.next_int(cells - k);
    std::swap(pool[static_cast<size_t>(k)], pool[static_cast<size_t>(j)]);
  }
  st.agents.resize(static_cast<size_t>(config_.n_agents));
  for (int i = 0; i < config_.n_agents; ++i) {
    st.agents[static_cast<size_t>(i)] = {pool[static_cast<size_t>(i)] % config_.grid_w,
                                         pool[static_cast<size_t>(i)] / config_.grid_w,
                                         config_.agent_levels[static_cast<size_t>(i)]};
  }
  st.foods.resize(static_cast<size_t>(config_.n_foods));
  for (int k = 0; k < config_.n_foods; ++k) {
    const int cell = pool[static_cast<size_t>(config_.n_agents + k)];
    st.foods[static_cast<size_t>(k)] = {cell % config_.grid_w, cell / config_.grid_w,
                                        config_.food_levels[static_cast<size_t>(k)], false};
  }
  return st;
}

RewardVector LbfEnv::collection_reward(int food_level, const std::vector<int>& participants,
                                       const State& state) const {
  RewardVector r = RewardVector::Zero(config_.n_agents);
  if (participants.empty()) throw std::invalid_argument("collection_reward: no participants");
  const double food_share = static_cast<double>(food_level) / total_food_level_;
  if (config_.winner_takes_all) {
    int winner = participants.front();
    for (int k : participants)
      if (state.agents[static_cast<size_t>(k)].level > state.agents[static_cast<size_t>(winner)].level)
        winner = k;  // ties keep the lower index: participants are ascending
    r[winner] = food_share;
  } else {
    double level_sum = 0;
    for (int k : participants) level_sum += state.agents[static_cast<size_t>(k)].level;
    for (int k : participants)
      r[k] = state.agents[static_cast<size_t>(k)].level / level_sum * food_share;
  }
  return r;
}

StepResult<LbfEnv::State> LbfEnv::step(const State& state, const JointAction& actions, Rng&) const {
  if (state.done) throw std::logic_error("LbfEnv::step: episode already terminated");
  check_joint_action(spec(), actions);

  State next = state;
  const int n = config_.n_agents;

  // Simultaneous movement with collision rejection.
  std::vector<int> target(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& a = state.agents[static_cast<size_t>(i)];
    int tx = a.x, ty = a.y;
    switch (actions[static_cast<size_t>(i)]) {
      case kUp: --ty; break;
      case kDown: ++ty; break;
      case kLeft: --tx; break;
      case kRight: ++tx; break;
      default: break;
    }
    bool ok = tx >= 0 && tx < config_.grid_w && ty >= 0 && ty < config_.grid_h;
    if (ok)
      for (const auto& food : state.foods)
        if (!food.taken && food.x == tx && food.y == ty) ok = false;
    if (ok)
      for (int u = 0; u < n; ++u)
        if (u != i && state.agents[static_cast<size_t>(u)].x == tx &&
            state.agents[static_cast<size_t>(u)].y == ty)
          ok = false;
    target[static_cast<size_t>(i)] = ok ? ty * config_.grid_w + tx : -1;
  }
  for (int i = 0; i < n; ++i) {
    if (target[static_cast<size_t>(i)] < 0) continue;
    bool contested = false;
    for (int u = 0; u < n; ++u)
      if (u != i && target[static_cast<size_t>(u)] == target[static_cast<size_t>(i)]) contested = true;
    if (contested) continue;
    next.agents[static_cast<size_t>(i)].x = target[static_cast<size_t>(i)] % config_.grid_w;
    next.agents[static_cast<size_t>(i)].y = target[static_cast<size_t>(i)] / config_.grid_w;
  }

  // Collection: loaders adjacent to a food whose level sum meets it.
  RewardVector rewards = RewardVector::Zero(n);
  for (auto& food : next.foods) {
    if (food.taken) continue;
    std::vector<int> participants;
    int level_sum = 0;
    for (int i = 0; i < n; ++i) {
      if (actions[static_cast<size_t>(i)] != kLoad) continue;
      const auto& a = state.agents[static_cast<size_t>(i)];  // loaders never move
      if (std::abs(a.x - food.x) + std::abs(a.y - food.y) == 1) {
        participants.push_back(i);
        level_sum += a.level;
      }
    }
    if (!participants.empty() && level_sum >= food.level) {
      food.taken = true;
      rewards += collection_reward(food.level, participants, state);
    }
  }

  next.step = state.step + 1;
  const bool cleared =
      std::all_of(next.foods.begin(), next.foods.end(), [](const auto& f) { return f.taken; });
  next.done = cleared || next.step >= config_.max_steps;

  StepResult<State> out;
  out.rewards = std::move(rewards);
  out.done = next.done;
  out.observations.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out.observations.push_back(observe(next, i));
  out.next = std::move(next);
  return out;
}

Eigen::VectorXd LbfEnv::observe(const State& state, int agent) const {
  const double sx = std::max(1, config_.grid_w - 1);
  const double sy = std::max(1, config_.grid_h - 1);
  Eigen::VectorXd obs(3 * (config_.n_foods + config_.n_agents));
  int k = 0;
  for (const auto& food : state.foods) {
    if (food.taken) {
      obs[k++] = -1.0;
      obs[k++] = -1.0;
      obs[k++] = 0.0;
    } else {
      obs[k++] = food.x / sx;
      obs[k++] = food.y / sy;
      obs[k++] = food.level;
    }
  }
  for (int off = 0; off < config_.n_agents; ++off) {
    const auto& a = state.agents[static_cast<size_t>((agent + off) % config_.n_agents)];
    obs[k++] = a.x / sx;
    obs[k++] = a.y / sy;
    obs[k++] = a.level;
  }
  return obs;
}

std::vector<double> LbfEnv::substate(const State& state, int agent) const {
  const auto& a = state.agents[static_cast<size_t>(agent)];
  return {static_cast<double>(a.x), static_cast<double>(a.y), static_cast<double>(a.level)};
}

AdjacencyMatrix LbfEnv::oracle_adjacency(const State& state) const {
  std::vector<GridPos> pos;
  pos.reserve(state.agents.size());
  for (const auto& a : state.agents) pos.push_back({a.x, a.y});
  return proximity_graph(pos);
}

}  // namespace dgmarl
