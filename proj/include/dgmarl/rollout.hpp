#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dgmarl/adjacency.hpp"
#include "dgmarl/env_core.hpp"
#include "dgmarl/rng.hpp"

namespace dgmarl {

// One stored episode. Observations and substates carry T+1 entries (the
// terminal ones included); every other per-timestep field carries T. The
// done flag is only ever set on the last transition of an episode.
struct EpisodeData {
  int n_agents = 0;
  int T = 0;
  std::vector<std::vector<Eigen::VectorXd>> obs;          // [T+1][agent]
  std::vector<std::vector<std::vector<double>>> substates;  // [T+1][agent][..]
  Eigen::MatrixXi actions;   // T x N
  Eigen::MatrixXd rewards;   // T x N
  Eigen::MatrixXd log_probs; // T x N
  Eigen::MatrixXd values;    // T x N, filled by the trainer after collection
  std::vector<uint8_t> dones;  // [T]
  AdjacencySequence adj;       // [T]
};

struct RolloutBatch {
  std::string env_id;
  uint64_t seed = 0;
  std::string graph_source;
  int n_agents = 0;
  int obs_dim = 0;
  std::vector<EpisodeData> episodes;

  int total_steps() const {
    int s = 0;
    for (const auto& e : episodes) s += e.T;
    return s;
  }
  void check_invariants() const;
};

// JSON layout (schema_version 1): flat row-major arrays per field, adjacency
// as packed bit rows (one integer per row). Round-trips exactly.
std::string to_json(const RolloutBatch& batch);
RolloutBatch batch_from_json(const std::string& text);

// Supplies one adjacency matrix per stored transition. The Learned source
// stores identity placeholders during collection; the trainer fills them in
// post-hoc from the graph models.
template <class Env>
class GraphProvider {
 public:
  GraphProvider(GraphSource source, Rng rng) : source_(source), rng_(rng) {}

  const GraphSource& source() const { return source_; }

  AdjacencyMatrix operator()(const Env& env, const typename Env::State& state) {
    const int n = env.spec().n_agents;
    switch (source_.kind) {
      case GraphSource::Kind::Full: return AdjacencyMatrix::full(n);
      case GraphSource::Kind::ErdosRenyi: return erdos_renyi_graph(n, source_.p, rng_);
      case GraphSource::Kind::Oracle: return env.oracle_adjacency(state);
      case GraphSource::Kind::Identity:
      case GraphSource::Kind::Learned: return AdjacencyMatrix::identity(n);
    }
    return AdjacencyMatrix::identity(n);
  }

 private:
  GraphSource source_;
  Rng rng_;
};

// Collects whole episodes (a t_max cap truncates and is treated as
// termination; t_max < 0 means the environment horizon, t_max == 0 collects
// nothing). Policy must expose action_count(agent) and
// act(obs, agent, rng) -> {action, log_prob}.
template <class Env, class Policy>
RolloutBatch rollout(const Env& env, Policy& policy, GraphProvider<Env>& graphs, int t_max,
                     int n_episodes, Rng& env_rng, Rng& policy_rng) {
  const EnvSpec spec = env.spec();
  spec.validate();
  for (int i = 0; i < spec.n_agents; ++i)
    if (policy.action_count(i) != spec.action_counts[static_cast<size_t>(i)])
      throw std::invalid_argument("rollout: policy/environment action dimension mismatch");

  RolloutBatch batch;
  batch.env_id = env.id();
  batch.seed = env_rng.key();
  batch.graph_source = graphs.source().str();
  batch.n_agents = spec.n_agents;
  batch.obs_dim = spec.obs_dim;

  const int cap = t_max < 0 ? spec.max_steps : std::min(t_max, spec.max_steps);
  if (cap == 0) return batch;
  for (int ep = 0; ep < n_episodes; ++ep) {
    EpisodeData e;
    e.n_agents = spec.n_agents;
    auto state = env.reset(env_rng);

    std::vector<std::vector<Eigen::VectorXd>> obs_seq;
    std::vector<std::vector<std::vector<double>>> sub_seq;
    std::vector<int> act_flat;
    std::vector<double> rew_flat, logp_flat;
    std::vector<uint8_t> dones;

    std::vector<Eigen::VectorXd> obs0;
    std::vector<std::vector<double>> sub0;
    for (int i = 0; i < spec.n_agents; ++i) {
      obs0.push_back(env.observe(state, i));
      sub0.push_back(env.substate(state, i));
    }
    obs_seq.push_back(std::move(obs0));
    sub_seq.push_back(std::move(sub0));

    int T = 0;
    while (T < cap) {
      JointAction actions(static_cast<size_t>(spec.n_agents));
      std::vector<double> logps(static_cast<size_t>(spec.n_agents));
      for (int i = 0; i < spec.n_agents; ++i) {
        auto [a, lp] = policy.act(obs_seq.back()[static_cast<size_t>(i)], i, policy_rng);
        actions[static_cast<size_t>(i)] = a;
        logps[static_cast<size_t>(i)] = lp;
      }
      e.adj.push_back(graphs(env, state));
      auto result = env.step(state, actions, env_rng);

      for (int i = 0; i < spec.n_agents; ++i) {
        act_flat.push_back(actions[static_cast<size_t>(i)]);
        rew_flat.push_back(result.rewards[i]);
        logp_flat.push_back(logps[static_cast<size_t>(i)]);
      }
      state = std::move(result.next);
      ++T;
      const bool done = result.done || T == cap;  // horizon cap ends the episode
      dones.push_back(done ? 1 : 0);

      std::vector<std::vector<double>> subs;
      for (int i = 0; i < spec.n_agents; ++i) subs.push_back(env.substate(state, i));
      obs_seq.push_back(std::move(result.observations));
      sub_seq.push_back(std::move(subs));
      if (done) break;
    }

    e.T = T;
    e.obs = std::move(obs_seq);
    e.substates = std::move(sub_seq);
    e.actions = Eigen::MatrixXi::Zero(T, spec.n_agents);
    e.rewards = Eigen::MatrixXd::Zero(T, spec.n_agents);
    e.log_probs = Eigen::MatrixXd::Zero(T, spec.n_agents);
    e.values = Eigen::MatrixXd::Zero(T, spec.n_agents);
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < spec.n_agents; ++i) {
        e.actions(t, i) = act_flat[static_cast<size_t>(t * spec.n_agents + i)];
        e.rewards(t, i) = rew_flat[static_cast<size_t>(t * spec.n_agents + i)];
        e.log_probs(t, i) = logp_flat[static_cast<size_t>(t * spec.n_agents + i)];
      }
    e.dones = std::move(dones);
    batch.episodes.push_back(std::move(e));
  }
  batch.check_invariants();
  return batch;
}

// Uniform-random behavior policy (used for graph-model pretraining and
// inspection rollouts).
struct UniformPolicy {
  std::vector<int> action_counts;
  int action_count(int agent) const { return action_counts[static_cast<size_t>(agent)]; }
  std::pair<int, double> act(const Eigen::VectorXd&, int agent, Rng& rng) const {
    const int k = action_counts[static_cast<size_t>(agent)];
    return {rng.next_int(k), -std::log(static_cast<double>(k))};
  }
};

}  // namespace dgmarl
