#include "dgmarl/tabular.hpp"

#include <cmath>
#include <stdexcept>

#include "dgmarl/nn.hpp"

namespace dgmarl {

namespace {
constexpr int64_t kTrajectoryGuard = 1'000'000;
}

int TabularMdp::joint_states() const {
  int m = 1;
  for (int s : n_states) m *= s;
  return m;
}

int TabularMdp::joint_actions() const {
  int m = 1;
  for (int a : n_actions) m *= a;
  return m;
}

int TabularMdp::encode_state(const std::vector<int>& s) const {
  int code = 0, base = 1;
  for (int i = 0; i < n_agents; ++i) {
    code += s[static_cast<size_t>(i)] * base;
    base *= n_states[static_cast<size_t>(i)];
  }
  return code;
}

std::vector<int> TabularMdp::decode_state(int code) const {
  std::vector<int> s(static_cast<size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) {
    s[static_cast<size_t>(i)] = code % n_states[static_cast<size_t>(i)];
    code /= n_states[static_cast<size_t>(i)];
  }
  return s;
}

int TabularMdp::encode_action(const std::vector<int>& a) const {
  int code = 0, base = 1;
  for (int i = 0; i < n_agents; ++i) {
    code += a[static_cast<size_t>(i)] * base;
    base *= n_actions[static_cast<size_t>(i)];
  }
  return code;
}

std::vector<int> TabularMdp::decode_action(int code) const {
  std::vector<int> a(static_cast<size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) {
    a[static_cast<size_t>(i)] = code % n_actions[static_cast<size_t>(i)];
    code /= n_actions[static_cast<size_t>(i)];
  }
  return a;
}

AdjacencyMatrix TabularMdp::adjacency_at(const std::vector<int>& s) const {
  AdjacencyMatrix adj(n_agents);
  for (int v = 0; v < n_agents; ++v) {
    const uint64_t pa = parents[static_cast<size_t>(v)][static_cast<size_t>(s[static_cast<size_t>(v)])];
    for (int u = 0; u < n_agents; ++u)
      if ((pa >> u) & 1u) adj.set(u, v);
  }
  return adj;
}

void TabularMdp::validate() const {
  if (n_agents < 1 || n_agents > 63) throw std::invalid_argument("TabularMdp: bad agent count");
  const int S = joint_states(), A = joint_actions();
  for (int i = 0; i < n_agents; ++i) {
    const auto& table = trans[static_cast<size_t>(i)];
    if (table.rows() != S * A || table.cols() != n_states[static_cast<size_t>(i)])
      throw std::invalid_argument("TabularMdp: transition table shape mismatch");
    for (int r = 0; r < table.rows(); ++r) {
      if (table.row(r).minCoeff() < 0.0 || std::abs(table.row(r).sum() - 1.0) > 1e-12)
        throw std::invalid_argument("TabularMdp: transition rows must be distributions");
    }
    for (int s_i = 0; s_i < n_states[static_cast<size_t>(i)]; ++s_i)
      if (!((parents[static_cast<size_t>(i)][static_cast<size_t>(s_i)] >> i) & 1u))
        throw std::invalid_argument("TabularMdp: every agent must be its own parent");
  }

  // Declared parents consistent with the tables: rows that agree on every
  // parent's (substate, action) and on s_i itself must be identical.
  for (int i = 0; i < n_agents; ++i) {
    for (int sc = 0; sc < S; ++sc) {
      const auto s = decode_state(sc);
      const uint64_t pa = parents[static_cast<size_t>(i)][static_cast<size_t>(s[static_cast<size_t>(i)])];
      for (int ac = 0; ac < A; ++ac) {
        const auto a = decode_action(ac);
        for (int sc2 = 0; sc2 < S; ++sc2) {
          const auto s2 = decode_state(sc2);
          if (s2[static_cast<size_t>(i)] != s[static_cast<size_t>(i)]) continue;
          for (int ac2 = 0; ac2 < A; ++ac2) {
            const auto a2 = decode_action(ac2);
            bool same_parents = true;
            for (int k = 0; k < n_agents && same_parents; ++k)
              if ((pa >> k) & 1u)
                same_parents = s2[static_cast<size_t>(k)] == s[static_cast<size_t>(k)] &&
                               a2[static_cast<size_t>(k)] == a[static_cast<size_t>(k)];
            if (!same_parents) continue;
            const auto& table = trans[static_cast<size_t>(i)];
            if ((table.row(row_index(sc, ac)) - table.row(row_index(sc2, ac2))).cwiseAbs().maxCoeff() >
                1e-12)
              throw std::invalid_argument("TabularMdp: table depends on a non-declared parent");
          }
        }
      }
    }
  }
}

TabularPolicy TabularPolicy::uniform(const TabularMdp& mdp) {
  TabularPolicy p;
  for (int i = 0; i < mdp.n_agents; ++i)
    p.logits.push_back(Eigen::MatrixXd::Zero(mdp.n_states[static_cast<size_t>(i)],
                                             mdp.n_actions[static_cast<size_t>(i)]));
  return p;
}

TabularPolicy TabularPolicy::random(const TabularMdp& mdp, Rng& rng, double scale) {
  TabularPolicy p = uniform(mdp);
  for (auto& m : p.logits)
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m(r, c) = (2.0 * rng.next_double() - 1.0) * scale;
  return p;
}

Eigen::VectorXd TabularPolicy::probs(int agent, int substate) const {
  return log_softmax(logits[static_cast<size_t>(agent)].row(substate).transpose()).array().exp();
}

double TabularPolicy::log_prob(int agent, int substate, int action) const {
  return log_softmax(logits[static_cast<size_t>(agent)].row(substate).transpose())[action];
}

int TabularPolicy::sample(int agent, int substate, Rng& rng) const {
  return categorical_sample(logits[static_cast<size_t>(agent)].row(substate).transpose(), rng);
}

StateGraphFn true_graph() {
  return [](const TabularMdp& mdp, const std::vector<int>& s) { return mdp.adjacency_at(s); };
}

StateGraphFn full_graph() {
  return [](const TabularMdp& mdp, const std::vector<int>&) { return AdjacencyMatrix::full(mdp.n_agents); };
}

StateGraphFn identity_graph() {
  return [](const TabularMdp& mdp, const std::vector<int>&) { return AdjacencyMatrix::identity(mdp.n_agents); };
}

namespace {

// Depth-first enumeration of the full trajectory tree (nonzero branches
// only). The callback sees joint state codes s_0..s_H and action codes
// a_0..a_{H-1} with the trajectory probability.
template <class Fn>
void enumerate_trajectories(const TabularMdp& mdp, const TabularPolicy& policy, Fn&& cb) {
  const int A = mdp.joint_actions();
  std::vector<int> states(static_cast<size_t>(mdp.horizon) + 1);
  std::vector<int> actions(static_cast<size_t>(mdp.horizon));
  states[0] = mdp.encode_state(mdp.init_state);
  int64_t leaves = 0;

  // Precompute per-joint-action policy probabilities per joint state.
  const int S = mdp.joint_states();
  Eigen::MatrixXd act_prob(S, A);
  for (int sc = 0; sc < S; ++sc) {
    const auto s = mdp.decode_state(sc);
    for (int ac = 0; ac < A; ++ac) {
      const auto a = mdp.decode_action(ac);
      double p = 1.0;
      for (int i = 0; i < mdp.n_agents; ++i)
        p *= policy.probs(i, s[static_cast<size_t>(i)])[a[static_cast<size_t>(i)]];
      act_prob(sc, ac) = p;
    }
  }

  auto walk = [&](auto&& self, int t, double prob) -> void {
    if (t == mdp.horizon) {
      if (++leaves > kTrajectoryGuard)
        throw std::length_error("enumerate_trajectories: instance exceeds the trajectory guard");
      cb(prob, states, actions);
      return;
    }
    const int sc = states[static_cast<size_t>(t)];
    for (int ac = 0; ac < A; ++ac) {
      const double pa = act_prob(sc, ac);
      if (pa == 0.0) continue;
      actions[static_cast<size_t>(t)] = ac;
      // Joint next states: odometer over per-agent supports.
      const int row = mdp.row_index(sc, ac);
      std::vector<std::vector<int>> support(static_cast<size_t>(mdp.n_agents));
      for (int i = 0; i < mdp.n_agents; ++i)
        for (int v = 0; v < mdp.n_states[static_cast<size_t>(i)]; ++v)
          if (mdp.trans[static_cast<size_t>(i)](row, v) > 0.0) support[static_cast<size_t>(i)].push_back(v);
      std::vector<size_t> idx(static_cast<size_t>(mdp.n_agents), 0);
      while (true) {
        double pt = 1.0;
        std::vector<int> sn(static_cast<size_t>(mdp.n_agents));
        for (int i = 0; i < mdp.n_agents; ++i) {
          sn[static_cast<size_t>(i)] = support[static_cast<size_t>(i)][idx[static_cast<size_t>(i)]];
          pt *= mdp.trans[static_cast<size_t>(i)](row, sn[static_cast<size_t>(i)]);
        }
        states[static_cast<size_t>(t) + 1] = mdp.encode_state(sn);
        self(self, t + 1, prob * pa * pt);
        int carry = 0;
        while (carry < mdp.n_agents) {
          if (++idx[static_cast<size_t>(carry)] < support[static_cast<size_t>(carry)].size()) break;
          idx[static_cast<size_t>(carry)] = 0;
          ++carry;
        }
        if (carry == mdp.n_agents) break;
      }
    }
  };
  walk(walk, 0, 1.0);
}

// Score-function gradient of log pi_actor(a|s) with respect to the actor's
// logits, scattered into the flat (substate * n_actions + action) layout.
void add_score(const TabularMdp& mdp, const TabularPolicy& policy, int actor, int substate, int action,
               double scale, Eigen::VectorXd& grad) {
  const int na = mdp.n_actions[static_cast<size_t>(actor)];
  const Eigen::VectorXd p = policy.probs(actor, substate);
  for (int a = 0; a < na; ++a) {
    const double indicator = (a == action) ? 1.0 : 0.0;
    grad[substate * na + a] += scale * (indicator - p[a]);
  }
}

struct TrajectoryTerms {
  std::vector<double> rewards;            // r^owner_t
  std::vector<int> actor_states, actor_actions;
  std::vector<int> owner_states;
  AdjacencySequence adjs;
};

TrajectoryTerms unpack(const TabularMdp& mdp, int owner, int actor, const std::vector<int>& states,
                       const std::vector<int>& actions, const StateGraphFn* graph) {
  TrajectoryTerms out;
  out.rewards.resize(static_cast<size_t>(mdp.horizon));
  out.actor_states.resize(static_cast<size_t>(mdp.horizon));
  out.actor_actions.resize(static_cast<size_t>(mdp.horizon));
  out.owner_states.resize(static_cast<size_t>(mdp.horizon));
  for (int t = 0; t < mdp.horizon; ++t) {
    const auto s = mdp.decode_state(states[static_cast<size_t>(t)]);
    const auto a = mdp.decode_action(actions[static_cast<size_t>(t)]);
    out.rewards[static_cast<size_t>(t)] =
        mdp.reward[static_cast<size_t>(owner)](s[static_cast<size_t>(owner)], a[static_cast<size_t>(owner)]);
    out.actor_states[static_cast<size_t>(t)] = s[static_cast<size_t>(actor)];
    out.actor_actions[static_cast<size_t>(t)] = a[static_cast<size_t>(actor)];
    out.owner_states[static_cast<size_t>(t)] = s[static_cast<size_t>(owner)];
    if (graph) out.adjs.push_back((*graph)(mdp, s));
  }
  return out;
}

}  // namespace

Eigen::VectorXd exact_policy_gradient(const TabularMdp& mdp, const TabularPolicy& policy, int owner,
                                      int actor) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(policy.grad_size(actor));
  enumerate_trajectories(mdp, policy, [&](double prob, const auto& states, const auto& actions) {
    const auto terms = unpack(mdp, owner, actor, states, actions, nullptr);
    // suffix[t] = sum_{k>=t} gamma^k r_k
    std::vector<double> suffix(static_cast<size_t>(mdp.horizon) + 1, 0.0);
    double g = std::pow(mdp.gamma, mdp.horizon - 1);
    for (int t = mdp.horizon - 1; t >= 0; --t) {
      suffix[static_cast<size_t>(t)] =
          suffix[static_cast<size_t>(t) + 1] + g * terms.rewards[static_cast<size_t>(t)];
      g /= mdp.gamma;
    }
    for (int t = 0; t < mdp.horizon; ++t)
      add_score(mdp, policy, actor, terms.actor_states[static_cast<size_t>(t)],
                terms.actor_actions[static_cast<size_t>(t)], prob * suffix[static_cast<size_t>(t)], grad);
  });
  return grad;
}

Eigen::VectorXd exact_truncated_gradient(const TabularMdp& mdp, const TabularPolicy& policy, int owner,
                                         int actor, const StateGraphFn& graph) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(policy.grad_size(actor));
  enumerate_trajectories(mdp, policy, [&](double prob, const auto& states, const auto& actions) {
    const auto terms = unpack(mdp, owner, actor, states, actions, &graph);
    std::vector<double> suffix(static_cast<size_t>(mdp.horizon) + 1, 0.0);
    double g = std::pow(mdp.gamma, mdp.horizon - 1);
    for (int t = mdp.horizon - 1; t >= 0; --t) {
      suffix[static_cast<size_t>(t)] =
          suffix[static_cast<size_t>(t) + 1] + g * terms.rewards[static_cast<size_t>(t)];
      g /= mdp.gamma;
    }
    auto target_row = [&](int t) {
      const int s_owner = t < mdp.horizon ? terms.owner_states[static_cast<size_t>(t)] : 0;
      return t < mdp.horizon ? mdp.reward_deps.row(owner, s_owner) : uint64_t{1} << owner;
    };
    for (int t = 0; t < mdp.horizon; ++t) {
      const auto meet = meeting_timestep_masked(terms.adjs, actor, target_row, t);
      if (!meet || *meet >= mdp.horizon) continue;
      add_score(mdp, policy, actor, terms.actor_states[static_cast<size_t>(t)],
                terms.actor_actions[static_cast<size_t>(t)], prob * suffix[static_cast<size_t>(*meet)],
                grad);
    }
  });
  return grad;
}

double exact_objective(const TabularMdp& mdp, const TabularPolicy& policy, int owner) {
  double value = 0.0;
  enumerate_trajectories(mdp, policy, [&](double prob, const auto& states, const auto& actions) {
    double ret = 0.0, g = 1.0;
    for (int t = 0; t < mdp.horizon; ++t) {
      const auto s = mdp.decode_state(states[static_cast<size_t>(t)]);
      const auto a = mdp.decode_action(actions[static_cast<size_t>(t)]);
      ret += g * mdp.reward[static_cast<size_t>(owner)](s[static_cast<size_t>(owner)],
                                                        a[static_cast<size_t>(owner)]);
      g *= mdp.gamma;
    }
    value += prob * ret;
  });
  return value;
}

double enumeration_mass(const TabularMdp& mdp, const TabularPolicy& policy) {
  double mass = 0.0;
  enumerate_trajectories(mdp, policy, [&](double prob, const auto&, const auto&) { mass += prob; });
  return mass;
}

double missing_edge_gradient_gap(const TabularMdp& mdp, const TabularPolicy& policy, int owner,
                                 int actor, const StateGraphFn& subset_graph) {
  const Eigen::VectorXd a = exact_policy_gradient(mdp, policy, owner, actor);
  const Eigen::VectorXd b = exact_truncated_gradient(mdp, policy, owner, actor, subset_graph);
  return (a - b).cwiseAbs().maxCoeff();
}

namespace {

struct RunningMoments {
  Eigen::VectorXd sum, sum_sq;
  int64_t n = 0;
  void add(const Eigen::VectorXd& x) {
    if (n == 0) {
      sum = Eigen::VectorXd::Zero(x.size());
      sum_sq = Eigen::VectorXd::Zero(x.size());
    }
    sum += x;
    sum_sq += x.array().square().matrix();
    ++n;
  }
  SampledGradient finish() const {
    SampledGradient out;
    out.n_samples = n;
    out.mean = sum / static_cast<double>(n);
    const Eigen::ArrayXd var =
        (sum_sq.array() - sum.array().square() / static_cast<double>(n)) / static_cast<double>(n - 1);
    out.variance_trace = var.max(0.0).sum();
    out.std_err = (var.max(0.0) / static_cast<double>(n)).sqrt();
    return out;
  }
};

// One sampled trajectory; returns joint state/action codes.
void sample_trajectory(const TabularMdp& mdp, const TabularPolicy& policy, Rng& rng,
                       std::vector<int>& states, std::vector<int>& actions) {
  states[0] = mdp.encode_state(mdp.init_state);
  for (int t = 0; t < mdp.horizon; ++t) {
    const auto s = mdp.decode_state(states[static_cast<size_t>(t)]);
    std::vector<int> a(static_cast<size_t>(mdp.n_agents));
    for (int i = 0; i < mdp.n_agents; ++i) a[static_cast<size_t>(i)] = policy.sample(i, s[static_cast<size_t>(i)], rng);
    actions[static_cast<size_t>(t)] = mdp.encode_action(a);
    const int row = mdp.row_index(states[static_cast<size_t>(t)], actions[static_cast<size_t>(t)]);
    std::vector<int> sn(static_cast<size_t>(mdp.n_agents));
    for (int i = 0; i < mdp.n_agents; ++i) {
      double u = rng.next_double();
      int pick = mdp.n_states[static_cast<size_t>(i)] - 1;
      for (int v = 0; v < mdp.n_states[static_cast<size_t>(i)]; ++v) {
        u -= mdp.trans[static_cast<size_t>(i)](row, v);
        if (u < 0.0) {
          pick = v;
          break;
        }
      }
      sn[static_cast<size_t>(i)] = pick;
    }
    states[static_cast<size_t>(t) + 1] = mdp.encode_state(sn);
  }
}

Eigen::VectorXd trajectory_gradient(const TabularMdp& mdp, const TabularPolicy& policy, int owner,
                                    int actor, const StateGraphFn& graph, const std::vector<int>& states,
                                    const std::vector<int>& actions) {
  const auto terms = unpack(mdp, owner, actor, states, actions, &graph);
  Eigen::VectorXd delta = Eigen::Map<const Eigen::VectorXd>(terms.rewards.data(), mdp.horizon);
  std::vector<uint8_t> dones(static_cast<size_t>(mdp.horizon), 0);
  dones.back() = 1;
  const Eigen::VectorXd adv = truncated_gae(delta, terms.adjs, owner, actor, mdp.gamma, 1.0, dones);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(policy.grad_size(actor));
  double g = 1.0;
  for (int t = 0; t < mdp.horizon; ++t) {
    add_score(mdp, policy, actor, terms.actor_states[static_cast<size_t>(t)],
              terms.actor_actions[static_cast<size_t>(t)], g * adv[t], grad);
    g *= mdp.gamma;
  }
  return grad;
}

}  // namespace

SampledGradient sample_truncated_gradient(const TabularMdp& mdp, const TabularPolicy& policy, int owner,
                                          int actor, const StateGraphFn& graph, int64_t n_samples,
                                          Rng& rng) {
  RunningMoments acc;
  std::vector<int> states(static_cast<size_t>(mdp.horizon) + 1);
  std::vector<int> actions(static_cast<size_t>(mdp.horizon));
  for (int64_t k = 0; k < n_samples; ++k) {
    sample_trajectory(mdp, policy, rng, states, actions);
    acc.add(trajectory_gradient(mdp, policy, owner, actor, graph, states, actions));
  }
  return acc.finish();
}

SampledGradient sample_aggregate_gradient(const TabularMdp& mdp, const TabularPolicy& policy, int actor,
                                          const StateGraphFn& graph, int64_t n_samples, Rng& rng) {
  RunningMoments acc;
  std::vector<int> states(static_cast<size_t>(mdp.horizon) + 1);
  std::vector<int> actions(static_cast<size_t>(mdp.horizon));
  for (int64_t k = 0; k < n_samples; ++k) {
    sample_trajectory(mdp, policy, rng, states, actions);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(policy.grad_size(actor));
    for (int owner = 0; owner < mdp.n_agents; ++owner)
      g += trajectory_gradient(mdp, policy, owner, actor, graph, states, actions);
    acc.add(g);
  }
  return acc.finish();
}

}  // namespace dgmarl
