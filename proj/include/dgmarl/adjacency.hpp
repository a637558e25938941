#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dgmarl/rng.hpp"

namespace dgmarl {

// Boolean agent-interaction matrix with rows packed into 64-bit masks.
// get(u, v) == true means agent u's state-action at time t influences agent
// v's substate at time t+1. The diagonal is always set: an agent influences
// its own next substate.
class AdjacencyMatrix {
 public:
  static constexpr int kMaxAgents = 64;

  explicit AdjacencyMatrix(int n) : n_(n), rows_(static_cast<size_t>(n), 0) {
    if (n < 1 || n > kMaxAgents) throw std::invalid_argument("AdjacencyMatrix: agent count out of range");
    for (int u = 0; u < n; ++u) rows_[u] = uint64_t{1} << u;
  }

  static AdjacencyMatrix identity(int n) { return AdjacencyMatrix(n); }

  static AdjacencyMatrix full(int n) {
    AdjacencyMatrix a(n);
    const uint64_t all = (n == 64) ? ~uint64_t{0} : ((uint64_t{1} << n) - 1);
    for (auto& r : a.rows_) r = all;
    return a;
  }

  int size() const { return n_; }

  bool get(int u, int v) const {
    check_index(u, v);
    return (rows_[u] >> v) & 1u;
  }

  void set(int u, int v, bool on = true) {
    check_index(u, v);
    if (u == v && !on) throw std::invalid_argument("AdjacencyMatrix: diagonal entries are fixed true");
    if (on)
      rows_[u] |= uint64_t{1} << v;
    else
      rows_[u] &= ~(uint64_t{1} << v);
  }

  uint64_t row(int u) const {
    if (u < 0 || u >= n_) throw std::out_of_range("AdjacencyMatrix: row index");
    return rows_[u];
  }
  void set_row(int u, uint64_t bits) {
    if (u < 0 || u >= n_) throw std::out_of_range("AdjacencyMatrix: row index");
    rows_[u] = bits | (uint64_t{1} << u);
  }

  // Fraction of off-diagonal entries set; 0 for a single agent.
  double density() const {
    if (n_ == 1) return 0.0;
    int on = 0;
    for (int u = 0; u < n_; ++u)
      for (int v = 0; v < n_; ++v)
        if (u != v && get(u, v)) ++on;
    return static_cast<double>(on) / (static_cast<double>(n_) * (n_ - 1));
  }

  bool operator==(const AdjacencyMatrix& o) const = default;

 private:
  void check_index(int u, int v) const {
    if (u < 0 || u >= n_ || v < 0 || v >= n_) throw std::out_of_range("AdjacencyMatrix: index");
  }

  int n_;
  std::vector<uint64_t> rows_;
};

// One matrix per transition of a single episode.
using AdjacencySequence = std::vector<AdjacencyMatrix>;

// Advance one frontier row: out[v] = OR_u (h[u] && A[u][v]).
inline uint64_t advance_frontier_row(uint64_t h, const AdjacencyMatrix& a) {
  uint64_t out = 0;
  while (h) {
    const int u = __builtin_ctzll(h);
    h &= h - 1;
    out |= a.row(u);
  }
  return out;
}

// Boolean matrix product H * A (logical OR of ANDs). result[u][v] is true iff
// some k has H[u][k] and A[k][v].
AdjacencyMatrix frontier_advance(const AdjacencyMatrix& h, const AdjacencyMatrix& a);

// Smallest t' >= t0 such that actor j's influence, propagated through
// adjs[t0..t'), reaches agent i. Equals t0 exactly when j == i (the zero-hop
// set of an agent is itself). Empty when no path exists within the episode.
std::optional<int> meeting_timestep(const AdjacencySequence& adjs, int j, int i, int t0);

// Reward-dependence extension: per (agent, substate) set of agents whose
// state-actions enter that agent's immediate reward. Default is {agent}.
class RewardDependenceInit {
 public:
  RewardDependenceInit() = default;
  RewardDependenceInit(int n_agents, int n_substates)
      : masks_(static_cast<size_t>(n_agents), std::vector<uint64_t>(static_cast<size_t>(n_substates), 0)) {
    for (int i = 0; i < n_agents; ++i)
      for (auto& m : masks_[i]) m = uint64_t{1} << i;
  }

  bool is_default() const { return masks_.empty(); }

  void add(int agent, int substate, int member) {
    masks_.at(agent).at(substate) |= uint64_t{1} << member;
  }

  // Boolean row for agent i at substate s_i; always contains i.
  uint64_t row(int agent, int substate) const {
    if (masks_.empty()) return uint64_t{1} << agent;
    return masks_.at(agent).at(substate) | (uint64_t{1} << agent);
  }

 private:
  std::vector<std::vector<uint64_t>> masks_;
};

// Initial frontier row for reward-owner i at substate s_i: members of the
// declared reward-dependence set. Default init yields e_i.
inline uint64_t reward_dep_frontier(const RewardDependenceInit& init, int i, int s_i) {
  return init.row(i, s_i);
}

// Generalized meeting timestep: first t >= t0 where the frontier from j
// intersects target_row(t). With target_row(t) == e_i this is
// meeting_timestep(adjs, j, i, t0).
template <class TargetFn>
std::optional<int> meeting_timestep_masked(const AdjacencySequence& adjs, int j, TargetFn&& target_row, int t0) {
  if (t0 < 0 || t0 > static_cast<int>(adjs.size())) throw std::out_of_range("meeting_timestep: t0");
  uint64_t h = uint64_t{1} << j;
  const int T = static_cast<int>(adjs.size());
  for (int t = t0; t <= T; ++t) {
    if (h & target_row(t)) return t;
    if (t == T) break;
    h = advance_frontier_row(h, adjs[t]);
  }
  return std::nullopt;
}

// Which graph generator fills the per-transition adjacency.
struct GraphSource {
  enum class Kind { Full, Identity, ErdosRenyi, Oracle, Learned };
  Kind kind = Kind::Identity;
  double p = 0.0;  // ErdosRenyi only

  static GraphSource full() { return {Kind::Full, 0.0}; }
  static GraphSource identity() { return {Kind::Identity, 0.0}; }
  static GraphSource erdos_renyi(double p);
  static GraphSource oracle() { return {Kind::Oracle, 0.0}; }
  static GraphSource learned() { return {Kind::Learned, 0.0}; }

  std::string str() const;
  static GraphSource parse(const std::string& s);
  bool operator==(const GraphSource&) const = default;
};

// Random graph: each off-diagonal entry independently set with probability p;
// diagonal forced true. p == 0 gives identity exactly, p == 1 the full matrix.
AdjacencyMatrix erdos_renyi_graph(int n, double p, Rng& rng);

struct GridPos {
  int x = 0;
  int y = 0;
};

// Distance-rule graph over grid positions: u and v are candidates when their
// L1 distance is at most 2; each agent retains at most its two closest
// candidates (ties broken toward the lower agent index) and an edge needs
// mutual retention, keeping the pattern symmetric. Diagonal true.
AdjacencyMatrix proximity_graph(const std::vector<GridPos>& positions);

}  // namespace dgmarl
