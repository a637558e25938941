#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "dgmarl/adjacency.hpp"

namespace dgmarl {

// One-step TD errors for a single reward owner.
// values carries T+1 entries (bootstrap last); delta_t = r_t + gamma *
// V_{t+1} * (1 - done_t) - V_t.
Eigen::VectorXd td_errors(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                          const std::vector<uint8_t>& dones, double gamma);

// Graph-truncated GAE for one (reward owner, actor) pair.
//
// For each start t0 the estimate is
//   A_{t0} = sum_l (gamma*lambda)^l * delta_{t0+l} * (lambda*reach_l + 1 - lambda)
// where reach_l is 1 iff the actor's influence frontier, advanced through the
// adjacency matrices at t0..t0+l inclusive, has reached the owner. The frontier
// is advanced before the l = 0 term, matching the recurrence that defines the
// estimator. reach is identically 1 when owner == actor (diagonals are fixed).
// Accumulation and the frontier reset across done boundaries.
//
// lambda_floor_off drops the (1 - lambda) residual, leaving pure truncation;
// with an identity graph that reduces cross-owner terms to exactly zero.
Eigen::VectorXd truncated_gae(const Eigen::VectorXd& delta, const AdjacencySequence& adjs, int owner,
                              int actor, double gamma, double lambda,
                              const std::vector<uint8_t>& dones, bool lambda_floor_off = false);

// Full pairwise tensor plus the per-actor aggregate for one episode.
struct TruncatedAdvantage {
  int n_agents = 0;
  int T = 0;
  // per_owner[i](j, t) = advantage of reward-owner i attributed to actor j.
  std::vector<Eigen::MatrixXd> per_owner;
  // aggregate(j, t) = sum_i per_owner[i](j, t).
  Eigen::MatrixXd aggregate;
  // value_targets(i, t) = per_owner[i](i, t) + V_i(t); the self pair is plain
  // GAE, so this is the usual lambda-return regression target.
  Eigen::MatrixXd value_targets;
};

// rewards/values: T x N (column per agent); adjacency per transition.
TruncatedAdvantage compute_advantages(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values,
                                      const std::vector<uint8_t>& dones, const AdjacencySequence& adjs,
                                      double gamma, double lambda, bool lambda_floor_off = false);

}  // namespace dgmarl
