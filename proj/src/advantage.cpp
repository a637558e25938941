#include "dgmarl/advantage.hpp"

#include <cmath>
#include <stdexcept>

namespace dgmarl {

Eigen::VectorXd td_errors(const Eigen::VectorXd& rewards, const Eigen::VectorXd& values,
                          const std::vector<uint8_t>& dones, double gamma) {
  const int T = static_cast<int>(rewards.size());
  if (values.size() != T + 1 || static_cast<int>(dones.size()) != T)
    throw std::invalid_argument("td_errors: need T rewards, T+1 values, T dones");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("td_errors: gamma must lie in [0,1)");
  Eigen::VectorXd delta(T);
  for (int t = 0; t < T; ++t)
    delta[t] = rewards[t] + gamma * values[t + 1] * (dones[t] ? 0.0 : 1.0) - values[t];
  return delta;
}

Eigen::VectorXd truncated_gae(const Eigen::VectorXd& delta, const AdjacencySequence& adjs, int owner,
                              int actor, double gamma, double lambda,
                              const std::vector<uint8_t>& dones, bool lambda_floor_off) {
  const int T = static_cast<int>(delta.size());
  if (static_cast<int>(adjs.size()) != T || static_cast<int>(dones.size()) != T)
    throw std::invalid_argument("truncated_gae: sequence length mismatch");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("truncated_gae: lambda must lie in [0,1]");
  const double floor = lambda_floor_off ? 0.0 : 1.0 - lambda;

  Eigen::VectorXd out = Eigen::VectorXd::Zero(T);
  for (int t0 = 0; t0 < T; ++t0) {
    uint64_t h = uint64_t{1} << actor;
    double weight = 1.0;  // (gamma*lambda)^(t - t0)
    double gae = 0.0;
    for (int t = t0; t < T; ++t) {
      h = advance_frontier_row(h, adjs[static_cast<size_t>(t)]);
      const double reach = (h >> owner) & 1u ? 1.0 : 0.0;
      gae += delta[t] * weight * (lambda * reach + floor);
      if (dones[static_cast<size_t>(t)]) break;
      weight *= gamma * lambda;
    }
    out[t0] = gae;
  }
  return out;
}

TruncatedAdvantage compute_advantages(const Eigen::MatrixXd& rewards, const Eigen::MatrixXd& values,
                                      const std::vector<uint8_t>& dones, const AdjacencySequence& adjs,
                                      double gamma, double lambda, bool lambda_floor_off) {
  const int T = static_cast<int>(rewards.rows());
  const int n = static_cast<int>(rewards.cols());
  if (values.rows() != T + 1 || values.cols() != n)
    throw std::invalid_argument("compute_advantages: values must be (T+1) x N");
  if (static_cast<int>(adjs.size()) != T || static_cast<int>(dones.size()) != T)
    throw std::invalid_argument("compute_advantages: sequence length mismatch");

  Eigen::MatrixXd delta(T, n);
  for (int i = 0; i < n; ++i)
    delta.col(i) = td_errors(rewards.col(i), values.col(i), dones, gamma);

  TruncatedAdvantage adv;
  adv.n_agents = n;
  adv.T = T;
  adv.per_owner.assign(static_cast<size_t>(n), Eigen::MatrixXd::Zero(n, T));
  adv.aggregate = Eigen::MatrixXd::Zero(n, T);
  adv.value_targets = Eigen::MatrixXd::Zero(n, T);

  const double floor = lambda_floor_off ? 0.0 : 1.0 - lambda;
  // One frontier row per (actor, t0) serves every owner at once.
  for (int j = 0; j < n; ++j) {
    for (int t0 = 0; t0 < T; ++t0) {
      uint64_t h = uint64_t{1} << j;
      double weight = 1.0;
      Eigen::VectorXd gae = Eigen::VectorXd::Zero(n);
      for (int t = t0; t < T; ++t) {
        h = advance_frontier_row(h, adjs[static_cast<size_t>(t)]);
        for (int i = 0; i < n; ++i) {
          const double reach = (h >> i) & 1u ? 1.0 : 0.0;
          gae[i] += delta(t, i) * weight * (lambda * reach + floor);
        }
        if (dones[static_cast<size_t>(t)]) break;
        weight *= gamma * lambda;
      }
      for (int i = 0; i < n; ++i) adv.per_owner[static_cast<size_t>(i)](j, t0) = gae[i];
    }
  }

  for (int i = 0; i < n; ++i) adv.aggregate += adv.per_owner[static_cast<size_t>(i)];
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < T; ++t)
      adv.value_targets(i, t) = adv.per_owner[static_cast<size_t>(i)](i, t) + values(t, i);
  return adv;
}

}  // namespace dgmarl
