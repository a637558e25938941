#pragma once

#include <Eigen/Core>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dgmarl/advantage.hpp"
#include "dgmarl/graph_learner.hpp"
#include "dgmarl/policy.hpp"
#include "dgmarl/rollout.hpp"
#include "dgmarl/stats.hpp"

namespace dgmarl {

struct TrainConfig {
  SharedCritic::Mode mode = SharedCritic::Mode::IPPO;
  GraphSource graph = GraphSource::identity();

  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double entropy_coef = 0.001;
  double value_coef = 0.5;
  double learning_rate = 5e-4;

  int epochs = 4;
  int minibatches = 2;
  int episodes_per_iter = 10;
  long total_steps = 100000;
  long eval_interval = 10000;
  int eval_episodes = 10;
  int t_max = 0;  // 0: environment horizon

  uint64_t seed = 1;
  std::vector<int> hidden = {128, 128};
  bool advantage_norm = false;
  // Drop the (1 - lambda) residual so an identity graph is exactly
  // local-reward training (ablation switch, off by default).
  bool lambda_floor_off = false;

  double learner_threshold_c = 0.9;
  double learner_lr = 0.0;  // 0: follow learning_rate

  std::string to_json_string() const;
  static TrainConfig from_json_string(const std::string& text);
  static TrainConfig from_json_file(const std::string& path);
};

// PPO clipped surrogate contribution for one sample:
// -min(rho * A, clip(rho, 1-eps, 1+eps) * A) with rho = exp(lp_new - lp_old).
double clipped_surrogate(double log_p_new, double log_p_old, double advantage, double clip_eps);

struct UpdateStats {
  double loss_actor = 0.0;
  double loss_critic = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double kl = 0.0;
  double total_loss = 0.0;  // loss_actor + value_coef*loss_critic - entropy_coef*entropy
  bool aborted = false;
};

// Flattened (episode, t, agent) samples of one collected batch.
struct PreparedBatch {
  Eigen::MatrixXd actor_in;   // actor input per sample (column-major)
  Eigen::VectorXi actions;
  Eigen::VectorXd logp_old;
  Eigen::VectorXd advantage;  // aggregated per-actor advantage
  Eigen::MatrixXd critic_in;  // critic input for owner == agent
  Eigen::VectorXd targets;
  int count() const { return static_cast<int>(actions.size()); }
};

PreparedBatch prepare_update(const RolloutBatch& batch, const std::vector<TruncatedAdvantage>& advs,
                             const SharedActor& actor, const SharedCritic& critic,
                             bool advantage_norm);

UpdateStats ppo_update(const PreparedBatch& pb, SharedActor& actor, SharedCritic& critic,
                       AdamState& actor_opt, AdamState& critic_opt, const TrainConfig& cfg,
                       Rng& shuffle_rng);

// Per-episode advantages for a whole batch (terminal bootstrap value 0).
std::vector<TruncatedAdvantage> batch_advantages(const RolloutBatch& batch, double gamma, double lambda,
                                                 bool lambda_floor_off);

struct MetricsRow {
  long step = 0;
  double ret_norm_mean = 0.0;
  double ret_norm_iqm = 0.0;
  Eigen::VectorXd agent_returns;
  double loss_actor = 0.0;
  double loss_critic = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  double kl = 0.0;
  double graph_density = 0.0;
};

// Exact column set; agent_returns is ';'-joined within a single CSV column.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRow& row);
void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

struct TrainResult {
  std::vector<MetricsRow> metrics;
  SharedActor actor;
  SharedCritic critic;
  std::optional<GraphLearner> learner;
  long steps_done = 0;
};

std::string checkpoint_to_json(const TrainResult& result, const TrainConfig& cfg,
                               const std::string& env_id);

struct EvalSummary {
  double ret_mean = 0.0;
  double ret_iqm = 0.0;
  Eigen::VectorXd agent_returns;
};

// Greedy-policy evaluation over n episodes; touches only its own rng.
template <class Env>
EvalSummary evaluate(const Env& env, const SharedActor& actor, int n_episodes, Rng rng) {
  const EnvSpec spec = env.spec();
  EvalSummary out;
  out.agent_returns = Eigen::VectorXd::Zero(spec.n_agents);
  std::vector<double> totals;
  for (int ep = 0; ep < n_episodes; ++ep) {
    auto state = env.reset(rng);
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(spec.n_agents);
    std::vector<Eigen::VectorXd> obs;
    for (int i = 0; i < spec.n_agents; ++i) obs.push_back(env.observe(state, i));
    for (int t = 0; t < spec.max_steps; ++t) {
      JointAction a(static_cast<size_t>(spec.n_agents));
      for (int i = 0; i < spec.n_agents; ++i) a[static_cast<size_t>(i)] = actor.greedy(obs[static_cast<size_t>(i)], i);
      auto res = env.step(state, a, rng);
      sums += res.rewards;
      state = std::move(res.next);
      obs = std::move(res.observations);
      if (res.done) break;
    }
    sums /= env.max_team_return();
    out.agent_returns += sums;
    totals.push_back(sums.sum());
  }
  out.agent_returns /= n_episodes;
  out.ret_mean = Eigen::Map<const Eigen::VectorXd>(totals.data(), static_cast<int>(totals.size())).mean();
  out.ret_iqm = iqm(totals);
  return out;
}

// Full training loop: collect, infer graphs, compute truncated advantages,
// PPO epochs, then graph-model updates, with periodic greedy evaluation.
template <class Env>
TrainResult train(const Env& env, const TrainConfig& cfg, std::ostream* log = nullptr) {
  const EnvSpec spec = env.spec();
  spec.validate();
  for (int k : spec.action_counts)
    if (k != spec.action_counts.front())
      throw std::invalid_argument("train: shared policy needs a uniform action count");

  Rng root(cfg.seed);
  Rng env_rng = root.split("env");
  Rng policy_rng = root.split("policy");
  Rng shuffle_rng = root.split("shuffle");
  Rng init_rng = root.split("init");

  TrainResult result;
  result.actor = SharedActor(spec.obs_dim, spec.n_agents, spec.action_counts.front(), cfg.hidden,
                             init_rng.split("actor"));
  result.critic = SharedCritic(cfg.mode, spec.obs_dim, spec.n_agents, cfg.hidden,
                               init_rng.split("critic"));
  AdamState actor_opt(static_cast<int>(result.actor.net().params().size()), cfg.learning_rate);
  AdamState critic_opt(static_cast<int>(result.critic.net().params().size()), cfg.learning_rate);

  if (cfg.graph.kind == GraphSource::Kind::Learned) {
    GraphLearnerConfig lc;
    lc.obs_dim = spec.obs_dim;
    lc.n_actions = spec.action_counts.front();
    lc.threshold_c = cfg.learner_threshold_c;
    lc.learning_rate = cfg.learner_lr > 0.0 ? cfg.learner_lr : cfg.learning_rate;
    result.learner.emplace(lc, init_rng.split("learner"));
  }

  GraphProvider<Env> provider(cfg.graph, root.split("graph"));

  long next_eval = cfg.eval_interval;
  int eval_index = 0;
  double acc_la = 0, acc_lc = 0, acc_h = 0, acc_clip = 0, acc_kl = 0, acc_density = 0;
  long acc_transitions = 0;
  int acc_n = 0;
  int batch_index = 0;

  while (result.steps_done < cfg.total_steps) {
    RolloutBatch batch = rollout(env, result.actor, provider, cfg.t_max > 0 ? cfg.t_max : -1,
                                 cfg.episodes_per_iter, env_rng, policy_rng);
    if (result.learner) result.learner->infer_into(batch);
    for (auto& e : batch.episodes) result.critic.fill_values(e);

    const auto advs = batch_advantages(batch, cfg.gamma, cfg.gae_lambda, cfg.lambda_floor_off);
    for (const auto& e : batch.episodes)
      for (const auto& m : e.adj) {
        acc_density += m.density();
        ++acc_transitions;
      }

    const PreparedBatch pb =
        prepare_update(batch, advs, result.actor, result.critic, cfg.advantage_norm);
    const UpdateStats stats =
        ppo_update(pb, result.actor, result.critic, actor_opt, critic_opt, cfg, shuffle_rng);
    if (stats.aborted && log)
      (*log) << "ppo_update aborted on non-finite loss, batch " << batch_index << "\n";

    if (result.learner) {
      result.learner->update_encoder(batch);
      result.learner->update_reverse_models(batch);
    }

    result.steps_done += batch.total_steps();
    ++batch_index;
    acc_la += stats.loss_actor;
    acc_lc += stats.loss_critic;
    acc_h += stats.entropy;
    acc_clip += stats.clip_fraction;
    acc_kl += stats.kl;
    ++acc_n;

    if (result.steps_done >= next_eval || result.steps_done >= cfg.total_steps) {
      const EvalSummary ev =
          evaluate(env, result.actor, cfg.eval_episodes, root.split("eval").split(eval_index++));
      MetricsRow row;
      row.step = result.steps_done;
      row.ret_norm_mean = ev.ret_mean;
      row.ret_norm_iqm = ev.ret_iqm;
      row.agent_returns = ev.agent_returns;
      row.loss_actor = acc_la / acc_n;
      row.loss_critic = acc_lc / acc_n;
      row.entropy = acc_h / acc_n;
      row.clip_frac = acc_clip / acc_n;
      row.kl = acc_kl / acc_n;
      row.graph_density = acc_density / std::max(1L, acc_transitions);
      result.metrics.push_back(row);
      acc_la = acc_lc = acc_h = acc_clip = acc_kl = acc_density = 0;
      acc_transitions = 0;
      acc_n = 0;
      while (next_eval <= result.steps_done) next_eval += cfg.eval_interval;
      if (log) (*log) << "step " << row.step << " ret " << row.ret_norm_mean << "\n";
    }
  }
  return result;
}

}  // namespace dgmarl
