#include <nlohmann/json.hpp>
#include <stdexcept>

#include "dgmarl/rollout.hpp"

namespace dgmarl {

using json = nlohmann::json;

void RolloutBatch::check_invariants() const {
  for (const auto& e : episodes) {
    if (e.n_agents != n_agents) throw std::logic_error("RolloutBatch: agent count drift");
    if (static_cast<int>(e.obs.size()) != e.T + 1 || static_cast<int>(e.substates.size()) != e.T + 1)
      throw std::logic_error("RolloutBatch: observations must cover T+1 timesteps");
    if (e.actions.rows() != e.T || e.rewards.rows() != e.T || e.log_probs.rows() != e.T ||
        e.values.rows() != e.T || static_cast<int>(e.dones.size()) != e.T ||
        static_cast<int>(e.adj.size()) != e.T)
      throw std::logic_error("RolloutBatch: per-timestep sequences must share length T");
    for (int t = 0; t + 1 < e.T; ++t)
      if (e.dones[static_cast<size_t>(t)]) throw std::logic_error("RolloutBatch: done inside an episode");
    if (e.T > 0 && !e.dones.back()) throw std::logic_error("RolloutBatch: episode must end done");
  }
}

namespace {

json matrix_to_flat(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

Eigen::MatrixXd flat_to_matrix(const json& arr, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  int k = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = arr.at(static_cast<size_t>(k++)).get<double>();
  return m;
}

}  // namespace

std::string to_json(const RolloutBatch& batch) {
  batch.check_invariants();
  json root;
  root["schema_version"] = 1;
  root["env_id"] = batch.env_id;
  root["seed"] = batch.seed;
  root["graph_source"] = batch.graph_source;
  root["n_agents"] = batch.n_agents;
  root["obs_dim"] = batch.obs_dim;

  json eps = json::array();
  for (const auto& e : batch.episodes) {
    json je;
    je["length"] = e.T;

    json obs = json::array();
    for (const auto& per_agent : e.obs)
      for (const auto& v : per_agent)
        for (int k = 0; k < v.size(); ++k) obs.push_back(v[k]);
    je["observations"] = std::move(obs);  // row-major [T+1][N][obs_dim]

    json subs = json::array(), sub_dims = json::array();
    for (int i = 0; i < e.n_agents; ++i)
      sub_dims.push_back(e.substates.front()[static_cast<size_t>(i)].size());
    for (const auto& per_agent : e.substates)
      for (const auto& v : per_agent)
        for (double x : v) subs.push_back(x);
    je["substate_dims"] = std::move(sub_dims);
    je["substates"] = std::move(subs);  // row-major [T+1][N][dim_i]

    json act = json::array(), rew = json::array(), logp = json::array(), dones = json::array();
    for (int t = 0; t < e.T; ++t) {
      for (int i = 0; i < e.n_agents; ++i) {
        act.push_back(e.actions(t, i));
        rew.push_back(e.rewards(t, i));
        logp.push_back(e.log_probs(t, i));
      }
      dones.push_back(static_cast<int>(e.dones[static_cast<size_t>(t)]));
    }
    je["actions"] = std::move(act);
    je["rewards"] = std::move(rew);
    je["log_probs"] = std::move(logp);
    je["values"] = matrix_to_flat(e.values);
    je["dones"] = std::move(dones);

    // Adjacency: packed bit rows, one 64-bit integer per row, [T][N].
    json adj = json::array();
    for (const auto& m : e.adj)
      for (int u = 0; u < m.size(); ++u) adj.push_back(m.row(u));
    je["adjacency_rows"] = std::move(adj);

    eps.push_back(std::move(je));
  }
  root["episodes"] = std::move(eps);
  return root.dump();
}

RolloutBatch batch_from_json(const std::string& text) {
  const json root = json::parse(text);
  if (root.at("schema_version").get<int>() != 1)
    throw std::invalid_argument("RolloutBatch: unsupported schema version");

  RolloutBatch batch;
  batch.env_id = root.at("env_id").get<std::string>();
  batch.seed = root.at("seed").get<uint64_t>();
  batch.graph_source = root.at("graph_source").get<std::string>();
  batch.n_agents = root.at("n_agents").get<int>();
  batch.obs_dim = root.at("obs_dim").get<int>();

  for (const auto& je : root.at("episodes")) {
    EpisodeData e;
    e.n_agents = batch.n_agents;
    e.T = je.at("length").get<int>();
    const int n = batch.n_agents;

    const auto& obs = je.at("observations");
    size_t k = 0;
    for (int t = 0; t <= e.T; ++t) {
      std::vector<Eigen::VectorXd> per_agent;
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd v(batch.obs_dim);
        for (int d = 0; d < batch.obs_dim; ++d) v[d] = obs.at(k++).get<double>();
        per_agent.push_back(std::move(v));
      }
      e.obs.push_back(std::move(per_agent));
    }

    const auto& dims = je.at("substate_dims");
    const auto& subs = je.at("substates");
    k = 0;
    for (int t = 0; t <= e.T; ++t) {
      std::vector<std::vector<double>> per_agent;
      for (int i = 0; i < n; ++i) {
        std::vector<double> v(dims.at(static_cast<size_t>(i)).get<size_t>());
        for (auto& x : v) x = subs.at(k++).get<double>();
        per_agent.push_back(std::move(v));
      }
      e.substates.push_back(std::move(per_agent));
    }

    e.actions = Eigen::MatrixXi(e.T, n);
    e.rewards = Eigen::MatrixXd(e.T, n);
    e.log_probs = Eigen::MatrixXd(e.T, n);
    const auto& act = je.at("actions");
    const auto& rew = je.at("rewards");
    const auto& logp = je.at("log_probs");
    k = 0;
    for (int t = 0; t < e.T; ++t)
      for (int i = 0; i < n; ++i) {
        e.actions(t, i) = act.at(k).get<int>();
        e.rewards(t, i) = rew.at(k).get<double>();
        e.log_probs(t, i) = logp.at(k).get<double>();
        ++k;
      }
    e.values = flat_to_matrix(je.at("values"), e.T, n);
    for (const auto& d : je.at("dones")) e.dones.push_back(d.get<int>() ? 1 : 0);

    const auto& adj = je.at("adjacency_rows");
    k = 0;
    for (int t = 0; t < e.T; ++t) {
      AdjacencyMatrix m(n);
      for (int u = 0; u < n; ++u) m.set_row(u, adj.at(k++).get<uint64_t>());
      e.adj.push_back(std::move(m));
    }
    batch.episodes.push_back(std::move(e));
  }
  batch.check_invariants();
  return batch;
}

}  // namespace dgmarl
