#include "dgmarl/policy.hpp"

#include <stdexcept>

namespace dgmarl {

namespace {
std::vector<int> net_sizes(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> sizes;
  sizes.push_back(in);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(out);
  return sizes;
}
}  // namespace

SharedActor::SharedActor(int obs_dim, int n_agents, int n_actions, const std::vector<int>& hidden,
                         Rng rng)
    : net_(net_sizes(obs_dim + n_agents, hidden, n_actions), /*layer_norm=*/false),
      obs_dim_(obs_dim),
      n_agents_(n_agents),
      n_actions_(n_actions) {
  net_.init(rng);
}

Eigen::VectorXd SharedActor::with_id(const Eigen::VectorXd& obs, int agent) const {
  if (obs.size() != obs_dim_) throw std::invalid_argument("SharedActor: observation size mismatch");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(obs_dim_ + n_agents_);
  x.head(obs_dim_) = obs;
  x[obs_dim_ + agent] = 1.0;
  return x;
}

Eigen::VectorXd SharedActor::logits(const Eigen::VectorXd& obs, int agent) const {
  return net_.forward1(with_id(obs, agent));
}

std::pair<int, double> SharedActor::act(const Eigen::VectorXd& obs, int agent, Rng& rng) const {
  const Eigen::VectorXd lg = logits(obs, agent);
  const int a = categorical_sample(lg, rng);
  return {a, log_softmax(lg)[a]};
}

int SharedActor::greedy(const Eigen::VectorXd& obs, int agent) const {
  int best = 0;
  logits(obs, agent).maxCoeff(&best);
  return best;
}

SharedCritic::SharedCritic(Mode mode, int obs_dim, int n_agents, const std::vector<int>& hidden,
                           Rng rng)
    : mode_(mode), obs_dim_(obs_dim), n_agents_(n_agents) {
  net_ = DenseNet(net_sizes(input_size(), hidden, 1), /*layer_norm=*/false);
  net_.init(rng);
}

int SharedCritic::input_size() const {
  return (mode_ == Mode::IPPO ? obs_dim_ : obs_dim_ * n_agents_) + n_agents_;
}

Eigen::VectorXd SharedCritic::input(const EpisodeData& episode, int t, int agent) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(input_size());
  if (mode_ == Mode::IPPO) {
    x.head(obs_dim_) = episode.obs[static_cast<size_t>(t)][static_cast<size_t>(agent)];
    x[obs_dim_ + agent] = 1.0;
  } else {
    for (int i = 0; i < n_agents_; ++i)
      x.segment(i * obs_dim_, obs_dim_) = episode.obs[static_cast<size_t>(t)][static_cast<size_t>(i)];
    x[obs_dim_ * n_agents_ + agent] = 1.0;
  }
  return x;
}

void SharedCritic::fill_values(EpisodeData& episode) const {
  if (episode.T == 0) return;
  Eigen::MatrixXd inputs(input_size(), episode.T * n_agents_);
  int col = 0;
  for (int t = 0; t < episode.T; ++t)
    for (int i = 0; i < n_agents_; ++i) inputs.col(col++) = input(episode, t, i);
  const Eigen::MatrixXd out = net_.forward(inputs);
  col = 0;
  for (int t = 0; t < episode.T; ++t)
    for (int i = 0; i < n_agents_; ++i) episode.values(t, i) = out(0, col++);
}

}  // namespace dgmarl
