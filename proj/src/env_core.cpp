#include "dgmarl/env_core.hpp"

namespace dgmarl {

double discounted_return(std::span<const double> rewards, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("discounted_return: gamma must lie in [0,1)");
  double acc = 0.0;
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) acc = *it + gamma * acc;
  return acc;
}

}  // namespace dgmarl
