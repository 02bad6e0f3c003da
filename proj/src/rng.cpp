#include "acbm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace acbm {

std::size_t Rng::categorical(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) total += p;
  if (!(total > 0.0)) throw std::invalid_argument("categorical weights sum to zero");
  const double u = uniform() * total;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last_positive = k;
    if (u < acc) return k;
  }
  return last_positive;
}

std::size_t Rng::log_categorical(std::span<const double> log_weights) {
  double top = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) top = std::max(top, w);
  if (!std::isfinite(top)) throw std::invalid_argument("no finite categorical weight");
  thread_local std::vector<double> probs;
  probs.resize(log_weights.size());
  for (std::size_t k = 0; k < log_weights.size(); ++k) probs[k] = std::exp(log_weights[k] - top);
  return categorical(probs);
}

}  // namespace acbm
