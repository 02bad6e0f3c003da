#pragma once

#include <vector>

#include "acbm/core.hpp"

namespace acbm {

struct RaschConfig {
  int quadrature_nodes = 21;
  int max_iterations = 500;
  double tolerance = 1e-6;
  // Points of the equispaced grid over +-8 latent SD used for EAP scores.
  int eap_grid_points = 401;
  double clamp_logit = 10.0;
};

struct RaschFit {
  std::vector<double> psi;  // item difficulties
  std::vector<double> xi;   // EAP abilities
  double sigma = 1.0;       // latent ability SD (mean fixed at 0)
  double loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<int> degenerate_items;  // constant columns, difficulty clamped
  std::vector<double> loglik_trace;   // marginal log-likelihood per EM iteration

  bool has_degenerate_items() const { return !degenerate_items.empty(); }
};

// Nodes and weights of the Gauss-Hermite rule for a standard normal
// density; weights sum to 1.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_hermite_normal(int n_nodes);

// Marginal maximum likelihood by EM with a N(0, sigma^2) ability
// distribution on a fixed Gauss-Hermite grid.
RaschFit fit_rasch(const ResponseMatrix& X, const RaschConfig& config = {});

// n x D row-major matrix of logistic(xi_i - psi_j).
std::vector<double> rasch_accuracy_matrix(const RaschFit& fit);

}  // namespace acbm
