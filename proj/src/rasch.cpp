#include "acbm/rasch.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace acbm {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// Persons enter the likelihood only through their raw score, so the EM works
// on score groups.
struct ScoreData {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<int> score;            // per person
  std::vector<double> count;         // persons per score, length d + 1
  std::vector<double> right;         // (d + 1) x d: persons with score s correct on item j
  std::vector<double> column_total;  // correct responses per item
};

ScoreData group_by_score(const ResponseMatrix& X) {
  ScoreData g;
  g.n = X.n_examinees();
  g.d = X.n_questions();
  g.score.resize(g.n);
  g.count.assign(g.d + 1, 0.0);
  g.right.assign((g.d + 1) * g.d, 0.0);
  g.column_total.assign(g.d, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    int s = 0;
    for (std::size_t j = 0; j < g.d; ++j) s += X(i, j);
    g.score[i] = s;
    g.count[s] += 1.0;
    for (std::size_t j = 0; j < g.d; ++j) {
      if (X(i, j)) {
        g.right[s * g.d + j] += 1.0;
        g.column_total[j] += 1.0;
      }
    }
  }
  return g;
}

struct Posterior {
  std::vector<double> node_mass;  // expected persons per node
  std::vector<double> node_right;  // nodes x items expected correct responses
  double loglik = 0.0;
};

Posterior e_step(const ScoreData& g, const Quadrature& q, const std::vector<double>& psi, double sigma) {
  const std::size_t r_count = q.nodes.size();
  std::vector<double> base(r_count);
  for (std::size_t r = 0; r < r_count; ++r) {
    double c = std::log(q.weights[r]);
    for (std::size_t j = 0; j < g.d; ++j) c -= softplus(sigma * q.nodes[r] - psi[j]);
    base[r] = c;
  }
  Posterior post;
  post.node_mass.assign(r_count, 0.0);
  post.node_right.assign(r_count * g.d, 0.0);
  std::vector<double> a(r_count);
  for (std::size_t s = 0; s <= g.d; ++s) {
    if (g.count[s] == 0.0) continue;
    for (std::size_t r = 0; r < r_count; ++r) a[r] = base[r] + sigma * q.nodes[r] * static_cast<double>(s);
    const double lse = log_sum_exp(a);
    post.loglik += g.count[s] * lse;
    for (std::size_t r = 0; r < r_count; ++r) {
      const double h = std::exp(a[r] - lse);
      post.node_mass[r] += g.count[s] * h;
      for (std::size_t j = 0; j < g.d; ++j) post.node_right[r * g.d + j] += h * g.right[s * g.d + j];
    }
  }
  for (std::size_t j = 0; j < g.d; ++j) post.loglik -= psi[j] * g.column_total[j];
  return post;
}

// Expected complete-data log-likelihood contribution of item j.
double item_objective(const Posterior& post, const Quadrature& q, std::size_t d, std::size_t j,
                      double psi, double sigma) {
  double v = 0.0;
  for (std::size_t r = 0; r < q.nodes.size(); ++r) {
    const double eta = sigma * q.nodes[r] - psi;
    v += post.node_right[r * d + j] * eta - post.node_mass[r] * softplus(eta);
  }
  return v;
}

double sigma_objective(const Posterior& post, const Quadrature& q, const std::vector<double>& psi,
                       double sigma) {
  double v = 0.0;
  for (std::size_t j = 0; j < psi.size(); ++j) v += item_objective(post, q, psi.size(), j, psi[j], sigma);
  return v;
}

// Damped Newton ascent on a concave scalar objective; never returns a point
// with a lower objective than the start.
template <class F, class G>
double newton_ascent(double x, F&& objective, G&& derivatives, double lo, double hi) {
  double fx = objective(x);
  for (int it = 0; it < 50; ++it) {
    const auto [grad, hess] = derivatives(x);
    if (!(hess < 0.0)) break;
    double step = -grad / hess;
    if (std::abs(step) < 1e-12) break;
    bool improved = false;
    for (int half = 0; half < 40; ++half) {
      const double cand = std::clamp(x + step, lo, hi);
      const double fc = objective(cand);
      if (fc >= fx) {
        improved = cand != x;
        x = cand;
        fx = fc;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  return x;
}

}  // namespace

Quadrature gauss_hermite_normal(int n_nodes) {
  if (n_nodes < 1) throw AcbmError("quadrature needs at least one node");
  // Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n_nodes, n_nodes);
  for (int k = 1; k < n_nodes; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  Quadrature q;
  q.nodes.resize(n_nodes);
  q.weights.resize(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    q.nodes[k] = solver.eigenvalues()(k);
    const double v0 = solver.eigenvectors()(0, k);
    q.weights[k] = v0 * v0;
  }
  return q;
}

RaschFit fit_rasch(const ResponseMatrix& X, const RaschConfig& config) {
  if (config.max_iterations < 1 || config.tolerance <= 0.0 || config.eap_grid_points < 2)
    throw AcbmError("invalid Rasch configuration");
  const ScoreData g = group_by_score(X);
  const Quadrature q = gauss_hermite_normal(config.quadrature_nodes);
  const double clamp = config.clamp_logit;
  const double n = static_cast<double>(g.n);

  RaschFit fit;
  fit.psi.resize(g.d);
  std::vector<char> fixed(g.d, 0);
  for (std::size_t j = 0; j < g.d; ++j) {
    const double ones = g.column_total[j];
    if (ones == 0.0 || ones == n) {
      fixed[j] = 1;
      fit.degenerate_items.push_back(static_cast<int>(j));
      fit.psi[j] = ones == 0.0 ? clamp : -clamp;
    } else {
      const double p = ones / n;
      fit.psi[j] = std::clamp(-std::log(p / (1.0 - p)), -clamp, clamp);
    }
  }
  double sigma = 1.0;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const Posterior post = e_step(g, q, fit.psi, sigma);
    fit.loglik_trace.push_back(post.loglik);
    fit.iterations = iter;

    double max_change = 0.0;
    for (std::size_t j = 0; j < g.d; ++j) {
      if (fixed[j]) continue;
      const double old = fit.psi[j];
      fit.psi[j] = newton_ascent(
          old, [&](double p) { return item_objective(post, q, g.d, j, p, sigma); },
          [&](double p) {
            double grad = 0.0, hess = 0.0;
            for (std::size_t r = 0; r < q.nodes.size(); ++r) {
              const double prob = sigmoid(sigma * q.nodes[r] - p);
              grad += post.node_mass[r] * prob - post.node_right[r * g.d + j];
              hess -= post.node_mass[r] * prob * (1.0 - prob);
            }
            return std::pair{grad, hess};
          },
          -clamp, clamp);
      max_change = std::max(max_change, std::abs(fit.psi[j] - old));
    }

    const double old_sigma = sigma;
    sigma = newton_ascent(
        sigma, [&](double s) { return sigma_objective(post, q, fit.psi, s); },
        [&](double s) {
          double grad = 0.0, hess = 0.0;
          for (std::size_t r = 0; r < q.nodes.size(); ++r) {
            const double z = q.nodes[r];
            for (std::size_t j = 0; j < g.d; ++j) {
              const double prob = sigmoid(s * z - fit.psi[j]);
              grad += z * (post.node_right[r * g.d + j] - post.node_mass[r] * prob);
              hess -= z * z * post.node_mass[r] * prob * (1.0 - prob);
            }
          }
          return std::pair{grad, hess};
        },
        1e-6, 50.0);
    max_change = std::max(max_change, std::abs(sigma - old_sigma));

    if (max_change < config.tolerance) {
      fit.converged = true;
      break;
    }
  }
  fit.sigma = sigma;
  fit.loglik = e_step(g, q, fit.psi, sigma).loglik;
  fit.loglik_trace.push_back(fit.loglik);

  // EAP scores per raw score on a fine equispaced grid.
  const int grid = config.eap_grid_points;
  std::vector<double> theta(grid), base(grid);
  for (int k = 0; k < grid; ++k) {
    const double u = -8.0 + 16.0 * k / (grid - 1);
    theta[k] = sigma * u;
    double c = -0.5 * u * u;
    for (std::size_t j = 0; j < g.d; ++j) c -= softplus(theta[k] - fit.psi[j]);
    base[k] = c;
  }
  std::vector<double> eap(g.d + 1, 0.0), a(grid);
  for (std::size_t s = 0; s <= g.d; ++s) {
    for (int k = 0; k < grid; ++k) a[k] = base[k] + theta[k] * static_cast<double>(s);
    const double lse = log_sum_exp(a);
    double m = 0.0;
    for (int k = 0; k < grid; ++k) m += theta[k] * std::exp(a[k] - lse);
    eap[s] = m;
  }
  fit.xi.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) fit.xi[i] = eap[g.score[i]];
  return fit;
}

std::vector<double> rasch_accuracy_matrix(const RaschFit& fit) {
  const std::size_t n = fit.xi.size();
  const std::size_t d = fit.psi.size();
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = sigmoid(fit.xi[i] - fit.psi[j]);
  return out;
}

}  // namespace acbm
