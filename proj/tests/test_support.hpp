#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "sinkmatch/fragments.hpp"
#include "sinkmatch/ot.hpp"

namespace sinkmatch::testing {

using Rng = std::mt19937_64;

// A configuration that runs the solver to a genuinely settled plan. The
// relative-change tolerance pairs with the solver's internal feasibility
// guard; the sweep cap covers slowly contracting instances.
inline SolverConfig converged_cfg(double lambda, LogDomain domain = LogDomain::kAuto) {
  SolverConfig cfg;
  cfg.lambda = lambda;
  cfg.max_iterations = 20000;
  cfg.convergence_tol = 1e-10;
  cfg.log_domain = domain;
  return cfg;
}

inline Matrix random_rows(Rng& rng, std::size_t k, std::size_t d, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(k, d);
  for (std::size_t i = 0; i < k * d; ++i) m.data()[i] = scale * gauss(rng);
  return m;
}

inline FragmentSet random_set(Rng& rng, std::size_t k, std::size_t d, std::uint32_t id = 0) {
  return ingest_set(random_rows(rng, k, d), std::nullopt, id);
}

inline CostMatrix random_cost(Rng& rng, std::size_t rows, std::size_t cols, double lo = 0.0,
                              double hi = 2.0) {
  std::uniform_real_distribution<double> uni(lo, hi);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows * cols; ++i) m.data()[i] = uni(rng);
  return CostMatrix{std::move(m)};
}

// Strictly positive random margins that sum to 1 (normalized exponentials,
// floored away from zero).
inline MarginalWeights random_margins(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  MarginalWeights w;
  w.weights.resize(n);
  double total = 0.0;
  for (double& x : w.weights) {
    x = uni(rng);
    total += x;
  }
  for (double& x : w.weights) x /= total;
  // renormalize exactly enough for validate()
  double s = 0.0;
  for (double x : w.weights) s += x;
  w.weights.back() += 1.0 - s;
  return w;
}

inline double max_marginal_deviation(const TransportPlan& plan, const MarginalWeights& alpha,
                                     const MarginalWeights& beta) {
  double worst = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    double rs = 0.0;
    for (std::size_t j = 0; j < plan.cols(); ++j) rs += plan.values(i, j);
    worst = std::max(worst, std::abs(rs - alpha[i]));
  }
  for (std::size_t j = 0; j < plan.cols(); ++j) {
    double cs = 0.0;
    for (std::size_t i = 0; i < plan.rows(); ++i) cs += plan.values(i, j);
    worst = std::max(worst, std::abs(cs - beta[j]));
  }
  return worst;
}

inline double plan_mass(const TransportPlan& plan) {
  double s = 0.0;
  for (std::size_t i = 0; i < plan.values.size(); ++i) s += plan.values.data()[i];
  return s;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

}  // namespace sinkmatch::testing
