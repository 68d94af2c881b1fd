// Exact small-instance transportation solver used as the validation oracle
// for the entropic solvers. Deliberately brute force: every supported route
// enumerates provably optimal candidates instead of iterating.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "sinkmatch/ot.hpp"

namespace sinkmatch {
namespace {

bool is_uniform(const MarginalWeights& w) {
  const double u = 1.0 / static_cast<double>(w.size());
  for (double x : w.weights)
    if (std::abs(x - u) > 1e-12) return false;
  return true;
}

// Square uniform instances: by Birkhoff extremality the optimum is a
// permutation matrix scaled by 1/K.
std::pair<TransportPlan, double> solve_permutations(const CostMatrix& cost) {
  const std::size_t n = cost.rows();
  std::vector<std::size_t> perm(n), best(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best_sum = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += cost.values(i, perm[i]);
    if (s < best_sum) {
      best_sum = s;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  TransportPlan plan;
  plan.values = Matrix(n, n, 0.0);
  const double mass = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) plan.values(i, best[i]) = mass;
  plan.converged = true;
  return {std::move(plan), best_sum * mass};
}

// A single row (or column) leaves no freedom at all.
std::pair<TransportPlan, double> solve_single_row(const CostMatrix& cost,
                                                  const MarginalWeights& alpha,
                                                  const MarginalWeights& beta) {
  const std::size_t rows = cost.rows(), cols = cost.cols();
  TransportPlan plan;
  plan.values = Matrix(rows, cols);
  double dist = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      plan.values(i, j) = alpha[i] * beta[j];  // one side has a single entry of mass 1
      dist += plan.values(i, j) * cost.values(i, j);
    }
  plan.converged = true;
  return {std::move(plan), dist};
}

// 2x2 has a single free variable t = w_00 on [max(0, a0+b0-1), min(a0, b0)];
// the objective is linear in t, so an endpoint is optimal.
std::pair<TransportPlan, double> solve_2x2(const CostMatrix& cost, const MarginalWeights& alpha,
                                           const MarginalWeights& beta) {
  const double a0 = alpha[0], b0 = beta[0];
  const double lo = std::max(0.0, a0 + b0 - 1.0);
  const double hi = std::min(a0, b0);
  const double coef =
      cost.values(0, 0) - cost.values(0, 1) - cost.values(1, 0) + cost.values(1, 1);
  const double t = coef < 0.0 ? hi : lo;

  TransportPlan plan;
  plan.values = Matrix(2, 2);
  plan.values(0, 0) = t;
  plan.values(0, 1) = std::max(0.0, a0 - t);
  plan.values(1, 0) = std::max(0.0, b0 - t);
  plan.values(1, 1) = std::max(0.0, 1.0 - a0 - b0 + t);
  plan.converged = true;
  double dist = 0.0;
  for (std::size_t i = 0; i < 4; ++i) dist += plan.values.data()[i] * cost.values.data()[i];
  return {std::move(plan), dist};
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  double r = 1.0;
  for (std::size_t i = 0; i < k; ++i) r = r * static_cast<double>(n - i) / static_cast<double>(i + 1);
  return r;
}

// General margins: every vertex of the transportation polytope is the flow of
// some spanning tree of the complete bipartite graph, so enumerate all
// (K*L choose K+L-1) edge subsets, solve each tree by leaf elimination, and
// keep the cheapest feasible one.
std::pair<TransportPlan, double> solve_trees(const CostMatrix& cost, const MarginalWeights& alpha,
                                             const MarginalWeights& beta) {
  const std::size_t rows = cost.rows(), cols = cost.cols();
  const std::size_t num_edges = rows * cols;
  const std::size_t tree_edges = rows + cols - 1;
  const std::size_t num_nodes = rows + cols;

  double best_dist = std::numeric_limits<double>::infinity();
  Matrix best_plan;

  std::vector<std::size_t> combo(tree_edges);
  std::iota(combo.begin(), combo.end(), std::size_t{0});
  std::vector<double> flow(num_edges);
  std::vector<int> degree(num_nodes);
  std::vector<bool> active(num_edges);
  std::vector<double> remaining(num_nodes);

  while (true) {
    std::fill(degree.begin(), degree.end(), 0);
    std::fill(active.begin(), active.end(), false);
    for (std::size_t e : combo) {
      active[e] = true;
      ++degree[e / cols];
      ++degree[rows + e % cols];
    }
    for (std::size_t i = 0; i < rows; ++i) remaining[i] = alpha[i];
    for (std::size_t j = 0; j < cols; ++j) remaining[rows + j] = beta[j];
    std::fill(flow.begin(), flow.end(), 0.0);

    bool feasible = true;
    for (std::size_t step = 0; step < tree_edges && feasible; ++step) {
      std::size_t leaf = num_nodes;
      for (std::size_t v = 0; v < num_nodes; ++v)
        if (degree[v] == 1) {
          leaf = v;
          break;
        }
      if (leaf == num_nodes) {  // no leaf left: the subset has a cycle
        feasible = false;
        break;
      }
      std::size_t edge = num_edges;
      if (leaf < rows) {
        for (std::size_t j = 0; j < cols; ++j)
          if (active[leaf * cols + j]) {
            edge = leaf * cols + j;
            break;
          }
      } else {
        for (std::size_t i = 0; i < rows; ++i)
          if (active[i * cols + (leaf - rows)]) {
            edge = i * cols + (leaf - rows);
            break;
          }
      }
      const double f = remaining[leaf];
      if (f < -1e-12) {
        feasible = false;
        break;
      }
      flow[edge] = std::max(f, 0.0);
      const std::size_t i = edge / cols, j = edge % cols;
      remaining[i] -= f;
      remaining[rows + j] -= f;
      active[edge] = false;
      --degree[i];
      --degree[rows + j];
    }
    if (feasible) {
      double dist = 0.0;
      for (std::size_t e = 0; e < num_edges; ++e) dist += flow[e] * cost.values.data()[e];
      if (dist < best_dist) {
        best_dist = dist;
        best_plan = Matrix(rows, cols);
        std::copy(flow.begin(), flow.end(), best_plan.data());
      }
    }

    // next combination in lexicographic order
    std::size_t k = tree_edges;
    while (k > 0 && combo[k - 1] == num_edges - tree_edges + (k - 1)) --k;
    if (k == 0) break;
    ++combo[k - 1];
    for (std::size_t t = k; t < tree_edges; ++t) combo[t] = combo[t - 1] + 1;
  }

  TransportPlan plan;
  plan.values = std::move(best_plan);
  plan.converged = true;
  return {std::move(plan), best_dist};
}

}  // namespace

std::pair<TransportPlan, double> exact_emd_oracle(const CostMatrix& cost,
                                                  const MarginalWeights& alpha,
                                                  const MarginalWeights& beta) {
  if (cost.values.empty()) raise(errc::invalid_input, "empty cost matrix");
  for (std::size_t i = 0; i < cost.values.size(); ++i)
    if (!std::isfinite(cost.values.data()[i])) raise(errc::invalid_input, "non-finite cost entry");
  if (alpha.size() != cost.rows() || beta.size() != cost.cols())
    raise(errc::dimension_mismatch, "margin lengths do not match the cost matrix");
  alpha.validate();
  beta.validate();

  const std::size_t rows = cost.rows(), cols = cost.cols();
  if (rows * cols > 36)
    raise(errc::unsupported_size, "oracle instances are capped at 36 cells");
  if (rows == cols && rows <= 6 && is_uniform(alpha) && is_uniform(beta))
    return solve_permutations(cost);
  if (rows == 1 || cols == 1) return solve_single_row(cost, alpha, beta);
  if (rows == 2 && cols == 2) return solve_2x2(cost, alpha, beta);
  if (binomial(rows * cols, rows + cols - 1) <= 3e6) return solve_trees(cost, alpha, beta);
  raise(errc::unsupported_size, "too many spanning-tree bases to enumerate for this shape");
}

}  // namespace sinkmatch
