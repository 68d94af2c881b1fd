#pragma once

#include <utility>
#include <vector>

#include "sinkmatch/fragments.hpp"
#include "sinkmatch/matrix.hpp"

namespace sinkmatch {

/// Pairwise transport costs. Costs built from unit fragments are
/// 1 - cosine, clamped to [0, 2]; hand-built instances (extended problems,
/// synthetic tests) may carry any finite non-negative values.
struct CostMatrix {
  Matrix values;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
};

/// c_ij = 1 - dot(a.unit[i], b.unit[j]), clamped against rounding.
CostMatrix build_cost_matrix(const FragmentSet& a, const FragmentSet& b);

/// Pairwise similarities dot(a.unit[i], b.unit[j]) (no clamping).
Matrix similarity_matrix(const FragmentSet& a, const FragmentSet& b);

enum class LogDomain { kAuto, kOn, kOff };

struct SolverConfig {
  double lambda = 0.02;
  int max_iterations = 3;
  double convergence_tol = 1e-6;
  LogDomain log_domain = LogDomain::kAuto;

  void validate() const;
  /// Auto mode stabilizes in log space once exp(-C/lambda) would underflow
  /// for cosine costs; the switch point is lambda < 0.01.
  bool use_log_domain() const noexcept {
    return log_domain == LogDomain::kOn || (log_domain == LogDomain::kAuto && lambda < 0.01);
  }
};

struct TransportPlan {
  Matrix values;
  bool converged = false;
  int iterations_used = 0;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
};

/// Scaling form of the entropic solution: plan = diag(dual_row) * gibbs_kernel
/// * diag(dual_col). In log-domain mode the duals hold log-potentials and are
/// only exponentiated at plan extraction.
struct SinkhornState {
  Matrix gibbs_kernel;
  std::vector<double> dual_row;
  std::vector<double> dual_col;
  bool log_domain = false;
};

/// Alternating Bregman projections: start from the Gibbs kernel
/// exp(-C/lambda), normalize rows to alpha then columns to beta, and stop
/// when the relative Frobenius change of the plan over one full sweep drops
/// below convergence_tol (or after max_iterations sweeps).
TransportPlan sinkhorn_bregman(const CostMatrix& cost, const MarginalWeights& alpha,
                               const MarginalWeights& beta, const SolverConfig& cfg);

/// Sinkhorn-Knopp matrix scaling: dual updates mu = alpha/(xi theta),
/// theta = beta/(xi^T mu) from theta = 1. Same stopping rule as the Bregman
/// form; the two produce identical iterates up to rounding.
TransportPlan sinkhorn_matrix_scaling(const CostMatrix& cost, const MarginalWeights& alpha,
                                      const MarginalWeights& beta, const SolverConfig& cfg);

/// As sinkhorn_matrix_scaling, but also returns the final scaling state.
TransportPlan sinkhorn_matrix_scaling(const CostMatrix& cost, const MarginalWeights& alpha,
                                      const MarginalWeights& beta, const SolverConfig& cfg,
                                      SinkhornState& state);

/// <plan, cost> inner product.
double transport_cost(const TransportPlan& plan, const CostMatrix& cost);

/// H(plan) = -sum w_ij (log w_ij - 1); zero entries contribute zero.
double plan_entropy(const TransportPlan& plan);

/// Exact minimizer of the unregularized transport problem, for validation.
/// Supported instances: square with uniform margins up to 6x6 (permutation
/// enumeration), or general margins up to 3x3 (enumeration of all
/// spanning-tree basic feasible solutions; 2x2 via its single free variable).
std::pair<TransportPlan, double> exact_emd_oracle(const CostMatrix& cost,
                                                  const MarginalWeights& alpha,
                                                  const MarginalWeights& beta);

/// Overall similarity <plan, V T^T> of the converged plan under the given
/// margin strategy (uniform by default). Equals 1 - transport cost because
/// the plan carries unit mass.
double sinkhorn_similarity(const FragmentSet& a, const FragmentSet& b, const SolverConfig& cfg,
                           const MarginStrategy& margins = {});

}  // namespace sinkmatch
