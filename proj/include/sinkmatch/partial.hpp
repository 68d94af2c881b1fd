#pragma once

#include "sinkmatch/ot.hpp"

namespace sinkmatch {

/// Transport problem extended with global-embedding dustbins. The extended
/// cost has block layout [[C_g, C_gv], [C_gt, C]]: the dustbin row/column
/// come first, the unextended K x L cost sits in the lower-right block.
struct PartialProblem {
  CostMatrix extended_cost;        // (K+1) x (L+1)
  MarginalWeights extended_alpha;  // length K+1
  MarginalWeights extended_beta;   // length L+1
  double dustbin_scale = 0.1;      // tau

  std::size_t local_rows() const noexcept { return extended_cost.rows() - 1; }
  std::size_t local_cols() const noexcept { return extended_cost.cols() - 1; }
};

/// Builds the extended problem. Dustbin blocks are tau-scaled cosine costs
/// against the globals (C_gv[j] = tau*(1 - vbar.t_j), C_gt[i] =
/// tau*(1 - tbar.v_i), C_g = tau*(1 - vbar.tbar)); the local block is the
/// plain cost matrix, unscaled. Extended margins are uniform over K+1 and
/// L+1: each dustbin counts as one extra fragment.
PartialProblem extend_problem(const FragmentSet& a, const FragmentSet& b, double tau);

/// Margin override: the dustbin keeps mass 1/(K+1); the local fragments share
/// the remainder in proportion to the given strategy's weights. The Uni
/// strategy reproduces the uniform default exactly.
PartialProblem extend_problem(const FragmentSet& a, const FragmentSet& b, double tau,
                              const MarginStrategy& margins);

/// Solves the extended problem with the core Sinkhorn solver.
TransportPlan solve_partial(const PartialProblem& problem, const SolverConfig& cfg);

/// <plan_local, V T^T> over the K x L sub-block of the solved extended plan,
/// dustbin row and column excluded. The discarded auxiliary mass is not
/// renormalized.
double partial_similarity(const FragmentSet& a, const FragmentSet& b, const SolverConfig& cfg,
                          double tau, const MarginStrategy& margins = {});

}  // namespace sinkmatch
