#include <cmath>

#include "sinkmatch/kernels.hpp"
#include "sinkmatch/partial.hpp"

namespace sinkmatch {

namespace {

PartialProblem extend_with_margins(const FragmentSet& a, const FragmentSet& b, double tau,
                                   const MarginalWeights& local_alpha,
                                   const MarginalWeights& local_beta) {
  if (!(tau > 0.0)) raise(errc::invalid_input, "tau must be > 0");
  if (a.global.empty() || b.global.empty()) raise(errc::invalid_input, "missing global embedding");
  const auto& k = kernels::active();
  const std::size_t rows = a.count(), cols = b.count(), d = a.dim();

  PartialProblem p;
  p.dustbin_scale = tau;
  p.extended_cost.values = Matrix(rows + 1, cols + 1);
  Matrix& c = p.extended_cost.values;

  c(0, 0) = tau * (1.0 - k.dot(a.global.data(), b.global.data(), d));
  for (std::size_t j = 0; j < cols; ++j)
    c(0, j + 1) = tau * (1.0 - k.dot(a.global.data(), b.unit.row(j).data(), d));
  for (std::size_t i = 0; i < rows; ++i)
    c(i + 1, 0) = tau * (1.0 - k.dot(b.global.data(), a.unit.row(i).data(), d));
  const CostMatrix local = build_cost_matrix(a, b);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) c(i + 1, j + 1) = local.values(i, j);

  // The dustbin keeps a single fragment's worth of mass; the locals share the
  // rest in proportion to their weights. Uniform locals reproduce the uniform
  // extension over K+1 (and L+1) exactly.
  const double dust_a = 1.0 / static_cast<double>(rows + 1);
  const double dust_b = 1.0 / static_cast<double>(cols + 1);
  p.extended_alpha.weights.resize(rows + 1);
  p.extended_alpha.weights[0] = dust_a;
  for (std::size_t i = 0; i < rows; ++i)
    p.extended_alpha.weights[i + 1] = (1.0 - dust_a) * local_alpha[i];
  p.extended_beta.weights.resize(cols + 1);
  p.extended_beta.weights[0] = dust_b;
  for (std::size_t j = 0; j < cols; ++j)
    p.extended_beta.weights[j + 1] = (1.0 - dust_b) * local_beta[j];
  return p;
}

}  // namespace

PartialProblem extend_problem(const FragmentSet& a, const FragmentSet& b, double tau) {
  return extend_with_margins(a, b, tau, MarginalWeights::uniform(a.count()),
                             MarginalWeights::uniform(b.count()));
}

PartialProblem extend_problem(const FragmentSet& a, const FragmentSet& b, double tau,
                              const MarginStrategy& margins) {
  return extend_with_margins(a, b, tau, compute_margins(a, &b.global, margins),
                             compute_margins(b, &a.global, margins));
}

TransportPlan solve_partial(const PartialProblem& problem, const SolverConfig& cfg) {
  return sinkhorn_bregman(problem.extended_cost, problem.extended_alpha, problem.extended_beta,
                          cfg);
}

double partial_similarity(const FragmentSet& a, const FragmentSet& b, const SolverConfig& cfg,
                          double tau, const MarginStrategy& margins) {
  const PartialProblem problem = extend_problem(a, b, tau, margins);
  const TransportPlan plan = solve_partial(problem, cfg);
  const Matrix sims = similarity_matrix(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.count(); ++i)
    s += kernels::active().dot(plan.values.row(i + 1).data() + 1, sims.row(i).data(), b.count());
  return s;
}

}  // namespace sinkmatch
