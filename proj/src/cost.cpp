#include <algorithm>
#include <cmath>

#include "sinkmatch/kernels.hpp"
#include "sinkmatch/ot.hpp"

namespace sinkmatch {

Matrix similarity_matrix(const FragmentSet& a, const FragmentSet& b) {
  if (a.count() == 0 || b.count() == 0) raise(errc::invalid_input, "empty fragment set");
  if (a.dim() != b.dim()) raise(errc::dimension_mismatch, "fragment dimensions differ");
  const auto& k = kernels::active();
  Matrix s(a.count(), b.count());
  for (std::size_t i = 0; i < a.count(); ++i)
    for (std::size_t j = 0; j < b.count(); ++j)
      s(i, j) = k.dot(a.unit.row(i).data(), b.unit.row(j).data(), a.dim());
  return s;
}

CostMatrix build_cost_matrix(const FragmentSet& a, const FragmentSet& b) {
  Matrix s = similarity_matrix(a, b);
  for (std::size_t i = 0; i < s.size(); ++i)
    s.data()[i] = std::clamp(1.0 - s.data()[i], 0.0, 2.0);
  return CostMatrix{std::move(s)};
}

double transport_cost(const TransportPlan& plan, const CostMatrix& cost) {
  if (plan.rows() != cost.rows() || plan.cols() != cost.cols())
    raise(errc::dimension_mismatch, "plan and cost shapes differ");
  return kernels::active().dot(plan.values.data(), cost.values.data(), plan.values.size());
}

double plan_entropy(const TransportPlan& plan) {
  double h = 0.0;
  for (std::size_t i = 0; i < plan.values.size(); ++i) {
    const double w = plan.values.data()[i];
    if (w > 0.0) h -= w * (std::log(w) - 1.0);
  }
  return h;
}

double sinkhorn_similarity(const FragmentSet& a, const FragmentSet& b, const SolverConfig& cfg,
                           const MarginStrategy& margins) {
  const MarginalWeights alpha = compute_margins(a, &b.global, margins);
  const MarginalWeights beta = compute_margins(b, &a.global, margins);
  const CostMatrix cost = build_cost_matrix(a, b);
  const TransportPlan plan = sinkhorn_bregman(cost, alpha, beta, cfg);
  const Matrix sims = similarity_matrix(a, b);
  return kernels::active().dot(plan.values.data(), sims.data(), sims.size());
}

}  // namespace sinkmatch
