#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sinkmatch/baselines.hpp"
#include "sinkmatch/kernels.hpp"

namespace sinkmatch {

double vse_similarity(const FragmentSet& a, const FragmentSet& b) {
  if (a.global.empty() || b.global.empty()) raise(errc::invalid_input, "missing global embedding");
  if (a.dim() != b.dim()) raise(errc::dimension_mismatch, "fragment dimensions differ");
  return kernels::active().dot(a.global.data(), b.global.data(), a.dim());
}

double cam_similarity(const FragmentSet& query, const FragmentSet& target, const CamConfig& cfg) {
  if (!(cfg.temperature > 0.0)) raise(errc::invalid_input, "temperature must be > 0");
  if (query.dim() != target.dim()) raise(errc::dimension_mismatch, "fragment dimensions differ");
  const auto& k = kernels::active();
  const std::size_t num_targets = target.count(), d = query.dim();

  std::vector<double> sims(num_targets), weights(num_targets);
  std::vector<double> attended(d);
  double total = 0.0;
  for (std::size_t j = 0; j < query.count(); ++j) {
    const double* t = query.unit.row(j).data();
    for (std::size_t i = 0; i < num_targets; ++i)
      sims[i] = k.dot(target.unit.row(i).data(), t, d);

    // Candidate set: targets at or above the sparsity threshold. Falls back
    // to all targets when the set empties.
    bool any = false;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < num_targets; ++i)
      if (sims[i] >= cfg.sparsity_threshold) {
        any = true;
        if (sims[i] > m) m = sims[i];
      }
    if (!any) m = k.max(sims.data(), num_targets);

    double z = 0.0;
    for (std::size_t i = 0; i < num_targets; ++i) {
      const bool in = !any || sims[i] >= cfg.sparsity_threshold;
      weights[i] = in ? std::exp((sims[i] - m) / cfg.temperature) : 0.0;
      z += weights[i];
    }
    std::fill(attended.begin(), attended.end(), 0.0);
    double attended_sim = 0.0;
    for (std::size_t i = 0; i < num_targets; ++i) {
      if (weights[i] == 0.0) continue;
      const double w = weights[i] / z;
      k.axpy(attended.data(), target.unit.row(i).data(), w, d);
      attended_sim += w * sims[i];
    }
    // Cosine between the query fragment and its attended vector; opposing
    // targets can cancel, so the norm is floored.
    const double norm = std::sqrt(k.sum_sq(attended.data(), d));
    total += attended_sim / std::max(norm, 1e-12);
  }
  return total / static_cast<double>(query.count());
}

GaussianEmbedding gaussian_from_fragments(const FragmentSet& set) {
  const std::size_t n = set.count(), d = set.dim();
  GaussianEmbedding g;
  g.mean.assign(d, 0.0);
  g.covariance_diag.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    kernels::active().vadd(g.mean.data(), set.unit.row(i).data(), d);
  for (double& x : g.mean) x /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = set.unit.row(i).data();
    for (std::size_t j = 0; j < d; ++j) {
      const double c = row[j] - g.mean[j];
      g.covariance_diag[j] += c * c;
    }
  }
  for (double& x : g.covariance_diag) x /= static_cast<double>(n);
  return g;
}

double pem_wasserstein(const GaussianEmbedding& a, const GaussianEmbedding& b) {
  if (a.mean.size() != b.mean.size() || a.covariance_diag.size() != b.covariance_diag.size())
    raise(errc::dimension_mismatch, "Gaussian dimensions differ");
  const auto& k = kernels::active();
  const double dm = k.sum_sq_diff(a.mean.data(), b.mean.data(), a.mean.size());
  const double dc =
      k.sum_sq_diff(a.covariance_diag.data(), b.covariance_diag.data(), a.covariance_diag.size());
  return std::sqrt(dm + dc);
}

}  // namespace sinkmatch
