#include "sinkmatch/fragments.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "sinkmatch/kernels.hpp"

namespace sinkmatch {

MarginalWeights MarginalWeights::uniform(std::size_t n) {
  return {std::vector<double>(n, 1.0 / static_cast<double>(n))};
}

void MarginalWeights::validate() const {
  if (weights.empty()) raise(errc::invalid_input, "empty marginal weights");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) raise(errc::invalid_input, "non-finite marginal weight");
    if (w <= 0.0) raise(errc::invalid_input, "marginal weights must be strictly positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    raise(errc::invalid_input, "marginal weights sum to " + std::to_string(total) + ", not 1");
}

namespace {

std::vector<double> normalized_or_throw(std::vector<double> v, errc code, const char* what) {
  const double norm = std::sqrt(kernels::active().sum_sq(v.data(), v.size()));
  if (!(norm > 1e-12)) raise(code, what);
  for (double& x : v) x /= norm;
  return v;
}

std::vector<double> softmax(std::vector<double> logits, double temperature) {
  for (double& x : logits) x /= temperature;
  const double m = kernels::active().max(logits.data(), logits.size());
  double total = 0.0;
  for (double& x : logits) {
    x = std::exp(x - m);
    total += x;
  }
  for (double& x : logits) x /= total;
  return logits;
}

}  // namespace

FragmentSet ingest_set(Matrix raw, std::optional<std::vector<double>> stored_global,
                       std::uint32_t sample_id) {
  const std::size_t k = raw.rows();
  const std::size_t d = raw.cols();
  if (k == 0 || d == 0) raise(errc::invalid_input, "empty fragment set");
  for (std::size_t i = 0; i < k * d; ++i)
    if (!std::isfinite(raw.data()[i])) raise(errc::invalid_input, "non-finite fragment entry");
  if (stored_global) {
    if (stored_global->size() != d)
      raise(errc::dimension_mismatch, "stored global dimension mismatch");
    for (double x : *stored_global)
      if (!std::isfinite(x)) raise(errc::invalid_input, "non-finite global entry");
  }

  FragmentSet set;
  set.sample_id = sample_id;
  set.norms.resize(k);
  set.unit = Matrix(k, d);
  for (std::size_t i = 0; i < k; ++i) {
    const double norm = std::sqrt(kernels::active().sum_sq(raw.row(i).data(), d));
    if (!(norm > 0.0)) raise(errc::invalid_input, "zero-norm fragment row");
    set.norms[i] = norm;
    for (std::size_t j = 0; j < d; ++j) set.unit(i, j) = raw(i, j) / norm;
  }
  set.raw = std::move(raw);

  if (stored_global) {
    set.global = normalized_or_throw(std::move(*stored_global), errc::invalid_global,
                                     "stored global has zero norm");
  } else {
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < k; ++i) kernels::active().vadd(mean.data(), set.unit.row(i).data(), d);
    for (double& x : mean) x /= static_cast<double>(k);
    set.global = normalized_or_throw(std::move(mean), errc::invalid_global,
                                     "mean of unit fragments is the zero vector");
  }
  return set;
}

MarginalWeights compute_margins(const FragmentSet& set, const std::vector<double>* other_global,
                                const MarginStrategy& strategy) {
  if (strategy.temperature <= 0.0) raise(errc::invalid_input, "margin temperature must be > 0");
  const std::size_t k = set.count();
  switch (strategy.kind) {
    case MarginKind::kUni:
      return MarginalWeights::uniform(k);
    case MarginKind::kIntra: {
      std::vector<double> logits(k);
      for (std::size_t i = 0; i < k; ++i)
        logits[i] = kernels::active().dot(set.global.data(), set.unit.row(i).data(), set.dim());
      return {softmax(std::move(logits), strategy.temperature)};
    }
    case MarginKind::kInter: {
      if (!other_global) raise(errc::invalid_input, "Inter margins need the other side's global");
      if (other_global->size() != set.dim())
        raise(errc::dimension_mismatch, "other global dimension mismatch");
      std::vector<double> logits(k);
      for (std::size_t i = 0; i < k; ++i)
        logits[i] = kernels::active().dot(other_global->data(), set.unit.row(i).data(), set.dim());
      return {softmax(std::move(logits), strategy.temperature)};
    }
    case MarginKind::kNorm: {
      const double total = kernels::active().sum(set.norms.data(), k);
      std::vector<double> w(k);
      for (std::size_t i = 0; i < k; ++i) w[i] = set.norms[i] / total;
      return {std::move(w)};
    }
  }
  raise(errc::invalid_input, "unknown margin strategy");
}

MarginKind margin_kind_from_string(std::string_view name) {
  if (name == "uni") return MarginKind::kUni;
  if (name == "intra") return MarginKind::kIntra;
  if (name == "inter") return MarginKind::kInter;
  if (name == "norm") return MarginKind::kNorm;
  raise(errc::invalid_input, "unknown margin kind: " + std::string(name));
}

const char* to_string(MarginKind kind) {
  switch (kind) {
    case MarginKind::kUni: return "uni";
    case MarginKind::kIntra: return "intra";
    case MarginKind::kInter: return "inter";
    case MarginKind::kNorm: return "norm";
  }
  return "?";
}

}  // namespace sinkmatch
