#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sinkmatch/matrix.hpp"

namespace sinkmatch {

/// Discrete probability vector over the fragments of one sample.
struct MarginalWeights {
  std::vector<double> weights;

  static MarginalWeights uniform(std::size_t n);

  std::size_t size() const noexcept { return weights.size(); }
  double operator[](std::size_t i) const noexcept { return weights[i]; }

  /// Entries must be finite and strictly positive and sum to 1 within 1e-9.
  /// Exact zeros are rejected: no supported margin strategy produces them.
  void validate() const;
};

/// One sample's fragment embeddings: the raw rows, their unit-normalized
/// versions, the retained Euclidean norms, and a unit global embedding
/// (stored, or mean-pooled from the unit rows).
struct FragmentSet {
  Matrix raw;                 // K x d
  Matrix unit;                // K x d, rows unit-normalized
  std::vector<double> norms;  // length K, norms of the raw rows
  std::vector<double> global; // length d, unit norm
  std::uint32_t sample_id = 0;

  std::size_t count() const noexcept { return raw.rows(); }
  std::size_t dim() const noexcept { return raw.cols(); }
};

/// Normalizes fragments, keeping raw rows and norms. When no stored global is
/// given, the global is the re-normalized mean of the unit rows.
FragmentSet ingest_set(Matrix raw_embeddings,
                       std::optional<std::vector<double>> stored_global = std::nullopt,
                       std::uint32_t sample_id = 0);

enum class MarginKind { kUni, kIntra, kInter, kNorm };

struct MarginStrategy {
  MarginKind kind = MarginKind::kUni;
  double temperature = 1.0;
};

/// Margin initialization over a fragment set.
///   Uni:   1/K
///   Intra: softmax(global . unit_i / temperature)
///   Inter: softmax(other_global . unit_i / temperature)
///   Norm:  norms_i / sum(norms)
/// `other_global` is required for Inter and ignored otherwise.
MarginalWeights compute_margins(const FragmentSet& set,
                                const std::vector<double>* other_global,
                                const MarginStrategy& strategy);

MarginKind margin_kind_from_string(std::string_view name);
const char* to_string(MarginKind kind);

}  // namespace sinkmatch
