#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sinkmatch/baselines.hpp"
#include "sinkmatch/ot.hpp"

namespace sinkmatch {

enum class Method { kOmit, kOmitNaive, kVse, kCam, kPem };

Method method_from_string(std::string_view name);
const char* to_string(Method method);

struct SimilarityMatrix {
  Matrix values;  // images x captions
  Method method = Method::kOmit;
  std::vector<std::uint32_t> row_ids;
  std::vector<std::uint32_t> col_ids;
};

struct GroundTruth {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (image_id, caption_id)
};

struct RetrievalReport {
  double i2t_r1 = 0, i2t_r5 = 0, i2t_r10 = 0;
  double t2i_r1 = 0, t2i_r5 = 0, t2i_r10 = 0;
  double rsum = 0;
};

struct BatchConfig {
  SolverConfig solver;
  double tau = 0.1;          // dustbin scale for kOmit
  MarginStrategy margins;    // margins for the OT methods
  CamConfig cam;
  int threads = 1;
};

/// Pairwise similarities for every (image, caption) pair under one method.
/// Pairs are independent; with threads > 1 they are computed in parallel into
/// disjoint entries. kOmit solves the dustbin-extended problem, kOmitNaive
/// the plain one; kCam attends caption tokens over image regions; kPem ranks
/// by negated Gaussian Wasserstein distance.
SimilarityMatrix batch_similarity(std::span<const FragmentSet> images,
                                  std::span<const FragmentSet> captions, Method method,
                                  const BatchConfig& cfg);

/// R@1/5/10 in both directions plus RSUM. Items are ranked by descending
/// similarity, ties broken by ascending index; a query scores hit@K when any
/// of its relevant items ranks within the top K.
RetrievalReport recall_report(const SimilarityMatrix& sims, const GroundTruth& truth);

struct LossConfig {
  double margin = 0.05;  // phi
};

/// Hinge triplet loss with online hardest negatives over a square similarity
/// matrix whose diagonal holds the positive pairs:
///   sum_m max_{n!=m} [phi + S(m,n) - S(m,m)]_+
/// + sum_n max_{m!=n} [phi + S(m,n) - S(n,n)]_+
double triplet_loss(const SimilarityMatrix& sims, const LossConfig& cfg);

}  // namespace sinkmatch
