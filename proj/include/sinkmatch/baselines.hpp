#pragma once

#include <vector>

#include "sinkmatch/fragments.hpp"

namespace sinkmatch {

/// Cosine of the two global embeddings.
double vse_similarity(const FragmentSet& a, const FragmentSet& b);

struct CamConfig {
  double temperature = 0.1;
  double sparsity_threshold = 0.0;  // candidates below this cosine are dropped
};

/// Cross-attention similarity, t2i form: each query fragment attends over the
/// target fragments (softmax over candidates with cosine >= the sparsity
/// threshold; all targets when the candidate set empties) and contributes the
/// cosine between itself and its attended vector. The result is the mean
/// contribution over query fragments. Asymmetric; swap arguments for the
/// reverse direction.
double cam_similarity(const FragmentSet& query, const FragmentSet& target, const CamConfig& cfg);

/// Diagonal Gaussian representation of a sample.
struct GaussianEmbedding {
  std::vector<double> mean;
  std::vector<double> covariance_diag;
};

/// Moment-matched Gaussian over the unit fragments (per-dimension population
/// variance).
GaussianEmbedding gaussian_from_fragments(const FragmentSet& set);

/// Closed-form Wasserstein distance between diagonal Gaussians:
/// sqrt(|mu_a - mu_b|^2 + |sigma_a - sigma_b|^2).
double pem_wasserstein(const GaussianEmbedding& a, const GaussianEmbedding& b);

}  // namespace sinkmatch
