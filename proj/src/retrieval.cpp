#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "sinkmatch/partial.hpp"
#include "sinkmatch/retrieval.hpp"

namespace sinkmatch {

Method method_from_string(std::string_view name) {
  if (name == "omit") return Method::kOmit;
  if (name == "omit-naive") return Method::kOmitNaive;
  if (name == "vse") return Method::kVse;
  if (name == "cam") return Method::kCam;
  if (name == "pem") return Method::kPem;
  raise(errc::invalid_input, "unknown method: " + std::string(name));
}

const char* to_string(Method method) {
  switch (method) {
    case Method::kOmit: return "omit";
    case Method::kOmitNaive: return "omit-naive";
    case Method::kVse: return "vse";
    case Method::kCam: return "cam";
    case Method::kPem: return "pem";
  }
  return "?";
}

namespace {

double pair_similarity(const FragmentSet& image, const FragmentSet& caption, Method method,
                       const BatchConfig& cfg, const std::vector<GaussianEmbedding>* image_gaussians,
                       const std::vector<GaussianEmbedding>* caption_gaussians, std::size_t m,
                       std::size_t n) {
  switch (method) {
    case Method::kOmit:
      return partial_similarity(image, caption, cfg.solver, cfg.tau, cfg.margins);
    case Method::kOmitNaive:
      return sinkhorn_similarity(image, caption, cfg.solver, cfg.margins);
    case Method::kVse:
      return vse_similarity(image, caption);
    case Method::kCam:
      // t2i attention: caption tokens query over image regions.
      return cam_similarity(caption, image, cfg.cam);
    case Method::kPem:
      // Ranking similarity: negated closed-form Wasserstein distance.
      return -pem_wasserstein((*image_gaussians)[m], (*caption_gaussians)[n]);
  }
  raise(errc::invalid_input, "unknown method");
}

}  // namespace

SimilarityMatrix batch_similarity(std::span<const FragmentSet> images,
                                  std::span<const FragmentSet> captions, Method method,
                                  const BatchConfig& cfg) {
  if (images.empty() || captions.empty()) raise(errc::invalid_input, "empty batch");
  const std::size_t rows = images.size(), cols = captions.size();

  std::vector<GaussianEmbedding> image_gaussians, caption_gaussians;
  if (method == Method::kPem) {
    image_gaussians.reserve(rows);
    for (const auto& s : images) image_gaussians.push_back(gaussian_from_fragments(s));
    caption_gaussians.reserve(cols);
    for (const auto& s : captions) caption_gaussians.push_back(gaussian_from_fragments(s));
  }

  SimilarityMatrix out;
  out.method = method;
  out.values = Matrix(rows, cols);
  out.row_ids.reserve(rows);
  for (const auto& s : images) out.row_ids.push_back(s.sample_id);
  out.col_ids.reserve(cols);
  for (const auto& s : captions) out.col_ids.push_back(s.sample_id);

  const std::size_t total = rows * cols;
  const int threads = std::max(1, cfg.threads);

  auto run_range = [&](std::size_t begin, std::size_t end, std::exception_ptr& err) {
    try {
      for (std::size_t p = begin; p < end; ++p) {
        const std::size_t m = p / cols, n = p % cols;
        try {
          out.values(m, n) = pair_similarity(images[m], captions[n], method, cfg, &image_gaussians,
                                             &caption_gaussians, m, n);
        } catch (const Error& e) {
          // A failing pair aborts the whole batch, tagged with its ids.
          throw Error(e.code(), "pair (image " + std::to_string(images[m].sample_id) +
                                    ", caption " + std::to_string(captions[n].sample_id) +
                                    "): " + e.what());
        }
      }
    } catch (...) {
      err = std::current_exception();
    }
  };

  if (threads == 1 || total < 2) {
    std::exception_ptr err;
    run_range(0, total, err);
    if (err) std::rethrow_exception(err);
  } else {
    const std::size_t workers = std::min<std::size_t>(threads, total);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(total, begin + chunk);
      pool.emplace_back(run_range, begin, end, std::ref(errors[w]));
    }
    for (auto& t : pool) t.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }
  return out;
}

namespace {

// Rank of the best relevant item for one query: items sorted by descending
// score, ties broken by ascending index; rank is 1-based.
std::size_t best_relevant_rank(const std::vector<double>& scores,
                               const std::vector<bool>& relevant) {
  std::size_t best = scores.size() + 1;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!relevant[i]) continue;
    std::size_t rank = 1;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (j == i) continue;
      if (scores[j] > scores[i] || (scores[j] == scores[i] && j < i)) ++rank;
    }
    best = std::min(best, rank);
  }
  return best;
}

}  // namespace

RetrievalReport recall_report(const SimilarityMatrix& sims, const GroundTruth& truth) {
  const std::size_t rows = sims.values.rows(), cols = sims.values.cols();
  if (sims.row_ids.size() != rows || sims.col_ids.size() != cols)
    raise(errc::invalid_input, "id lists do not match the similarity matrix");

  std::unordered_map<std::uint32_t, std::size_t> row_of, col_of;
  for (std::size_t i = 0; i < rows; ++i) row_of.emplace(sims.row_ids[i], i);
  for (std::size_t j = 0; j < cols; ++j) col_of.emplace(sims.col_ids[j], j);

  std::vector<std::vector<bool>> relevant(rows, std::vector<bool>(cols, false));
  for (const auto& [image_id, caption_id] : truth.pairs) {
    auto r = row_of.find(image_id);
    auto c = col_of.find(caption_id);
    if (r == row_of.end())
      raise(errc::invalid_ground_truth, "unknown image id " + std::to_string(image_id));
    if (c == col_of.end())
      raise(errc::invalid_ground_truth, "unknown caption id " + std::to_string(caption_id));
    relevant[r->second][c->second] = true;
  }

  std::size_t i2t_hits[3] = {0, 0, 0};  // K = 1, 5, 10
  std::vector<double> scores(cols);
  std::vector<bool> rel(cols);
  for (std::size_t m = 0; m < rows; ++m) {
    bool any = false;
    for (std::size_t n = 0; n < cols; ++n) {
      scores[n] = sims.values(m, n);
      rel[n] = relevant[m][n];
      any = any || rel[n];
    }
    if (!any)
      raise(errc::invalid_ground_truth,
            "image " + std::to_string(sims.row_ids[m]) + " has no relevant captions");
    const std::size_t rank = best_relevant_rank(scores, rel);
    if (rank <= 1) ++i2t_hits[0];
    if (rank <= 5) ++i2t_hits[1];
    if (rank <= 10) ++i2t_hits[2];
  }

  std::size_t t2i_hits[3] = {0, 0, 0};
  std::vector<double> col_scores(rows);
  std::vector<bool> col_rel(rows);
  for (std::size_t n = 0; n < cols; ++n) {
    bool any = false;
    for (std::size_t m = 0; m < rows; ++m) {
      col_scores[m] = sims.values(m, n);
      col_rel[m] = relevant[m][n];
      any = any || col_rel[m];
    }
    if (!any)
      raise(errc::invalid_ground_truth,
            "caption " + std::to_string(sims.col_ids[n]) + " has no relevant images");
    const std::size_t rank = best_relevant_rank(col_scores, col_rel);
    if (rank <= 1) ++t2i_hits[0];
    if (rank <= 5) ++t2i_hits[1];
    if (rank <= 10) ++t2i_hits[2];
  }

  RetrievalReport report;
  report.i2t_r1 = 100.0 * static_cast<double>(i2t_hits[0]) / static_cast<double>(rows);
  report.i2t_r5 = 100.0 * static_cast<double>(i2t_hits[1]) / static_cast<double>(rows);
  report.i2t_r10 = 100.0 * static_cast<double>(i2t_hits[2]) / static_cast<double>(rows);
  report.t2i_r1 = 100.0 * static_cast<double>(t2i_hits[0]) / static_cast<double>(cols);
  report.t2i_r5 = 100.0 * static_cast<double>(t2i_hits[1]) / static_cast<double>(cols);
  report.t2i_r10 = 100.0 * static_cast<double>(t2i_hits[2]) / static_cast<double>(cols);
  report.rsum = report.i2t_r1 + report.i2t_r5 + report.i2t_r10 + report.t2i_r1 + report.t2i_r5 +
                report.t2i_r10;
  return report;
}

double triplet_loss(const SimilarityMatrix& sims, const LossConfig& cfg) {
  const Matrix& s = sims.values;
  if (s.rows() != s.cols()) raise(errc::invalid_input, "triplet loss needs a square matrix");
  if (cfg.margin < 0.0) raise(errc::invalid_input, "margin must be >= 0");
  const std::size_t n = s.rows();

  double loss = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    double hardest = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != m && s(m, j) > hardest) hardest = s(m, j);
    if (n > 1) loss += std::max(0.0, cfg.margin + hardest - s(m, m));
  }
  for (std::size_t j = 0; j < n; ++j) {
    double hardest = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < n; ++m)
      if (m != j && s(m, j) > hardest) hardest = s(m, j);
    if (n > 1) loss += std::max(0.0, cfg.margin + hardest - s(j, j));
  }
  return loss;
}

}  // namespace sinkmatch
