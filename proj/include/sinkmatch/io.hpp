#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "sinkmatch/fragments.hpp"
#include "sinkmatch/retrieval.hpp"

namespace sinkmatch {

/// One sample of the binary embedding format, as stored on disk (raw float32
/// payloads widened to double; writing narrows them back bit-exactly).
struct EmbeddingRecord {
  std::uint32_t sample_id = 0;
  Matrix fragments;  // num_fragments x dim, raw (unnormalized)
  std::optional<std::vector<double>> global;
};

/// Binary embedding file:
///   magic "EMB1", version u32 LE = 1, num_samples u32 LE, dim u32 LE,
///   then per sample: sample_id u32, num_fragments u32, has_global u8,
///   fragments num_fragments*dim float32 LE row-major, optional global
///   dim float32 LE.
std::vector<EmbeddingRecord> read_embedding_file(const std::filesystem::path& path);
void write_embedding_file(const std::filesystem::path& path,
                          const std::vector<EmbeddingRecord>& records);

/// Reads a file and ingests every record into a FragmentSet.
std::vector<FragmentSet> read_embeddings(const std::filesystem::path& path);

/// Strictly rectangular CSV of decimal floats.
Matrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);
std::string csv_to_string(const Matrix& m);

/// JSONL ground truth: one {"image_id": u32, "caption_id": u32} per line.
GroundTruth read_ground_truth(const std::filesystem::path& path);

/// Full run configuration surfaced by the CLI; defaults mirror the solver's
/// reference configuration so a flagless run is the canonical one.
struct RunConfig {
  double lambda = 0.02;
  double margin_phi = 0.05;
  double tau = 0.1;
  int iterations = 3;
  double eps = 1e-6;
  MarginKind margins = MarginKind::kUni;
  Method method = Method::kOmit;
  bool partial = true;
  LogDomain log_domain = LogDomain::kAuto;

  SolverConfig solver() const;
  BatchConfig batch(int threads) const;
};

}  // namespace sinkmatch
