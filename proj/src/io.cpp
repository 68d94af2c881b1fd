#include "sinkmatch/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace sinkmatch {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::uint32_t kVersion = 1;

class ByteReader {
 public:
  explicit ByteReader(const std::filesystem::path& path) : path_(path.string()) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(errc::format_error, "cannot open " + path_);
    bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  std::size_t offset() const noexcept { return offset_; }

  void read(void* out, std::size_t n) {
    if (offset_ + n > bytes_.size())
      raise(errc::format_error,
            path_ + " truncated at byte offset " + std::to_string(offset_) + " (needed " +
                std::to_string(n) + " more bytes)");
    std::memcpy(out, bytes_.data() + offset_, n);
    offset_ += n;
  }

  std::uint32_t read_u32() {
    unsigned char b[4];
    read(b, 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }

  std::uint8_t read_u8() {
    unsigned char b;
    read(&b, 1);
    return b;
  }

  float read_f32() { return std::bit_cast<float>(read_u32()); }

  void expect_end() {
    if (offset_ != bytes_.size())
      raise(errc::format_error, path_ + " has " + std::to_string(bytes_.size() - offset_) +
                                    " trailing bytes at offset " + std::to_string(offset_));
  }

 private:
  std::string path_;
  std::vector<char> bytes_;
  std::size_t offset_ = 0;
};

class ByteWriter {
 public:
  void write(const void* data, std::size_t n) {
    const char* p = static_cast<const char*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  void write_u32(std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16),
                                static_cast<unsigned char>(v >> 24)};
    write(b, 4);
  }
  void write_u8(std::uint8_t v) { write(&v, 1); }
  void write_f32(float v) { write_u32(std::bit_cast<std::uint32_t>(v)); }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(errc::format_error, "cannot open " + path.string() + " for writing");
    out.write(bytes_.data(), static_cast<std::streamsize>(bytes_.size()));
    if (!out) raise(errc::format_error, "short write to " + path.string());
  }

 private:
  std::vector<char> bytes_;
};

}  // namespace

std::vector<EmbeddingRecord> read_embedding_file(const std::filesystem::path& path) {
  ByteReader in(path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    raise(errc::format_error, path.string() + ": bad magic");
  const std::uint32_t version = in.read_u32();
  if (version != kVersion)
    raise(errc::format_error, path.string() + ": unsupported version " + std::to_string(version));
  const std::uint32_t num_samples = in.read_u32();
  const std::uint32_t dim = in.read_u32();
  if (dim == 0) raise(errc::format_error, path.string() + ": zero dimension");

  std::vector<EmbeddingRecord> records;
  records.reserve(num_samples);
  for (std::uint32_t s = 0; s < num_samples; ++s) {
    EmbeddingRecord rec;
    rec.sample_id = in.read_u32();
    const std::uint32_t num_fragments = in.read_u32();
    if (num_fragments == 0) raise(errc::invalid_input, path.string() + ": sample with zero fragments");
    const std::uint8_t has_global = in.read_u8();
    if (has_global > 1)
      raise(errc::format_error, path.string() + ": has_global flag must be 0 or 1");
    rec.fragments = Matrix(num_fragments, dim);
    for (std::size_t i = 0; i < static_cast<std::size_t>(num_fragments) * dim; ++i) {
      const float v = in.read_f32();
      if (!std::isfinite(v))
        raise(errc::format_error,
              path.string() + ": non-finite payload at byte offset " + std::to_string(in.offset() - 4));
      rec.fragments.data()[i] = static_cast<double>(v);
    }
    if (has_global) {
      rec.global.emplace(dim);
      for (std::uint32_t j = 0; j < dim; ++j) {
        const float v = in.read_f32();
        if (!std::isfinite(v))
          raise(errc::format_error, path.string() + ": non-finite payload at byte offset " +
                                        std::to_string(in.offset() - 4));
        (*rec.global)[j] = static_cast<double>(v);
      }
    }
    records.push_back(std::move(rec));
  }
  in.expect_end();
  return records;
}

void write_embedding_file(const std::filesystem::path& path,
                          const std::vector<EmbeddingRecord>& records) {
  std::size_t dim = 0;
  for (const auto& rec : records) {
    if (rec.fragments.rows() == 0) raise(errc::invalid_input, "sample with zero fragments");
    if (dim == 0) dim = rec.fragments.cols();
    if (rec.fragments.cols() != dim || (rec.global && rec.global->size() != dim))
      raise(errc::dimension_mismatch, "records disagree on dimension");
  }
  if (records.empty() || dim == 0) raise(errc::invalid_input, "nothing to write");

  ByteWriter out;
  out.write(kMagic, 4);
  out.write_u32(kVersion);
  out.write_u32(static_cast<std::uint32_t>(records.size()));
  out.write_u32(static_cast<std::uint32_t>(dim));
  for (const auto& rec : records) {
    out.write_u32(rec.sample_id);
    out.write_u32(static_cast<std::uint32_t>(rec.fragments.rows()));
    out.write_u8(rec.global ? 1 : 0);
    for (std::size_t i = 0; i < rec.fragments.size(); ++i) {
      const float v = static_cast<float>(rec.fragments.data()[i]);
      if (!std::isfinite(v)) raise(errc::invalid_input, "non-finite fragment payload");
      out.write_f32(v);
    }
    if (rec.global)
      for (double x : *rec.global) {
        const float v = static_cast<float>(x);
        if (!std::isfinite(v)) raise(errc::invalid_input, "non-finite global payload");
        out.write_f32(v);
      }
  }
  out.save(path);
}

std::vector<FragmentSet> read_embeddings(const std::filesystem::path& path) {
  std::vector<FragmentSet> sets;
  for (auto& rec : read_embedding_file(path))
    sets.push_back(ingest_set(std::move(rec.fragments), std::move(rec.global), rec.sample_id));
  return sets;
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::format_error, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                             : comma - start);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        raise(errc::format_error, path.string() + ":" + std::to_string(lineno) +
                                      ": cannot parse cell '" + cell + "'");
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      raise(errc::format_error,
            path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) raise(errc::format_error, path.string() + ": empty CSV");
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

std::string csv_to_string(const Matrix& m) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      out += buf;
      out += (j + 1 < m.cols()) ? ',' : '\n';
    }
  }
  return out;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(errc::format_error, "cannot open " + path.string() + " for writing");
  out << csv_to_string(m);
  if (!out) raise(errc::format_error, "short write to " + path.string());
}

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(errc::format_error, "cannot open " + path.string());
  GroundTruth truth;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("image_id") ||
        !j.contains("caption_id") || !j["image_id"].is_number_unsigned() ||
        !j["caption_id"].is_number_unsigned())
      raise(errc::format_error, path.string() + ":" + std::to_string(lineno) +
                                    ": expected {\"image_id\": u32, \"caption_id\": u32}");
    const auto image_id = j["image_id"].get<std::uint64_t>();
    const auto caption_id = j["caption_id"].get<std::uint64_t>();
    if (image_id > 0xffffffffULL || caption_id > 0xffffffffULL)
      raise(errc::format_error, path.string() + ":" + std::to_string(lineno) + ": id out of range");
    truth.pairs.emplace_back(static_cast<std::uint32_t>(image_id),
                             static_cast<std::uint32_t>(caption_id));
  }
  return truth;
}

SolverConfig RunConfig::solver() const {
  SolverConfig cfg;
  cfg.lambda = lambda;
  cfg.max_iterations = iterations;
  cfg.convergence_tol = eps;
  cfg.log_domain = log_domain;
  return cfg;
}

BatchConfig RunConfig::batch(int threads) const {
  BatchConfig cfg;
  cfg.solver = solver();
  cfg.tau = tau;
  cfg.margins = MarginStrategy{margins, 1.0};
  cfg.threads = threads;
  return cfg;
}

}  // namespace sinkmatch
