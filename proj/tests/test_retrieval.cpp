#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "sinkmatch/partial.hpp"
#include "sinkmatch/retrieval.hpp"
#include "test_support.hpp"

using namespace sinkmatch;
using namespace sinkmatch::testing;

namespace {

SimilarityMatrix make_sims(Matrix m) {
  SimilarityMatrix s;
  s.row_ids.resize(m.rows());
  std::iota(s.row_ids.begin(), s.row_ids.end(), 0u);
  s.col_ids.resize(m.cols());
  std::iota(s.col_ids.begin(), s.col_ids.end(), 0u);
  s.values = std::move(m);
  return s;
}

GroundTruth diagonal_truth(std::size_t n) {
  GroundTruth t;
  for (std::uint32_t i = 0; i < n; ++i) t.pairs.emplace_back(i, i);
  return t;
}

// Brute-force reference: full sort per query with the same tie rule.
RetrievalReport recall_by_sorting(const Matrix& sims, const GroundTruth& truth) {
  const std::size_t rows = sims.rows(), cols = sims.cols();
  std::vector<std::vector<bool>> rel(rows, std::vector<bool>(cols, false));
  for (auto [i, j] : truth.pairs) rel[i][j] = true;

  auto direction = [&](bool i2t, double& r1, double& r5, double& r10) {
    const std::size_t nq = i2t ? rows : cols;
    const std::size_t ni = i2t ? cols : rows;
    int h1 = 0, h5 = 0, h10 = 0;
    for (std::size_t q = 0; q < nq; ++q) {
      std::vector<std::size_t> order(ni);
      std::iota(order.begin(), order.end(), std::size_t{0});
      auto score = [&](std::size_t item) { return i2t ? sims(q, item) : sims(item, q); };
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t x, std::size_t y) { return score(x) > score(y); });
      std::size_t best = ni + 1;
      for (std::size_t rank = 0; rank < ni; ++rank) {
        const bool hit = i2t ? rel[q][order[rank]] : rel[order[rank]][q];
        if (hit) {
          best = rank + 1;
          break;
        }
      }
      if (best <= 1) ++h1;
      if (best <= 5) ++h5;
      if (best <= 10) ++h10;
    }
    r1 = 100.0 * h1 / static_cast<double>(nq);
    r5 = 100.0 * h5 / static_cast<double>(nq);
    r10 = 100.0 * h10 / static_cast<double>(nq);
  };

  RetrievalReport r;
  direction(true, r.i2t_r1, r.i2t_r5, r.i2t_r10);
  direction(false, r.t2i_r1, r.t2i_r5, r.t2i_r10);
  r.rsum = r.i2t_r1 + r.i2t_r5 + r.i2t_r10 + r.t2i_r1 + r.t2i_r5 + r.t2i_r10;
  return r;
}

}  // namespace

TEST_CASE("recall report basics") {
  SUBCASE("ranks 1 and 3 give R@1 = 50, R@5 = R@10 = 100") {
    // query 0 ranks its relevant item first; query 1 ranks it third
    auto sims = make_sims(Matrix::from_rows({{0.9, 0.5, 0.4, 0.1, 0.0, 0.05},
                                             {0.8, 0.7, 0.3, 0.2, 0.1, 0.15}}));
    GroundTruth truth;
    truth.pairs = {{0u, 0u}, {1u, 2u}, {0u, 1u}, {1u, 3u}, {0u, 4u}, {1u, 5u}};
    // make every caption relevant to something so t2i queries are valid
    auto r = recall_report(sims, truth);
    CHECK(r.i2t_r1 == doctest::Approx(50.0));
    CHECK(r.i2t_r5 == doctest::Approx(100.0));
    CHECK(r.i2t_r10 == doctest::Approx(100.0));
  }
  SUBCASE("identity matrix with diagonal truth is perfect") {
    Matrix eye(4, 4, 0.0);
    for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
    auto r = recall_report(make_sims(std::move(eye)), diagonal_truth(4));
    CHECK(r.i2t_r1 == doctest::Approx(100.0));
    CHECK(r.t2i_r1 == doctest::Approx(100.0));
    CHECK(r.rsum == doctest::Approx(600.0));
  }
  SUBCASE("matches the sort-based reference on random matrices") {
    Rng rng(401);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int it = 0; it < 10; ++it) {
      Matrix m(10, 10);
      for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = uni(rng);
      GroundTruth truth = diagonal_truth(10);
      // a few extra relevant pairs
      truth.pairs.emplace_back(0u, 5u);
      truth.pairs.emplace_back(3u, 7u);
      const auto expected = recall_by_sorting(m, truth);
      const auto got = recall_report(make_sims(m), truth);
      CHECK(got.i2t_r1 == doctest::Approx(expected.i2t_r1));
      CHECK(got.i2t_r5 == doctest::Approx(expected.i2t_r5));
      CHECK(got.i2t_r10 == doctest::Approx(expected.i2t_r10));
      CHECK(got.t2i_r1 == doctest::Approx(expected.t2i_r1));
      CHECK(got.t2i_r5 == doctest::Approx(expected.t2i_r5));
      CHECK(got.t2i_r10 == doctest::Approx(expected.t2i_r10));
      CHECK(got.rsum == doctest::Approx(expected.rsum));
    }
  }
  SUBCASE("rank-based: invariant under strictly increasing transforms") {
    Rng rng(409);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Matrix m(6, 6);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = uni(rng);
    auto r1 = recall_report(make_sims(m), diagonal_truth(6));
    Matrix warped = m;
    for (std::size_t i = 0; i < warped.size(); ++i)
      warped.data()[i] = std::tanh(3.0 * warped.data()[i]) + 0.1;
    auto r2 = recall_report(make_sims(std::move(warped)), diagonal_truth(6));
    CHECK(r1.rsum == doctest::Approx(r2.rsum));
    CHECK(r1.i2t_r1 == doctest::Approx(r2.i2t_r1));
    CHECK(r1.t2i_r5 == doctest::Approx(r2.t2i_r5));
  }
  SUBCASE("queries without relevant items are rejected") {
    Matrix eye(3, 3, 0.0);
    GroundTruth missing;
    missing.pairs = {{0u, 0u}, {1u, 1u}};  // image/caption 2 uncovered
    try {
      recall_report(make_sims(std::move(eye)), missing);
      FAIL("expected invalid_ground_truth");
    } catch (const Error& e) {
      CHECK(e.code() == errc::invalid_ground_truth);
    }
  }
  SUBCASE("unknown ids are rejected") {
    Matrix eye(2, 2, 0.0);
    GroundTruth bad;
    bad.pairs = {{0u, 0u}, {1u, 1u}, {9u, 1u}};
    try {
      recall_report(make_sims(std::move(eye)), bad);
      FAIL("expected invalid_ground_truth");
    } catch (const Error& e) {
      CHECK(e.code() == errc::invalid_ground_truth);
    }
  }
}

TEST_CASE("triplet loss") {
  LossConfig phi{0.05};
  SUBCASE("separated positives give zero loss") {
    auto s = make_sims(Matrix::from_rows({{0.9, 0.2}, {0.1, 0.8}}));
    CHECK(triplet_loss(s, phi) == doctest::Approx(0.0));
  }
  SUBCASE("identity with zero margin gives zero loss") {
    Matrix eye(3, 3, 0.0);
    for (std::size_t i = 0; i < 3; ++i) eye(i, i) = 1.0;
    CHECK(triplet_loss(make_sims(std::move(eye)), LossConfig{0.0}) == doctest::Approx(0.0));
  }
  SUBCASE("single violating pair contributes its hinge") {
    auto s = make_sims(Matrix::from_rows({{0.5, 0.6}, {0.4, 0.7}}));
    CHECK(triplet_loss(s, phi) == doctest::Approx(0.15).epsilon(1e-12));
  }
  SUBCASE("matches a brute-force evaluation on random matrices") {
    Rng rng(419);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int it = 0; it < 20; ++it) {
      Matrix m(8, 8);
      for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = uni(rng);
      double expected = 0.0;
      for (std::size_t q = 0; q < 8; ++q) {
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < 8; ++n)
          if (n != q) worst = std::max(worst, 0.05 + m(q, n) - m(q, q));
        expected += std::max(0.0, worst);
        worst = -std::numeric_limits<double>::infinity();
        for (std::size_t n = 0; n < 8; ++n)
          if (n != q) worst = std::max(worst, 0.05 + m(n, q) - m(q, q));
        expected += std::max(0.0, worst);
      }
      CHECK(triplet_loss(make_sims(m), phi) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("zero loss iff diagonals dominate by the margin") {
    auto s = make_sims(Matrix::from_rows({{0.9, 0.86}, {0.1, 0.95}}));
    CHECK(triplet_loss(s, LossConfig{0.04}) == doctest::Approx(0.0));
    CHECK(triplet_loss(s, LossConfig{0.05}) > 0.0);
  }
  SUBCASE("non-square matrices are rejected") {
    CHECK_THROWS_AS(triplet_loss(make_sims(Matrix(2, 3, 0.0)), phi), Error);
  }
}

TEST_CASE("batch similarity") {
  Rng rng(421);
  std::vector<FragmentSet> images, captions;
  for (int i = 0; i < 3; ++i) images.push_back(random_set(rng, 3, 8, 100 + i));
  for (int j = 0; j < 3; ++j) captions.push_back(random_set(rng, 4, 8, 200 + j));

  BatchConfig cfg;
  cfg.solver.max_iterations = 50;

  SUBCASE("1x1 batch equals the single-pair call") {
    auto one = batch_similarity({images.data(), 1}, {captions.data(), 1}, Method::kOmit, cfg);
    CHECK(one.values.rows() == 1);
    CHECK(one.values(0, 0) ==
          doctest::Approx(partial_similarity(images[0], captions[0], cfg.solver, cfg.tau))
              .epsilon(1e-12));
  }
  SUBCASE("vse on identical singleton lists") {
    auto solo = batch_similarity({images.data(), 1}, {images.data(), 1}, Method::kVse, cfg);
    CHECK(solo.values(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("3x3 batch equals nine independent single-pair calls") {
    for (Method method : {Method::kOmit, Method::kOmitNaive, Method::kVse, Method::kCam}) {
      auto batch = batch_similarity(images, captions, method, cfg);
      CHECK(batch.method == method);
      for (std::size_t m = 0; m < 3; ++m)
        for (std::size_t n = 0; n < 3; ++n) {
          double expected = 0.0;
          switch (method) {
            case Method::kOmit:
              expected = partial_similarity(images[m], captions[n], cfg.solver, cfg.tau);
              break;
            case Method::kOmitNaive:
              expected = sinkhorn_similarity(images[m], captions[n], cfg.solver);
              break;
            case Method::kVse:
              expected = vse_similarity(images[m], captions[n]);
              break;
            case Method::kCam:
              expected = cam_similarity(captions[n], images[m], cfg.cam);
              break;
            default:
              break;
          }
          CHECK(batch.values(m, n) == doctest::Approx(expected).epsilon(1e-12));
        }
    }
  }
  SUBCASE("pem ranks by negated Wasserstein distance") {
    auto batch = batch_similarity(images, captions, Method::kPem, cfg);
    const double expected =
        -pem_wasserstein(gaussian_from_fragments(images[1]), gaussian_from_fragments(captions[2]));
    CHECK(batch.values(1, 2) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("threaded batches equal single-threaded ones exactly") {
    auto serial = batch_similarity(images, captions, Method::kOmit, cfg);
    BatchConfig par = cfg;
    par.threads = 4;
    auto threaded = batch_similarity(images, captions, Method::kOmit, par);
    CHECK(max_abs_diff(serial.values, threaded.values) == 0.0);
    CHECK(threaded.row_ids == serial.row_ids);
  }
  SUBCASE("ids are carried from the fragment sets") {
    auto batch = batch_similarity(images, captions, Method::kVse, cfg);
    CHECK(batch.row_ids == std::vector<std::uint32_t>{100, 101, 102});
    CHECK(batch.col_ids == std::vector<std::uint32_t>{200, 201, 202});
  }
  SUBCASE("a failing pair aborts with its ids in the error") {
    auto bad = captions;
    bad[1].global.clear();  // vse will reject the missing global
    try {
      batch_similarity(images, bad, Method::kVse, cfg);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("201") != std::string::npos);
    }
  }
}

TEST_CASE("omit ranks constructed true pairs first") {
  // every true pair shares half its fragments verbatim; off-pairs are random
  Rng rng(431);
  const std::size_t pairs = 12, shared = 4, extra = 4, d = 32;
  std::vector<FragmentSet> images, captions;
  for (std::size_t m = 0; m < pairs; ++m) {
    Matrix shared_rows = random_rows(rng, shared, d);
    Matrix img(shared + extra, d), cap(shared + extra, d);
    for (std::size_t i = 0; i < shared; ++i)
      for (std::size_t k = 0; k < d; ++k) img(i, k) = cap(i, k) = shared_rows(i, k);
    Matrix img_extra = random_rows(rng, extra, d), cap_extra = random_rows(rng, extra, d);
    for (std::size_t i = 0; i < extra; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        img(shared + i, k) = img_extra(i, k);
        cap(shared + i, k) = cap_extra(i, k);
      }
    images.push_back(ingest_set(std::move(img), std::nullopt, static_cast<std::uint32_t>(m)));
    captions.push_back(ingest_set(std::move(cap), std::nullopt, static_cast<std::uint32_t>(m)));
  }
  BatchConfig cfg;  // paper defaults: lambda 0.02, T 3
  auto sims = batch_similarity(images, captions, Method::kOmit, cfg);
  auto report = recall_report(sims, diagonal_truth(pairs));
  CHECK(report.i2t_r1 == doctest::Approx(100.0));
  CHECK(report.t2i_r1 == doctest::Approx(100.0));
}
