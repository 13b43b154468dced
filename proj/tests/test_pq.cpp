#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ccs/kmeans.hpp"
#include "ccs/pq.hpp"
#include "ccs/synthetic.hpp"
#include "testutil.hpp"

using namespace ccs;

namespace {

// Mirrors the encoder's distance convention: double accumulation over the
// raw float differences.
double sub_distance2(const PQCodebook& cb, int block, int centroid,
                     const Descriptor& d) {
  double acc = 0.0;
  for (int j = 0; j < kPqSubDim; ++j) {
    const double diff = static_cast<double>(d[block * kPqSubDim + j]) -
                        static_cast<double>(cb.blocks[block](centroid, j));
    acc += diff * diff;
  }
  return acc;
}

}  // namespace

TEST_CASE("kmeans result is internally consistent") {
  std::mt19937_64 rng(3);
  std::normal_distribution<float> g(0.0f, 1.0f);
  Eigen::MatrixXf pts(700, 8);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = g(rng);

  const auto res = detail::kmeans(pts, 16, 15, 1);
  REQUIRE(res.centroids.rows() == 16);
  REQUIRE(res.centroids.cols() == 8);
  REQUIRE(res.assignment.size() == 700);
  REQUIRE_FALSE(res.objective.empty());

  // Assigned centroid is (near-)optimal; ties and float GEMM wiggle allowed.
  double recomputed = 0.0;
  for (int i = 0; i < 700; ++i) {
    const int a = res.assignment[i];
    REQUIRE(a >= 0);
    REQUIRE(a < 16);
    const float da = (pts.row(i) - res.centroids.row(a)).squaredNorm();
    float best = std::numeric_limits<float>::max();
    for (int c = 0; c < 16; ++c) {
      best = std::min(best,
                      (pts.row(i) - res.centroids.row(c)).squaredNorm());
    }
    CHECK(da <= best + 1e-3f * (1.0f + best));
    recomputed += da;
  }
  CHECK(res.objective.back() == doctest::Approx(recomputed).epsilon(1e-6));

  // Lloyd never worsens the objective.
  for (std::size_t i = 1; i < res.objective.size(); ++i) {
    CHECK(res.objective[i] <= res.objective[i - 1] + 1e-6 * res.objective[0]);
  }
}

TEST_CASE("kmeans survives heavy duplication via empty-cluster reseeding") {
  Eigen::MatrixXf pts(300, 8);
  pts.setZero();
  for (int i = 0; i < 40; ++i) pts.row(i).setConstant(float(i));
  const auto res = detail::kmeans(pts, 64, 10, 7);
  CHECK(res.centroids.allFinite());
  for (int a : res.assignment) {
    CHECK(a >= 0);
    CHECK(a < 64);
  }
  CHECK(std::isfinite(res.objective.back()));
}

TEST_CASE("training rejects bad input") {
  auto descs = testutil::random_descriptors(200, 5);
  CHECK_THROWS_AS(train_pq(descs), std::invalid_argument);
  descs = testutil::random_descriptors(300, 5);
  descs[7][0] = std::numeric_limits<float>::infinity();
  CHECK_THROWS_AS(train_pq(descs), std::invalid_argument);
}

TEST_CASE("training is deterministic per seed") {
  const auto descs = testutil::random_descriptors(512, 13);
  PqTrainOptions opts;
  opts.iterations = 5;
  opts.seed = 3;
  const PQCodebook a = train_pq(descs, opts);
  const PQCodebook b = train_pq(descs, opts);
  for (int s = 0; s < kPqSubvectors; ++s) {
    CHECK((a.blocks[s].array() == b.blocks[s].array()).all());
  }
}

TEST_CASE("a dataset of exactly 256 sub-vector patterns quantizes losslessly") {
  std::mt19937_64 rng(17);
  std::normal_distribution<float> g(0.0f, 1.0f);
  Eigen::Matrix<float, 256, kPqSubDim> patterns;
  for (Eigen::Index i = 0; i < patterns.size(); ++i) {
    patterns.data()[i] = g(rng);
  }
  std::vector<Descriptor> descs(512);
  for (int i = 0; i < 512; ++i) {
    for (int s = 0; s < kPqSubvectors; ++s) {
      descs[i].segment<kPqSubDim>(s * kPqSubDim) = patterns.row(i % 256);
    }
  }
  const PQCodebook cb = train_pq(descs);
  for (int i = 0; i < 512; i += 37) {
    const Descriptor rec = cb.reconstruct(cb.encode(descs[i]));
    CHECK((rec - descs[i]).cwiseAbs().maxCoeff() <= 1e-6f);
  }
}

TEST_CASE("encode picks the exhaustively nearest centroid, ties to lowest") {
  const auto train = testutil::random_descriptors(400, 23);
  const PQCodebook cb = train_pq(train);
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const Descriptor d = testutil::random_descriptor(rng);
    const PQCode code = cb.encode(d);
    for (int s = 0; s < kPqSubvectors; ++s) {
      int best = 0;
      double best_d = sub_distance2(cb, s, 0, d);
      for (int c = 1; c < kPqCentroids; ++c) {
        const double dc = sub_distance2(cb, s, c, d);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      CHECK(code.indices[s] == best);
    }
    CHECK(cb.encode(d) == code);
  }
}

TEST_CASE("a concatenation of centroids encodes to exactly those indices") {
  const auto train = testutil::random_descriptors(400, 29);
  const PQCodebook cb = train_pq(train);
  Descriptor d;
  PQCode expected;
  for (int s = 0; s < kPqSubvectors; ++s) {
    const int c = (s * 37) % kPqCentroids;
    expected.indices[s] = static_cast<std::uint8_t>(c);
    d.segment<kPqSubDim>(s * kPqSubDim) = cb.blocks[s].row(c);
  }
  CHECK(cb.encode(d) == expected);
  CHECK((cb.reconstruct(expected) - d).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("adc table entries equal squared sub-vector distances") {
  const auto train = testutil::random_descriptors(400, 31);
  const PQCodebook cb = train_pq(train);
  std::mt19937_64 rng(33);
  const Descriptor q = testutil::random_descriptor(rng);
  const DistanceTable table = cb.adc_table(q);
  for (int s = 0; s < kPqSubvectors; ++s) {
    for (int c = 0; c < kPqCentroids; ++c) {
      CHECK(table.at(s, c) >= 0.0f);
      CHECK(table.at(s, c) ==
            static_cast<float>(sub_distance2(cb, s, c, q)));
    }
  }

  // A query equal to a centroid has a zero entry there.
  Descriptor centroid_query = q;
  centroid_query.segment<kPqSubDim>(0) = cb.blocks[0].row(42);
  CHECK(cb.adc_table(centroid_query).at(0, 42) == 0.0f);
}

TEST_CASE("adc_distance equals the direct reconstructed distance") {
  const auto train = testutil::random_descriptors(500, 37);
  const PQCodebook cb = train_pq(train);
  std::mt19937_64 rng(38);
  for (int trial = 0; trial < 2000; ++trial) {
    const Descriptor q = testutil::random_descriptor(rng);
    const Descriptor x = testutil::random_descriptor(rng);
    const PQCode code = cb.encode(x);
    const double adc = adc_distance(cb.adc_table(q), code);
    const double direct =
        (q.cast<double>() - cb.reconstruct(code).cast<double>()).squaredNorm();
    CHECK(std::abs(adc - direct) <= 1e-5 * std::max(1.0, direct));
  }
}

// Regression baseline for codebook quality on descriptor-like data.
TEST_CASE("mean reconstruction error on low-dimensional unit descriptors") {
  const auto train = synth::sample_descriptors(2048, 20, 41, 0.05f);
  const auto fresh = synth::sample_descriptors(1000, 20, 43, 0.05f);
  const PQCodebook cb = train_pq(train);
  double total = 0.0;
  for (const Descriptor& d : fresh) {
    total += (d - cb.reconstruct(cb.encode(d))).norm();
  }
  const double mean_err = total / fresh.size();
  MESSAGE("mean PQ reconstruction error (unit-norm input): ", mean_err);
  CHECK(mean_err < 0.7);
}
