#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "ccs/descriptor.hpp"

namespace ccs {

inline constexpr int kPqSubvectors = 16;
inline constexpr int kPqSubDim = kDescriptorDim / kPqSubvectors;  // 8
inline constexpr int kPqCentroids = 256;

// Product quantizer code: one centroid index per 8-dim sub-vector.
struct PQCode {
  std::array<std::uint8_t, kPqSubvectors> indices{};

  friend bool operator==(const PQCode&, const PQCode&) = default;
};

// Per-query lookup table: entry (s, c) is the squared distance between the
// query's sub-vector s and centroid c of that block.
struct DistanceTable {
  std::array<float, kPqSubvectors * kPqCentroids> entries{};

  float at(int s, int c) const { return entries[s * kPqCentroids + c]; }
};

struct PqTrainingMeta {
  // Per sub-block k-means objective, one value per iteration.
  std::array<std::vector<double>, kPqSubvectors> objective;
};

struct PQCodebook {
  using Block =
      Eigen::Matrix<float, kPqCentroids, kPqSubDim, Eigen::RowMajor>;

  std::array<Block, kPqSubvectors> blocks;
  PqTrainingMeta meta;  // empty when loaded from disk

  // Nearest centroid per sub-vector; exact ties resolve to the lowest index.
  PQCode encode(const Descriptor& d) const;
  Descriptor reconstruct(const PQCode& code) const;
  DistanceTable adc_table(const Descriptor& query) const;
};

// Sum of 16 table lookups == squared distance between the query behind the
// table and reconstruct(code).
double adc_distance(const DistanceTable& table, const PQCode& code);

struct PqTrainOptions {
  int iterations = 25;
  std::uint64_t seed = 0;
};

// Independent k-means per sub-block, seeded with opts.seed + block index.
// Requires at least kPqCentroids finite descriptors.
PQCodebook train_pq(std::span<const Descriptor> descriptors,
                    const PqTrainOptions& opts = {});

}  // namespace ccs
