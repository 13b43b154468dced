#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "ccs/binary_code.hpp"
#include "ccs/descriptor.hpp"
#include "ccs/hash.hpp"
#include "ccs/pq.hpp"

namespace ccs {

// One indexed 3D point: stable id, position, binary code, PQ code.
struct PointRecord {
  std::uint32_t id = 0;
  Eigen::Vector3f position = Eigen::Vector3f::Zero();
  BinaryCode code;
  PQCode pq;
};

struct SegmentMeta {
  std::uint32_t segment_id = 0;
  std::uint32_t placemark_begin = 0;
  std::uint32_t placemark_end = 0;
  std::uint32_t overlap = 0;
};

// Eight inverted tables addressed by 16-bit sub-code. Bucket entries are row
// indices into the owning model's point array; each row appears exactly once
// per table, in the bucket addressed by its k-th sub-code, ascending.
class CoarseLUT {
 public:
  static constexpr std::size_t kBuckets = std::size_t{1} << kSubCodeBits;

  CoarseLUT() = default;
  static CoarseLUT build(std::span<const PointRecord> points);

  std::span<const std::uint32_t> bucket(int table, std::uint16_t subcode) const {
    const std::uint32_t begin = offsets_[table][subcode];
    const std::uint32_t end = offsets_[table][subcode + 1];
    return {entries_[table].data() + begin, end - begin};
  }

  const std::vector<std::uint32_t>& offsets(int table) const {
    return offsets_[table];
  }
  const std::vector<std::uint32_t>& entries(int table) const {
    return entries_[table];
  }

  friend bool operator==(const CoarseLUT&, const CoarseLUT&) = default;

 private:
  friend class SubModel;
  std::array<std::vector<std::uint32_t>, kSubCodes> offsets_;  // kBuckets+1 each
  std::array<std::vector<std::uint32_t>, kSubCodes> entries_;  // one per point
};

// Mean of the observations, optionally L2-normalized (the default; pooled
// descriptors are compared by Euclidean distance, so scale must not encode
// observation count). Throws on an empty set, a non-finite value, or a
// (near-)zero-norm mean when normalizing.
Descriptor mean_descriptor(std::span<const Descriptor> observations,
                           bool normalize = true);

// A point with the observations it was triangulated from.
struct PointInput {
  std::uint32_t id = 0;
  Eigen::Vector3f position = Eigen::Vector3f::Zero();
  std::vector<Descriptor> observations;
};

// One street segment's searchable point set.
class SubModel {
 public:
  SubModel() = default;

  // Pools observations, hashes and PQ-encodes every point, builds the LUTs.
  // Throws on duplicate ids or empty input.
  static SubModel build(std::span<const PointInput> points,
                        const HashModel& hash, const PQCodebook& codebook,
                        const SegmentMeta& meta, bool normalize_mean = true);

  // Assembles a model from already-encoded records (LUTs are rebuilt).
  static SubModel from_records(std::vector<PointRecord> records,
                               const SegmentMeta& meta, std::uint64_t hash_id,
                               std::uint64_t codebook_id);

  std::vector<std::uint8_t> serialize() const;
  // Validates magic/version/length and that the stored tables are consistent
  // with the stored codes.
  static SubModel deserialize(std::span<const std::uint8_t> bytes);

  std::size_t size() const { return points_.size(); }
  const PointRecord& point(std::uint32_t row) const { return points_[row]; }
  std::span<const PointRecord> points() const { return points_; }
  const CoarseLUT& lut() const { return lut_; }
  const SegmentMeta& meta() const { return meta_; }
  std::uint64_t hash_id() const { return hash_id_; }
  std::uint64_t codebook_id() const { return codebook_id_; }

 private:
  std::vector<PointRecord> points_;
  CoarseLUT lut_;
  SegmentMeta meta_;
  std::uint64_t hash_id_ = 0;
  std::uint64_t codebook_id_ = 0;
};

}  // namespace ccs
