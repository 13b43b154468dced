#include "ccs/submodel.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

#include "ccs/io.hpp"

namespace ccs {

CoarseLUT CoarseLUT::build(std::span<const PointRecord> points) {
  CoarseLUT lut;
  const auto n = static_cast<std::uint32_t>(points.size());
  for (int k = 0; k < kSubCodes; ++k) {
    auto& offsets = lut.offsets_[k];
    auto& entries = lut.entries_[k];
    offsets.assign(kBuckets + 1, 0);
    entries.resize(n);
    for (const PointRecord& p : points) ++offsets[p.code.subcode(k) + 1];
    for (std::size_t b = 1; b <= kBuckets; ++b) offsets[b] += offsets[b - 1];
    std::vector<std::uint32_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::uint32_t row = 0; row < n; ++row) {
      entries[cursor[points[row].code.subcode(k)]++] = row;
    }
  }
  return lut;
}

Descriptor mean_descriptor(std::span<const Descriptor> observations,
                           bool normalize) {
  if (observations.empty()) {
    throw std::invalid_argument("mean_descriptor: no observations");
  }
  Eigen::Matrix<double, kDescriptorDim, 1> acc =
      Eigen::Matrix<double, kDescriptorDim, 1>::Zero();
  for (const Descriptor& d : observations) {
    if (!is_finite(d)) {
      throw std::invalid_argument("mean_descriptor: non-finite observation");
    }
    acc += d.cast<double>();
  }
  acc /= double(observations.size());
  if (normalize) {
    const double norm = acc.norm();
    if (norm < 1e-12) {
      throw std::invalid_argument(
          "mean_descriptor: zero-norm mean cannot be normalized");
    }
    acc /= norm;
  }
  return acc.cast<float>();
}

SubModel SubModel::build(std::span<const PointInput> points,
                         const HashModel& hash, const PQCodebook& codebook,
                         const SegmentMeta& meta, bool normalize_mean) {
  if (points.empty()) throw std::invalid_argument("SubModel::build: no points");
  std::vector<PointRecord> records;
  records.reserve(points.size());
  for (const PointInput& in : points) {
    PointRecord rec;
    rec.id = in.id;
    rec.position = in.position;
    const Descriptor mean = mean_descriptor(in.observations, normalize_mean);
    rec.code = hash.hash(mean);
    rec.pq = codebook.encode(mean);
    records.push_back(rec);
  }
  return from_records(std::move(records), meta, hash_model_id(hash),
                      ccs::codebook_id(codebook));
}

SubModel SubModel::from_records(std::vector<PointRecord> records,
                                const SegmentMeta& meta, std::uint64_t hash_id,
                                std::uint64_t codebook_id) {
  if (records.empty()) {
    throw std::invalid_argument("SubModel::from_records: no points");
  }
  std::unordered_set<std::uint32_t> seen;
  seen.reserve(records.size());
  for (const PointRecord& r : records) {
    if (!seen.insert(r.id).second) {
      throw std::invalid_argument("SubModel::from_records: duplicate point id " +
                                  std::to_string(r.id));
    }
  }
  SubModel model;
  model.points_ = std::move(records);
  model.lut_ = CoarseLUT::build(model.points_);
  model.meta_ = meta;
  model.hash_id_ = hash_id;
  model.codebook_id_ = codebook_id;
  return model;
}

namespace {
constexpr std::uint8_t kModelVersion = 1;
}

std::vector<std::uint8_t> SubModel::serialize() const {
  io::Writer w;
  w.magic("CCSM");
  w.u8(kModelVersion);
  w.u32(static_cast<std::uint32_t>(points_.size()));
  w.u32(meta_.segment_id);
  w.u32(meta_.placemark_begin);
  w.u32(meta_.placemark_end);
  w.u32(meta_.overlap);
  w.u64(hash_id_);
  w.u64(codebook_id_);
  for (int k = 0; k < kSubCodes; ++k) {
    for (std::uint32_t off : lut_.offsets(k)) w.u32(off);
    for (std::uint32_t row : lut_.entries(k)) w.u32(row);
  }
  for (const PointRecord& p : points_) w.u32(p.id);
  for (const PointRecord& p : points_) {
    w.f32(p.position.x());
    w.f32(p.position.y());
    w.f32(p.position.z());
  }
  for (const PointRecord& p : points_) {
    w.u64(p.code.words[0]);
    w.u64(p.code.words[1]);
  }
  for (const PointRecord& p : points_) {
    for (std::uint8_t idx : p.pq.indices) w.u8(idx);
  }
  return w.take();
}

SubModel SubModel::deserialize(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes);
  r.expect_magic("CCSM");
  if (r.u8() != kModelVersion) throw ParseError("unsupported CCSM version");
  const std::uint32_t n = r.u32();
  if (n == 0) throw ParseError("CCSM: empty model");

  SubModel model;
  model.meta_.segment_id = r.u32();
  model.meta_.placemark_begin = r.u32();
  model.meta_.placemark_end = r.u32();
  model.meta_.overlap = r.u32();
  model.hash_id_ = r.u64();
  model.codebook_id_ = r.u64();

  for (int k = 0; k < kSubCodes; ++k) {
    auto& offsets = model.lut_.offsets_[k];
    auto& entries = model.lut_.entries_[k];
    offsets.resize(CoarseLUT::kBuckets + 1);
    for (auto& off : offsets) off = r.u32();
    if (offsets.front() != 0 || offsets.back() != n ||
        !std::is_sorted(offsets.begin(), offsets.end())) {
      throw ParseError("CCSM: malformed bucket offsets");
    }
    entries.resize(n);
    for (auto& row : entries) {
      row = r.u32();
      if (row >= n) throw ParseError("CCSM: bucket entry out of range");
    }
  }

  model.points_.resize(n);
  for (PointRecord& p : model.points_) p.id = r.u32();
  for (PointRecord& p : model.points_) {
    p.position.x() = r.f32();
    p.position.y() = r.f32();
    p.position.z() = r.f32();
  }
  for (PointRecord& p : model.points_) {
    p.code.words[0] = r.u64();
    p.code.words[1] = r.u64();
  }
  for (PointRecord& p : model.points_) {
    for (std::uint8_t& idx : p.pq.indices) idx = r.u8();
  }
  r.require_done();

  // The tables are redundant with the codes; reject files where they drifted.
  for (int k = 0; k < kSubCodes; ++k) {
    for (std::uint32_t row = 0; row < n; ++row) {
      const auto bucket = model.lut_.bucket(k, model.points_[row].code.subcode(k));
      if (!std::binary_search(bucket.begin(), bucket.end(), row)) {
        throw ParseError("CCSM: bucket tables inconsistent with codes");
      }
    }
  }
  return model;
}

}  // namespace ccs
