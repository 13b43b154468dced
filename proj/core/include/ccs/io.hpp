#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ccs/errors.hpp"
#include "ccs/features.hpp"
#include "ccs/hash.hpp"
#include "ccs/pq.hpp"

namespace ccs::io {

// All serialized formats are little-endian regardless of host order.

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void bytes(std::span<const std::uint8_t> b);
  void magic(const char (&m)[5]);

  const std::vector<std::uint8_t>& data() const { return buf_; }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

// Throws ParseError on any read past the end.
class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  void raw(std::uint8_t* out, std::size_t n);
  void expect_magic(const char (&m)[5]);
  void require_done() const;
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace ccs::io

namespace ccs {

// Hash model file: magic "CCSH", version byte, 128-float mean, then the
// 128x128 projection in row-major order, all 32-bit little-endian floats.
std::vector<std::uint8_t> serialize_hash_model(const HashModel& m);
HashModel deserialize_hash_model(std::span<const std::uint8_t> bytes);
std::uint64_t hash_model_id(const HashModel& m);

// Codebook file: magic "CCSQ", version byte, then 16x256x8 32-bit
// little-endian floats (block by block, centroid rows in order).
std::vector<std::uint8_t> serialize_codebook(const PQCodebook& cb);
PQCodebook deserialize_codebook(std::span<const std::uint8_t> bytes);
std::uint64_t codebook_id(const PQCodebook& cb);

// Query features file: magic "CCSF", feature count, then per feature a
// 2-float pixel and a 128-float descriptor.
std::vector<std::uint8_t> serialize_query_features(
    std::span<const QueryFeature> features);
std::vector<QueryFeature> deserialize_query_features(
    std::span<const std::uint8_t> bytes);

}  // namespace ccs
