#include "ccs/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace ccs::io {

void Writer::u16(std::uint16_t v) {
  buf_.push_back(static_cast<std::uint8_t>(v));
  buf_.push_back(static_cast<std::uint8_t>(v >> 8));
}

void Writer::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void Writer::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void Writer::bytes(std::span<const std::uint8_t> b) {
  buf_.insert(buf_.end(), b.begin(), b.end());
}

void Writer::magic(const char (&m)[5]) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(m[i]));
}

std::uint8_t Reader::u8() {
  if (pos_ + 1 > data_.size()) throw ParseError("truncated input");
  return data_[pos_++];
}

std::uint16_t Reader::u16() {
  if (pos_ + 2 > data_.size()) throw ParseError("truncated input");
  std::uint16_t v = static_cast<std::uint16_t>(data_[pos_]) |
                    static_cast<std::uint16_t>(data_[pos_ + 1]) << 8;
  pos_ += 2;
  return v;
}

std::uint32_t Reader::u32() {
  if (pos_ + 4 > data_.size()) throw ParseError("truncated input");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_ + i]} << (8 * i);
  pos_ += 4;
  return v;
}

std::uint64_t Reader::u64() {
  if (pos_ + 8 > data_.size()) throw ParseError("truncated input");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_ + i]} << (8 * i);
  pos_ += 8;
  return v;
}

float Reader::f32() { return std::bit_cast<float>(u32()); }

void Reader::raw(std::uint8_t* out, std::size_t n) {
  if (pos_ + n > data_.size()) throw ParseError("truncated input");
  std::memcpy(out, data_.data() + pos_, n);
  pos_ += n;
}

void Reader::expect_magic(const char (&m)[5]) {
  if (pos_ + 4 > data_.size()) throw ParseError("truncated input");
  for (int i = 0; i < 4; ++i) {
    if (data_[pos_ + i] != static_cast<std::uint8_t>(m[i])) {
      throw ParseError(std::string("bad magic, expected ") + m);
    }
  }
  pos_ += 4;
}

void Reader::require_done() const {
  if (pos_ != data_.size()) throw ParseError("trailing bytes after payload");
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write: " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  const auto size = in.tellg();
  in.seekg(0);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!in) throw std::runtime_error("short read: " + path.string());
  return bytes;
}

}  // namespace ccs::io

namespace ccs {

namespace {
constexpr std::uint8_t kFormatVersion = 1;
}

std::vector<std::uint8_t> serialize_hash_model(const HashModel& m) {
  io::Writer w;
  w.magic("CCSH");
  w.u8(kFormatVersion);
  for (int i = 0; i < kDescriptorDim; ++i) w.f32(m.mean[i]);
  for (int r = 0; r < kDescriptorDim; ++r)
    for (int c = 0; c < kDescriptorDim; ++c) w.f32(m.projection(r, c));
  return w.take();
}

HashModel deserialize_hash_model(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes);
  r.expect_magic("CCSH");
  if (r.u8() != kFormatVersion) throw ParseError("unsupported CCSH version");
  HashModel m;
  for (int i = 0; i < kDescriptorDim; ++i) m.mean[i] = r.f32();
  for (int row = 0; row < kDescriptorDim; ++row)
    for (int col = 0; col < kDescriptorDim; ++col) m.projection(row, col) = r.f32();
  r.require_done();
  return m;
}

std::uint64_t hash_model_id(const HashModel& m) {
  return io::fnv1a64(serialize_hash_model(m));
}

std::vector<std::uint8_t> serialize_codebook(const PQCodebook& cb) {
  io::Writer w;
  w.magic("CCSQ");
  w.u8(kFormatVersion);
  for (int s = 0; s < kPqSubvectors; ++s)
    for (int c = 0; c < kPqCentroids; ++c)
      for (int j = 0; j < kPqSubDim; ++j) w.f32(cb.blocks[s](c, j));
  return w.take();
}

PQCodebook deserialize_codebook(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes);
  r.expect_magic("CCSQ");
  if (r.u8() != kFormatVersion) throw ParseError("unsupported CCSQ version");
  PQCodebook cb;
  for (int s = 0; s < kPqSubvectors; ++s)
    for (int c = 0; c < kPqCentroids; ++c)
      for (int j = 0; j < kPqSubDim; ++j) cb.blocks[s](c, j) = r.f32();
  r.require_done();
  return cb;
}

std::uint64_t codebook_id(const PQCodebook& cb) {
  return io::fnv1a64(serialize_codebook(cb));
}

std::vector<std::uint8_t> serialize_query_features(
    std::span<const QueryFeature> features) {
  io::Writer w;
  w.magic("CCSF");
  w.u32(static_cast<std::uint32_t>(features.size()));
  for (const QueryFeature& f : features) {
    w.f32(f.pixel.x());
    w.f32(f.pixel.y());
    for (int i = 0; i < kDescriptorDim; ++i) w.f32(f.descriptor[i]);
  }
  return w.take();
}

std::vector<QueryFeature> deserialize_query_features(
    std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes);
  r.expect_magic("CCSF");
  const std::uint32_t count = r.u32();
  std::vector<QueryFeature> features(count);
  for (QueryFeature& f : features) {
    f.pixel.x() = r.f32();
    f.pixel.y() = r.f32();
    for (int i = 0; i < kDescriptorDim; ++i) f.descriptor[i] = r.f32();
  }
  r.require_done();
  return features;
}

}  // namespace ccs
