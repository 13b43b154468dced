#include "ccs/retrieval.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>
#include <unordered_set>

#include "ccs/io.hpp"
#include "ccs/submodel.hpp"

namespace ccs {

void SegmentIndex::rebuild_id_map() {
  id_to_index_.clear();
  id_to_index_.reserve(images_.size());
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(images_.size());
       ++i) {
    id_to_index_.emplace_back(images_[i].id, i);
  }
  std::sort(id_to_index_.begin(), id_to_index_.end());
}

SegmentIndex SegmentIndex::build(std::span<const ImageInput> images) {
  SegmentIndex index;
  std::unordered_set<std::uint32_t> seen;
  for (const ImageInput& in : images) {
    if (in.descriptors.empty()) {
      std::fprintf(stderr, "SegmentIndex: image %u has no features, skipped\n",
                   in.id);
      continue;
    }
    if (in.model_ids.empty()) {
      throw std::invalid_argument("SegmentIndex: image " +
                                  std::to_string(in.id) + " maps to no model");
    }
    if (!seen.insert(in.id).second) {
      throw std::invalid_argument("SegmentIndex: duplicate image id " +
                                  std::to_string(in.id));
    }
    IndexedImage img;
    img.id = in.id;
    img.model_ids = in.model_ids;
    img.global = mean_descriptor(in.descriptors, /*normalize=*/true);
    index.images_.push_back(std::move(img));
  }
  index.rebuild_id_map();
  return index;
}

std::vector<std::uint32_t> SegmentIndex::retrieve(const Descriptor& query,
                                                  int n_t) const {
  if (n_t < 1) throw std::invalid_argument("retrieve: n_t must be >= 1");
  struct Scored {
    double d2;
    std::uint32_t id;
  };
  std::vector<Scored> scored;
  scored.reserve(images_.size());
  if (compressed()) {
    const DistanceTable table = codebook_.adc_table(query);
    for (std::size_t i = 0; i < images_.size(); ++i) {
      scored.push_back({adc_distance(table, codes_[i]), images_[i].id});
    }
  } else {
    for (const IndexedImage& img : images_) {
      scored.push_back(
          {(img.global - query).cast<double>().squaredNorm(), img.id});
    }
  }
  const std::size_t keep = std::min<std::size_t>(n_t, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + keep, scored.end(),
                    [](const Scored& a, const Scored& b) {
                      return a.d2 != b.d2 ? a.d2 < b.d2 : a.id < b.id;
                    });
  std::vector<std::uint32_t> ids(keep);
  for (std::size_t i = 0; i < keep; ++i) ids[i] = scored[i].id;
  return ids;
}

std::vector<std::uint32_t> SegmentIndex::candidate_models(
    std::span<const std::uint32_t> ranked_image_ids, int max_models) const {
  std::vector<std::uint32_t> models;
  for (std::uint32_t image_id : ranked_image_ids) {
    const auto it = std::lower_bound(
        id_to_index_.begin(), id_to_index_.end(), image_id,
        [](const auto& entry, std::uint32_t key) { return entry.first < key; });
    if (it == id_to_index_.end() || it->first != image_id) {
      throw std::invalid_argument("candidate_models: unknown image id " +
                                  std::to_string(image_id));
    }
    for (std::uint32_t model : images_[it->second].model_ids) {
      if (std::find(models.begin(), models.end(), model) == models.end()) {
        models.push_back(model);
        if (models.size() == static_cast<std::size_t>(max_models)) {
          return models;
        }
      }
    }
  }
  return models;
}

void SegmentIndex::compress(const PQCodebook& codebook) {
  codebook_ = codebook;
  codes_.resize(images_.size());
  for (std::size_t i = 0; i < images_.size(); ++i) {
    codes_[i] = codebook_.encode(images_[i].global);
  }
}

namespace {
constexpr std::uint8_t kIndexVersion = 1;
}

std::vector<std::uint8_t> SegmentIndex::serialize() const {
  io::Writer w;
  w.magic("CCSI");
  w.u8(kIndexVersion);
  w.u32(static_cast<std::uint32_t>(images_.size()));
  for (const IndexedImage& img : images_) {
    w.u32(img.id);
    w.u32(static_cast<std::uint32_t>(img.model_ids.size()));
    for (std::uint32_t m : img.model_ids) w.u32(m);
    for (int i = 0; i < kDescriptorDim; ++i) w.f32(img.global[i]);
  }
  return w.take();
}

SegmentIndex SegmentIndex::deserialize(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes);
  r.expect_magic("CCSI");
  if (r.u8() != kIndexVersion) throw ParseError("unsupported CCSI version");
  SegmentIndex index;
  const std::uint32_t count = r.u32();
  index.images_.resize(count);
  for (IndexedImage& img : index.images_) {
    img.id = r.u32();
    const std::uint32_t n_models = r.u32();
    if (n_models == 0) throw ParseError("CCSI: image maps to no model");
    img.model_ids.resize(n_models);
    for (std::uint32_t& m : img.model_ids) m = r.u32();
    for (int i = 0; i < kDescriptorDim; ++i) img.global[i] = r.f32();
  }
  r.require_done();
  index.rebuild_id_map();
  return index;
}

}  // namespace ccs
