#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ccs/descriptor.hpp"
#include "ccs/pq.hpp"

namespace ccs {

struct ImageInput {
  std::uint32_t id = 0;
  std::vector<std::uint32_t> model_ids;  // sub-models observing this image
  std::vector<Descriptor> descriptors;
};

struct IndexedImage {
  std::uint32_t id = 0;
  std::vector<std::uint32_t> model_ids;
  Descriptor global = Descriptor::Zero();  // normalized pooled descriptor
};

// Whole-image retrieval over pooled local descriptors, used to shortlist
// sub-models before correspondence search.
class SegmentIndex {
 public:
  SegmentIndex() = default;

  // Pools each image's descriptors into a unit-norm global descriptor.
  // Images without features are skipped with a warning; duplicate image ids
  // or an image without models are errors.
  static SegmentIndex build(std::span<const ImageInput> images);

  // Ids of the n_t nearest images by Euclidean distance between global
  // descriptors (asymmetric PQ distance when compressed), ties by ascending
  // image id.
  std::vector<std::uint32_t> retrieve(const Descriptor& query,
                                      int n_t = 20) const;

  // Model ids of the ranked images, ordered by first appearance, truncated.
  std::vector<std::uint32_t> candidate_models(
      std::span<const std::uint32_t> ranked_image_ids,
      int max_models = 4) const;

  // Replaces stored descriptors by PQ codes for distance computation.
  // In-memory only; serialization always writes the raw descriptors.
  void compress(const PQCodebook& codebook);
  bool compressed() const { return !codes_.empty(); }

  std::span<const IndexedImage> images() const { return images_; }

  std::vector<std::uint8_t> serialize() const;
  static SegmentIndex deserialize(std::span<const std::uint8_t> bytes);

 private:
  std::vector<IndexedImage> images_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> id_to_index_;  // sorted
  std::vector<PQCode> codes_;
  PQCodebook codebook_;

  void rebuild_id_map();
};

}  // namespace ccs
