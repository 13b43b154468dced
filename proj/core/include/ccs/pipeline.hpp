#pragma once

#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ccs/cascade.hpp"
#include "ccs/ransac.hpp"
#include "ccs/retrieval.hpp"

namespace ccs {

// Provides sub-models by id. Implementations throw std::runtime_error when a
// model cannot be produced.
class ModelSource {
 public:
  virtual ~ModelSource() = default;
  virtual std::shared_ptr<const SubModel> load(std::uint32_t model_id) = 0;
};

class InMemoryModelSource final : public ModelSource {
 public:
  void add(std::uint32_t model_id, std::shared_ptr<const SubModel> model);
  std::shared_ptr<const SubModel> load(std::uint32_t model_id) override;

 private:
  std::unordered_map<std::uint32_t, std::shared_ptr<const SubModel>> models_;
};

// Reads model_<id>.ccsm files from a directory.
class DirectoryModelSource final : public ModelSource {
 public:
  explicit DirectoryModelSource(std::filesystem::path dir)
      : dir_(std::move(dir)) {}
  std::shared_ptr<const SubModel> load(std::uint32_t model_id) override;
  std::filesystem::path path_for(std::uint32_t model_id) const;

 private:
  std::filesystem::path dir_;
};

// LRU decorator bounding how many sub-models stay resident.
class CachingModelSource final : public ModelSource {
 public:
  explicit CachingModelSource(ModelSource& inner, std::size_t capacity = 4);
  std::shared_ptr<const SubModel> load(std::uint32_t model_id) override;
  std::size_t resident() const { return lru_.size(); }

 private:
  ModelSource& inner_;
  std::size_t capacity_;
  std::list<std::pair<std::uint32_t, std::shared_ptr<const SubModel>>> lru_;
};

struct LocalizeConfig {
  CascadeParams cascade;
  RansacConfig ransac;
  int n_t = 20;                  // retrieved images
  int max_models = 4;            // candidate sub-models per query
  std::uint32_t min_inliers = 12;  // registration threshold
  bool match_models_in_parallel = false;
};

struct ModelMatchStats {
  std::uint32_t model_id = 0;
  std::uint32_t strict = 0;        // N_h
  std::uint32_t verification = 0;  // N_q
  std::uint32_t processed = 0;     // queries run through refine+precise
  std::optional<std::uint32_t> ransac_inliers;
};

struct StageTimings {
  double retrieval_s = 0.0;
  double load_s = 0.0;
  double match_s = 0.0;
  double ransac_s = 0.0;
  double total_s = 0.0;
};

struct LocalizationResult {
  bool registered = false;
  std::optional<std::uint32_t> model_id;
  PoseResult pose;
  std::vector<ModelMatchStats> per_model;
  StageTimings timings;
  std::string failure_reason;  // empty when registered
};

// Full query pipeline: retrieve candidate sub-models, run the prioritized
// cascade against each, then pose-verify starting from the model with the
// most strict correspondences (ties resolved by inlier count, then lowest
// model id) and fall back to the remaining candidates until one registers.
LocalizationResult localize(std::span<const QueryFeature> features,
                            const HashModel& hash, const PQCodebook& codebook,
                            const SegmentIndex& index, ModelSource& models,
                            const LocalizeConfig& config = {});

}  // namespace ccs
