#include "ccs/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <stdexcept>

#include "ccs/io.hpp"

namespace ccs {

void InMemoryModelSource::add(std::uint32_t model_id,
                              std::shared_ptr<const SubModel> model) {
  models_[model_id] = std::move(model);
}

std::shared_ptr<const SubModel> InMemoryModelSource::load(
    std::uint32_t model_id) {
  const auto it = models_.find(model_id);
  if (it == models_.end()) {
    throw std::runtime_error("model " + std::to_string(model_id) +
                             " not available");
  }
  return it->second;
}

std::filesystem::path DirectoryModelSource::path_for(
    std::uint32_t model_id) const {
  return dir_ / ("model_" + std::to_string(model_id) + ".ccsm");
}

std::shared_ptr<const SubModel> DirectoryModelSource::load(
    std::uint32_t model_id) {
  const auto path = path_for(model_id);
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("model file missing: " + path.string());
  }
  const auto bytes = io::read_file(path);
  return std::make_shared<const SubModel>(SubModel::deserialize(bytes));
}

CachingModelSource::CachingModelSource(ModelSource& inner, std::size_t capacity)
    : inner_(inner), capacity_(capacity == 0 ? 1 : capacity) {}

std::shared_ptr<const SubModel> CachingModelSource::load(
    std::uint32_t model_id) {
  for (auto it = lru_.begin(); it != lru_.end(); ++it) {
    if (it->first == model_id) {
      lru_.splice(lru_.begin(), lru_, it);
      return lru_.front().second;
    }
  }
  auto model = inner_.load(model_id);
  lru_.emplace_front(model_id, model);
  if (lru_.size() > capacity_) lru_.pop_back();
  return model;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point& prev) {
  const auto now = Clock::now();
  const double s = std::chrono::duration<double>(now - prev).count();
  prev = now;
  return s;
}

}  // namespace

LocalizationResult localize(std::span<const QueryFeature> features,
                            const HashModel& hash, const PQCodebook& codebook,
                            const SegmentIndex& index, ModelSource& models,
                            const LocalizeConfig& config) {
  if (features.empty()) {
    throw std::invalid_argument("localize: query has no features");
  }

  LocalizationResult result;
  const auto t_start = Clock::now();
  auto t_prev = t_start;

  std::vector<Descriptor> descriptors;
  descriptors.reserve(features.size());
  for (const QueryFeature& f : features) descriptors.push_back(f.descriptor);
  const Descriptor global = mean_descriptor(descriptors, /*normalize=*/true);
  const auto ranked = index.retrieve(global, config.n_t);
  const auto candidates = index.candidate_models(ranked, config.max_models);
  result.timings.retrieval_s = seconds_since(t_prev);

  if (candidates.empty()) {
    result.failure_reason = "no candidate models";
    result.timings.total_s =
        std::chrono::duration<double>(Clock::now() - t_start).count();
    return result;
  }

  const std::uint64_t expect_hash = hash_model_id(hash);
  const std::uint64_t expect_cb = codebook_id(codebook);

  std::vector<std::shared_ptr<const SubModel>> loaded;
  for (std::uint32_t model_id : candidates) {
    auto model = models.load(model_id);
    if (model->hash_id() != expect_hash || model->codebook_id() != expect_cb) {
      throw std::runtime_error("model " + std::to_string(model_id) +
                               " was built with a different hash model or "
                               "codebook");
    }
    loaded.push_back(std::move(model));
  }
  result.timings.load_s = seconds_since(t_prev);

  std::vector<CorrespondenceSet> matched(candidates.size());
  if (config.match_models_in_parallel && candidates.size() > 1) {
    std::vector<std::future<CorrespondenceSet>> futures;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      futures.push_back(std::async(std::launch::async, [&, i] {
        return prioritized_match(*loaded[i], features, hash, codebook,
                                 config.cascade);
      }));
    }
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      matched[i] = futures[i].get();
    }
  } else {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      matched[i] = prioritized_match(*loaded[i], features, hash, codebook,
                                     config.cascade);
    }
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ModelMatchStats stats;
    stats.model_id = candidates[i];
    stats.strict = static_cast<std::uint32_t>(matched[i].n_h());
    stats.verification = static_cast<std::uint32_t>(matched[i].n_q());
    stats.processed = matched[i].processed_queries;
    result.per_model.push_back(stats);
  }
  result.timings.match_s = seconds_since(t_prev);

  // Pose verification order: strict count descending, then model id.
  std::vector<std::size_t> order(candidates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (result.per_model[a].strict != result.per_model[b].strict) {
      return result.per_model[a].strict > result.per_model[b].strict;
    }
    return candidates[a] < candidates[b];
  });

  PoseResult best_pose;
  std::optional<std::uint32_t> best_model;
  long best_inliers = -1;
  std::size_t cursor = 0;
  while (cursor < order.size()) {
    // Models tied on strict count are all pose-verified; the best inlier
    // count (then the lowest model id, via the verification order) wins.
    std::size_t tie_end = cursor + 1;
    while (tie_end < order.size() &&
           result.per_model[order[tie_end]].strict ==
               result.per_model[order[cursor]].strict) {
      ++tie_end;
    }
    for (std::size_t j = cursor; j < tie_end; ++j) {
      const std::size_t i = order[j];
      PoseResult pose = ransac_1m(matched[i], config.ransac);
      result.per_model[i].ransac_inliers =
          static_cast<std::uint32_t>(pose.inliers.size());
      if (static_cast<long>(pose.inliers.size()) > best_inliers) {
        best_inliers = static_cast<long>(pose.inliers.size());
        best_pose = std::move(pose);
        best_model = candidates[i];
      }
    }
    if (best_inliers >= static_cast<long>(config.min_inliers)) break;
    cursor = tie_end;  // fall back to the next strict-count group
  }

  if (best_inliers >= static_cast<long>(config.min_inliers) &&
      best_pose.valid) {
    result.registered = true;
    result.model_id = best_model;
    result.pose = std::move(best_pose);
  } else {
    result.model_id = best_model;
    if (best_inliers >= 0) result.pose = std::move(best_pose);
    result.failure_reason = "insufficient inliers";
  }
  result.timings.ransac_s = seconds_since(t_prev);
  result.timings.total_s =
      std::chrono::duration<double>(Clock::now() - t_start).count();
  return result;
}

}  // namespace ccs
