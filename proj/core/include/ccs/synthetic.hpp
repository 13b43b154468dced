#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ccs/pipeline.hpp"

namespace ccs::synth {

// Repeated structure: groups of points sharing a near-identical descriptor,
// the way window grids repeat along a facade.
struct RepetitionSpec {
  std::uint32_t groups = 0;
  std::uint32_t group_size = 4;
  float jitter = 0.05f;  // perturbation between group members
};

enum class QueryRegion { kInterior, kOverlap, kUniform };

// Street scene layout: points on facade planes along a straight street of
// length ~100 m, partitioned into placemark cells; each segment covers
// `placemarks_per_segment` cells and shares `overlap_placemarks` with its
// neighbor. Descriptors are unit vectors with low intrinsic dimension.
struct SceneSpec {
  std::uint64_t seed = 1;
  std::uint32_t segments = 4;
  std::uint32_t points_per_segment = 500;
  std::uint32_t placemarks_per_segment = 8;
  std::uint32_t overlap_placemarks = 2;
  std::uint32_t queries = 50;
  std::uint32_t features_per_query = 120;
  std::uint32_t references_per_placemark = 3;
  std::uint32_t min_visible_points = 20;
  float descriptor_noise = 0.02f;  // query descriptor perturbation norm
  float pixel_noise = 0.5f;        // query keypoint noise, pixels
  int latent_dim = 20;
  RepetitionSpec repetition;
  QueryRegion query_region = QueryRegion::kInterior;
  std::uint32_t training_pool = 2048;  // held out from all model points
  int itq_iterations = 50;
  int pq_iterations = 25;
};

SceneSpec scene_spec_from_json(const std::string& json_text);

struct SceneQuery {
  std::vector<QueryFeature> features;
  std::vector<std::uint32_t> true_point_ids;  // per feature
  ProjectionMatrix theta = ProjectionMatrix::Zero();
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  std::uint32_t segment_id = 0;
};

struct Scene {
  SceneSpec spec;
  HashModel hash;
  PQCodebook codebook;
  std::vector<SubModel> models;  // one per segment, segment id == index
  SegmentIndex index;
  std::vector<Eigen::Vector3d> reference_positions;  // by image id
  std::vector<SceneQuery> queries;
  // Ground truth kept uncompressed for oracle checks: pooled per-point
  // descriptors exactly as the models saw them, and point positions, by id.
  std::vector<Descriptor> pooled_descriptors;
  std::vector<Eigen::Vector3f> point_positions;
  // Among query features whose cascade match against the true segment kept a
  // relaxed candidate list, the fraction where the true point is in the list
  // but not ranked first. These are the matches only 1-many verification can
  // use. Computed only when repetition is configured.
  double planted_rank2_fraction = 0.0;
};

// Deterministic for a fixed spec. Throws when a query camera cannot observe
// min_visible_points after bounded retries.
Scene gen_scene(const SceneSpec& spec);

// Exact-descriptor reference matcher over one model: full nearest-neighbor
// scan on the pooled descriptors with the same ratio gates as the cascade.
CorrespondenceSet oracle_match(const Scene& scene, const SubModel& model,
                               std::span<const QueryFeature> features,
                               const CascadeParams& params = {});

struct BenchConfig {
  RansacConfig::Mode mode = RansacConfig::Mode::kFastSprt;
  std::uint64_t ransac_seed = 0;
  std::uint32_t n_early = 100;
  // Additionally verify each query against its true segment with both the
  // 1-many verification lists and the strict-pairs-only reduction.
  bool compare_one_one = false;
};

struct QueryOutcome {
  bool registered = false;
  bool model_correct = false;  // chosen model covers the camera placemark
  std::uint32_t inliers = 0;
  double center_error_m = 0.0;  // +inf when not registered
  double retrieval_only_error_m = 0.0;
  StageTimings timings;
  // Inlier provenance against the chosen model's match records.
  std::uint32_t inliers_strict = 0;
  std::uint32_t inliers_relaxed_best = 0;
  std::uint32_t inliers_lower_rank = 0;
  // Controlled comparison (compare_one_one).
  std::uint32_t one_many_inliers = 0;
  std::uint32_t one_one_inliers = 0;
  bool one_many_registered = false;
  bool one_one_registered = false;
};

struct BenchReport {
  std::vector<QueryOutcome> outcomes;
  std::uint32_t n_queries = 0;
  std::uint32_t n_registered = 0;
  double registration_rate = 0.0;
  double median_center_error_m = 0.0;  // over registered queries
  double mean_center_error_m = 0.0;
  double retrieval_only_median_error_m = 0.0;
  double planted_rank2_fraction = 0.0;
  std::string mode;
  bool one_one_compared = false;
  // Cumulative error distribution over all queries: (error_m, fraction <=).
  std::vector<std::pair<double, double>> ced;

  std::string to_json() const;
};

BenchReport run_bench(const Scene& scene, const BenchConfig& config = {});

// report.json, ced.csv and timings.csv under out_dir (created if missing).
void write_bench_outputs(const BenchReport& report,
                         const std::filesystem::path& out_dir);

// Unit-norm descriptors with low intrinsic dimension (a fixed random basis
// of `latent_dim` directions), optionally perturbed; the stand-in for local
// feature descriptors throughout tests and benchmarks.
std::vector<Descriptor> sample_descriptors(std::size_t n, int latent_dim,
                                           std::uint64_t seed,
                                           float noise = 0.0f);

}  // namespace ccs::synth
