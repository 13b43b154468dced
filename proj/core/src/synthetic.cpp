#include "ccs/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include <Eigen/Dense>
#include <json.hpp>

#include "ccs/errors.hpp"

namespace ccs::synth {
namespace {

using nlohmann::json;

constexpr double kStreetLength = 100.0;
constexpr double kFocal = 320.0;
constexpr double kPrincipal = 320.0;
constexpr double kImageSize = 640.0;
constexpr double kNearDepth = 2.0;
constexpr double kFarDepth = 60.0;
constexpr double kCameraHeight = 1.6;
constexpr int kObservationsPerPoint = 3;
constexpr double kFacadeDepth[2] = {8.0, 12.0};
// Probability that a query feature of a repeated point takes a sibling
// instance's appearance. Drives the planted rank-2 fraction.
constexpr double kRepetitionConfusion = 0.3;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Descriptors live in a fixed low-dimensional subspace of R^128; noise and
// repetition jitter are applied inside that subspace so compression sees the
// same structure the exact distances do.
class DescriptorSampler {
 public:
  DescriptorSampler(int latent_dim, std::mt19937_64& rng)
      : mix_(kDescriptorDim, latent_dim) {
    std::normal_distribution<float> g(0.0f, 1.0f);
    for (Eigen::Index c = 0; c < mix_.cols(); ++c) {
      for (Eigen::Index r = 0; r < mix_.rows(); ++r) mix_(r, c) = g(rng);
    }
  }

  Descriptor direction(std::mt19937_64& rng) const {
    std::normal_distribution<float> g(0.0f, 1.0f);
    Eigen::VectorXf z(mix_.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = g(rng);
    Descriptor d = mix_ * z;
    const float n = d.norm();
    if (n < 1e-20f) {
      d.setZero();
      d[0] = 1.0f;
      return d;
    }
    return d / n;
  }

  // Moves `base` roughly `sigma` along a fresh latent direction, then back
  // onto the unit sphere.
  Descriptor perturb(const Descriptor& base, float sigma,
                     std::mt19937_64& rng) const {
    if (sigma <= 0.0f) return base;
    Descriptor d = base + sigma * direction(rng);
    const float n = d.norm();
    if (n < 1e-12f) return base;
    return d / n;
  }

 private:
  Eigen::MatrixXf mix_;
};

struct Camera {
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Eigen::Vector3d c = Eigen::Vector3d::Zero();

  static Camera looking_at_facade(double x, double yaw, double pitch) {
    Camera cam;
    const Eigen::Matrix3d ry =
        Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();
    const Eigen::Matrix3d rx =
        Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitX()).toRotationMatrix();
    cam.r = rx * ry;  // base orientation looks down +z at the facade side
    cam.c = {x, kCameraHeight, 0.0};
    return cam;
  }

  Eigen::Vector2d project(const Eigen::Vector3d& p, double* depth) const {
    const Eigen::Vector3d pc = r * (p - c);
    if (depth) *depth = pc.z();
    return {kFocal * pc.x() / pc.z() + kPrincipal,
            kFocal * pc.y() / pc.z() + kPrincipal};
  }

  ProjectionMatrix matrix() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = k(1, 1) = kFocal;
    k(0, 2) = k(1, 2) = kPrincipal;
    ProjectionMatrix p;
    p.leftCols<3>() = k * r;
    p.col(3) = -k * r * c;
    p /= p.norm();
    Eigen::Index mr = 0, mc = 0;
    p.cwiseAbs().maxCoeff(&mr, &mc);
    if (p(mr, mc) < 0.0) p = -p;
    return p;
  }
};

void validate_spec(const SceneSpec& s) {
  if (s.segments < 1) throw std::invalid_argument("segments must be >= 1");
  if (s.placemarks_per_segment < 1) {
    throw std::invalid_argument("placemarks_per_segment must be >= 1");
  }
  if (s.segments > 1 && s.overlap_placemarks >= s.placemarks_per_segment) {
    throw std::invalid_argument("overlap must be smaller than a segment");
  }
  if (s.points_per_segment < 1) {
    throw std::invalid_argument("points_per_segment must be >= 1");
  }
  if (s.latent_dim < 1 || s.latent_dim > static_cast<int>(kDescriptorDim)) {
    throw std::invalid_argument("latent_dim out of range");
  }
  if (s.training_pool < 256) {
    throw std::invalid_argument("training_pool must be >= 256");
  }
  if (s.min_visible_points < 6) {
    throw std::invalid_argument("min_visible_points must be >= 6");
  }
  if (s.features_per_query < 1) {
    throw std::invalid_argument("features_per_query must be >= 1");
  }
  if (s.references_per_placemark < 1) {
    throw std::invalid_argument("references_per_placemark must be >= 1");
  }
  if (s.repetition.groups > 0 && s.repetition.group_size < 2) {
    throw std::invalid_argument("repetition group_size must be >= 2");
  }
  if (s.query_region == QueryRegion::kOverlap &&
      (s.segments < 2 || s.overlap_placemarks == 0)) {
    throw std::invalid_argument("overlap queries need overlapping segments");
  }
  if (s.descriptor_noise < 0.0f || s.pixel_noise < 0.0f ||
      s.repetition.jitter < 0.0f) {
    throw std::invalid_argument("noise parameters must be non-negative");
  }
}

struct Layout {
  std::uint32_t step = 0;          // placemarks between segment starts
  std::uint32_t n_placemarks = 0;
  std::uint32_t per_cell = 0;      // points per placemark
  double cell = 0.0;               // placemark width in meters
};

Layout layout_of(const SceneSpec& s) {
  Layout l;
  const std::uint32_t ov = s.segments > 1 ? s.overlap_placemarks : 0;
  l.step = s.placemarks_per_segment - ov;
  l.n_placemarks = l.step * (s.segments - 1) + s.placemarks_per_segment;
  l.per_cell =
      (s.points_per_segment + s.placemarks_per_segment - 1) /
      s.placemarks_per_segment;
  l.cell = kStreetLength / l.n_placemarks;
  return l;
}

std::uint32_t placemark_at(const Layout& l, double x) {
  const double p = std::floor(x / l.cell);
  if (p < 0.0) return 0;
  return std::min(static_cast<std::uint32_t>(p), l.n_placemarks - 1);
}

bool model_covers(const SubModel& m, std::uint32_t placemark) {
  return placemark >= m.meta().placemark_begin &&
         placemark < m.meta().placemark_end;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

void require_keys(const json& j,
                  std::initializer_list<std::string_view> allowed,
                  const char* scope) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) ==
        allowed.end()) {
      throw ParseError("unknown key \"" + item.key() + "\" in " + scope);
    }
  }
}

}  // namespace

SceneSpec scene_spec_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene spec: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("scene spec: expected an object");
  SceneSpec spec;
  try {
    require_keys(j,
                 {"seed", "segments", "points_per_segment",
                  "placemarks_per_segment", "overlap_placemarks", "queries",
                  "features_per_query", "references_per_placemark",
                  "min_visible_points", "descriptor_noise", "pixel_noise",
                  "latent_dim", "repetition", "query_region", "training_pool",
                  "itq_iterations", "pq_iterations"},
                 "scene spec");
    spec.seed = j.value("seed", spec.seed);
    spec.segments = j.value("segments", spec.segments);
    spec.points_per_segment =
        j.value("points_per_segment", spec.points_per_segment);
    spec.placemarks_per_segment =
        j.value("placemarks_per_segment", spec.placemarks_per_segment);
    spec.overlap_placemarks =
        j.value("overlap_placemarks", spec.overlap_placemarks);
    spec.queries = j.value("queries", spec.queries);
    spec.features_per_query =
        j.value("features_per_query", spec.features_per_query);
    spec.references_per_placemark =
        j.value("references_per_placemark", spec.references_per_placemark);
    spec.min_visible_points =
        j.value("min_visible_points", spec.min_visible_points);
    spec.descriptor_noise = j.value("descriptor_noise", spec.descriptor_noise);
    spec.pixel_noise = j.value("pixel_noise", spec.pixel_noise);
    spec.latent_dim = j.value("latent_dim", spec.latent_dim);
    spec.training_pool = j.value("training_pool", spec.training_pool);
    spec.itq_iterations = j.value("itq_iterations", spec.itq_iterations);
    spec.pq_iterations = j.value("pq_iterations", spec.pq_iterations);
    if (j.contains("repetition")) {
      const json& r = j.at("repetition");
      if (!r.is_object()) throw ParseError("repetition: expected an object");
      require_keys(r, {"groups", "group_size", "jitter"}, "repetition");
      spec.repetition.groups = r.value("groups", spec.repetition.groups);
      spec.repetition.group_size =
          r.value("group_size", spec.repetition.group_size);
      spec.repetition.jitter = r.value("jitter", spec.repetition.jitter);
    }
    if (j.contains("query_region")) {
      const std::string region = j.at("query_region").get<std::string>();
      if (region == "interior") {
        spec.query_region = QueryRegion::kInterior;
      } else if (region == "overlap") {
        spec.query_region = QueryRegion::kOverlap;
      } else if (region == "uniform") {
        spec.query_region = QueryRegion::kUniform;
      } else {
        throw ParseError("query_region must be interior, overlap or uniform");
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("scene spec: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

Scene gen_scene(const SceneSpec& spec) {
  validate_spec(spec);
  Scene scene;
  scene.spec = spec;

  const Layout lay = layout_of(spec);
  const std::uint32_t n_points = lay.n_placemarks * lay.per_cell;
  std::mt19937_64 rng(mix64(spec.seed));
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  DescriptorSampler sampler(spec.latent_dim, rng);

  // Facade geometry: two parallel planes with depth jitter, one street side.
  scene.point_positions.resize(n_points);
  std::vector<std::uint32_t> placemark_of(n_points);
  {
    std::uniform_real_distribution<double> zjit(-0.4, 0.4);
    for (std::uint32_t p = 0; p < lay.n_placemarks; ++p) {
      for (std::uint32_t k = 0; k < lay.per_cell; ++k) {
        const std::uint32_t id = p * lay.per_cell + k;
        const double x = (p + u01(rng)) * lay.cell;
        const double y = 0.5 + 12.5 * u01(rng);
        const double z = kFacadeDepth[k % 2] + zjit(rng);
        scene.point_positions[id] = Eigen::Vector3f(
            static_cast<float>(x), static_cast<float>(y),
            static_cast<float>(z));
        placemark_of[id] = p;
      }
    }
  }

  // Clean appearance per point; repetition groups share a prototype.
  std::vector<Descriptor> base(n_points);
  for (auto& d : base) d = sampler.direction(rng);
  const std::uint64_t repeated =
      std::uint64_t{spec.repetition.groups} * spec.repetition.group_size;
  if (repeated > n_points) {
    throw std::invalid_argument("repetition groups exceed the point count");
  }
  std::vector<std::int32_t> group_of(n_points, -1);
  std::vector<std::vector<std::uint32_t>> group_members(spec.repetition.groups);
  if (spec.repetition.groups > 0) {
    std::vector<std::uint32_t> perm(n_points);
    std::iota(perm.begin(), perm.end(), 0u);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::size_t next = 0;
    for (std::uint32_t g = 0; g < spec.repetition.groups; ++g) {
      const Descriptor proto = sampler.direction(rng);
      for (std::uint32_t m = 0; m < spec.repetition.group_size; ++m) {
        const std::uint32_t id = perm[next++];
        base[id] = sampler.perturb(proto, spec.repetition.jitter, rng);
        group_of[id] = static_cast<std::int32_t>(g);
        group_members[g].push_back(id);
      }
    }
  }

  // Observations pool to the descriptor the models store.
  const float obs_noise = 0.5f * spec.descriptor_noise;
  std::vector<PointInput> inputs(n_points);
  scene.pooled_descriptors.resize(n_points);
  for (std::uint32_t id = 0; id < n_points; ++id) {
    PointInput& in = inputs[id];
    in.id = id;
    in.position = scene.point_positions[id];
    in.observations.reserve(kObservationsPerPoint);
    for (int o = 0; o < kObservationsPerPoint; ++o) {
      in.observations.push_back(sampler.perturb(base[id], obs_noise, rng));
    }
    scene.pooled_descriptors[id] = mean_descriptor(in.observations);
  }

  // Hash and codebook are trained on a held-out pool from the same
  // distribution, never on model points.
  {
    std::vector<Descriptor> pool(spec.training_pool);
    for (auto& d : pool) {
      d = sampler.perturb(sampler.direction(rng), spec.descriptor_noise, rng);
    }
    ItqOptions itq;
    itq.iterations = spec.itq_iterations;
    itq.seed = mix64(spec.seed + 0x11);
    scene.hash = train_hash(pool, itq);
    PqTrainOptions pq;
    pq.iterations = spec.pq_iterations;
    pq.seed = mix64(spec.seed + 0x22);
    scene.codebook = train_pq(pool, pq);
  }

  // One sub-model per segment over its placemark range.
  scene.models.reserve(spec.segments);
  for (std::uint32_t s = 0; s < spec.segments; ++s) {
    const std::uint32_t begin = s * lay.step;
    const std::uint32_t end = begin + spec.placemarks_per_segment;
    std::vector<PointInput> pts;
    for (std::uint32_t id = 0; id < n_points; ++id) {
      if (placemark_of[id] >= begin && placemark_of[id] < end) {
        pts.push_back(inputs[id]);
      }
    }
    const SegmentMeta meta{s, begin, end,
                           spec.segments > 1 ? spec.overlap_placemarks : 0};
    scene.models.push_back(
        SubModel::build(pts, scene.hash, scene.codebook, meta));
  }

  // Reference images: a few per placemark, pooling the clean descriptors of
  // the surrounding placemarks.
  {
    std::vector<ImageInput> images;
    const std::uint32_t n_refs =
        lay.n_placemarks * spec.references_per_placemark;
    images.reserve(n_refs);
    scene.reference_positions.resize(n_refs);
    for (std::uint32_t p = 0; p < lay.n_placemarks; ++p) {
      std::vector<std::uint32_t> mids;
      for (std::uint32_t s = 0; s < spec.segments; ++s) {
        if (model_covers(scene.models[s], p)) mids.push_back(s);
      }
      std::vector<Descriptor> local;
      for (std::uint32_t id = 0; id < n_points; ++id) {
        const std::uint32_t q = placemark_of[id];
        if (q + 1 >= p && q <= p + 1) local.push_back(base[id]);
      }
      for (std::uint32_t r = 0; r < spec.references_per_placemark; ++r) {
        ImageInput img;
        img.id = p * spec.references_per_placemark + r;
        img.model_ids = mids;
        img.descriptors = local;
        scene.reference_positions[img.id] = Eigen::Vector3d(
            (p + (r + 0.5) / spec.references_per_placemark) * lay.cell,
            kCameraHeight, 0.0);
        images.push_back(std::move(img));
      }
    }
    scene.index = SegmentIndex::build(images);
  }

  // Query cameras with ground truth.
  scene.queries.resize(spec.queries);
  std::uniform_real_distribution<double> yaw_d(-0.26, 0.26);
  std::uniform_real_distribution<double> pitch_d(-0.09, 0.17);
  std::normal_distribution<double> px_noise(0.0, 1.0);
  for (std::uint32_t qi = 0; qi < spec.queries; ++qi) {
    SceneQuery& q = scene.queries[qi];
    std::uint32_t s = qi % spec.segments;

    double x_lo = 0.0, x_hi = kStreetLength;
    switch (spec.query_region) {
      case QueryRegion::kInterior: {
        const std::uint32_t ov = spec.segments > 1 ? spec.overlap_placemarks : 0;
        std::uint32_t lo_pm = s * lay.step + (s > 0 ? ov : 0);
        std::uint32_t hi_pm =
            s * lay.step + spec.placemarks_per_segment -
            (s + 1 < spec.segments ? ov : 0);
        if (lo_pm >= hi_pm) {  // segments almost fully shared
          lo_pm = s * lay.step;
          hi_pm = lo_pm + spec.placemarks_per_segment;
        }
        x_lo = lo_pm * lay.cell;
        x_hi = hi_pm * lay.cell;
        break;
      }
      case QueryRegion::kOverlap: {
        const std::uint32_t b = qi % (spec.segments - 1);
        x_lo = (b + 1) * lay.step * lay.cell;
        x_hi = (b * lay.step + spec.placemarks_per_segment) * lay.cell;
        s = b;
        break;
      }
      case QueryRegion::kUniform:
        x_lo = 1.0;
        x_hi = kStreetLength - 1.0;
        break;
    }

    Camera cam;
    std::vector<std::uint32_t> visible;
    bool placed = false;
    for (int attempt = 0; attempt < 200 && !placed; ++attempt) {
      const double x = x_lo + (x_hi - x_lo) * u01(rng);
      cam = Camera::looking_at_facade(x, yaw_d(rng), pitch_d(rng));
      visible.clear();
      for (std::uint32_t id = 0; id < n_points; ++id) {
        double depth = 0.0;
        const Eigen::Vector2d px =
            cam.project(scene.point_positions[id].cast<double>(), &depth);
        if (depth >= kNearDepth && depth <= kFarDepth && px.x() >= 0.0 &&
            px.x() <= kImageSize && px.y() >= 0.0 && px.y() <= kImageSize) {
          visible.push_back(id);
        }
      }
      placed = visible.size() >= spec.min_visible_points;
    }
    if (!placed) {
      throw std::runtime_error("scene too sparse: a query camera cannot see " +
                               std::to_string(spec.min_visible_points) +
                               " points");
    }

    if (spec.query_region == QueryRegion::kUniform) {
      const std::uint32_t pm = placemark_at(lay, cam.c.x());
      for (std::uint32_t cand = 0; cand < spec.segments; ++cand) {
        if (model_covers(scene.models[cand], pm)) {
          s = cand;
          break;
        }
      }
    }

    std::shuffle(visible.begin(), visible.end(), rng);
    const std::size_t n_feat =
        std::min<std::size_t>(spec.features_per_query, visible.size());
    q.features.resize(n_feat);
    q.true_point_ids.assign(visible.begin(), visible.begin() + n_feat);
    for (std::size_t f = 0; f < n_feat; ++f) {
      const std::uint32_t id = q.true_point_ids[f];
      const Eigen::Vector2d px =
          cam.project(scene.point_positions[id].cast<double>(), nullptr);
      q.features[f].pixel = Eigen::Vector2f(
          static_cast<float>(px.x() + spec.pixel_noise * px_noise(rng)),
          static_cast<float>(px.y() + spec.pixel_noise * px_noise(rng)));
      // Repeated elements confuse the descriptor, not the geometry: a share
      // of features of grouped points resemble a sibling instance more than
      // their own, which plants the true point at rank >= 2 of the match
      // list. Isotropic noise alone cannot do this: in 128 dimensions the
      // cross terms concentrate far below the prototype separation.
      const Descriptor* appearance = &base[id];
      if (group_of[id] >= 0 && u01(rng) < kRepetitionConfusion) {
        const auto& members = group_members[group_of[id]];
        std::uint32_t sib = id;
        while (sib == id) sib = members[rng() % members.size()];
        appearance = &base[sib];
      }
      q.features[f].descriptor =
          sampler.perturb(*appearance, spec.descriptor_noise, rng);
    }
    q.theta = cam.matrix();
    q.center = cam.c;
    q.segment_id = s;
  }

  // How often the cascade keeps the true point only at a lower rank of the
  // relaxed list, where strict-only matching cannot see it.
  if (spec.repetition.groups > 0 && !scene.queries.empty()) {
    CascadeParams params;
    params.n_early = 0;
    std::uint64_t gated = 0, planted = 0;
    for (const SceneQuery& q : scene.queries) {
      const SubModel& model = scene.models[q.segment_id];
      const CorrespondenceSet set = prioritized_match(
          model, q.features, scene.hash, scene.codebook, params);
      for (const MatchRecord& rec : set.records) {
        if (rec.relaxed_matches.empty()) continue;
        ++gated;
        const std::uint32_t tid = q.true_point_ids[rec.query_index];
        for (std::size_t rank = 1; rank < rec.relaxed_matches.size(); ++rank) {
          if (rec.relaxed_matches[rank].first == tid) {
            ++planted;
            break;
          }
        }
      }
    }
    scene.planted_rank2_fraction =
        gated > 0 ? static_cast<double>(planted) / gated : 0.0;
  }

  return scene;
}

CorrespondenceSet oracle_match(const Scene& scene, const SubModel& model,
                               std::span<const QueryFeature> features,
                               const CascadeParams& params) {
  CorrespondenceSet out;
  out.total_queries = static_cast<std::uint32_t>(features.size());
  out.processed_queries = out.total_queries;
  out.records.reserve(features.size());

  for (std::uint32_t qi = 0; qi < features.size(); ++qi) {
    MatchRecord rec;
    rec.query_index = qi;
    const Eigen::Matrix<double, kDescriptorDim, 1> qd =
        features[qi].descriptor.cast<double>();

    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(model.size());
    for (std::uint32_t row = 0; row < model.size(); ++row) {
      const std::uint32_t id = model.point(row).id;
      const double d2 =
          (scene.pooled_descriptors.at(id).cast<double>() - qd).squaredNorm();
      scored.emplace_back(d2, id);
    }
    std::sort(scored.begin(), scored.end());

    const std::size_t listed =
        std::min<std::size_t>(scored.size(), static_cast<std::size_t>(params.l_r));
    rec.distances.reserve(listed);
    for (std::size_t j = 0; j < listed; ++j) {
      rec.distances.push_back(static_cast<float>(std::sqrt(scored[j].first)));
    }

    if (scored.size() >= 2) {
      const double d0 = rec.distances[0];
      const double d1 = rec.distances[1];
      const double ratio = d1 > 0.0 ? d0 / d1 : 1.0;
      const std::size_t cap = std::min<std::size_t>(listed, params.m);
      if (!params.per_candidate_gate) {
        if (ratio < params.nu) {
          for (std::size_t j = 0; j < cap; ++j) {
            rec.relaxed_matches.emplace_back(scored[j].second,
                                             rec.distances[j]);
          }
        }
      } else {
        std::vector<std::size_t> kept;
        for (std::size_t j = 1; j < listed; ++j) {
          const double dj = rec.distances[j];
          if (dj > 0.0 && d0 / dj < params.nu) kept.push_back(j);
        }
        if (!kept.empty()) {
          kept.insert(kept.begin(), 0);
          for (std::size_t j : kept) {
            if (rec.relaxed_matches.size() == cap) break;
            rec.relaxed_matches.emplace_back(scored[j].second,
                                             rec.distances[j]);
          }
        }
      }
      if (ratio < params.nu_h && !rec.relaxed_matches.empty()) {
        rec.strict_match = rec.relaxed_matches.front().first;
      }
    }

    if (!rec.relaxed_matches.empty()) {
      VerificationRecord v;
      v.query_index = qi;
      v.pixel = features[qi].pixel;
      v.candidates.reserve(rec.relaxed_matches.size());
      for (const auto& [id, dist] : rec.relaxed_matches) {
        v.candidates.push_back(
            {id, scene.point_positions.at(id), dist});
      }
      if (rec.strict_match) {
        out.hypothesis.push_back(
            static_cast<std::uint32_t>(out.verification.size()));
      }
      out.verification.push_back(std::move(v));
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

BenchReport run_bench(const Scene& scene, const BenchConfig& config) {
  BenchReport rep;
  rep.mode =
      config.mode == RansacConfig::Mode::kFastSprt ? "fast" : "fixed";
  rep.planted_rank2_fraction = scene.planted_rank2_fraction;
  rep.n_queries = static_cast<std::uint32_t>(scene.queries.size());
  rep.one_one_compared = config.compare_one_one;

  const Layout lay = layout_of(scene.spec);

  // The scene owns the models; the source hands out non-owning views.
  InMemoryModelSource source;
  for (const SubModel& m : scene.models) {
    source.add(m.meta().segment_id,
               std::shared_ptr<const SubModel>(&m, [](const SubModel*) {}));
  }

  LocalizeConfig lc;
  lc.cascade.n_early = config.n_early;
  lc.ransac.mode = config.mode;

  for (std::uint32_t qi = 0; qi < scene.queries.size(); ++qi) {
    const SceneQuery& q = scene.queries[qi];
    QueryOutcome out;
    lc.ransac.seed = mix64(config.ransac_seed + 0x1000 + qi);

    LocalizationResult res = localize(q.features, scene.hash, scene.codebook,
                                      scene.index, source, lc);
    out.registered = res.registered;
    out.inliers = static_cast<std::uint32_t>(res.pose.inliers.size());
    out.timings = res.timings;
    if (res.registered) {
      out.center_error_m = (res.pose.center - q.center).norm();
      const std::uint32_t pm = placemark_at(lay, q.center.x());
      out.model_correct = model_covers(scene.models[*res.model_id], pm);

      // Attribute inliers to the match tier that produced them.
      const SubModel& chosen = scene.models[*res.model_id];
      CorrespondenceSet corr = prioritized_match(
          chosen, q.features, scene.hash, scene.codebook, lc.cascade);
      for (const InlierMatch& inl : res.pose.inliers) {
        const auto it = std::lower_bound(
            corr.records.begin(), corr.records.end(), inl.query_index,
            [](const MatchRecord& r, std::uint32_t key) {
              return r.query_index < key;
            });
        if (it == corr.records.end() || it->query_index != inl.query_index ||
            it->relaxed_matches.empty()) {
          continue;
        }
        if (it->relaxed_matches.front().first == inl.point_id) {
          if (it->strict_match) {
            ++out.inliers_strict;
          } else {
            ++out.inliers_relaxed_best;
          }
        } else {
          ++out.inliers_lower_rank;
        }
      }
    } else {
      out.center_error_m = std::numeric_limits<double>::infinity();
    }

    {
      std::vector<Descriptor> descs(q.features.size());
      for (std::size_t f = 0; f < q.features.size(); ++f) {
        descs[f] = q.features[f].descriptor;
      }
      const Descriptor global = mean_descriptor(descs);
      const auto ranked = scene.index.retrieve(global, lc.n_t);
      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      for (std::uint32_t id : ranked) {
        mean += scene.reference_positions.at(id);
      }
      if (!ranked.empty()) mean /= static_cast<double>(ranked.size());
      out.retrieval_only_error_m = (mean - q.center).norm();
    }

    if (config.compare_one_one) {
      const SubModel& gt = scene.models[q.segment_id];
      const CorrespondenceSet corr = prioritized_match(
          gt, q.features, scene.hash, scene.codebook, lc.cascade);
      const PoseResult r_many = ransac_1m(corr, lc.ransac);
      const PoseResult r_one = ransac_1m(strict_only(corr), lc.ransac);
      out.one_many_inliers = static_cast<std::uint32_t>(r_many.inliers.size());
      out.one_one_inliers = static_cast<std::uint32_t>(r_one.inliers.size());
      out.one_many_registered =
          r_many.valid && out.one_many_inliers >= lc.min_inliers;
      out.one_one_registered =
          r_one.valid && out.one_one_inliers >= lc.min_inliers;
    }

    rep.outcomes.push_back(std::move(out));
  }

  std::vector<double> reg_errors, retrieval_errors, all_errors;
  for (const QueryOutcome& o : rep.outcomes) {
    if (o.registered) {
      ++rep.n_registered;
      reg_errors.push_back(o.center_error_m);
    }
    retrieval_errors.push_back(o.retrieval_only_error_m);
    all_errors.push_back(o.center_error_m);
  }
  rep.registration_rate =
      rep.n_queries > 0
          ? static_cast<double>(rep.n_registered) / rep.n_queries
          : 0.0;
  rep.median_center_error_m = median_of(reg_errors);
  rep.mean_center_error_m =
      reg_errors.empty()
          ? 0.0
          : std::accumulate(reg_errors.begin(), reg_errors.end(), 0.0) /
                reg_errors.size();
  rep.retrieval_only_median_error_m = median_of(retrieval_errors);

  std::sort(all_errors.begin(), all_errors.end());
  for (std::size_t i = 0; i < all_errors.size(); ++i) {
    if (!std::isfinite(all_errors[i])) break;
    rep.ced.emplace_back(all_errors[i],
                         static_cast<double>(i + 1) / all_errors.size());
  }
  return rep;
}

std::string BenchReport::to_json() const {
  json j;
  j["mode"] = mode;
  j["n_queries"] = n_queries;
  j["n_registered"] = n_registered;
  j["registration_rate"] = registration_rate;
  if (n_registered > 0) {
    j["median_center_error_m"] = median_center_error_m;
    j["mean_center_error_m"] = mean_center_error_m;
  } else {
    j["median_center_error_m"] = nullptr;
    j["mean_center_error_m"] = nullptr;
  }
  j["retrieval_only_median_error_m"] = retrieval_only_median_error_m;
  j["planted_rank2_fraction"] = planted_rank2_fraction;

  std::uint64_t strict = 0, relaxed = 0, lower = 0;
  for (const QueryOutcome& o : outcomes) {
    strict += o.inliers_strict;
    relaxed += o.inliers_relaxed_best;
    lower += o.inliers_lower_rank;
  }
  j["inlier_provenance"] = {
      {"strict", strict}, {"relaxed_best", relaxed}, {"lower_rank", lower}};

  if (one_one_compared) {
    std::uint64_t many = 0, one = 0;
    std::uint32_t many_reg = 0, one_reg = 0;
    for (const QueryOutcome& o : outcomes) {
      many += o.one_many_inliers;
      one += o.one_one_inliers;
      many_reg += o.one_many_registered ? 1 : 0;
      one_reg += o.one_one_registered ? 1 : 0;
    }
    j["one_one_comparison"] = {
        {"one_many_inliers", many},
        {"one_one_inliers", one},
        {"inlier_ratio", one > 0 ? static_cast<double>(many) / one : 0.0},
        {"one_many_registered", many_reg},
        {"one_one_registered", one_reg}};
  }

  const auto stage_stats = [this](double StageTimings::*field) {
    std::vector<double> v;
    v.reserve(outcomes.size());
    double total = 0.0;
    for (const QueryOutcome& o : outcomes) {
      v.push_back(o.timings.*field);
      total += o.timings.*field;
    }
    const double mean = v.empty() ? 0.0 : total / v.size();
    return json{{"mean_s", mean},
                {"median_s", median_of(v)},
                {"total_s", total}};
  };
  j["timings"] = {{"retrieval", stage_stats(&StageTimings::retrieval_s)},
                  {"load", stage_stats(&StageTimings::load_s)},
                  {"match", stage_stats(&StageTimings::match_s)},
                  {"ransac", stage_stats(&StageTimings::ransac_s)},
                  {"total", stage_stats(&StageTimings::total_s)}};

  json queries = json::array();
  for (const QueryOutcome& o : outcomes) {
    json qj;
    qj["registered"] = o.registered;
    qj["inliers"] = o.inliers;
    if (o.registered) {
      qj["center_error_m"] = o.center_error_m;
      qj["model_correct"] = o.model_correct;
    }
    qj["retrieval_only_error_m"] = o.retrieval_only_error_m;
    qj["total_s"] = o.timings.total_s;
    queries.push_back(std::move(qj));
  }
  j["queries"] = std::move(queries);
  return j.dump(2);
}

void write_bench_outputs(const BenchReport& report,
                         const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream f(out_dir / "report.json");
    if (!f) throw std::runtime_error("cannot write report.json");
    f << report.to_json() << "\n";
  }
  {
    std::ofstream f(out_dir / "ced.csv");
    if (!f) throw std::runtime_error("cannot write ced.csv");
    f << "error_m,fraction\n";
    for (const auto& [err, frac] : report.ced) {
      f << err << "," << frac << "\n";
    }
  }
  {
    std::ofstream f(out_dir / "timings.csv");
    if (!f) throw std::runtime_error("cannot write timings.csv");
    f << "stage,mean_s,median_s,total_s\n";
    const auto row = [&](const char* name, double StageTimings::*field) {
      std::vector<double> v;
      double total = 0.0;
      for (const QueryOutcome& o : report.outcomes) {
        v.push_back(o.timings.*field);
        total += o.timings.*field;
      }
      const double mean = v.empty() ? 0.0 : total / v.size();
      f << name << "," << mean << "," << median_of(v) << "," << total << "\n";
    };
    row("retrieval", &StageTimings::retrieval_s);
    row("load", &StageTimings::load_s);
    row("match", &StageTimings::match_s);
    row("ransac", &StageTimings::ransac_s);
    row("total", &StageTimings::total_s);
  }
}

std::vector<Descriptor> sample_descriptors(std::size_t n, int latent_dim,
                                           std::uint64_t seed, float noise) {
  if (latent_dim < 1 || latent_dim > static_cast<int>(kDescriptorDim)) {
    throw std::invalid_argument("latent_dim out of range");
  }
  std::mt19937_64 rng(mix64(seed));
  DescriptorSampler sampler(latent_dim, rng);
  std::vector<Descriptor> out(n);
  for (auto& d : out) {
    d = sampler.direction(rng);
    if (noise > 0.0f) d = sampler.perturb(d, noise, rng);
  }
  return out;
}

}  // namespace ccs::synth
