// Acceptance gate: end-to-end checks with pinned tolerances, one line per
// criterion. Exit code 0 only if every criterion holds.

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <set>
#include <vector>

#include "ccs/cascade.hpp"
#include "ccs/pipeline.hpp"
#include "ccs/synthetic.hpp"

using namespace ccs;

namespace {

using Clock = std::chrono::steady_clock;

double seconds(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

int g_failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %-44s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
  if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
  va_list args;
  va_start(args, f);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

std::vector<PointRecord> random_records(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<PointRecord> recs(n);
  for (std::size_t i = 0; i < n; ++i) {
    recs[i].id = static_cast<std::uint32_t>(i);
    recs[i].position = {float(i % 97), float(i % 13), 10.0f};
    recs[i].code.words = {rng(), rng()};
    for (auto& idx : recs[i].pq.indices) {
      idx = static_cast<std::uint8_t>(rng() & 0xff);
    }
  }
  return recs;
}

// --- criterion 1: bounded-radius recall of the coarse stage ---------------

void check_coarse_recall() {
  constexpr int kPairs = 10000;
  constexpr int kMaxFlips = 7;
  constexpr double kBudgetS = 5.0;

  const auto recs = random_records(20000, 101);
  const SubModel model = SubModel::from_records(recs, {}, 0, 0);
  std::mt19937_64 rng(102);
  const auto t0 = Clock::now();
  int hits = 0;
  for (int i = 0; i < kPairs; ++i) {
    const std::uint32_t row = static_cast<std::uint32_t>(rng() % recs.size());
    BinaryCode q = model.point(row).code;
    const int flips = static_cast<int>(rng() % (kMaxFlips + 1));
    std::set<int> flipped;
    while (static_cast<int>(flipped.size()) < flips) {
      flipped.insert(static_cast<int>(rng() % kCodeBits));
    }
    for (int pos : flipped) q.set_bit(pos, !q.bit(pos));
    const auto rows = coarse_lookup(model, q);
    hits += std::binary_search(rows.begin(), rows.end(), row) ? 1 : 0;
  }
  const double elapsed = seconds(t0, Clock::now());
  report("coarse recall within 7-bit radius", hits == kPairs && elapsed < kBudgetS,
         fmt("%d/%d recovered, %.2f s (budget %.0f s)", hits, kPairs, elapsed,
             kBudgetS));
}

// --- criterion 2: refine and precise equal their naive oracles ------------

void check_cascade_oracles() {
  constexpr std::size_t kPoints = 100000;
  constexpr int kQueries = 1000;
  constexpr double kBudgetS = 60.0;

  const auto pool = synth::sample_descriptors(512, 20, 103, 0.05f);
  const PQCodebook codebook = train_pq(pool);
  auto recs = random_records(kPoints, 104);
  const SubModel model = SubModel::from_records(std::move(recs), {}, 0, 0);

  CascadeParams params;
  std::mt19937_64 rng(105);
  std::normal_distribution<float> g(0.0f, 1.0f);
  const auto t0 = Clock::now();
  int refine_equal = 0, precise_equal = 0;
  for (int qi = 0; qi < kQueries; ++qi) {
    BinaryCode code;
    code.words = {rng(), rng()};
    const auto coarse = coarse_lookup(model, code);

    // Naive refinement: stable full sort by (hamming, id).
    std::vector<std::pair<std::pair<int, std::uint32_t>, std::uint32_t>> keyed;
    for (std::uint32_t row : coarse) {
      keyed.push_back({{hamming(code, model.point(row).code),
                        model.point(row).id},
                       row});
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<std::uint32_t> naive;
    for (std::size_t i = 0;
         i < keyed.size() && i < static_cast<std::size_t>(params.l_r); ++i) {
      naive.push_back(keyed[i].second);
    }
    const auto refined = refine(model, code, coarse, params.l_r);
    refine_equal += refined == naive ? 1 : 0;

    Descriptor qd;
    for (int i = 0; i < kDescriptorDim; ++i) qd[i] = g(rng);
    qd.normalize();
    const DistanceTable table = codebook.adc_table(qd);
    const MatchRecord rec = precise(model, table, refined, params, 0);

    std::vector<std::pair<double, std::uint32_t>> scored;
    for (std::uint32_t row : refined) {
      scored.emplace_back(adc_distance(table, model.point(row).pq),
                          model.point(row).id);
    }
    std::sort(scored.begin(), scored.end());
    bool ok = rec.distances.size() == scored.size();
    for (std::size_t i = 0; ok && i < scored.size(); ++i) {
      ok = rec.distances[i] == static_cast<float>(std::sqrt(scored[i].first));
    }
    if (ok && scored.size() >= 2) {
      const double d0 = rec.distances[0];
      const double d1 = rec.distances[1];
      const double ratio = d1 > 0.0 ? d0 / d1 : 1.0;
      const bool relaxed = ratio < params.nu;
      ok = rec.relaxed_matches.empty() == !relaxed;
      if (ok && relaxed) {
        const std::size_t want = std::min<std::size_t>(scored.size(), params.m);
        ok = rec.relaxed_matches.size() == want;
        for (std::size_t i = 0; ok && i < want; ++i) {
          ok = rec.relaxed_matches[i].first == scored[i].second;
        }
        if (ok) {
          const bool strict = ratio < params.nu_h;
          ok = rec.strict_match.has_value() == strict;
        }
      }
    } else if (ok) {
      ok = !rec.strict_match && rec.relaxed_matches.empty();
    }
    precise_equal += ok ? 1 : 0;
  }
  const double elapsed = seconds(t0, Clock::now());
  report("hamming and quantized re-rank match naive scans",
         refine_equal == kQueries && precise_equal == kQueries &&
             elapsed < kBudgetS,
         fmt("refine %d/%d, precise %d/%d over %zu points, %.1f s",
             refine_equal, kQueries, precise_equal, kQueries, kPoints,
             elapsed));
}

// --- criterion 3: table-based distances track reconstructed distances -----

void check_adc_accuracy() {
  constexpr int kPairs = 10000;
  constexpr double kRelTol = 1e-5;

  const auto pool = synth::sample_descriptors(2048, 20, 106, 0.05f);
  const PQCodebook codebook = train_pq(pool);
  const auto fresh = synth::sample_descriptors(kPairs, 20, 107, 0.1f);
  std::mt19937_64 rng(108);
  int ok = 0;
  double worst = 0.0;
  for (int i = 0; i < kPairs; ++i) {
    const Descriptor& q = fresh[i];
    const PQCode code = codebook.encode(fresh[(i * 7 + 1) % kPairs]);
    const double adc = adc_distance(codebook.adc_table(q), code);
    const double direct =
        (q - codebook.reconstruct(code)).cast<double>().squaredNorm();
    const double rel =
        std::abs(adc - direct) / std::max(direct, 1e-12);
    worst = std::max(worst, rel);
    ok += rel <= kRelTol ? 1 : 0;
  }
  report("quantized distances track reconstructions", ok == kPairs,
         fmt("%d/%d within %g relative, worst %.2e", ok, kPairs, kRelTol,
             worst));
}

// --- criterion 4: rotation stays orthogonal, loss never increases ---------

void check_hash_training() {
  constexpr double kOrthoTol = 1e-6;

  std::mt19937_64 rng(109);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<Descriptor> pool(2000);
  for (auto& d : pool) {
    for (int i = 0; i < kDescriptorDim; ++i) d[i] = g(rng);
  }
  const HashModel model = train_hash(pool);

  const double ortho =
      (model.meta.rotation.transpose() * model.meta.rotation -
       Eigen::MatrixXd::Identity(kDescriptorDim, kDescriptorDim))
          .cwiseAbs()
          .maxCoeff();

  bool monotone = !model.meta.losses.empty();
  for (std::size_t i = 1; i < model.meta.losses.size(); ++i) {
    monotone = monotone &&
               model.meta.losses[i] <=
                   model.meta.losses[i - 1] + 1e-9 * model.meta.losses.front();
  }
  report("hash training orthogonality and loss descent",
         ortho < kOrthoTol && monotone,
         fmt("max |R^T R - I| = %.2e (tol %g), %zu loss values monotone: %s",
             ortho, kOrthoTol, model.meta.losses.size(),
             monotone ? "yes" : "no"));
}

// --- criterion 5: pose solver accuracy and degeneracy handling ------------

void check_pose_solver() {
  constexpr double kReprojTol = 1e-6;

  std::mt19937_64 rng(110);
  std::normal_distribution<double> g(0.0, 1.0);

  // Synthetic camera: look along +z from a random center.
  const auto make_camera = [&](Eigen::Matrix3d& r, Eigen::Vector3d& c) {
    const Eigen::Vector3d axis =
        Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    r = Eigen::AngleAxisd(0.2 * g(rng), axis).toRotationMatrix();
    c = Eigen::Vector3d(5.0 * g(rng), 5.0 * g(rng), 5.0 * g(rng));
  };
  Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
  k(0, 0) = k(1, 1) = 500.0;
  k(0, 2) = 320.0;
  k(1, 2) = 240.0;

  bool accurate = true;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::Matrix3d r;
    Eigen::Vector3d c;
    make_camera(r, c);
    std::vector<Correspondence2d3d> corr(10);
    for (auto& cc : corr) {
      const Eigen::Vector3d pc(20.0 * g(rng), 20.0 * g(rng),
                               8.0 + std::abs(6.0 * g(rng)));
      cc.point = c + r.transpose() * pc;
      const Eigen::Vector3d h = k * pc;
      cc.pixel = h.hnormalized();
    }
    const ProjectionMatrix est = dlt6(corr);
    for (const auto& cc : corr) {
      const double err = reproj_error(est, cc.pixel, cc.point);
      worst = std::max(worst, err);
      accurate = accurate && err < kReprojTol;
    }
    const Eigen::Vector3d center = camera_center(est);
    accurate = accurate && (center - c).norm() < 1e-6;
    accurate = accurate &&
               (camera_center(ProjectionMatrix(3.0 * est)) - center).norm() <
                   1e-9;
  }

  bool degenerate_detected = false;
  try {
    std::vector<Correspondence2d3d> line(6);
    Eigen::Matrix3d r;
    Eigen::Vector3d c;
    make_camera(r, c);
    const Eigen::Vector3d a = c + r.transpose() * Eigen::Vector3d(1, 1, 10);
    const Eigen::Vector3d b = c + r.transpose() * Eigen::Vector3d(3, -2, 14);
    for (int i = 0; i < 6; ++i) {
      line[i].point = a + 0.17 * i * (b - a);
      const Eigen::Vector3d pc = r * (line[i].point - c);
      line[i].pixel = (k * pc).hnormalized();
    }
    dlt6(line);
  } catch (const DegenerateGeometry&) {
    degenerate_detected = true;
  }

  report("pose solver accuracy and degeneracy detection",
         accurate && degenerate_detected,
         fmt("worst noise-free reprojection %.2e px (tol %g), collinear "
             "rejected: %s",
             worst, kReprojTol, degenerate_detected ? "yes" : "no"));
}

// --- criterion 6: end-to-end registration on the baseline scene -----------

synth::SceneSpec baseline_spec() {
  synth::SceneSpec spec;
  spec.seed = 111;
  spec.segments = 4;
  spec.points_per_segment = 500;
  spec.queries = 50;
  // The adaptive sampler stops after a handful of draws on clean data, so
  // its pose is a best-of-few minimal solve. Feature count and keypoint
  // noise are sized so that scatter stays inside the fast/fixed agreement
  // tolerance.
  spec.features_per_query = 200;
  spec.pixel_noise = 0.2f;
  return spec;
}

const synth::Scene& baseline_scene() {
  static const synth::Scene scene = synth::gen_scene(baseline_spec());
  return scene;
}

void check_baseline_registration() {
  constexpr double kMinRate = 0.95;
  constexpr double kMaxMedianM = 1.0;
  constexpr double kBudgetS = 120.0;

  const auto t0 = Clock::now();
  const synth::Scene& scene = baseline_scene();
  synth::BenchConfig config;
  config.ransac_seed = 1;
  const synth::BenchReport rep = synth::run_bench(scene, config);
  const double elapsed = seconds(t0, Clock::now());
  report("baseline scene registration",
         rep.registration_rate >= kMinRate &&
             rep.median_center_error_m <= kMaxMedianM && elapsed < kBudgetS,
         fmt("rate %.2f (min %.2f), median error %.3f m (max %.1f), %.0f s",
             rep.registration_rate, kMinRate, rep.median_center_error_m,
             kMaxMedianM, elapsed));
}

// --- criterion 7: repeated structure needs the 1-many lists ---------------

void check_repeated_structure() {
  constexpr int kSeeds = 20;
  constexpr double kMinMeanRatio = 1.3;

  double ratio_sum = 0.0;
  std::uint64_t many_reg = 0, one_reg = 0;
  for (int s = 0; s < kSeeds; ++s) {
    synth::SceneSpec spec;
    spec.seed = 200 + s;
    spec.segments = 2;
    spec.points_per_segment = 500;
    spec.queries = 30;
    spec.features_per_query = 120;
    spec.references_per_placemark = 2;
    spec.training_pool = 1024;
    spec.descriptor_noise = 0.25f;
    spec.repetition.groups = 210;
    spec.repetition.group_size = 4;
    spec.repetition.jitter = 0.25f;
    const synth::Scene scene = synth::gen_scene(spec);

    synth::BenchConfig config;
    config.compare_one_one = true;
    config.ransac_seed = 300 + s;
    const synth::BenchReport rep = synth::run_bench(scene, config);
    std::uint64_t many_in = 0, one_in = 0;
    for (const synth::QueryOutcome& out : rep.outcomes) {
      many_in += out.one_many_inliers;
      one_in += out.one_one_inliers;
      many_reg += out.one_many_registered ? 1 : 0;
      one_reg += out.one_one_registered ? 1 : 0;
    }
    ratio_sum += double(many_in) / double(std::max<std::uint64_t>(one_in, 1));
  }
  const double mean_ratio = ratio_sum / kSeeds;
  report("repeated structure: 1-many inlier gain",
         mean_ratio >= kMinMeanRatio && many_reg > one_reg,
         fmt("mean inlier ratio %.2f (min %.1f), registered %llu vs %llu "
             "over %d seeds",
             mean_ratio, kMinMeanRatio,
             static_cast<unsigned long long>(many_reg),
             static_cast<unsigned long long>(one_reg), kSeeds));
}

// --- criterion 8: adaptive verification agrees with and beats fixed -------

void check_adaptive_vs_fixed() {
  constexpr double kCenterTolM = 0.5;
  constexpr double kMinAgree = 0.95;
  constexpr double kMaxTimeRatio = 0.5;

  const synth::Scene& scene = baseline_scene();
  InMemoryModelSource source;
  for (std::size_t i = 0; i < scene.models.size(); ++i) {
    source.add(static_cast<std::uint32_t>(i),
               std::make_shared<const SubModel>(scene.models[i]));
  }
  LocalizeConfig fast_cfg;
  fast_cfg.ransac.seed = 17;
  LocalizeConfig fixed_cfg = fast_cfg;
  fixed_cfg.ransac.mode = RansacConfig::Mode::kFixedIterations;
  fixed_cfg.ransac.fixed_iterations = 5000;

  int both = 0, close = 0;
  for (const synth::SceneQuery& q : scene.queries) {
    const LocalizationResult a = localize(q.features, scene.hash,
                                          scene.codebook, scene.index, source,
                                          fast_cfg);
    const LocalizationResult b = localize(q.features, scene.hash,
                                          scene.codebook, scene.index, source,
                                          fixed_cfg);
    if (!a.registered || !b.registered) continue;
    ++both;
    close += (a.pose.center - b.pose.center).norm() <= kCenterTolM ? 1 : 0;
  }

  // Contaminated correspondence sets: half the strict pairs are incoherent.
  std::mt19937_64 rng(112);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-250.0, 250.0);
  double fast_s = 0.0, fixed_s = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    CorrespondenceSet set;
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = k(1, 1) = 500.0;
    k(0, 2) = 320.0;
    k(1, 2) = 240.0;
    const Eigen::Vector3d axis =
        Eigen::Vector3d(g(rng), g(rng), g(rng)).normalized();
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(0.2 * g(rng), axis).toRotationMatrix();
    const Eigen::Vector3d c(3.0 * g(rng), 3.0 * g(rng), 3.0 * g(rng));
    for (std::uint32_t i = 0; i < 60; ++i) {
      const Eigen::Vector3d pc(15.0 * g(rng), 15.0 * g(rng),
                               8.0 + std::abs(5.0 * g(rng)));
      const Eigen::Vector3d p = c + r.transpose() * pc;
      Eigen::Vector2d pix = (k * pc).hnormalized();
      if (i % 2 == 1) pix += Eigen::Vector2d(shift(rng), shift(rng));
      VerificationRecord v;
      v.query_index = i;
      v.pixel = pix.cast<float>();
      v.candidates.push_back({i, p.cast<float>(), 0.5f});
      set.hypothesis.push_back(i);
      set.verification.push_back(std::move(v));
    }
    set.total_queries = set.processed_queries = 60;

    RansacConfig fast_rc;
    fast_rc.seed = 400 + inst;
    RansacConfig fixed_rc = fast_rc;
    fixed_rc.mode = RansacConfig::Mode::kFixedIterations;
    fixed_rc.fixed_iterations = 5000;

    const auto t0 = Clock::now();
    const PoseResult fr = ransac_1m(set, fast_rc);
    const auto t1 = Clock::now();
    const PoseResult xr = ransac_1m(set, fixed_rc);
    const auto t2 = Clock::now();
    fast_s += seconds(t0, t1);
    fixed_s += seconds(t1, t2);
    if (!fr.valid || !xr.valid) {
      report("adaptive vs fixed verification", false,
             "a contaminated instance failed to fit");
      return;
    }
  }
  const double agree = both > 0 ? double(close) / double(both) : 0.0;
  const double time_ratio = fast_s / std::max(fixed_s, 1e-9);
  report("adaptive vs fixed verification",
         both > 0 && agree >= kMinAgree && time_ratio <= kMaxTimeRatio,
         fmt("centers within %.1f m on %.0f%% of %d queries (min %.0f%%), "
             "time ratio %.3f (max %.2f)",
             kCenterTolM, 100.0 * agree, both, 100.0 * kMinAgree, time_ratio,
             kMaxTimeRatio));
}

// --- criterion 9: prioritized early stop keeps registration, halves work --

void check_prioritized_early_stop() {
  constexpr std::uint32_t kEarly = 100;
  constexpr std::uint32_t kStrictFloor = 200;
  constexpr double kMaxRegDrop = 0.02;
  constexpr double kMaxMatchRatio = 0.5;

  synth::SceneSpec spec;
  spec.seed = 113;
  spec.segments = 2;
  // Early stopping pays only when coarse lists are rarely empty: with tiny
  // models most features carry no candidates, are ordered first, and yield
  // no strict matches, so the processed prefix stretches over the cheap
  // part of the work. At this scale every list is populated and the
  // hundred strict matches arrive within the first fifth of the features.
  spec.points_per_segment = 10000;
  spec.queries = 30;
  spec.features_per_query = 600;
  spec.references_per_placemark = 2;
  spec.training_pool = 1024;
  const synth::Scene scene = synth::gen_scene(spec);

  CascadeParams exhaustive;
  exhaustive.n_early = 0;
  CascadeParams early;
  early.n_early = kEarly;

  RansacConfig rc;
  rc.seed = 23;

  int eligible = 0, reg_full = 0, reg_early = 0;
  double full_s = 0.0, early_s = 0.0;
  for (const synth::SceneQuery& q : scene.queries) {
    const SubModel& model = scene.models[q.segment_id];
    const auto t0 = Clock::now();
    const CorrespondenceSet full = prioritized_match(model, q.features,
                                                     scene.hash,
                                                     scene.codebook,
                                                     exhaustive);
    const auto t1 = Clock::now();
    const CorrespondenceSet quick = prioritized_match(model, q.features,
                                                      scene.hash,
                                                      scene.codebook, early);
    const auto t2 = Clock::now();
    if (full.n_h() < kStrictFloor) continue;
    ++eligible;
    full_s += seconds(t0, t1);
    early_s += seconds(t1, t2);
    const PoseResult a = ransac_1m(full, rc);
    const PoseResult b = ransac_1m(quick, rc);
    reg_full += (a.valid && a.inliers.size() >= 12) ? 1 : 0;
    reg_early += (b.valid && b.inliers.size() >= 12) ? 1 : 0;
  }
  const double drop = eligible > 0
                          ? double(reg_full - reg_early) / double(eligible)
                          : 1.0;
  const double ratio = early_s / std::max(full_s, 1e-9);
  report("prioritized early stop",
         eligible >= 20 && drop <= kMaxRegDrop && ratio <= kMaxMatchRatio,
         fmt("%d eligible queries, registered %d vs %d (drop %.1f%%), match "
             "time ratio %.3f (max %.2f)",
             eligible, reg_full, reg_early, 100.0 * drop, ratio,
             kMaxMatchRatio));
}

// --- criterion 10: model file size tracks the documented layout -----------

void check_serialized_size() {
  constexpr double kTol = 0.10;
  bool ok = true;
  std::string detail;
  for (std::size_t n : {std::size_t{1000}, std::size_t{100000}}) {
    const auto recs = random_records(n, 114);
    const SubModel model = SubModel::from_records(recs, {}, 0, 0);
    const double actual = double(model.serialize().size());
    const double nominal = 8.0 * 65536.0 * 4.0 + 76.0 * double(n);
    const double rel = std::abs(actual - nominal) / nominal;
    ok = ok && rel <= kTol;
    detail += fmt("n=%zu: %.0f bytes vs %.0f nominal (%.1f%%); ", n, actual,
                  nominal, 100.0 * rel);
  }
  report("serialized model size", ok, detail + fmt("tol %.0f%%", 100.0 * kTol));
}

// --- criterion 11: coarse candidate lists stay sparse at scale ------------

void check_sparsity_at_scale() {
  constexpr std::size_t kPoints = 1000000;
  constexpr int kQueries = 200;
  constexpr double kMinFrac = 0.0001;  // 0.01%
  constexpr double kMaxFrac = 0.005;   // 0.5%

  const auto recs = random_records(kPoints, 115);
  const SubModel model = SubModel::from_records(recs, {}, 0, 0);
  std::mt19937_64 rng(116);
  double total = 0.0;
  for (int i = 0; i < kQueries; ++i) {
    BinaryCode q;
    q.words = {rng(), rng()};
    total += double(coarse_lookup(model, q).size());
  }
  const double frac = total / kQueries / double(kPoints);
  report("coarse list sparsity at one million points",
         frac >= kMinFrac && frac <= kMaxFrac,
         fmt("mean fraction %.5f%% (window %.2f%%..%.2f%%)", 100.0 * frac,
             100.0 * kMinFrac, 100.0 * kMaxFrac));
}

// --- criterion 12: full pipeline beats retrieval-only localization --------

void check_pipeline_beats_retrieval() {
  constexpr int kSeeds = 10;
  int wins = 0;
  std::string detail;
  for (int s = 0; s < kSeeds; ++s) {
    synth::SceneSpec spec;
    spec.seed = 500 + s;
    spec.segments = 2;
    spec.points_per_segment = 400;
    spec.queries = 12;
    spec.features_per_query = 100;
    spec.references_per_placemark = 2;
    spec.training_pool = 1024;
    const synth::Scene scene = synth::gen_scene(spec);
    synth::BenchConfig config;
    config.ransac_seed = 600 + s;
    const synth::BenchReport rep = synth::run_bench(scene, config);
    const bool win = rep.n_registered > 0 &&
                     rep.median_center_error_m <
                         rep.retrieval_only_median_error_m;
    wins += win ? 1 : 0;
    if (!win) detail += fmt("seed %d: %.3f vs %.3f m; ", 500 + s,
                            rep.median_center_error_m,
                            rep.retrieval_only_median_error_m);
  }
  report("pipeline beats retrieval-only baseline", wins == kSeeds,
         detail + fmt("%d/%d seeds", wins, kSeeds));
}

}  // namespace

int main() {
  check_coarse_recall();
  check_cascade_oracles();
  check_adc_accuracy();
  check_hash_training();
  check_pose_solver();
  check_baseline_registration();
  check_repeated_structure();
  check_adaptive_vs_fixed();
  check_prioritized_early_stop();
  check_serialized_size();
  check_sparsity_at_scale();
  check_pipeline_beats_retrieval();

  if (g_failures == 0) {
    std::printf("all criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", g_failures);
  return 1;
}
