// Command line front end: offline model building, single-query localization
// and the synthetic benchmark, wired to the same library the tests use.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ccs/io.hpp"
#include "ccs/pipeline.hpp"
#include "ccs/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<ccs::Descriptor> descriptors_of(const fs::path& features_file) {
  const auto feats =
      ccs::deserialize_query_features(ccs::io::read_file(features_file));
  std::vector<ccs::Descriptor> out;
  out.reserve(feats.size());
  for (const auto& f : feats) out.push_back(f.descriptor);
  return out;
}

void write_features(const fs::path& path,
                    std::span<const ccs::QueryFeature> feats) {
  ccs::io::write_file(path, ccs::serialize_query_features(feats));
}

// Points file: magic "CCSP", version byte, point count, then per point the
// id, 3-float position, observation count and the observations themselves.
// The offline input to build-model; one observation per point is enough when
// descriptors were already pooled upstream.
constexpr std::uint8_t kPointsVersion = 1;

void write_points(const fs::path& path,
                  std::span<const ccs::PointInput> points) {
  ccs::io::Writer w;
  w.magic("CCSP");
  w.u8(kPointsVersion);
  w.u32(static_cast<std::uint32_t>(points.size()));
  for (const auto& p : points) {
    w.u32(p.id);
    for (int i = 0; i < 3; ++i) w.f32(p.position[i]);
    w.u16(static_cast<std::uint16_t>(p.observations.size()));
    for (const auto& d : p.observations)
      for (int i = 0; i < ccs::kDescriptorDim; ++i) w.f32(d[i]);
  }
  ccs::io::write_file(path, w.data());
}

std::vector<ccs::PointInput> read_points(const fs::path& path) {
  const auto bytes = ccs::io::read_file(path);
  ccs::io::Reader r(bytes);
  r.expect_magic("CCSP");
  if (r.u8() != kPointsVersion)
    throw ccs::ParseError("unsupported points file version");
  std::vector<ccs::PointInput> points(r.u32());
  for (auto& p : points) {
    p.id = r.u32();
    for (int i = 0; i < 3; ++i) p.position[i] = r.f32();
    p.observations.resize(r.u16());
    for (auto& d : p.observations)
      for (int i = 0; i < ccs::kDescriptorDim; ++i) d[i] = r.f32();
  }
  r.require_done();
  return points;
}

int run_train_hash(const fs::path& features, const fs::path& out,
                   int iterations, std::uint64_t seed) {
  ccs::ItqOptions opts;
  opts.iterations = iterations;
  opts.seed = seed;
  const auto descriptors = descriptors_of(features);
  const ccs::HashModel model = ccs::train_hash(descriptors, opts);
  ccs::io::write_file(out, ccs::serialize_hash_model(model));
  std::printf("trained on %zu descriptors, final loss %.6f -> %s\n",
              descriptors.size(), model.meta.losses.back(),
              out.string().c_str());
  return 0;
}

int run_train_pq(const fs::path& features, const fs::path& out,
                 int iterations, std::uint64_t seed) {
  ccs::PqTrainOptions opts;
  opts.iterations = iterations;
  opts.seed = seed;
  const auto descriptors = descriptors_of(features);
  const ccs::PQCodebook codebook = ccs::train_pq(descriptors, opts);
  ccs::io::write_file(out, ccs::serialize_codebook(codebook));
  std::printf("trained on %zu descriptors -> %s\n", descriptors.size(),
              out.string().c_str());
  return 0;
}

int run_build_model(const fs::path& points_file, const fs::path& hash_file,
                    const fs::path& codebook_file, const fs::path& out,
                    const ccs::SegmentMeta& meta) {
  const auto points = read_points(points_file);
  const auto hash =
      ccs::deserialize_hash_model(ccs::io::read_file(hash_file));
  const auto codebook =
      ccs::deserialize_codebook(ccs::io::read_file(codebook_file));
  const ccs::SubModel model = ccs::SubModel::build(points, hash, codebook, meta);
  const auto bytes = model.serialize();
  ccs::io::write_file(out, bytes);
  std::printf("%zu points, %zu bytes -> %s\n", model.size(), bytes.size(),
              out.string().c_str());
  return 0;
}

int run_build_index(const fs::path& manifest_file, const fs::path& out) {
  const json manifest = json::parse(read_text(manifest_file));
  const fs::path base = manifest_file.parent_path();
  std::vector<ccs::ImageInput> images;
  for (const auto& entry : manifest) {
    ccs::ImageInput img;
    img.id = entry.at("id").get<std::uint32_t>();
    img.model_ids = entry.at("models").get<std::vector<std::uint32_t>>();
    img.descriptors =
        descriptors_of(base / entry.at("features").get<std::string>());
    images.push_back(std::move(img));
  }
  const ccs::SegmentIndex index = ccs::SegmentIndex::build(images);
  ccs::io::write_file(out, index.serialize());
  std::printf("%zu images -> %s\n", index.images().size(),
              out.string().c_str());
  return 0;
}

json pose_json(const ccs::PoseResult& pose) {
  json j;
  j["center"] = {pose.center.x(), pose.center.y(), pose.center.z()};
  json rows = json::array();
  for (int r = 0; r < 3; ++r)
    rows.push_back({pose.matrix(r, 0), pose.matrix(r, 1), pose.matrix(r, 2),
                    pose.matrix(r, 3)});
  j["matrix"] = rows;
  j["inliers"] = pose.inliers.size();
  j["iterations"] = pose.iterations;
  j["sprt_rejections"] = pose.sprt_rejections;
  return j;
}

int run_localize(const fs::path& query, const fs::path& index_file,
                 const fs::path& models_dir, fs::path hash_file,
                 fs::path codebook_file, const ccs::LocalizeConfig& cfg,
                 bool as_json) {
  if (hash_file.empty()) hash_file = models_dir / "hash.ccsh";
  if (codebook_file.empty()) codebook_file = models_dir / "codebook.ccsq";

  const auto features =
      ccs::deserialize_query_features(ccs::io::read_file(query));
  const auto hash = ccs::deserialize_hash_model(ccs::io::read_file(hash_file));
  const auto codebook =
      ccs::deserialize_codebook(ccs::io::read_file(codebook_file));
  const auto index =
      ccs::SegmentIndex::deserialize(ccs::io::read_file(index_file));
  ccs::DirectoryModelSource dir(models_dir);
  ccs::CachingModelSource cache(dir, cfg.max_models);

  const ccs::LocalizationResult res =
      ccs::localize(features, hash, codebook, index, cache, cfg);

  if (as_json) {
    json j;
    j["registered"] = res.registered;
    j["model_id"] = res.model_id ? json(*res.model_id) : json(nullptr);
    if (!res.registered) j["failure_reason"] = res.failure_reason;
    if (res.pose.valid) j["pose"] = pose_json(res.pose);
    json per_model = json::array();
    for (const auto& m : res.per_model) {
      json mj;
      mj["model_id"] = m.model_id;
      mj["strict"] = m.strict;
      mj["verification"] = m.verification;
      mj["processed"] = m.processed;
      mj["ransac_inliers"] =
          m.ransac_inliers ? json(*m.ransac_inliers) : json(nullptr);
      per_model.push_back(std::move(mj));
    }
    j["per_model"] = std::move(per_model);
    j["timings_s"] = {{"retrieval", res.timings.retrieval_s},
                      {"load", res.timings.load_s},
                      {"match", res.timings.match_s},
                      {"ransac", res.timings.ransac_s},
                      {"total", res.timings.total_s}};
    std::cout << j.dump(2) << "\n";
  } else if (res.registered) {
    std::printf("registered via model %u: %zu inliers, center %.3f %.3f %.3f "
                "(%.3f s)\n",
                *res.model_id, res.pose.inliers.size(), res.pose.center.x(),
                res.pose.center.y(), res.pose.center.z(),
                res.timings.total_s);
  } else {
    std::printf("not registered: %s\n", res.failure_reason.c_str());
  }
  return res.registered ? 0 : 2;
}

int run_gen_scene(const fs::path& spec_file, const fs::path& out) {
  const ccs::synth::SceneSpec spec =
      ccs::synth::scene_spec_from_json(read_text(spec_file));
  const ccs::synth::Scene scene = ccs::synth::gen_scene(spec);

  const fs::path package = out / "package";
  const fs::path points_dir = out / "points";
  const fs::path refs_dir = out / "refs";
  const fs::path queries_dir = out / "queries";
  const fs::path training_dir = out / "training";
  for (const auto& d : {package, points_dir, refs_dir, queries_dir,
                        training_dir})
    fs::create_directories(d);

  ccs::io::write_file(package / "hash.ccsh",
                      ccs::serialize_hash_model(scene.hash));
  ccs::io::write_file(package / "codebook.ccsq",
                      ccs::serialize_codebook(scene.codebook));
  ccs::io::write_file(package / "index.ccsi", scene.index.serialize());
  for (std::size_t m = 0; m < scene.models.size(); ++m) {
    ccs::io::write_file(
        package / ("model_" + std::to_string(m) + ".ccsm"),
        scene.models[m].serialize());
  }

  // Rebuild inputs: pooled per-point descriptors as single observations.
  for (std::size_t m = 0; m < scene.models.size(); ++m) {
    std::vector<ccs::PointInput> points;
    points.reserve(scene.models[m].size());
    for (const auto& rec : scene.models[m].points()) {
      ccs::PointInput p;
      p.id = rec.id;
      p.position = scene.point_positions[rec.id];
      p.observations.push_back(scene.pooled_descriptors[rec.id]);
      points.push_back(std::move(p));
    }
    write_points(points_dir / ("segment_" + std::to_string(m) + ".ccsp"),
                 points);
  }

  json references = json::array();
  for (const auto& img : scene.index.images()) {
    const std::string rel =
        "refs/ref_" + std::to_string(img.id) + ".ccsf";
    const ccs::QueryFeature f{{0.0f, 0.0f}, img.global};
    write_features(out / rel, {&f, 1});
    json entry;
    entry["id"] = img.id;
    entry["models"] = img.model_ids;
    entry["features"] = rel;
    references.push_back(std::move(entry));
  }
  std::ofstream(out / "references.json") << references.dump(2) << "\n";

  {
    std::vector<ccs::QueryFeature> pool;
    pool.reserve(scene.pooled_descriptors.size());
    for (const auto& d : scene.pooled_descriptors)
      pool.push_back({{0.0f, 0.0f}, d});
    write_features(training_dir / "pool.ccsf", pool);
  }

  json truth;
  truth["scene"] = {{"segments", spec.segments},
                    {"points", scene.pooled_descriptors.size()},
                    {"queries", scene.queries.size()},
                    {"diameter_m", 100.0}};
  json queries = json::array();
  for (std::size_t k = 0; k < scene.queries.size(); ++k) {
    const auto& q = scene.queries[k];
    const std::string rel = "queries/query_" + std::to_string(k) + ".ccsf";
    write_features(out / rel, q.features);
    json entry;
    entry["file"] = rel;
    entry["segment_id"] = q.segment_id;
    entry["center"] = {q.center.x(), q.center.y(), q.center.z()};
    queries.push_back(std::move(entry));
  }
  truth["queries"] = std::move(queries);
  std::ofstream(out / "ground_truth.json") << truth.dump(2) << "\n";

  std::printf("%zu models, %zu reference images, %zu queries -> %s\n",
              scene.models.size(), scene.index.images().size(),
              scene.queries.size(), out.string().c_str());
  return 0;
}

int run_bench_cmd(const fs::path& spec_file, const fs::path& out,
                  const std::string& mode, std::uint64_t ransac_seed,
                  std::uint32_t n_early, bool compare_one_one) {
  const ccs::synth::SceneSpec spec =
      ccs::synth::scene_spec_from_json(read_text(spec_file));
  const ccs::synth::Scene scene = ccs::synth::gen_scene(spec);

  ccs::synth::BenchConfig cfg;
  cfg.mode = mode == "fixed5000" ? ccs::RansacConfig::Mode::kFixedIterations
                                 : ccs::RansacConfig::Mode::kFastSprt;
  cfg.ransac_seed = ransac_seed;
  cfg.n_early = n_early;
  cfg.compare_one_one = compare_one_one;

  const ccs::synth::BenchReport report = ccs::synth::run_bench(scene, cfg);
  ccs::synth::write_bench_outputs(report, out);
  std::printf("%u/%u registered (%.1f%%), median error %.3f m -> %s\n",
              report.n_registered, report.n_queries,
              100.0 * report.registration_rate,
              report.median_center_error_m, out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cascade correspondence search localization"};
  app.require_subcommand(1);

  fs::path features, out, points_file, hash_file, codebook_file, query,
      index_file, models_dir, manifest, spec_file;
  int iterations = 0;
  std::uint64_t seed = 0;

  auto* train_hash = app.add_subcommand(
      "train-hash", "learn the binary hash from a descriptor sample");
  train_hash->add_option("--features", features, "training features (.ccsf)")
      ->required();
  train_hash->add_option("--out", out, "output hash model (.ccsh)")
      ->required();
  train_hash->add_option("--iterations", iterations, "rotation refinements")
      ->default_val(50);
  train_hash->add_option("--seed", seed, "rng seed")->default_val(0);

  auto* train_pq = app.add_subcommand(
      "train-pq", "learn the product quantizer from a descriptor sample");
  train_pq->add_option("--features", features, "training features (.ccsf)")
      ->required();
  train_pq->add_option("--out", out, "output codebook (.ccsq)")->required();
  train_pq->add_option("--iterations", iterations, "k-means iterations")
      ->default_val(25);
  train_pq->add_option("--seed", seed, "rng seed")->default_val(0);

  ccs::SegmentMeta meta;
  auto* build_model = app.add_subcommand(
      "build-model", "encode a point set into a searchable sub-model");
  build_model->add_option("--points", points_file, "point records (.ccsp)")
      ->required();
  build_model->add_option("--hash", hash_file, "hash model (.ccsh)")
      ->required();
  build_model->add_option("--codebook", codebook_file, "codebook (.ccsq)")
      ->required();
  build_model->add_option("--out", out, "output model (.ccsm)")->required();
  build_model->add_option("--segment-id", meta.segment_id, "segment id")
      ->default_val(0);
  build_model
      ->add_option("--placemark-begin", meta.placemark_begin,
                   "first placemark covered")
      ->default_val(0);
  build_model
      ->add_option("--placemark-end", meta.placemark_end,
                   "one past the last placemark covered")
      ->default_val(0);
  build_model->add_option("--overlap", meta.overlap, "placemarks shared")
      ->default_val(0);

  auto* build_index = app.add_subcommand(
      "build-index", "build the image retrieval index from a manifest");
  build_index
      ->add_option("--manifest", manifest,
                   "json array of {id, models, features} entries")
      ->required();
  build_index->add_option("--out", out, "output index (.ccsi)")->required();

  ccs::LocalizeConfig lcfg;
  std::string mode = "fast";
  bool as_json = false;
  auto* localize = app.add_subcommand(
      "localize", "estimate the camera pose of one query image");
  localize->add_option("--query", query, "query features (.ccsf)")
      ->required();
  localize->add_option("--index", index_file, "retrieval index (.ccsi)")
      ->required();
  localize
      ->add_option("--models", models_dir,
                   "directory with model_<id>.ccsm plus hash.ccsh and "
                   "codebook.ccsq")
      ->required();
  localize->add_option("--hash", hash_file, "hash model override");
  localize->add_option("--codebook", codebook_file, "codebook override");
  localize->add_option("--seed", lcfg.ransac.seed, "ransac seed")
      ->default_val(0);
  localize->add_option("--mode", mode, "verification mode")
      ->check(CLI::IsMember({"fast", "fixed5000"}))
      ->default_val("fast");
  localize
      ->add_option("--n-early", lcfg.cascade.n_early,
                   "stop matching after this many strict pairs (0 = never)")
      ->default_val(100);
  localize->add_option("--nu-h", lcfg.cascade.nu_h, "strict ratio threshold")
      ->default_val(0.8f);
  localize->add_option("--nu", lcfg.cascade.nu, "relaxed ratio threshold")
      ->default_val(0.9f);
  localize
      ->add_option("--m-cands", lcfg.cascade.m,
                   "relaxed candidates kept per feature")
      ->default_val(5);
  localize->add_flag("--json", as_json, "machine readable result");

  std::uint64_t ransac_seed = 0;
  std::uint32_t n_early = 100;
  bool compare_one_one = false;
  auto* bench = app.add_subcommand(
      "bench", "generate a synthetic scene and benchmark the pipeline");
  bench->add_option("--spec", spec_file, "scene spec (json)")->required();
  bench->add_option("--out", out, "output directory")->required();
  bench->add_option("--mode", mode, "verification mode")
      ->check(CLI::IsMember({"fast", "fixed5000"}))
      ->default_val("fast");
  bench->add_option("--ransac-seed", ransac_seed, "ransac seed")
      ->default_val(0);
  bench->add_option("--n-early", n_early, "matching early-stop count")
      ->default_val(100);
  bench->add_flag("--compare-one-one", compare_one_one,
                  "also verify with strict pairs only");

  auto* gen_scene = app.add_subcommand(
      "gen-scene", "write a synthetic scene as loadable files");
  gen_scene->add_option("--spec", spec_file, "scene spec (json)")->required();
  gen_scene->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_hash) return run_train_hash(features, out, iterations, seed);
    if (*train_pq) return run_train_pq(features, out, iterations, seed);
    if (*build_model)
      return run_build_model(points_file, hash_file, codebook_file, out, meta);
    if (*build_index) return run_build_index(manifest, out);
    if (*localize) {
      lcfg.ransac.mode = mode == "fixed5000"
                             ? ccs::RansacConfig::Mode::kFixedIterations
                             : ccs::RansacConfig::Mode::kFastSprt;
      return run_localize(query, index_file, models_dir, hash_file,
                          codebook_file, lcfg, as_json);
    }
    if (*bench)
      return run_bench_cmd(spec_file, out, mode, ransac_seed, n_early,
                           compare_one_one);
    if (*gen_scene) return run_gen_scene(spec_file, out);
  } catch (const std::exception& e) {
    std::cerr << "ccs: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
