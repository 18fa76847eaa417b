// anthro: batch pipeline driver.
//
//   synth    generate a procedural body population (OBJ + joints + truth)
//   measure  compute the eight dimensions for every manifest record
//   render   rasterize every record to a 200x200 PGM
//   train    k-fold training + evaluation, checkpoints and report
//   eval     re-evaluate from saved checkpoints
//   report   regenerate a report from a persisted results tensor
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 partial failure.

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "anthro/experiment.hpp"
#include "anthro/manifest.hpp"
#include "anthro/measure.hpp"
#include "anthro/mesh_io.hpp"
#include "anthro/render.hpp"
#include "anthro/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace anthro;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

// Applies values from a JSON config file to options the user did not pass on
// the command line (flags win).
void apply_config(CLI::App& app, const std::string& config_path) {
  if (config_path.empty()) return;
  std::ifstream in(config_path);
  if (!in) throw DataError("cannot open config file: " + config_path);
  json cfg;
  in >> cfg;
  for (auto* opt : app.get_options()) {
    if (opt->count() > 0) continue;
    const auto& lnames = opt->get_lnames();
    if (lnames.empty()) continue;
    const std::string& name = lnames.front();
    if (!cfg.contains(name)) continue;
    const auto& v = cfg.at(name);
    opt->add_result(v.is_string() ? v.get<std::string>() : v.dump());
    opt->run_callback();
  }
}

// Bounded per-record parallelism; error strings collected per index so the
// output does not depend on scheduling.
template <class Fn>
std::vector<std::string> for_each_record(size_t count, int jobs, Fn&& fn) {
  std::vector<std::string> errors(count);
  jobs = std::max(1, jobs);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        fn(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return errors;
}

int report_partial(const std::vector<SubjectRecord>& records,
                   const std::vector<std::string>& errors) {
  int failed = 0;
  for (size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) {
      ++failed;
      std::cerr << "error: " << records[i].id << ": " << errors[i] << "\n";
    }
  if (failed == 0) return kExitOk;
  std::cerr << failed << "/" << errors.size() << " records failed\n";
  return failed == static_cast<int>(errors.size()) ? kExitData : kExitPartial;
}

std::string id_stem(const SubjectRecord& r) { return r.id; }

// ---------------------------------------------------------------------------

int cmd_synth(int n, uint64_t seed, const std::string& out_dir, bool force,
              int facets) {
  if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force)
    throw DataError("output directory exists and is not empty (use --force): " +
                    out_dir);
  fs::create_directories(fs::path(out_dir) / "meshes");
  fs::create_directories(fs::path(out_dir) / "joints");
  fs::create_directories(fs::path(out_dir) / "truth");

  ParamRanges ranges;
  ranges.facets = facets;
  const auto population = generate_population(n, seed, ranges);

  json cfg = {{"command", "synth"}, {"n", n}, {"facets", facets}};
  const std::string prov = make_provenance(seed, cfg.dump(), "");

  std::vector<SubjectRecord> records;
  for (const auto& subj : population) {
    SubjectRecord rec;
    rec.id = subj.subject_id + "_" + to_string(subj.pose);
    rec.gender = subj.gender;
    rec.pose = subj.pose;
    rec.mesh_path = "meshes/" + rec.id + ".obj";
    rec.joints_path = "joints/" + rec.id + ".json";
    rec.truth_path = "truth/" + rec.id + ".json";
    records.push_back(rec);
  }
  const auto errors = for_each_record(
      population.size(), static_cast<int>(std::thread::hardware_concurrency()),
      [&](size_t i) {
        const auto& subj = population[i];
        const auto& rec = records[i];
        save_mesh(subj.body.mesh,
                  resolve_relative(out_dir + "/manifest.json", rec.mesh_path),
                  "provenance " + prov);
        save_joints(subj.body.joints,
                    resolve_relative(out_dir + "/manifest.json",
                                     rec.joints_path),
                    prov);
        json truth;
        truth["id"] = rec.id;
        truth["gender"] = to_string(rec.gender);
        truth["pose"] = to_string(rec.pose);
        for (int d = 0; d < kNumDims; ++d) {
          truth["hbd"][dim_names()[d]] = subj.body.truth.values[d];
          truth["tolerance"][dim_names()[d]] = subj.body.truth.tolerance[d];
        }
        truth["provenance"] = json::parse(prov);
        std::ofstream out(
            resolve_relative(out_dir + "/manifest.json", rec.truth_path));
        out << truth.dump(2) << "\n";
      });
  write_manifest(out_dir + "/manifest.json", records, prov);
  std::cout << "wrote " << records.size() << " records to " << out_dir << "\n";
  return report_partial(records, errors);
}

int cmd_measure(const std::string& manifest_path, const std::string& out_dir,
                double tol, double fraction, int jobs) {
  const auto records = read_manifest(manifest_path);
  fs::create_directories(out_dir);
  MeasurementConfig cfg;
  cfg.tol = tol;
  cfg.shoulder_plane_height_fraction = fraction;
  cfg.validate();

  json jcfg = {{"command", "measure"},
               {"tol", tol},
               {"shoulder_plane_height_fraction", fraction}};
  const std::string prov =
      make_provenance(0, jcfg.dump(), hex64(fnv1a64_file(manifest_path)));

  std::vector<HbdVector> measured(records.size());
  const auto errors = for_each_record(records.size(), jobs, [&](size_t i) {
    const auto& rec = records[i];
    const TriMesh mesh =
        load_mesh(resolve_relative(manifest_path, rec.mesh_path));
    const JointSet joints =
        load_joints(resolve_relative(manifest_path, rec.joints_path));
    measured[i] = measure_all(mesh, joints, cfg);
    save_hbd_json(out_dir + "/" + id_stem(rec) + ".json", rec, measured[i],
                  prov);
  });

  std::vector<std::pair<SubjectRecord, HbdVector>> rows;
  for (size_t i = 0; i < records.size(); ++i)
    if (errors[i].empty()) rows.emplace_back(records[i], measured[i]);
  save_measurements_csv(out_dir + "/measurements.csv", rows, prov);
  std::cout << "measured " << rows.size() << "/" << records.size()
            << " records\n";
  return report_partial(records, errors);
}

int cmd_render(const std::string& manifest_path, const std::string& out_dir,
               const CameraConfig& cam, int jobs) {
  const auto records = read_manifest(manifest_path);
  fs::create_directories(out_dir);
  json jcfg = {{"command", "render"},
               {"resolution", cam.resolution},
               {"ortho_scale", cam.ortho_scale},
               {"camera_distance", cam.camera_distance},
               {"background", int(cam.background)},
               {"focal_length_mm", cam.focal_length_mm},
               {"sensor_size_mm", cam.sensor_size_mm}};
  const std::string prov =
      make_provenance(0, jcfg.dump(), hex64(fnv1a64_file(manifest_path)));
  const auto errors = for_each_record(records.size(), jobs, [&](size_t i) {
    const auto& rec = records[i];
    const TriMesh mesh =
        load_mesh(resolve_relative(manifest_path, rec.mesh_path));
    const GrayImage img = render_orthographic(mesh, cam);
    write_pgm(img, out_dir + "/" + id_stem(rec) + ".pgm", "provenance " + prov);
  });
  std::cout << "rendered " << records.size() - std::count_if(
                   errors.begin(), errors.end(),
                   [](const std::string& e) { return !e.empty(); })
            << "/" << records.size() << " records\n";
  return report_partial(records, errors);
}

std::vector<TrainItem> load_items(const std::string& manifest_path,
                                  const std::string& images_dir,
                                  const std::string& truth_dir) {
  const auto records = read_manifest(manifest_path);
  std::vector<TrainItem> items;
  for (const auto& rec : records) {
    TrainItem item;
    item.id = rec.id;
    item.image = read_pgm(images_dir + "/" + id_stem(rec) + ".pgm");
    item.truth = load_hbd_json(truth_dir + "/" + id_stem(rec) + ".json");
    items.push_back(std::move(item));
  }
  if (items.empty()) throw DataError("manifest lists no records");
  return items;
}

void write_experiment_outputs(const ExperimentOutput& out,
                              const std::string& out_dir,
                              const std::string& prov) {
  MetricsReport rep = out.report;
  rep.provenance_json = prov;
  save_results(out.results, out_dir + "/results.bin", out_dir + "/results.json",
               prov);
  {
    std::ofstream r(out_dir + "/report.json");
    r << report_json(rep) << "\n";
  }
  {
    std::ofstream r(out_dir + "/report.txt");
    r << report_table(rep);
  }
  std::cout << report_table(rep);
}

int cmd_train(const std::string& manifest_path, const std::string& images_dir,
              const std::string& truth_dir, const std::string& out_dir, int k,
              uint64_t seed, const nn::TrainConfig& tcfg, bool bn2) {
  const auto items = load_items(manifest_path, images_dir, truth_dir);
  fs::create_directories(out_dir);
  json jcfg = {{"command", "train"},
               {"k", k},
               {"lr", tcfg.lr},
               {"momentum", tcfg.momentum},
               {"batch_size", tcfg.batch_size},
               {"epochs", tcfg.epochs},
               {"hidden", tcfg.hidden},
               {"relu_bn_after_conv2", bn2},
               {"weight_init", "uniform(-1/sqrt(fan_in), 1/sqrt(fan_in))"},
               {"input_scaling", "pixels / 255"}};
  const std::string prov =
      make_provenance(seed, jcfg.dump(), hex64(fnv1a64_file(manifest_path)));

  auto out = run_experiment(items, tcfg, k, seed, bn2, &std::cout);
  for (int f = 0; f < k; ++f) {
    json meta = {{"fold", f}, {"provenance", json::parse(prov)}};
    nn::save_checkpoint(out.fold_models[f],
                        out_dir + "/fold_" + std::to_string(f) + ".ckpt",
                        meta.dump());
  }
  write_experiment_outputs(out, out_dir, prov);
  return kExitOk;
}

int cmd_eval(const std::string& manifest_path, const std::string& images_dir,
             const std::string& truth_dir, const std::string& checkpoints_dir,
             const std::string& out_dir, int k, uint64_t seed) {
  const auto items = load_items(manifest_path, images_dir, truth_dir);
  fs::create_directories(out_dir);
  std::vector<nn::Network<float>> models;
  for (int f = 0; f < k; ++f) {
    const std::string path =
        checkpoints_dir + "/fold_" + std::to_string(f) + ".ckpt";
    if (!fs::exists(path)) throw DataError("missing checkpoint: " + path);
    models.push_back(nn::load_checkpoint<float>(path));
  }
  json jcfg = {{"command", "eval"}, {"k", k}};
  const std::string prov =
      make_provenance(seed, jcfg.dump(), hex64(fnv1a64_file(manifest_path)));

  const auto split = kfold_split(static_cast<int>(items.size()), k, seed);
  ExperimentOutput out;
  out.split = split;
  out.results = evaluate_folds(items, split, models);
  MetricsReport m = metrics_from_results(out.results);
  out.report = m;
  write_experiment_outputs(out, out_dir, prov);
  return kExitOk;
}

int cmd_report(const std::string& results_json, const std::string& out_dir) {
  const ResultsTensor results = load_results(results_json);
  fs::create_directories(out_dir);
  MetricsReport rep = metrics_from_results(results);
  json jcfg = {{"command", "report"}};
  rep.provenance_json =
      make_provenance(0, jcfg.dump(), hex64(fnv1a64_file(results_json)));
  {
    std::ofstream r(out_dir + "/report.json");
    r << report_json(rep) << "\n";
  }
  {
    std::ofstream r(out_dir + "/report.txt");
    r << report_table(rep);
  }
  std::cout << report_table(rep);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mesh anthropometry pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file; command-line flags take precedence");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a procedural population");
  int n = 10, facets = 16;
  uint64_t seed = 0;
  std::string out_dir = "out";
  bool force = false;
  synth->add_option("--n", n, "subject count (two meshes each)");
  synth->add_option("--seed", seed);
  synth->add_option("--out", out_dir)->required();
  synth->add_option("--facets", facets);
  synth->add_flag("--force", force, "write into a non-empty directory");

  // measure
  auto* measure = app.add_subcommand("measure", "compute body dimensions");
  std::string manifest_path, images_dir, truth_dir, checkpoints_dir,
      results_json;
  double tol = 0.001, fraction = 0.65;
  int jobs = 2;
  measure->add_option("--manifest", manifest_path)->required();
  measure->add_option("--out", out_dir)->required();
  measure->add_option("--tol", tol);
  measure->add_option("--fraction", fraction, "shoulder plane height fraction");
  measure->add_option("--jobs", jobs);

  // render
  auto* render = app.add_subcommand("render", "rasterize meshes to PGM");
  CameraConfig cam;
  int background = 0;
  render->add_option("--manifest", manifest_path)->required();
  render->add_option("--out", out_dir)->required();
  render->add_option("--resolution", cam.resolution);
  render->add_option("--scale", cam.ortho_scale);
  render->add_option("--distance", cam.camera_distance);
  render->add_option("--background", background);
  render->add_option("--jobs", jobs);

  // train / eval / report
  auto* train = app.add_subcommand("train", "k-fold training and evaluation");
  nn::TrainConfig tcfg;
  int k = 5;
  bool bn2 = false;
  train->add_option("--manifest", manifest_path)->required();
  train->add_option("--images", images_dir)->required();
  train->add_option("--truth", truth_dir)->required();
  train->add_option("--out", out_dir)->required();
  train->add_option("--k", k);
  train->add_option("--seed", seed);
  train->add_option("--epochs", tcfg.epochs);
  train->add_option("--batch", tcfg.batch_size);
  train->add_option("--lr", tcfg.lr);
  train->add_option("--momentum", tcfg.momentum);
  train->add_option("--hidden", tcfg.hidden);
  train->add_flag("--relu-bn-after-conv2", bn2);

  auto* evalc = app.add_subcommand("eval", "evaluate saved checkpoints");
  evalc->add_option("--manifest", manifest_path)->required();
  evalc->add_option("--images", images_dir)->required();
  evalc->add_option("--truth", truth_dir)->required();
  evalc->add_option("--checkpoints", checkpoints_dir)->required();
  evalc->add_option("--out", out_dir)->required();
  evalc->add_option("--k", k);
  evalc->add_option("--seed", seed);

  auto* report = app.add_subcommand("report", "report from saved results");
  report->add_option("--results", results_json)->required();
  report->add_option("--out", out_dir)->required();

  try {
    app.parse(argc, argv);
    for (auto* sub : app.get_subcommands()) apply_config(*sub, config_path);

    if (synth->parsed()) return cmd_synth(n, seed, out_dir, force, facets);
    if (measure->parsed())
      return cmd_measure(manifest_path, out_dir, tol, fraction, jobs);
    if (render->parsed()) {
      cam.background = static_cast<uint8_t>(background);
      return cmd_render(manifest_path, out_dir, cam, jobs);
    }
    if (train->parsed()) {
      tcfg.seed = seed;
      tcfg.hidden = tcfg.hidden;
      return cmd_train(manifest_path, images_dir, truth_dir, out_dir, k, seed,
                       tcfg, bn2);
    }
    if (evalc->parsed())
      return cmd_eval(manifest_path, images_dir, truth_dir, checkpoints_dir,
                      out_dir, k, seed);
    if (report->parsed()) return cmd_report(results_json, out_dir);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
