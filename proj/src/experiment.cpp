#include "sinr/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>

#include "sinr/errors.hpp"
#include "sinr/metrics.hpp"
#include "sinr/random.hpp"

namespace sinr {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const ExperimentConfig& cfg) {
  json j = {
      {"command", cfg.command},
      {"input", cfg.input},
      {"kind", cfg.kind},
      {"out", cfg.out},
      {"k", cfg.k},
      {"alpha", cfg.alpha},
      {"omega0", cfg.omega0},
      {"hidden", cfg.hidden},
      {"layers", cfg.layers},
      {"dict-factor", cfg.dict_factor ? json(*cfg.dict_factor) : json(nullptr)},
      {"lr", cfg.lr},
      {"steps", cfg.steps},
      {"seed", cfg.seed},
      {"rate", cfg.rate},
      {"sigma", cfg.sigma},
      {"threads", cfg.threads},
      {"log-interval", cfg.log_interval},
      {"patience", cfg.patience},
      {"no-attention", cfg.no_attention},
      {"no-dictionary", cfg.no_dictionary},
  };
  if (cfg.command == "evaluate") {
    j["pred"] = cfg.pred;
    j["truth"] = cfg.truth;
    j["checkpoint"] = cfg.checkpoint;
    j["labels"] = cfg.labels;
  }
  return j;
}

void apply_json(ExperimentConfig& cfg, const json& j) {
  if (!j.is_object()) throw InvalidArgument("config: top level must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "command") cfg.command = value.get<std::string>();
      else if (key == "input") cfg.input = value.get<std::string>();
      else if (key == "kind") cfg.kind = value.get<std::string>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "k") cfg.k = value.get<std::size_t>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "omega0") cfg.omega0 = value.get<double>();
      else if (key == "hidden") cfg.hidden = value.get<std::size_t>();
      else if (key == "layers") cfg.layers = value.get<std::size_t>();
      else if (key == "dict-factor") {
        if (value.is_null()) cfg.dict_factor.reset();
        else cfg.dict_factor = value.get<std::size_t>();
      }
      else if (key == "lr") cfg.lr = value.get<double>();
      else if (key == "steps") cfg.steps = value.get<std::size_t>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "rate") cfg.rate = value.get<double>();
      else if (key == "sigma") cfg.sigma = value.get<double>();
      else if (key == "threads") cfg.threads = value.get<std::size_t>();
      else if (key == "log-interval") cfg.log_interval = value.get<std::size_t>();
      else if (key == "patience") cfg.patience = value.get<std::size_t>();
      else if (key == "no-attention") cfg.no_attention = value.get<bool>();
      else if (key == "no-dictionary") cfg.no_dictionary = value.get<bool>();
      else if (key == "pred") cfg.pred = value.get<std::string>();
      else if (key == "truth") cfg.truth = value.get<std::string>();
      else if (key == "checkpoint") cfg.checkpoint = value.get<std::string>();
      else if (key == "labels") cfg.labels = value.get<std::string>();
      else throw InvalidArgument("config: unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw InvalidArgument("config: bad value for '" + key + "': " + e.what());
    }
  }
}

std::size_t default_dict_factor(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kRgbImage: return 5;
    case DatasetKind::kMultibandImage: return 3;
    case DatasetKind::kPointCloud:
    case DatasetKind::kWeatherGrid: return 4;
  }
  return 4;
}

TrainConfig make_train_config(const ExperimentConfig& cfg, DatasetKind kind) {
  TrainConfig t;
  t.arch.hidden_width = cfg.hidden;
  t.arch.hidden_layers = cfg.layers;
  t.arch.dict_factor = cfg.dict_factor.value_or(default_dict_factor(kind));
  t.arch.omega0 = cfg.omega0;
  t.arch.attention = !cfg.no_attention;
  t.arch.dictionary = !cfg.no_dictionary;
  t.superpixels = cfg.k;
  t.alpha = cfg.alpha;
  t.learning_rate = cfg.lr;
  t.steps = cfg.steps;
  t.seed = cfg.seed;
  t.log_interval = cfg.log_interval;
  t.early_stop_patience = cfg.patience;
  t.workers = cfg.threads;
  t.validate();
  return t;
}

namespace {

json finite_or_string(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

}  // namespace

json to_json(const MetricReport& metrics) {
  json j = json::object();
  if (metrics.psnr) j["psnr"] = finite_or_string(*metrics.psnr);
  if (metrics.ssim) j["ssim"] = finite_or_string(*metrics.ssim);
  if (metrics.nrmse) j["nrmse"] = finite_or_string(*metrics.nrmse);
  if (metrics.r_square) j["r_square"] = finite_or_string(*metrics.r_square);
  return j;
}

json report_to_json(const TrainReport& report, const json& config_echo) {
  return json{
      {"config", config_echo},
      {"task", to_string(report.task)},
      {"loss_curve", report.loss_curve},
      {"log_interval", report.config.log_interval},
      {"steps_run", report.steps_run},
      {"gssa_iterations", report.gssa_iterations},
      {"parameter_count", report.parameter_count},
      {"seconds", report.seconds},
      {"metrics", to_json(report.metrics)},
  };
}

std::vector<AblationVariant> ablation_variants(bool no_attention, bool no_dictionary) {
  const std::vector<AblationVariant> all = {
      {"pixel-inr", false, false, false},
      {"superpixel-inr", true, false, false},
      {"superpixel+dictionary", true, false, true},
      {"superpixel+attention", true, true, false},
      {"s-inr", true, true, true},
  };
  std::vector<AblationVariant> rows;
  for (const auto& v : all) {
    if (no_attention && v.attention) continue;
    if (no_dictionary && v.dictionary) continue;
    rows.push_back(v);
  }
  return rows;
}

TrainConfig ablation_config(const TrainConfig& base, const AblationVariant& variant,
                            std::size_t coord_dim, std::size_t value_dim) {
  TrainConfig cfg = base;
  cfg.arch.attention = variant.attention;
  cfg.arch.dictionary = variant.dictionary;
  if (variant.superpixels) return cfg;

  ArchConfig reference = base.arch;
  reference.attention = false;
  reference.dictionary = false;
  const std::size_t budget = parameter_count(reference, base.superpixels, coord_dim, value_dim);
  cfg.superpixels = 1;
  std::size_t best_width = 1;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t w = 1; w <= 4096; ++w) {
    cfg.arch.hidden_width = w;
    const std::size_t count = parameter_count(cfg.arch, 1, coord_dim, value_dim);
    const std::size_t gap = count > budget ? count - budget : budget - count;
    if (gap < best_gap) {
      best_gap = gap;
      best_width = w;
    }
    if (count > budget) break;
  }
  cfg.arch.hidden_width = best_width;
  return cfg;
}

RecoveryTask make_task(TaskKind kind, const PointSet& clean, double sigma, double rate,
                       std::uint64_t seed) {
  RecoveryTask task;
  task.kind = kind;
  task.reference = clean.values;
  task.observed = clean;
  switch (kind) {
    case TaskKind::kReconstruct: break;
    case TaskKind::kDenoise:
      task.observed = add_gaussian_noise(clean, sigma, derive_seed(seed, 10));
      break;
    case TaskKind::kComplete:
      task.mask = sample_mask(clean.value_dim(), clean.size(), rate, derive_seed(seed, 11));
      task.observed.values = elem_prod(clean.values, task.mask->as_matrix());
      break;
  }
  return task;
}

namespace {

// Bands shown in PNG panels: gray, RGB, or first/middle/last of a cube.
Matrix display_bands(const Matrix& values) {
  if (values.rows() == 1 || values.rows() == 3) return values;
  const std::size_t s = values.rows();
  const std::size_t pick[3] = {0, s / 2, s - 1};
  Matrix out(3, values.cols());
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t i = 0; i < values.cols(); ++i) out(b, i) = values(pick[b], i);
  return out;
}

void save_panel(const std::vector<const Matrix*>& images, GridShape grid, const fs::path& path) {
  constexpr std::size_t kGap = 2;
  const std::size_t w = grid.width * images.size() + kGap * (images.size() - 1);
  std::vector<Matrix> shown;
  for (const Matrix* m : images) shown.push_back(display_bands(*m));
  const std::size_t bands = shown.front().rows();
  Matrix panel(bands, grid.height * w, 1.0);
  for (std::size_t p = 0; p < shown.size(); ++p)
    for (std::size_t b = 0; b < bands; ++b)
      for (std::size_t y = 0; y < grid.height; ++y)
        for (std::size_t x = 0; x < grid.width; ++x) {
          panel(b, y * w + p * (grid.width + kGap) + x) = shown[p](b, y * grid.width + x);
        }
  save_png(panel, GridShape{grid.height, w}, path);
}

void save_segment_overlay(const PointSet& data, const SuperpixelPartition& part,
                          const fs::path& path) {
  const GridShape g = *data.grid;
  Matrix shown = display_bands(data.values);
  for (std::size_t y = 0; y < g.height; ++y)
    for (std::size_t x = 0; x < g.width; ++x) {
      const std::size_t i = y * g.width + x;
      const bool edge = (x + 1 < g.width && part.labels[i] != part.labels[i + 1]) ||
                        (y + 1 < g.height && part.labels[i] != part.labels[i + g.width]);
      if (!edge) continue;
      for (std::size_t b = 0; b < shown.rows(); ++b) shown(b, i) = b == 0 ? 1.0 : 0.0;
    }
  save_png(shown, g, path);
}

std::string data_extension(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kRgbImage: return ".png";
    case DatasetKind::kMultibandImage:
    case DatasetKind::kWeatherGrid: return ".mbf";
    case DatasetKind::kPointCloud: return ".csv";
  }
  return ".csv";
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

DatasetKind resolve_kind(const ExperimentConfig& cfg, const std::string& path) {
  return cfg.kind.empty() ? infer_dataset_kind(path) : parse_dataset_kind(cfg.kind);
}

PointSet load_input(const ExperimentConfig& cfg, DatasetKind kind) {
  if (cfg.input.empty()) throw InvalidArgument("--input is required for '" + cfg.command + "'");
  return load_dataset({kind, cfg.input});
}

json run_segment(const ExperimentConfig& cfg, const fs::path& out) {
  const DatasetKind kind = resolve_kind(cfg, cfg.input);
  const PointSet data = load_input(cfg, kind);
  const auto part = gssa_segment(data, cfg.k, cfg.alpha, derive_seed(cfg.seed, 1));
  write_label_map(part, out / "labels.txt");
  const auto conn = connectivity_report(part, data.coords, data.grid);
  std::set<std::uint32_t> distinct(part.labels.begin(), part.labels.end());
  json summary = {
      {"config", to_json(cfg)},
      {"k", cfg.k},
      {"distinct_labels", distinct.size()},
      {"iterations", part.iterations},
      {"objective", gssa_objective(data, part, cfg.alpha)},
      {"components", conn.components},
      {"disconnected_superpixels", conn.disconnected_superpixels()},
      {"files", {{"labels", "labels.txt"}}},
  };
  if (data.grid) {
    save_segment_overlay(data, part, out / "segments.png");
    summary["files"]["overlay"] = "segments.png";
  }
  write_json(summary, out / "segment.json");
  return summary;
}

json run_task(const ExperimentConfig& cfg, TaskKind task_kind, const fs::path& out) {
  const DatasetKind kind = resolve_kind(cfg, cfg.input);
  const PointSet clean = load_input(cfg, kind);
  const TrainConfig train = make_train_config(cfg, kind);
  const RecoveryTask task = make_task(task_kind, clean, cfg.sigma, cfg.rate, cfg.seed);

  FitResult fitted = fit(task, train);
  const std::string ext = data_extension(kind);
  save_pointset(task.observed, out / ("observed" + ext));
  save_pointset(fitted.recovered, out / ("recovered" + ext));
  write_label_map(fitted.partition, out / "labels.txt");
  save_checkpoint(fitted.model, out / "model.sinr");

  json report = report_to_json(fitted.report, to_json(cfg));
  report["observed_metrics"] = to_json(evaluate_metrics(task.observed.values, clean.values, clean.grid));
  report["files"] = {{"observed", "observed" + ext},
                     {"recovered", "recovered" + ext},
                     {"labels", "labels.txt"},
                     {"checkpoint", "model.sinr"}};
  if (clean.grid) {
    save_panel({&task.observed.values, &fitted.recovered.values, &clean.values}, *clean.grid,
               out / "panel.png");
    report["files"]["panel"] = "panel.png";
  }
  write_json(report, out / "report.json");
  return report;
}

json run_ablate(const ExperimentConfig& cfg, const fs::path& out) {
  const DatasetKind kind = resolve_kind(cfg, cfg.input);
  const PointSet clean = load_input(cfg, kind);
  ExperimentConfig base_cfg = cfg;
  base_cfg.no_attention = false;
  base_cfg.no_dictionary = false;
  const TrainConfig base = make_train_config(base_cfg, kind);
  const RecoveryTask task = make_task(TaskKind::kDenoise, clean, cfg.sigma, cfg.rate, cfg.seed);

  json rows = json::array();
  for (const auto& variant : ablation_variants(cfg.no_attention, cfg.no_dictionary)) {
    const TrainConfig vcfg = ablation_config(base, variant, clean.coord_dim(), clean.value_dim());
    FitResult fitted = fit(task, vcfg);
    const fs::path dir = out / variant.name;
    fs::create_directories(dir);
    json echo = to_json(cfg);
    echo["k"] = vcfg.superpixels;
    echo["hidden"] = vcfg.arch.hidden_width;
    echo["no-attention"] = !variant.attention;
    echo["no-dictionary"] = !variant.dictionary;
    write_json(report_to_json(fitted.report, echo), dir / "report.json");
    save_checkpoint(fitted.model, dir / "model.sinr");
    rows.push_back({{"variant", variant.name},
                    {"generalized_superpixels", variant.superpixels},
                    {"exclusive_attention", variant.attention},
                    {"shared_dictionary", variant.dictionary},
                    {"k", vcfg.superpixels},
                    {"hidden", vcfg.arch.hidden_width},
                    {"parameters", fitted.report.parameter_count},
                    {"metrics", to_json(fitted.report.metrics)},
                    {"seconds", fitted.report.seconds}});
  }
  json summary = {{"config", to_json(cfg)},
                  {"observed_metrics", to_json(evaluate_metrics(task.observed.values, clean.values, clean.grid))},
                  {"rows", rows}};
  write_json(summary, out / "ablation.json");
  return summary;
}

json run_evaluate(const ExperimentConfig& cfg, const fs::path& out) {
  if (cfg.truth.empty()) throw InvalidArgument("evaluate needs --truth");
  const PointSet truth = load_dataset({resolve_kind(cfg, cfg.truth), cfg.truth});
  PointSet pred;
  if (!cfg.pred.empty()) {
    pred = load_dataset({infer_dataset_kind(cfg.pred), cfg.pred});
  } else if (!cfg.checkpoint.empty() && !cfg.labels.empty()) {
    const SInrModel model = load_checkpoint(cfg.checkpoint);
    const LabelMap labels = read_label_map(cfg.labels);
    const auto part = partition_from_labels(truth, labels.labels, labels.k);
    pred = aggregate(model, part, truth);
  } else {
    throw InvalidArgument("evaluate needs --pred, or --checkpoint together with --labels");
  }
  json summary = {{"config", to_json(cfg)},
                  {"metrics", to_json(evaluate_metrics(pred.values, truth.values, truth.grid))}};
  write_json(summary, out / "evaluate.json");
  return summary;
}

}  // namespace

json execute_experiment(const ExperimentConfig& cfg) {
  const fs::path out = cfg.out;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());

  if (cfg.command == "segment") return run_segment(cfg, out);
  if (cfg.command == "reconstruct") return run_task(cfg, TaskKind::kReconstruct, out);
  if (cfg.command == "complete") return run_task(cfg, TaskKind::kComplete, out);
  if (cfg.command == "denoise") return run_task(cfg, TaskKind::kDenoise, out);
  if (cfg.command == "ablate") return run_ablate(cfg, out);
  if (cfg.command == "evaluate") return run_evaluate(cfg, out);
  throw InvalidArgument("unknown command '" + cfg.command + "'");
}

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    const json summary = execute_experiment(cfg);
    json brief = {{"command", cfg.command}, {"out", cfg.out}};
    if (summary.contains("metrics")) brief["metrics"] = summary["metrics"];
    if (summary.contains("rows")) brief["rows"] = summary["rows"];
    if (summary.contains("distinct_labels")) brief["distinct_labels"] = summary["distinct_labels"];
    out << brief.dump() << '\n';
    return 0;
  } catch (const Error& e) {
    err << json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump() << '\n';
    return 3;
  }
}

}  // namespace sinr
