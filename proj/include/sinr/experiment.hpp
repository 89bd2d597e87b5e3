#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sinr/io.hpp"
#include "sinr/train.hpp"

namespace sinr {

/// Everything a CLI run needs. Field names mirror the command-line flags and
/// the keys of the JSON config file.
struct ExperimentConfig {
  std::string command = "reconstruct";  ///< segment|reconstruct|complete|denoise|ablate|evaluate
  std::string input;
  std::string kind;  ///< dataset kind; empty = infer from the extension
  std::string out = "sinr_out";

  std::size_t k = 15;
  double alpha = 20.0;
  double omega0 = 30.0;
  std::size_t hidden = 35;
  std::size_t layers = 5;
  std::optional<std::size_t> dict_factor;  ///< default: 5 RGB, 3 multiband, 4 point data
  double lr = 1e-5;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  double rate = 0.05;
  double sigma = 0.15;
  std::size_t threads = 0;
  std::size_t log_interval = 10;
  std::size_t patience = 0;
  bool no_attention = false;
  bool no_dictionary = false;

  // evaluate
  std::string pred;
  std::string truth;
  std::string checkpoint;
  std::string labels;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Overwrites the fields present in `j`; unknown keys are rejected.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

std::size_t default_dict_factor(DatasetKind kind);
TrainConfig make_train_config(const ExperimentConfig& cfg, DatasetKind kind);

nlohmann::json to_json(const MetricReport& metrics);
/// keys: config, loss_curve, seconds, metrics (+ task bookkeeping)
nlohmann::json report_to_json(const TrainReport& report, const nlohmann::json& config_echo);

/// One component combination of the ablation table.
struct AblationVariant {
  std::string name;
  bool superpixels = true;
  bool attention = true;
  bool dictionary = true;
};

/// Rows of the component ablation, in table order. `no_attention` /
/// `no_dictionary` drop every row that uses that component.
std::vector<AblationVariant> ablation_variants(bool no_attention, bool no_dictionary);

/// Training config for one ablation row. The pixel-based row (K = 1) gets the
/// hidden width whose parameter count is closest to the plain superpixel row.
TrainConfig ablation_config(const TrainConfig& base, const AblationVariant& variant,
                            std::size_t coord_dim, std::size_t value_dim);

/// Builds the observation for a task: adds noise for denoise, samples and
/// applies a mask for complete, and keeps `clean` as the reference.
RecoveryTask make_task(TaskKind kind, const PointSet& clean, double sigma, double rate,
                       std::uint64_t seed);

/// Runs the configured subcommand, writes its artifacts under cfg.out and
/// returns the summary JSON. Throws sinr::Error on failure.
nlohmann::json execute_experiment(const ExperimentConfig& cfg);

/// execute_experiment with error reporting: prints the summary to `out` and
/// returns 0, or prints {"error": {...}} to `err` and returns nonzero.
int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace sinr
