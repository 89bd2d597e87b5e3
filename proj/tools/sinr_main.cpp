#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "sinr/errors.hpp"
#include "sinr/experiment.hpp"

namespace {

struct Flags {
  std::string config;
  std::string input, kind, out;
  std::size_t k = 0, hidden = 0, layers = 0, dict_factor = 0, steps = 0, threads = 0;
  std::size_t log_interval = 0, patience = 0;
  double alpha = 0, omega0 = 0, lr = 0, rate = 0, sigma = 0;
  std::uint64_t seed = 0;
  bool no_attention = false, no_dictionary = false;
  std::string pred, truth, checkpoint, labels;
};

void add_common(CLI::App* cmd, Flags& f, bool training) {
  cmd->add_option("--config", f.config, "JSON config; command-line flags override it");
  cmd->add_option("--input", f.input, "Dataset file (.png, .mbf, .csv)");
  cmd->add_option("--kind", f.kind, "rgb-image, multiband-image, point-cloud-xyzrgb or weather-grid (default: by extension)");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--k", f.k, "Number of superpixels");
  cmd->add_option("--alpha", f.alpha, "Coordinate weight of the segmentation distance");
  cmd->add_option("--seed", f.seed, "Random seed");
  if (!training) return;
  cmd->add_option("--omega0", f.omega0, "Sine frequency");
  cmd->add_option("--hidden", f.hidden, "Hidden width");
  cmd->add_option("--layers", f.layers, "Hidden layer count");
  cmd->add_option("--dict-factor", f.dict_factor, "Dictionary rank factor");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--steps", f.steps, "Training steps");
  cmd->add_option("--rate", f.rate, "Observed fraction for completion");
  cmd->add_option("--sigma", f.sigma, "Noise standard deviation");
  cmd->add_option("--threads", f.threads, "Worker threads (0 = all cores)");
  cmd->add_option("--log-interval", f.log_interval, "Loss logging interval");
  cmd->add_option("--patience", f.patience, "Early-stop patience in steps (0 = off)");
  cmd->add_flag("--no-attention", f.no_attention, "Disable the attention blocks");
  cmd->add_flag("--no-dictionary", f.no_dictionary, "Use D = I instead of a learned dictionary");
}

sinr::ExperimentConfig build_config(const CLI::App& cmd, const Flags& f) {
  sinr::ExperimentConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw sinr::IoError("cannot open config " + f.config);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw sinr::ParseError(std::string("config: ") + e.what(), e.byte);
    }
    sinr::apply_json(cfg, j);
  }
  cfg.command = cmd.get_name();
  auto given = [&](const char* name) {
    const CLI::Option* opt = cmd.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--input")) cfg.input = f.input;
  if (given("--kind")) cfg.kind = f.kind;
  if (given("--out")) cfg.out = f.out;
  if (given("--k")) cfg.k = f.k;
  if (given("--alpha")) cfg.alpha = f.alpha;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--omega0")) cfg.omega0 = f.omega0;
  if (given("--hidden")) cfg.hidden = f.hidden;
  if (given("--layers")) cfg.layers = f.layers;
  if (given("--dict-factor")) cfg.dict_factor = f.dict_factor;
  if (given("--lr")) cfg.lr = f.lr;
  if (given("--steps")) cfg.steps = f.steps;
  if (given("--rate")) cfg.rate = f.rate;
  if (given("--sigma")) cfg.sigma = f.sigma;
  if (given("--threads")) cfg.threads = f.threads;
  if (given("--log-interval")) cfg.log_interval = f.log_interval;
  if (given("--patience")) cfg.patience = f.patience;
  if (given("--no-attention")) cfg.no_attention = true;
  if (given("--no-dictionary")) cfg.no_dictionary = true;
  if (given("--pred")) cfg.pred = f.pred;
  if (given("--truth")) cfg.truth = f.truth;
  if (given("--checkpoint")) cfg.checkpoint = f.checkpoint;
  if (given("--labels")) cfg.labels = f.labels;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  sinr::retain_heap_memory();
  CLI::App app{"Superpixel-informed implicit neural representations"};
  app.require_subcommand(1);
  Flags f;

  add_common(app.add_subcommand("segment", "Partition a dataset into generalized superpixels"), f,
             false);
  add_common(app.add_subcommand("reconstruct", "Fit the clean data"), f, true);
  add_common(app.add_subcommand("complete", "Recover data from a random subset of entries"), f,
             true);
  add_common(app.add_subcommand("denoise", "Recover data from a noisy copy"), f, true);
  add_common(app.add_subcommand("ablate", "Component ablation on the denoising task"), f, true);

  CLI::App* eval = app.add_subcommand("evaluate", "Score a prediction against ground truth");
  eval->add_option("--config", f.config, "JSON config; command-line flags override it");
  eval->add_option("--kind", f.kind, "Dataset kind of --truth");
  eval->add_option("--out", f.out, "Output directory");
  eval->add_option("--pred", f.pred, "Predicted dataset");
  eval->add_option("--truth", f.truth, "Ground-truth dataset")->required();
  eval->add_option("--checkpoint", f.checkpoint, "Model checkpoint (instead of --pred)");
  eval->add_option("--labels", f.labels, "Label map matching --checkpoint");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  const CLI::App* cmd = app.get_subcommands().front();
  sinr::ExperimentConfig cfg;
  try {
    cfg = build_config(*cmd, f);
  } catch (const sinr::Error& e) {
    std::cerr << nlohmann::json{{"error", {{"kind", e.kind()}, {"message", e.what()}}}}.dump()
              << '\n';
    return 2;
  }
  return sinr::run_experiment(cfg, std::cout, std::cerr);
}
