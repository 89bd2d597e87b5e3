#include "sinr/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "sinr/adam.hpp"
#include "sinr/errors.hpp"
#include "sinr/parallel.hpp"
#include "sinr/random.hpp"
#include "sinr/tape.hpp"

namespace sinr {

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::kReconstruct: return "reconstruct";
    case TaskKind::kComplete: return "complete";
    case TaskKind::kDenoise: return "denoise";
  }
  return "unknown";
}

TaskKind parse_task_kind(const std::string& name) {
  if (name == "reconstruct") return TaskKind::kReconstruct;
  if (name == "complete") return TaskKind::kComplete;
  if (name == "denoise") return TaskKind::kDenoise;
  throw InvalidArgument("unknown task kind '" + name + "'");
}

void RecoveryTask::validate() const {
  observed.validate();
  if (kind == TaskKind::kComplete) {
    if (!mask) throw InvalidArgument("completion task needs an observation mask");
    if (mask->rows() != observed.value_dim() || mask->cols() != observed.size()) {
      throw DimensionError("completion mask shape does not match the observation");
    }
    if (mask->count() == 0) throw InvalidArgument("completion mask observes nothing");
  }
  if (reference && !reference->same_shape(observed.values)) {
    throw DimensionError("reference shape does not match the observation");
  }
}

void TrainConfig::validate() const {
  arch.validate();
  if (superpixels == 0) throw InvalidArgument("train: K must be >= 1");
  if (!(alpha >= 0.0)) throw InvalidArgument("train: alpha must be >= 0");
  if (!(learning_rate > 0.0)) throw InvalidArgument("train: learning rate must be > 0");
  if (log_interval == 0) throw InvalidArgument("train: log interval must be >= 1");
}

namespace {

// Observation restricted to one superpixel. Unobserved target entries are
// zeroed so nothing outside the mask can reach the loss.
struct Batch {
  Matrix coords;
  Matrix neg_target;
  std::optional<Matrix> mask;
};

std::vector<Batch> make_batches(const RecoveryTask& task, const SuperpixelPartition& part) {
  if (part.point_count() != task.observed.size()) {
    throw ContractError("partition covers " + std::to_string(part.point_count()) +
                        " points, observation has " + std::to_string(task.observed.size()));
  }
  std::vector<Batch> batches(part.superpixel_count());
  for (std::size_t k = 0; k < batches.size(); ++k) {
    const auto& idx = part.members[k];
    Batch& b = batches[k];
    b.coords = task.observed.coords.gather_cols(idx);
    Matrix target = task.observed.values.gather_cols(idx);
    if (task.kind == TaskKind::kComplete) {
      b.mask = task.mask->gather_cols(idx).as_matrix();
      target = elem_prod(target, *b.mask);
    }
    b.neg_target = scale(target, -1.0);
  }
  return batches;
}

struct SuperpixelResult {
  double loss = 0.0;
  Matrix dictionary_grad;
  std::vector<Matrix> net_grads;
};

SuperpixelResult superpixel_pass(const SInrModel& model, std::size_t k, const Batch& batch,
                                 bool with_grads) {
  Tape tape;
  const bool learn_dict = model.arch.dictionary;
  const Var dict = learn_dict && with_grads ? tape.parameter(model.dictionary)
                                            : tape.constant(model.dictionary);
  const NetVars net = record_net(tape, model.nets[k], with_grads);
  Var pred = record_net_forward(tape, net, tape.constant(batch.coords), model.arch.omega0,
                                model.arch.attention);
  if (learn_dict) pred = tape.matmul(dict, pred);

  Var residual = tape.add_bias(pred, tape.constant(batch.neg_target));
  if (batch.mask) residual = tape.elem_prod(residual, tape.constant(*batch.mask));
  const Var squared = tape.elem_prod(residual, residual);
  const Var per_point = tape.matmul(tape.constant(Matrix(1, model.value_dim, 1.0)), squared);
  const Var total =
      tape.matmul(per_point, tape.constant(Matrix(batch.coords.cols(), 1, 1.0)));

  SuperpixelResult result;
  result.loss = tape.value(total)(0, 0);
  if (!with_grads) return result;

  tape.backward(total);
  if (learn_dict) result.dictionary_grad = tape.grad(dict);
  for (const auto& lv : net) {
    result.net_grads.push_back(tape.grad(lv.weight));
    result.net_grads.push_back(tape.grad(lv.bias));
    if (model.arch.attention) {
      result.net_grads.push_back(tape.grad(lv.excite));
      result.net_grads.push_back(tape.grad(lv.squeeze));
    }
  }
  return result;
}

void check_model_fits(const RecoveryTask& task, const SInrModel& model,
                      const SuperpixelPartition& part) {
  if (model.superpixel_count() != part.superpixel_count()) {
    throw ContractError("model has " + std::to_string(model.superpixel_count()) +
                        " networks but the partition has " +
                        std::to_string(part.superpixel_count()) + " superpixels");
  }
  if (model.value_dim != task.observed.value_dim() ||
      model.coord_dim != task.observed.coord_dim()) {
    throw DimensionError("model dimensions do not match the observation");
  }
}

// Sums per-superpixel results in ascending k so the reduction order never
// depends on scheduling.
LossGradient reduce(const SInrModel& model, std::vector<SuperpixelResult>& results) {
  LossGradient out;
  for (const auto& r : results) out.loss += r.loss;
  if (model.arch.dictionary) {
    Matrix dict_grad(model.dictionary.rows(), model.dictionary.cols());
    for (const auto& r : results) accumulate(dict_grad, r.dictionary_grad);
    out.grads.push_back(std::move(dict_grad));
  }
  for (auto& r : results) {
    for (auto& g : r.net_grads) out.grads.push_back(std::move(g));
  }
  return out;
}

}  // namespace

std::vector<Matrix*> trainable_blocks(SInrModel& model) {
  std::vector<Matrix*> blocks;
  if (model.arch.dictionary) blocks.push_back(&model.dictionary);
  for (auto& net : model.nets) {
    for (auto& layer : net.layers) {
      blocks.push_back(&layer.weight);
      blocks.push_back(&layer.bias);
      if (model.arch.attention) {
        blocks.push_back(&layer.excite);
        blocks.push_back(&layer.squeeze);
      }
    }
  }
  return blocks;
}

double loss(const RecoveryTask& task, const SInrModel& model, const SuperpixelPartition& part) {
  task.validate();
  check_model_fits(task, model, part);
  const auto batches = make_batches(task, part);
  double total = 0.0;
  for (std::size_t k = 0; k < batches.size(); ++k) {
    const double l = superpixel_pass(model, k, batches[k], false).loss;
    if (!std::isfinite(l)) {
      throw TrainingError("loss: non-finite residual in superpixel " + std::to_string(k));
    }
    total += l;
  }
  return total;
}

LossGradient loss_gradient(const RecoveryTask& task, const SInrModel& model,
                           const SuperpixelPartition& part, std::size_t workers) {
  task.validate();
  check_model_fits(task, model, part);
  const auto batches = make_batches(task, part);
  std::vector<SuperpixelResult> results(batches.size());
  parallel_for(batches.size(), resolve_workers(workers), [&](std::size_t k) {
    results[k] = superpixel_pass(model, k, batches[k], true);
  });
  return reduce(model, results);
}

PointSet aggregate(const SInrModel& model, const SuperpixelPartition& part,
                   const PointSet& layout) {
  layout.validate();
  if (part.point_count() != layout.size() ||
      model.superpixel_count() != part.superpixel_count()) {
    throw ContractError("aggregate: model, partition and layout disagree");
  }
  PointSet out;
  out.coords = layout.coords;
  out.grid = layout.grid;
  out.values = Matrix(model.value_dim, layout.size());
  for (std::size_t k = 0; k < part.superpixel_count(); ++k) {
    const auto& idx = part.members[k];
    if (idx.empty()) continue;
    const Matrix pred = sinr_forward(model, k, layout.coords.gather_cols(idx));
    for (std::size_t r = 0; r < pred.rows(); ++r)
      for (std::size_t j = 0; j < idx.size(); ++j) out.values(r, idx[j]) = pred(r, j);
  }
  return out;
}

FitResult fit(const RecoveryTask& task, const TrainConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  task.validate();
  cfg.validate();

  RecoveryTask work = task;
  PointSet segmentation_input = task.observed;
  if (task.kind == TaskKind::kComplete) {
    work.observed.values = elem_prod(task.observed.values, task.mask->as_matrix());
    segmentation_input = interpolate_observed(work.observed, *task.mask);
  }
  if (cfg.superpixels > task.observed.size()) {
    throw InvalidArgument("train: K=" + std::to_string(cfg.superpixels) + " exceeds n=" +
                          std::to_string(task.observed.size()));
  }

  FitResult result;
  result.partition =
      gssa_segment(segmentation_input, cfg.superpixels, cfg.alpha, derive_seed(cfg.seed, 1));
  result.model = init_model(cfg.arch, cfg.superpixels, task.observed.coord_dim(),
                            task.observed.value_dim(), derive_seed(cfg.seed, 2));

  TrainReport& report = result.report;
  report.config = cfg;
  report.task = task.kind;
  report.gssa_iterations = result.partition.iterations;
  report.parameter_count = result.model.parameter_count();

  const auto batches = make_batches(work, result.partition);
  const std::size_t workers = resolve_workers(cfg.workers);
  std::vector<Matrix*> blocks = trainable_blocks(result.model);
  std::vector<const Matrix*> const_blocks(blocks.begin(), blocks.end());
  AdamState adam(AdamHyper{.learning_rate = cfg.learning_rate}, const_blocks);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_step = 0;
  std::vector<SuperpixelResult> results(batches.size());
  for (std::size_t t = 0; t < cfg.steps; ++t) {
    parallel_for(batches.size(), workers, [&](std::size_t k) {
      results[k] = superpixel_pass(result.model, k, batches[k], true);
    });
    LossGradient lg = reduce(result.model, results);
    if (!std::isfinite(lg.loss)) {
      std::ostringstream msg;
      msg << "training diverged: loss " << lg.loss << " at step " << t;
      if (!report.loss_curve.empty()) msg << " (last logged loss " << report.loss_curve.back() << ")";
      throw TrainingError(msg.str());
    }
    if ((t + 1) % cfg.log_interval == 0) {
      report.loss_curve.push_back(lg.loss);
      if (cfg.on_log) cfg.on_log(t + 1, lg.loss, result.model, result.partition);
    }

    std::vector<const Matrix*> grads;
    grads.reserve(lg.grads.size());
    for (const auto& g : lg.grads) grads.push_back(&g);
    adam.step(blocks, grads);
    report.steps_run = t + 1;

    if (lg.loss < best) {
      best = lg.loss;
      best_step = t;
    } else if (cfg.early_stop_patience > 0 && t - best_step >= cfg.early_stop_patience) {
      break;
    }
  }

  result.recovered = aggregate(result.model, result.partition, task.observed);
  if (task.reference) {
    report.metrics = evaluate_metrics(result.recovered.values, *task.reference,
                                      task.observed.grid);
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

PointSet interpolate_observed(const PointSet& observed, const Mask& mask) {
  observed.validate();
  if (mask.rows() != observed.value_dim() || mask.cols() != observed.size()) {
    throw DimensionError("interpolate_observed: mask shape does not match the data");
  }
  PointSet out = observed;
  const std::size_t n = observed.size();
  const Matrix& x = observed.coords;
  for (std::size_t r = 0; r < observed.value_dim(); ++r) {
    std::vector<std::size_t> seen;
    for (std::size_t i = 0; i < n; ++i)
      if (mask(r, i)) seen.push_back(i);
    if (seen.empty()) {
      throw InvalidArgument("interpolate_observed: feature row " + std::to_string(r) +
                            " has no observed entry");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (mask(r, i)) continue;
      std::size_t nearest = seen.front();
      double nearest_d = std::numeric_limits<double>::infinity();
      for (std::size_t j : seen) {
        double d = 0.0;
        for (std::size_t a = 0; a < x.rows(); ++a) {
          const double diff = x(a, i) - x(a, j);
          d += diff * diff;
        }
        if (d < nearest_d) {
          nearest_d = d;
          nearest = j;
        }
      }
      out.values(r, i) = observed.values(r, nearest);
    }
  }
  return out;
}

PointSet add_gaussian_noise(const PointSet& clean, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InvalidArgument("add_gaussian_noise: sigma must be >= 0");
  PointSet out = clean;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (double& v : out.values.data()) v += sigma * rng.normal();
  return out;
}

Mask sample_mask(std::size_t rows, std::size_t cols, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw InvalidArgument("sample_mask: rate must be in (0, 1]");
  const std::size_t total = rows * cols;
  const auto count = static_cast<std::size_t>(std::floor(rate * static_cast<double>(total)));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  Mask mask(rows, cols);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.index(total - i));
    std::swap(order[i], order[j]);
    mask.set(order[i] / cols, order[i] % cols, true);
  }
  return mask;
}

void retain_heap_memory() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 << 20);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

}  // namespace sinr
