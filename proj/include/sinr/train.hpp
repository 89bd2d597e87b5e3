#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sinr/gssa.hpp"
#include "sinr/metrics.hpp"
#include "sinr/model.hpp"
#include "sinr/point_set.hpp"

namespace sinr {

enum class TaskKind { kReconstruct, kComplete, kDenoise };

std::string to_string(TaskKind kind);
TaskKind parse_task_kind(const std::string& name);

/// A recovery problem bound to its observation. `reference` is only used to
/// score the result and never enters the loss.
struct RecoveryTask {
  TaskKind kind = TaskKind::kReconstruct;
  PointSet observed;
  std::optional<Mask> mask;        ///< required for kComplete
  std::optional<Matrix> reference;

  void validate() const;
};

struct TrainConfig {
  ArchConfig arch;
  std::size_t superpixels = 25;
  double alpha = 20.0;
  double learning_rate = 1e-3;
  std::size_t steps = 2000;
  std::uint64_t seed = 0;
  std::size_t log_interval = 10;
  /// Stop once the loss has not improved for this many steps; 0 disables.
  std::size_t early_stop_patience = 0;
  /// Parallel superpixel workers; 0 = hardware concurrency. Capped by SINR_THREADS.
  std::size_t workers = 1;
  /// Called at every logged step with the loss and the model it was computed for.
  std::function<void(std::size_t step, double loss, const SInrModel& model,
                     const SuperpixelPartition& part)>
      on_log;

  void validate() const;
};

struct TrainReport {
  TrainConfig config;
  TaskKind task = TaskKind::kReconstruct;
  std::vector<double> loss_curve;  ///< loss before step t for every (t + 1) % log_interval == 0
  std::size_t steps_run = 0;
  std::size_t gssa_iterations = 0;
  std::size_t parameter_count = 0;
  double seconds = 0.0;
  MetricReport metrics;
};

struct FitResult {
  SInrModel model;
  SuperpixelPartition partition;
  TrainReport report;
  PointSet recovered;
};

/// Sum of squared residuals over all points, restricted to the mask for
/// completion tasks.
double loss(const RecoveryTask& task, const SInrModel& model, const SuperpixelPartition& part);

/// Gradients of loss() in model order: dictionary first (only when it is
/// learnable), then every network's W, b, U, V layer by layer.
struct LossGradient {
  double loss = 0.0;
  std::vector<Matrix> grads;
};
LossGradient loss_gradient(const RecoveryTask& task, const SInrModel& model,
                           const SuperpixelPartition& part, std::size_t workers = 1);

/// Pointers to the learnable blocks of `model` in the order used by LossGradient.
std::vector<Matrix*> trainable_blocks(SInrModel& model);

/// Segments the observation, initializes a model and runs cfg.steps full-batch
/// Adam steps. Completion segments a nearest-neighbor fill of the observation.
FitResult fit(const RecoveryTask& task, const TrainConfig& cfg);

/// Model prediction for every point, scattered back to the original order.
PointSet aggregate(const SInrModel& model, const SuperpixelPartition& part,
                   const PointSet& layout);

/// Fills every unobserved entry with the value of the nearest observed point
/// (in coordinate space, lowest index on ties) for that feature row.
PointSet interpolate_observed(const PointSet& observed, const Mask& mask);

PointSet add_gaussian_noise(const PointSet& clean, double sigma, std::uint64_t seed);

/// floor(rate * rows * cols) entries drawn uniformly without replacement.
Mask sample_mask(std::size_t rows, std::size_t cols, double rate, std::uint64_t seed);

/// Keeps freed heap memory mapped so every training step does not fault its
/// buffers back in (glibc only; a no-op elsewhere). Process-wide, so meant to
/// be called once from main.
void retain_heap_memory();

}  // namespace sinr
