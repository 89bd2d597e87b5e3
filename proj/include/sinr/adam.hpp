#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sinr/matrix.hpp"

namespace sinr {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias correction over a fixed list of parameter matrices.
///
/// The moment buffers are shaped after the parameters passed at construction
/// and step() must always receive parameters and gradients in that order.
class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamHyper hyper, std::span<const Matrix* const> params);

  /// One update; increments step(). Throws TrainingError on a non-finite
  /// gradient without touching any parameter.
  void step(std::span<Matrix* const> params, std::span<const Matrix* const> grads);

  std::uint64_t step_count() const noexcept { return t_; }
  const AdamHyper& hyper() const noexcept { return hyper_; }
  const std::vector<Matrix>& first_moment() const noexcept { return m_; }
  const std::vector<Matrix>& second_moment() const noexcept { return v_; }

 private:
  AdamHyper hyper_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::uint64_t t_ = 0;
};

}  // namespace sinr
