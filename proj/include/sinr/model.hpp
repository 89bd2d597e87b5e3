#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "sinr/matrix.hpp"
#include "sinr/tape.hpp"

namespace sinr {

struct ArchConfig {
  std::size_t hidden_width = 35;
  std::size_t hidden_layers = 5;  ///< number of sine layers L
  std::size_t dict_factor = 5;    ///< dictionary rank r = dict_factor * s
  double omega0 = 30.0;
  bool attention = true;
  bool dictionary = true;

  /// Throws InvalidArgument for zero widths/factors or a non-positive omega0.
  void validate() const;
};

/// Parameters of one affine layer plus its channel gate. `excite` (U) and
/// `squeeze` (V) stay empty when attention is disabled.
struct LayerParams {
  Matrix weight;
  Matrix bias;
  Matrix excite;
  Matrix squeeze;
};

/// One coordinate network; layers 0..L-1 are sine layers, layer L is linear.
struct SuperpixelNet {
  std::vector<LayerParams> layers;
};

/// Shared dictionary plus one exclusive network per superpixel.
struct SInrModel {
  ArchConfig arch;
  std::size_t coord_dim = 0;
  std::size_t value_dim = 0;
  Matrix dictionary;  ///< s x r; identity (and frozen) when arch.dictionary is false
  std::vector<SuperpixelNet> nets;

  std::size_t superpixel_count() const noexcept { return nets.size(); }
  /// Network output width: dict_factor * s, or s without a dictionary.
  std::size_t rank() const noexcept { return dictionary.cols(); }
  /// c_0 .. c_{L+1}
  std::vector<std::size_t> layer_widths() const;
  /// Learnable scalars (the frozen identity dictionary is not counted).
  std::size_t parameter_count() const;
};

/// Learnable scalars of a model with this architecture, without building it.
std::size_t parameter_count(const ArchConfig& arch, std::size_t superpixels,
                            std::size_t coord_dim, std::size_t value_dim);

/// Tape handles for one network's parameters.
struct LayerVars {
  Var weight;
  Var bias;
  Var excite;
  Var squeeze;
};
using NetVars = std::vector<LayerVars>;

/// Records the network's parameters on the tape, as gradient-tracking leaves
/// when `trainable` is set and as constants otherwise.
NetVars record_net(Tape& tape, const SuperpixelNet& net, bool trainable);

/// sigmoid(U relu(V mean_cols(z))) (x) z: one gate per channel, pooled over the
/// points present in z.
Var record_attention(Tape& tape, Var excite, Var squeeze, Var z);

/// Records the network body on `x` (c x m): sine layers compute
/// sin(omega0 (W z + b)), the last layer is affine, and with `attention` every
/// layer output, the last one included, passes through its channel gate.
/// Returns the r x m output before the dictionary.
Var record_net_forward(Tape& tape, const NetVars& net, Var x, double omega0, bool attention);

/// Plain sinusoidal network (no gates, no dictionary); omega0 = 1 gives the
/// textbook form W_L sin(... sin(W_0 x + b_0) ...) + b_L.
Matrix inr_forward(const SuperpixelNet& net, const Matrix& x, double omega0);

/// Channel gate applied to z; throws InvalidArgument when z has no columns.
Matrix attention_block(const Matrix& excite, const Matrix& squeeze, const Matrix& z);

/// D Psi_k(x) for superpixel k on coordinates x (c x m) -> s x m.
Matrix sinr_forward(const SInrModel& model, std::size_t k, const Matrix& x);

/// Deterministic SIREN-style initialization; see README for the exact ranges.
SInrModel init_model(const ArchConfig& arch, std::size_t superpixels, std::size_t coord_dim,
                     std::size_t value_dim, std::uint64_t seed);

void save_checkpoint(const SInrModel& model, const std::filesystem::path& path);
SInrModel load_checkpoint(const std::filesystem::path& path);

}  // namespace sinr
