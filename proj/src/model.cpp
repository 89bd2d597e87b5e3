#include "sinr/model.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "sinr/errors.hpp"
#include "sinr/random.hpp"

namespace sinr {

void ArchConfig::validate() const {
  if (hidden_width == 0) throw InvalidArgument("arch: hidden width must be >= 1");
  if (hidden_layers == 0) throw InvalidArgument("arch: need at least one sine layer");
  if (dictionary && dict_factor == 0) throw InvalidArgument("arch: dictionary factor must be >= 1");
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw InvalidArgument("arch: omega0 must be > 0");
}

std::vector<std::size_t> SInrModel::layer_widths() const {
  std::vector<std::size_t> widths{coord_dim};
  for (std::size_t l = 0; l < arch.hidden_layers; ++l) widths.push_back(arch.hidden_width);
  widths.push_back(rank());
  return widths;
}

std::size_t parameter_count(const ArchConfig& arch, std::size_t superpixels,
                            std::size_t coord_dim, std::size_t value_dim) {
  const std::size_t r = arch.dictionary ? arch.dict_factor * value_dim : value_dim;
  std::size_t per_net = 0;
  std::size_t in = coord_dim;
  for (std::size_t l = 0; l <= arch.hidden_layers; ++l) {
    const std::size_t out = l == arch.hidden_layers ? r : arch.hidden_width;
    per_net += out * in + out;
    if (arch.attention) per_net += 2 * out * out;
    in = out;
  }
  return superpixels * per_net + (arch.dictionary ? value_dim * r : 0);
}

std::size_t SInrModel::parameter_count() const {
  return sinr::parameter_count(arch, nets.size(), coord_dim, value_dim);
}

NetVars record_net(Tape& tape, const SuperpixelNet& net, bool trainable) {
  auto leaf = [&](const Matrix& m) { return trainable ? tape.parameter(m) : tape.constant(m); };
  NetVars vars;
  vars.reserve(net.layers.size());
  for (const auto& layer : net.layers) {
    LayerVars lv;
    lv.weight = leaf(layer.weight);
    lv.bias = leaf(layer.bias);
    if (!layer.excite.empty()) {
      lv.excite = leaf(layer.excite);
      lv.squeeze = leaf(layer.squeeze);
    }
    vars.push_back(lv);
  }
  return vars;
}

Var record_attention(Tape& tape, Var excite, Var squeeze, Var z) {
  const Var pooled = tape.row_mean_pool(z);
  const Var hidden = tape.relu(tape.matmul(squeeze, pooled));
  const Var gate = tape.sigmoid(tape.matmul(excite, hidden));
  return tape.elem_prod(gate, z);
}

Var record_net_forward(Tape& tape, const NetVars& net, Var x, double omega0, bool attention) {
  Var z = x;
  for (std::size_t l = 0; l < net.size(); ++l) {
    const LayerVars& lv = net[l];
    z = tape.add_bias(tape.matmul(lv.weight, z), lv.bias);
    if (l + 1 < net.size()) z = tape.sine(tape.scale(z, omega0));
    if (attention) z = record_attention(tape, lv.excite, lv.squeeze, z);
  }
  return z;
}

Matrix inr_forward(const SuperpixelNet& net, const Matrix& x, double omega0) {
  Tape tape;
  const NetVars vars = record_net(tape, net, false);
  return tape.value(record_net_forward(tape, vars, tape.constant(x), omega0, false));
}

Matrix attention_block(const Matrix& excite, const Matrix& squeeze, const Matrix& z) {
  if (z.cols() == 0) throw InvalidArgument("attention_block: no points to pool over");
  if (excite.rows() != z.rows() || excite.cols() != z.rows() || !squeeze.same_shape(excite)) {
    throw DimensionError("attention_block: gate matrices must be " + std::to_string(z.rows()) +
                         "x" + std::to_string(z.rows()));
  }
  Tape tape;
  const Var out = record_attention(tape, tape.constant(excite), tape.constant(squeeze),
                                   tape.constant(z));
  return tape.value(out);
}

Matrix sinr_forward(const SInrModel& model, std::size_t k, const Matrix& x) {
  if (k >= model.nets.size()) {
    throw InvalidArgument("sinr_forward: superpixel " + std::to_string(k) + " out of range (K=" +
                          std::to_string(model.nets.size()) + ")");
  }
  if (x.rows() != model.coord_dim) {
    throw DimensionError("sinr_forward: expected " + std::to_string(model.coord_dim) +
                         " coordinate rows, got " + std::to_string(x.rows()));
  }
  if (model.arch.attention && x.cols() == 0) {
    throw InvalidArgument("sinr_forward: no points to pool over");
  }
  Tape tape;
  const NetVars vars = record_net(tape, model.nets[k], false);
  Var out = record_net_forward(tape, vars, tape.constant(x), model.arch.omega0,
                               model.arch.attention);
  if (model.arch.dictionary) out = tape.matmul(tape.constant(model.dictionary), out);
  return tape.value(out);
}

namespace {

Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols, double bound) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
  return m;
}

}  // namespace

SInrModel init_model(const ArchConfig& arch, std::size_t superpixels, std::size_t coord_dim,
                     std::size_t value_dim, std::uint64_t seed) {
  arch.validate();
  if (superpixels == 0 || coord_dim == 0 || value_dim == 0) {
    throw InvalidArgument("init_model: K, coordinate and value dimensions must be >= 1");
  }
  Rng rng(seed);
  SInrModel model;
  model.arch = arch;
  model.coord_dim = coord_dim;
  model.value_dim = value_dim;

  if (arch.dictionary) {
    const std::size_t r = arch.dict_factor * value_dim;
    model.dictionary = uniform_matrix(rng, value_dim, r, std::sqrt(6.0 / static_cast<double>(r)));
  } else {
    model.dictionary = Matrix::identity(value_dim);
  }

  // The gated final layer sees inputs damped by sigmoid gates at every level,
  // so its range is widened to keep the initial output near unit scale.
  const double final_gain = arch.attention ? 4.0 : 1.0;
  const auto widths = model.layer_widths();
  model.nets.resize(superpixels);
  for (auto& net : model.nets) {
    net.layers.resize(arch.hidden_layers + 1);
    for (std::size_t l = 0; l <= arch.hidden_layers; ++l) {
      const std::size_t in = widths[l];
      const std::size_t out = widths[l + 1];
      const double fan_in = static_cast<double>(in);
      double bound = 0.0;
      if (l == 0) {
        bound = 1.0 / fan_in;
      } else if (l < arch.hidden_layers) {
        bound = std::sqrt(6.0 / fan_in) / arch.omega0;
      } else {
        bound = std::sqrt(6.0 / fan_in) * final_gain;
      }
      LayerParams& p = net.layers[l];
      p.weight = uniform_matrix(rng, out, in, bound);
      p.bias = Matrix(out, 1);
      if (arch.attention) {
        const double gate_bound = std::sqrt(1.0 / static_cast<double>(out));
        p.excite = uniform_matrix(rng, out, out, gate_bound);
        p.squeeze = uniform_matrix(rng, out, out, gate_bound);
      }
    }
  }
  return model;
}

namespace {

constexpr const char* kMagic = "SINR1";

void write_block(std::ostream& out, const Matrix& m) {
  for (double v : m.data()) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
}

void read_block(std::istream& in, Matrix& m, std::size_t& offset) {
  for (double& v : m.data()) {
    char bytes[8];
    if (!in.read(bytes, 8)) throw ParseError("checkpoint: truncated parameter data", offset);
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes, 8);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
    v = std::bit_cast<double>(bits);
    offset += 8;
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void save_checkpoint(const SInrModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const auto widths = model.layer_widths();
  std::string header = std::string(kMagic) + " K=" + std::to_string(model.nets.size()) +
                       " s=" + std::to_string(model.value_dim) + " r=" +
                       std::to_string(model.rank()) + " c=" + std::to_string(model.coord_dim) +
                       " L=" + std::to_string(model.arch.hidden_layers) + " widths=";
  for (std::size_t l = 1; l + 1 < widths.size(); ++l) {
    header += (l > 1 ? "," : "") + std::to_string(widths[l]);
  }
  header += " omega0=" + format_double(model.arch.omega0) +
            " attention=" + (model.arch.attention ? "1" : "0") +
            " dictionary=" + (model.arch.dictionary ? "1" : "0") + "\n";
  out << header;
  write_block(out, model.dictionary);
  for (const auto& net : model.nets) {
    for (const auto& layer : net.layers) {
      write_block(out, layer.weight);
      write_block(out, layer.bias);
      if (model.arch.attention) {
        write_block(out, layer.excite);
        write_block(out, layer.squeeze);
      }
    }
  }
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

SInrModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string header;
  if (!std::getline(in, header)) throw ParseError("checkpoint: missing header", 0);
  std::istringstream tokens(header);
  std::string magic;
  tokens >> magic;
  if (magic != kMagic) throw ParseError("checkpoint: bad magic '" + magic + "'", 0);

  std::size_t k = 0, s = 0, r = 0, c = 0, layers = 0;
  std::vector<std::size_t> widths;
  double omega0 = 0.0;
  int attention = -1, dictionary = -1;
  std::string tok;
  while (tokens >> tok) {
    const auto eq = tok.find('=');
    const std::size_t at = header.find(tok);
    if (eq == std::string::npos) throw ParseError("checkpoint: malformed header field '" + tok + "'", at);
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    try {
      if (key == "K") k = std::stoul(val);
      else if (key == "s") s = std::stoul(val);
      else if (key == "r") r = std::stoul(val);
      else if (key == "c") c = std::stoul(val);
      else if (key == "L") layers = std::stoul(val);
      else if (key == "omega0") omega0 = std::stod(val);
      else if (key == "attention") attention = std::stoi(val);
      else if (key == "dictionary") dictionary = std::stoi(val);
      else if (key == "widths") {
        std::istringstream ws(val);
        std::string w;
        while (std::getline(ws, w, ',')) widths.push_back(std::stoul(w));
      } else {
        throw ParseError("checkpoint: unknown header field '" + key + "'", at);
      }
    } catch (const std::logic_error&) {
      throw ParseError("checkpoint: bad value in header field '" + tok + "'", at);
    }
  }
  if (k == 0 || s == 0 || r == 0 || c == 0 || layers == 0 || widths.size() != layers ||
      attention < 0 || dictionary < 0) {
    throw ParseError("checkpoint: incomplete header", 0);
  }
  for (std::size_t w : widths) {
    if (w != widths.front()) throw ParseError("checkpoint: non-uniform hidden widths", 0);
  }

  SInrModel model;
  model.arch.hidden_width = widths.front();
  model.arch.hidden_layers = layers;
  model.arch.omega0 = omega0;
  model.arch.attention = attention != 0;
  model.arch.dictionary = dictionary != 0;
  model.arch.dict_factor = dictionary ? r / s : 1;
  if (dictionary && r % s != 0) throw ParseError("checkpoint: r is not a multiple of s", 0);
  if (!dictionary && r != s) throw ParseError("checkpoint: r must equal s without a dictionary", 0);
  model.coord_dim = c;
  model.value_dim = s;

  std::size_t offset = header.size() + 1;
  model.dictionary = Matrix(s, r);
  read_block(in, model.dictionary, offset);
  const auto all_widths = model.layer_widths();
  model.nets.resize(k);
  for (auto& net : model.nets) {
    net.layers.resize(layers + 1);
    for (std::size_t l = 0; l <= layers; ++l) {
      const std::size_t out = all_widths[l + 1];
      LayerParams& p = net.layers[l];
      p.weight = Matrix(out, all_widths[l]);
      p.bias = Matrix(out, 1);
      read_block(in, p.weight, offset);
      read_block(in, p.bias, offset);
      if (model.arch.attention) {
        p.excite = Matrix(out, out);
        p.squeeze = Matrix(out, out);
        read_block(in, p.excite, offset);
        read_block(in, p.squeeze, offset);
      }
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("checkpoint: trailing bytes after parameters", offset);
  }
  return model;
}

}  // namespace sinr
