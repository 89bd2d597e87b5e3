#include "sinr/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sinr/errors.hpp"

namespace sinr {

namespace fs = std::filesystem;

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kRgbImage: return "rgb-image";
    case DatasetKind::kMultibandImage: return "multiband-image";
    case DatasetKind::kPointCloud: return "point-cloud-xyzrgb";
    case DatasetKind::kWeatherGrid: return "weather-grid";
  }
  return "unknown";
}

DatasetKind parse_dataset_kind(const std::string& name) {
  if (name == "rgb-image") return DatasetKind::kRgbImage;
  if (name == "multiband-image") return DatasetKind::kMultibandImage;
  if (name == "point-cloud-xyzrgb") return DatasetKind::kPointCloud;
  if (name == "weather-grid") return DatasetKind::kWeatherGrid;
  throw InvalidArgument("unknown dataset kind '" + name + "'");
}

DatasetKind infer_dataset_kind(const fs::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".png") return DatasetKind::kRgbImage;
  if (ext == ".mbf") return DatasetKind::kMultibandImage;
  if (ext == ".csv") return DatasetKind::kPointCloud;
  throw InvalidArgument("cannot infer dataset kind from '" + path.string() + "'");
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_for_write(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

GridShape require_grid(const PointSet& data, const fs::path& path) {
  if (!data.grid) throw InvalidArgument("saving " + path.string() + " needs an image grid");
  return *data.grid;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

PointSet load_dataset(const DatasetDescriptor& desc) {
  PointSet data;
  switch (desc.kind) {
    case DatasetKind::kRgbImage: data = load_png(desc.path); break;
    case DatasetKind::kMultibandImage:
    case DatasetKind::kWeatherGrid: data = load_mbf(desc.path); break;
    case DatasetKind::kPointCloud: data = load_point_csv(desc.path); break;
  }
  data.validate();
  return data;
}

void save_pointset(const PointSet& data, const fs::path& path) {
  data.validate();
  const std::string ext = path.extension().string();
  if (ext == ".csv") {
    save_point_csv(data, path);
  } else if (ext == ".png") {
    save_png(data.values, require_grid(data, path), path);
  } else if (ext == ".mbf") {
    save_mbf(data.values, require_grid(data, path), path);
  } else {
    throw InvalidArgument("unsupported output extension '" + ext + "'");
  }
}

PointSet load_png(const fs::path& path) {
  const std::string bytes = read_file(path);
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw ParseError("png: " + std::string(image.message) + " in " + path.string(), 0);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t bands = color ? 3 : 1;
  const std::size_t h = image.height;
  const std::size_t w = image.width;
  std::vector<png_byte> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw ParseError("png: " + msg + " in " + path.string(), 0);
  }
  PointSet data;
  data.values = Matrix(bands, h * w);
  for (std::size_t i = 0; i < h * w; ++i)
    for (std::size_t b = 0; b < bands; ++b) data.values(b, i) = pixels[i * bands + b] / 255.0;
  data.coords = grid_coords(h, w);
  data.grid = GridShape{h, w};
  return data;
}

void save_png(const Matrix& values, GridShape grid, const fs::path& path) {
  const std::size_t bands = values.rows();
  if (bands != 1 && bands != 3) {
    throw InvalidArgument("png output needs 1 or 3 bands, got " + std::to_string(bands));
  }
  if (grid.height * grid.width != values.cols()) {
    throw DimensionError("png: grid does not match the number of pixels");
  }
  std::vector<png_byte> pixels(values.size());
  for (std::size_t i = 0; i < values.cols(); ++i)
    for (std::size_t b = 0; b < bands; ++b) {
      const double v = std::clamp(values(b, i), 0.0, 1.0);
      pixels[i * bands + b] = static_cast<png_byte>(std::lround(v * 255.0));
    }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(grid.width);
  image.height = static_cast<png_uint_32>(grid.height);
  image.format = bands == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, pixels.data(), 0, nullptr)) {
    throw IoError("png: cannot write " + path.string() + ": " + image.message);
  }
}

PointSet load_mbf(const fs::path& path) {
  const std::string bytes = read_file(path);
  const auto eol = bytes.find('\n');
  if (eol == std::string::npos) throw ParseError("mbf: missing header line", 0);
  std::istringstream header(bytes.substr(0, eol));
  std::string magic;
  long long h = -1, w = -1, bands = -1;
  header >> magic;
  if (magic != "MBF1") throw ParseError("mbf: bad magic '" + magic + "'", 0);
  if (!(header >> h >> w >> bands) || h <= 0 || w <= 0 || bands <= 0) {
    throw ParseError("mbf: malformed shape in header", magic.size());
  }
  std::string extra;
  if (header >> extra) throw ParseError("mbf: unexpected header field '" + extra + "'", eol);
  const std::size_t n = static_cast<std::size_t>(h * w);
  const std::size_t expected = n * static_cast<std::size_t>(bands) * 4;
  const std::size_t payload = bytes.size() - eol - 1;
  if (payload != expected) {
    throw ParseError("mbf: payload has " + std::to_string(payload) + " bytes, header implies " +
                         std::to_string(expected),
                     eol + 1 + std::min(payload, expected));
  }
  PointSet data;
  data.values = Matrix(static_cast<std::size_t>(bands), n);
  const char* p = bytes.data() + eol + 1;
  for (double& v : data.values.data()) {
    std::uint32_t bits = 0;
    std::memcpy(&bits, p, 4);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    v = static_cast<double>(std::bit_cast<float>(bits));
    p += 4;
  }
  data.coords = grid_coords(static_cast<std::size_t>(h), static_cast<std::size_t>(w));
  data.grid = GridShape{static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
  return data;
}

void save_mbf(const Matrix& values, GridShape grid, const fs::path& path) {
  if (grid.height * grid.width != values.cols()) {
    throw DimensionError("mbf: grid does not match the number of pixels");
  }
  auto out = open_for_write(path);
  out << "MBF1 " << grid.height << ' ' << grid.width << ' ' << values.rows() << '\n';
  for (double v : values.data()) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    char buf[4];
    std::memcpy(buf, &bits, 4);
    out.write(buf, 4);
  }
  if (!out) throw IoError("mbf: failed writing " + path.string());
}

PointSet load_point_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::size_t pos = 0;
  auto next_line = [&](std::size_t& start) -> std::optional<std::string> {
    if (pos >= text.size()) return std::nullopt;
    start = pos;
    auto eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  std::size_t at = 0;
  auto comment = next_line(at);
  if (!comment || comment->rfind('#', 0) != 0) {
    throw ParseError("csv: first line must be a '# coords=... values=...' comment", 0);
  }
  std::vector<std::string> coord_names;
  std::vector<std::string> value_names;
  std::optional<GridShape> grid;
  {
    std::istringstream fields(comment->substr(1));
    std::string field;
    while (fields >> field) {
      const auto eq = field.find('=');
      const std::size_t field_at = at + comment->find(field);
      if (eq == std::string::npos) throw ParseError("csv: malformed declaration '" + field + "'", field_at);
      const std::string key = field.substr(0, eq);
      const std::string val = field.substr(eq + 1);
      if (key == "coords") {
        coord_names = split(val, ',');
      } else if (key == "values") {
        value_names = split(val, ',');
      } else if (key == "grid") {
        const auto x = val.find('x');
        try {
          if (x == std::string::npos) throw std::invalid_argument(val);
          grid = GridShape{std::stoul(val.substr(0, x)), std::stoul(val.substr(x + 1))};
        } catch (const std::logic_error&) {
          throw ParseError("csv: malformed grid '" + val + "'", field_at);
        }
      } else {
        throw ParseError("csv: unknown declaration '" + key + "'", field_at);
      }
    }
  }
  if (coord_names.empty() || value_names.empty()) {
    throw ParseError("csv: the comment must declare both coords= and values=", at);
  }

  auto header = next_line(at);
  if (!header) throw ParseError("csv: missing column header row", pos);
  std::vector<std::string> columns = split(*header, ',');
  for (auto& c : columns) c = trim(c);
  auto find_column = [&](const std::string& name) {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw ParseError("csv: declared column '" + name + "' not in header", at);
    return static_cast<std::size_t>(it - columns.begin());
  };
  std::vector<std::size_t> coord_cols, value_cols;
  for (const auto& n : coord_names) coord_cols.push_back(find_column(n));
  for (const auto& n : value_names) value_cols.push_back(find_column(n));

  std::vector<double> raw_coords, raw_values;
  std::size_t rows = 0;
  while (auto line = next_line(at)) {
    if (trim(*line).empty()) continue;
    std::vector<double> fields;
    std::size_t field_start = 0;
    std::size_t column = 0;
    while (true) {
      auto comma = line->find(',', field_start);
      const std::size_t end = comma == std::string::npos ? line->size() : comma;
      std::string token = trim(line->substr(field_start, end - field_start));
      double v = 0.0;
      const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
        throw ParseError("csv: bad number '" + token + "' in column " + std::to_string(column),
                         at + field_start);
      }
      fields.push_back(v);
      ++column;
      if (comma == std::string::npos) break;
      field_start = comma + 1;
    }
    if (fields.size() != columns.size()) {
      throw ParseError("csv: row has " + std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(columns.size()),
                       at);
    }
    for (auto c : coord_cols) raw_coords.push_back(fields[c]);
    for (auto c : value_cols) raw_values.push_back(fields[c]);
    ++rows;
  }
  if (rows == 0) throw ParseError("csv: no data rows", text.size());

  // gathered point-major; transpose into features x points
  PointSet data;
  data.coords = Matrix(coord_cols.size(), rows);
  data.values = Matrix(value_cols.size(), rows);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t r = 0; r < coord_cols.size(); ++r)
      data.coords(r, i) = raw_coords[i * coord_cols.size() + r];
    for (std::size_t r = 0; r < value_cols.size(); ++r)
      data.values(r, i) = raw_values[i * value_cols.size() + r];
  }
  data.coords = normalize_coords(data.coords);
  data.grid = grid;
  data.validate();
  return data;
}

void save_point_csv(const PointSet& data, const fs::path& path) {
  auto out = open_for_write(path);
  std::vector<std::string> coord_names, value_names;
  for (std::size_t r = 0; r < data.coord_dim(); ++r) coord_names.push_back("x" + std::to_string(r));
  for (std::size_t r = 0; r < data.value_dim(); ++r) value_names.push_back("v" + std::to_string(r));
  auto join = [](const std::vector<std::string>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + xs[i];
    return s;
  };
  out << "# coords=" << join(coord_names) << " values=" << join(value_names);
  if (data.grid) out << " grid=" << data.grid->height << 'x' << data.grid->width;
  out << '\n' << join(coord_names) << ',' << join(value_names) << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t r = 0; r < data.coord_dim(); ++r) out << format_double(data.coords(r, i)) << ',';
    for (std::size_t r = 0; r < data.value_dim(); ++r) {
      out << format_double(data.values(r, i)) << (r + 1 < data.value_dim() ? "," : "\n");
    }
  }
  if (!out) throw IoError("csv: failed writing " + path.string());
}

void write_label_map(const SuperpixelPartition& part, const fs::path& path) {
  auto out = open_for_write(path);
  out << "GSSA K=" << part.superpixel_count() << " n=" << part.point_count() << '\n';
  for (std::size_t i = 0; i < part.labels.size(); ++i) {
    out << part.labels[i] << ((i + 1) % 32 == 0 || i + 1 == part.labels.size() ? '\n' : ' ');
  }
  if (!out) throw IoError("label map: failed writing " + path.string());
}

LabelMap read_label_map(const fs::path& path) {
  const std::string text = read_file(path);
  const auto eol = text.find('\n');
  const std::string header = text.substr(0, eol);
  unsigned long long k = 0, n = 0;
  if (std::sscanf(header.c_str(), "GSSA K=%llu n=%llu", &k, &n) != 2 || k == 0) {
    throw ParseError("label map: expected 'GSSA K=<K> n=<n>' header", 0);
  }
  LabelMap map;
  map.k = static_cast<std::size_t>(k);
  map.labels.reserve(static_cast<std::size_t>(n));
  std::size_t pos = eol == std::string::npos ? text.size() : eol + 1;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) break;
    std::uint32_t label = 0;
    const auto res = std::from_chars(text.data() + pos, text.data() + text.size(), label);
    if (res.ec != std::errc() || (res.ptr != text.data() + text.size() &&
                                  !std::isspace(static_cast<unsigned char>(*res.ptr)))) {
      throw ParseError("label map: bad label", pos);
    }
    if (label >= map.k) throw ParseError("label map: label " + std::to_string(label) + " >= K", pos);
    map.labels.push_back(label);
    pos = static_cast<std::size_t>(res.ptr - text.data());
  }
  if (map.labels.size() != n) {
    throw ParseError("label map: header promises " + std::to_string(n) + " labels, found " +
                         std::to_string(map.labels.size()),
                     text.size());
  }
  return map;
}

}  // namespace sinr
