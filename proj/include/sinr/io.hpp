#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sinr/gssa.hpp"
#include "sinr/point_set.hpp"

namespace sinr {

enum class DatasetKind { kRgbImage, kMultibandImage, kPointCloud, kWeatherGrid };

std::string to_string(DatasetKind kind);
/// Accepts rgb-image, multiband-image, point-cloud-xyzrgb and weather-grid.
DatasetKind parse_dataset_kind(const std::string& name);
/// .png -> rgb-image, .mbf -> multiband-image, .csv -> point-cloud-xyzrgb.
DatasetKind infer_dataset_kind(const std::filesystem::path& path);

struct DatasetDescriptor {
  DatasetKind kind = DatasetKind::kRgbImage;
  std::filesystem::path path;
};

/// Loads any supported dataset as a PointSet with coordinates in [-1, 1].
/// Images flatten row-major and keep their GridShape.
PointSet load_dataset(const DatasetDescriptor& desc);

/// Writes by extension: .csv keeps full double precision (exact round trip),
/// .mbf stores 32-bit floats, .png stores 8 bits per channel (1 or 3 bands,
/// clamped to [0, 1]). Image formats need `data.grid`.
void save_pointset(const PointSet& data, const std::filesystem::path& path);

/// PNG: 8-bit gray or RGB(A); alpha is dropped. Values scaled to [0, 1].
PointSet load_png(const std::filesystem::path& path);
void save_png(const Matrix& values, GridShape grid, const std::filesystem::path& path);

/// Multiband float format: text line "MBF1 <h> <w> <bands>\n" followed by
/// little-endian float32 samples, band-major then row-major.
PointSet load_mbf(const std::filesystem::path& path);
void save_mbf(const Matrix& values, GridShape grid, const std::filesystem::path& path);

/// Point CSV. The first line is a comment declaring the split, e.g.
///   # coords=x,y,z values=R,G,B
/// followed by a header row naming every column and then one row per point.
/// Columns named in neither list (ids, ...) are ignored.
PointSet load_point_csv(const std::filesystem::path& path);
void save_point_csv(const PointSet& data, const std::filesystem::path& path);

/// "GSSA K=<K> n=<n>" followed by n whitespace-separated labels.
void write_label_map(const SuperpixelPartition& part, const std::filesystem::path& path);
struct LabelMap {
  std::size_t k = 0;
  std::vector<std::uint32_t> labels;
};
LabelMap read_label_map(const std::filesystem::path& path);

}  // namespace sinr
