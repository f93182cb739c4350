#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcfnet::data {

enum class Modality { CT, MR, PET };

std::string to_string(Modality modality);
Modality parse_modality(std::string_view text);

// Scalar volume in (depth, height, width) order, depth being the axial axis.
struct Volume {
  int64_t depth = 0;
  int64_t height = 0;
  int64_t width = 0;
  // Physical voxel size in mm, (depth, height, width).
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  Modality modality = Modality::CT;
  std::vector<float> voxels;

  Volume() = default;
  Volume(int64_t depth, int64_t height, int64_t width, std::array<double, 3> spacing = {1, 1, 1},
         Modality modality = Modality::CT);

  float& at(int64_t z, int64_t y, int64_t x) { return voxels[(z * height + y) * width + x]; }
  float at(int64_t z, int64_t y, int64_t x) const { return voxels[(z * height + y) * width + x]; }
  std::span<const float> slice(int64_t z) const {
    return {voxels.data() + z * height * width, static_cast<size_t>(height * width)};
  }
  bool same_grid(const Volume& other) const {
    return depth == other.depth && height == other.height && width == other.width;
  }
  void validate() const;
};

// Ordered class names; label k is names[k] and names[0] is the background.
struct ClassOrder {
  std::vector<std::string> names;

  explicit ClassOrder(std::vector<std::string> names);
  int64_t num_classes() const { return static_cast<int64_t>(names.size()); }
  int label_of(std::string_view name) const;
};

// Reads a NIfTI-1 file (.nii or .nii.gz) or a directory of 2D PNG slices
// (sorted by file name, one slice per file, default 1 mm spacing).
Volume load_volume(const std::filesystem::path& path, Modality modality = Modality::CT);

// Writes a NIfTI-1 volume as float32; gzip-compressed when the name ends in .gz.
void save_nifti(const Volume& volume, const std::filesystem::path& path);

// Combines per-structure binary volumes into one label volume. The k-th
// volume (0-based) becomes label k + 1 of `order`; on overlap the later
// structure wins.
Volume merge_labels(std::span<const Volume> label_volumes, const ClassOrder& order);

}  // namespace mcfnet::data
