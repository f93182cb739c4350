#include "mcfnet/data/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <zlib.h>

namespace mcfnet::data {
namespace fs = std::filesystem;

namespace {

constexpr int32_t kNiftiHeaderSize = 348;
constexpr int64_t kNiftiVoxOffset = 352;

enum NiftiType : int16_t {
  kUInt8 = 2,
  kInt16 = 4,
  kInt32 = 8,
  kFloat32 = 16,
  kFloat64 = 64,
  kInt8 = 256,
  kUInt16 = 512,
  kUInt32 = 768,
};

template <typename T>
T read_field(const unsigned char* header, size_t offset, bool swap) {
  T value;
  std::memcpy(&value, header + offset, sizeof(T));
  if (swap) {
    auto* bytes = reinterpret_cast<unsigned char*>(&value);
    std::reverse(bytes, bytes + sizeof(T));
  }
  return value;
}

template <typename T>
void write_field(unsigned char* header, size_t offset, T value) {
  std::memcpy(header + offset, &value, sizeof(T));
}

struct GzFile {
  gzFile handle;
  explicit GzFile(const fs::path& path, const char* mode) : handle(gzopen(path.c_str(), mode)) {
    if (!handle) throw std::runtime_error("cannot open " + path.string());
  }
  ~GzFile() { gzclose(handle); }
  GzFile(const GzFile&) = delete;
  GzFile& operator=(const GzFile&) = delete;

  void read_exact(void* out, size_t bytes, const fs::path& path) {
    auto* cursor = static_cast<unsigned char*>(out);
    while (bytes > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<size_t>(bytes, 1u << 30));
      const int got = gzread(handle, cursor, chunk);
      if (got <= 0) throw std::runtime_error("truncated NIfTI file " + path.string());
      cursor += got;
      bytes -= static_cast<size_t>(got);
    }
  }
  void write_exact(const void* data, size_t bytes, const fs::path& path) {
    auto* cursor = static_cast<const unsigned char*>(data);
    while (bytes > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<size_t>(bytes, 1u << 30));
      const int put = gzwrite(handle, cursor, chunk);
      if (put <= 0) throw std::runtime_error("cannot write " + path.string());
      cursor += put;
      bytes -= static_cast<size_t>(put);
    }
  }
};

template <typename T>
void convert(const std::vector<unsigned char>& raw, bool swap, std::vector<float>& out) {
  const size_t n = out.size();
  for (size_t i = 0; i < n; ++i) {
    T value;
    std::memcpy(&value, raw.data() + i * sizeof(T), sizeof(T));
    if (swap && sizeof(T) > 1) {
      auto* bytes = reinterpret_cast<unsigned char*>(&value);
      std::reverse(bytes, bytes + sizeof(T));
    }
    out[i] = static_cast<float>(value);
  }
}

bool is_nifti_name(const fs::path& path) {
  const auto name = path.filename().string();
  auto ends_with = [&](std::string_view suffix) {
    return name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  return ends_with(".nii") || ends_with(".nii.gz");
}

Volume load_nifti(const fs::path& path, Modality modality) {
  GzFile file(path, "rb");
  unsigned char header[kNiftiHeaderSize];
  file.read_exact(header, sizeof(header), path);

  bool swap = false;
  if (read_field<int32_t>(header, 0, false) != kNiftiHeaderSize) {
    swap = true;
    if (read_field<int32_t>(header, 0, true) != kNiftiHeaderSize) {
      throw std::runtime_error(path.string() + " is not a NIfTI-1 file");
    }
  }
  const auto rank = read_field<int16_t>(header, 40, swap);
  if (rank < 2 || rank > 7) throw std::runtime_error("unsupported NIfTI rank in " + path.string());
  std::array<int64_t, 3> extent{1, 1, 1};  // x, y, z
  for (int d = 0; d < std::min<int>(rank, 3); ++d) {
    extent[d] = read_field<int16_t>(header, 42 + 2 * d, swap);
    if (extent[d] < 1) throw std::runtime_error("non-positive NIfTI dimension in " + path.string());
  }
  for (int d = 3; d < rank; ++d) {
    if (read_field<int16_t>(header, 42 + 2 * d, swap) > 1) {
      throw std::runtime_error("only 3D NIfTI volumes are supported: " + path.string());
    }
  }
  const auto datatype = read_field<int16_t>(header, 70, swap);
  std::array<double, 3> pixdim{1, 1, 1};
  for (int d = 0; d < 3; ++d) {
    const double v = std::abs(read_field<float>(header, 80 + 4 * d, swap));
    pixdim[d] = (d < rank && v > 0) ? v : 1.0;
  }
  const auto vox_offset = static_cast<int64_t>(read_field<float>(header, 108, swap));
  float slope = read_field<float>(header, 112, swap);
  const float intercept = read_field<float>(header, 116, swap);
  if (slope == 0.0f || !std::isfinite(slope)) slope = 1.0f;

  Volume volume(extent[2], extent[1], extent[0], {pixdim[2], pixdim[1], pixdim[0]}, modality);
  const int64_t skip = std::max<int64_t>(vox_offset, kNiftiVoxOffset) - kNiftiHeaderSize;
  std::vector<unsigned char> discard(static_cast<size_t>(skip));
  if (skip > 0) file.read_exact(discard.data(), discard.size(), path);

  size_t bytes_per_voxel = 0;
  switch (datatype) {
    case kUInt8:
    case kInt8:
      bytes_per_voxel = 1;
      break;
    case kInt16:
    case kUInt16:
      bytes_per_voxel = 2;
      break;
    case kInt32:
    case kUInt32:
    case kFloat32:
      bytes_per_voxel = 4;
      break;
    case kFloat64:
      bytes_per_voxel = 8;
      break;
    default:
      throw std::runtime_error("unsupported NIfTI datatype " + std::to_string(datatype) + " in " +
                               path.string());
  }
  std::vector<unsigned char> raw(volume.voxels.size() * bytes_per_voxel);
  file.read_exact(raw.data(), raw.size(), path);
  switch (datatype) {
    case kUInt8: convert<uint8_t>(raw, swap, volume.voxels); break;
    case kInt8: convert<int8_t>(raw, swap, volume.voxels); break;
    case kInt16: convert<int16_t>(raw, swap, volume.voxels); break;
    case kUInt16: convert<uint16_t>(raw, swap, volume.voxels); break;
    case kInt32: convert<int32_t>(raw, swap, volume.voxels); break;
    case kUInt32: convert<uint32_t>(raw, swap, volume.voxels); break;
    case kFloat32: convert<float>(raw, swap, volume.voxels); break;
    case kFloat64: convert<double>(raw, swap, volume.voxels); break;
  }
  if (slope != 1.0f || intercept != 0.0f) {
    for (auto& v : volume.voxels) v = v * slope + intercept;
  }
  // NIfTI stores x fastest then y then z, which is exactly (z, y, x) row-major.
  return volume;
}

Volume load_png_directory(const fs::path& dir, Modality modality) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") files.push_back(entry.path());
  }
  if (files.empty()) throw std::runtime_error("no PNG slices in " + dir.string());
  std::sort(files.begin(), files.end());

  Volume volume;
  for (size_t z = 0; z < files.size(); ++z) {
    cv::Mat slice = cv::imread(files[z].string(), cv::IMREAD_ANYDEPTH | cv::IMREAD_GRAYSCALE);
    if (slice.empty()) throw std::runtime_error("cannot read " + files[z].string());
    if (z == 0) {
      volume = Volume(static_cast<int64_t>(files.size()), slice.rows, slice.cols, {1, 1, 1}, modality);
    } else if (slice.rows != volume.height || slice.cols != volume.width) {
      throw std::runtime_error("slice " + files[z].filename().string() + " is " +
                               std::to_string(slice.rows) + "x" + std::to_string(slice.cols) +
                               ", expected " + std::to_string(volume.height) + "x" +
                               std::to_string(volume.width));
    }
    cv::Mat as_float;
    slice.convertTo(as_float, CV_32F);
    for (int y = 0; y < as_float.rows; ++y) {
      const float* row = as_float.ptr<float>(y);
      std::copy(row, row + as_float.cols, &volume.at(static_cast<int64_t>(z), y, 0));
    }
  }
  return volume;
}

}  // namespace

std::string to_string(Modality modality) {
  switch (modality) {
    case Modality::CT: return "CT";
    case Modality::MR: return "MR";
    case Modality::PET: return "PET";
  }
  return "unknown";
}

Modality parse_modality(std::string_view text) {
  if (text == "CT" || text == "ct") return Modality::CT;
  if (text == "MR" || text == "mr" || text == "MRI") return Modality::MR;
  if (text == "PET" || text == "pet") return Modality::PET;
  throw std::invalid_argument("unknown modality '" + std::string(text) + "'");
}

Volume::Volume(int64_t depth, int64_t height, int64_t width, std::array<double, 3> spacing,
               Modality modality)
    : depth(depth), height(height), width(width), spacing(spacing), modality(modality) {
  validate();
  voxels.assign(static_cast<size_t>(depth * height * width), 0.0f);
}

void Volume::validate() const {
  if (depth < 1 || height < 1 || width < 1) throw std::invalid_argument("volume extents must be >= 1");
  for (double s : spacing) {
    if (!(s > 0)) throw std::invalid_argument("volume spacing must be positive");
  }
}

ClassOrder::ClassOrder(std::vector<std::string> names_in) : names(std::move(names_in)) {
  if (names.size() < 2) throw std::invalid_argument("class order needs background plus one class");
  if (names.front() != "background") {
    throw std::invalid_argument("label 0 of a class order must be 'background'");
  }
  std::set<std::string> seen(names.begin(), names.end());
  if (seen.size() != names.size()) throw std::invalid_argument("class names must be unique");
}

int ClassOrder::label_of(std::string_view name) const {
  for (size_t k = 0; k < names.size(); ++k) {
    if (names[k] == name) return static_cast<int>(k);
  }
  throw std::invalid_argument("unknown class '" + std::string(name) + "'");
}

Volume load_volume(const fs::path& path, Modality modality) {
  if (!fs::exists(path)) throw std::runtime_error("no such file or directory: " + path.string());
  if (fs::is_directory(path)) return load_png_directory(path, modality);
  if (is_nifti_name(path)) return load_nifti(path, modality);
  throw std::runtime_error("unsupported volume format: " + path.string());
}

void save_nifti(const Volume& volume, const fs::path& path) {
  volume.validate();
  if (volume.depth > 32767 || volume.height > 32767 || volume.width > 32767) {
    throw std::invalid_argument("volume too large for NIfTI-1");
  }
  unsigned char header[kNiftiHeaderSize] = {};
  write_field<int32_t>(header, 0, kNiftiHeaderSize);
  write_field<int16_t>(header, 40, 3);
  write_field<int16_t>(header, 42, static_cast<int16_t>(volume.width));
  write_field<int16_t>(header, 44, static_cast<int16_t>(volume.height));
  write_field<int16_t>(header, 46, static_cast<int16_t>(volume.depth));
  for (int d = 4; d < 8; ++d) write_field<int16_t>(header, 40 + 2 * d, 1);
  write_field<int16_t>(header, 70, kFloat32);
  write_field<int16_t>(header, 72, 32);
  write_field<float>(header, 76, 1.0f);
  write_field<float>(header, 80, static_cast<float>(volume.spacing[2]));
  write_field<float>(header, 84, static_cast<float>(volume.spacing[1]));
  write_field<float>(header, 88, static_cast<float>(volume.spacing[0]));
  write_field<float>(header, 108, static_cast<float>(kNiftiVoxOffset));
  write_field<float>(header, 112, 1.0f);
  header[123] = 2;  // xyzt_units: mm
  std::memcpy(header + 344, "n+1\0", 4);

  const bool compress = path.extension() == ".gz";
  GzFile file(path, compress ? "wb6" : "wbT");
  file.write_exact(header, sizeof(header), path);
  const unsigned char extension[4] = {0, 0, 0, 0};
  file.write_exact(extension, sizeof(extension), path);
  file.write_exact(volume.voxels.data(), volume.voxels.size() * sizeof(float), path);
}

Volume merge_labels(std::span<const Volume> label_volumes, const ClassOrder& order) {
  if (label_volumes.empty()) throw std::invalid_argument("no label volumes to merge");
  if (static_cast<int64_t>(label_volumes.size()) != order.num_classes() - 1) {
    throw std::invalid_argument("got " + std::to_string(label_volumes.size()) +
                                " label volumes for " + std::to_string(order.num_classes() - 1) +
                                " foreground classes");
  }
  const Volume& first = label_volumes.front();
  Volume merged(first.depth, first.height, first.width, first.spacing, first.modality);
  for (size_t k = 0; k < label_volumes.size(); ++k) {
    const Volume& v = label_volumes[k];
    if (!v.same_grid(first)) throw std::invalid_argument("label volume shapes differ");
    for (size_t i = 0; i < v.voxels.size(); ++i) {
      const float value = v.voxels[i];
      if (value != 0.0f && value != 1.0f) {
        throw std::invalid_argument("label volume " + order.names[k + 1] + " is not binary");
      }
      if (value == 1.0f) merged.voxels[i] = static_cast<float>(k + 1);
    }
  }
  return merged;
}

}  // namespace mcfnet::data
