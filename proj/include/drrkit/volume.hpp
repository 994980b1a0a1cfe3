#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "drrkit/geometry.hpp"

namespace drrkit {

/// Voxel grid placement. `spacing` and `origin` are in world (x, y, z)
/// order; `origin` is the centre of voxel (0,0,0).
struct GridGeometry {
  Dims3 dims;
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{};

  /// Throws InvalidArgument if any dim is zero or any spacing is not positive.
  void validate() const;

  std::size_t voxel_count() const { return dims.count(); }
  double voxel_volume_mm3() const { return spacing.x * spacing.y * spacing.z; }
  double voxel_volume_ml() const { return voxel_volume_mm3() / 1000.0; }

  std::size_t linear(std::size_t z, std::size_t y, std::size_t x) const {
    return (z * dims.height + y) * dims.width + x;
  }

  Vec3 world(double z, double y, double x) const {
    return {origin.x + x * spacing.x, origin.y + y * spacing.y, origin.z + z * spacing.z};
  }

  /// Physical size of the voxel-box extent, dims * spacing per axis.
  Vec3 extent() const {
    return {static_cast<double>(dims.width) * spacing.x, static_cast<double>(dims.height) * spacing.y,
            static_cast<double>(dims.depth) * spacing.z};
  }

  /// World position of the grid centre.
  Vec3 isocenter() const {
    return world(0.5 * static_cast<double>(dims.depth - 1), 0.5 * static_cast<double>(dims.height - 1),
                 0.5 * static_cast<double>(dims.width - 1));
  }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Scalar 3D grid. Values are Hounsfield units unless a function says
/// otherwise (the projector consumes attenuation in 1/mm).
class Volume {
 public:
  Volume() = default;
  explicit Volume(const GridGeometry& geometry, double fill = 0.0);
  Volume(const GridGeometry& geometry, std::vector<double> data);

  const GridGeometry& geometry() const { return geometry_; }
  const Dims3& dims() const { return geometry_.dims; }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  double at(std::size_t z, std::size_t y, std::size_t x) const { return data_[geometry_.linear(z, y, x)]; }
  double& at(std::size_t z, std::size_t y, std::size_t x) { return data_[geometry_.linear(z, y, x)]; }

  friend bool operator==(const Volume&, const Volume&) = default;

 private:
  GridGeometry geometry_;
  std::vector<double> data_;
};

/// Binary 3D grid; every element is 0 or 1.
class Mask {
 public:
  Mask() = default;
  explicit Mask(const GridGeometry& geometry, std::uint8_t fill = 0);
  Mask(const GridGeometry& geometry, std::vector<std::uint8_t> data);

  const GridGeometry& geometry() const { return geometry_; }
  const Dims3& dims() const { return geometry_.dims; }
  std::size_t size() const { return data_.size(); }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  std::uint8_t operator[](std::size_t i) const { return data_[i]; }
  std::uint8_t& operator[](std::size_t i) { return data_[i]; }

  std::uint8_t at(std::size_t z, std::size_t y, std::size_t x) const { return data_[geometry_.linear(z, y, x)]; }
  std::uint8_t& at(std::size_t z, std::size_t y, std::size_t x) { return data_[geometry_.linear(z, y, x)]; }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  double volume_ml() const { return static_cast<double>(count()) * geometry_.voxel_volume_ml(); }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  GridGeometry geometry_;
  std::vector<std::uint8_t> data_;
};

Mask mask_union(const Mask& a, const Mask& b);
Mask mask_intersection(const Mask& a, const Mask& b);
Mask mask_complement(const Mask& a);
/// True when every voxel of `inner` is set in `outer`.
bool mask_subset(const Mask& inner, const Mask& outer);

/// 2D detector image. Row index runs along detector v, column along u.
class ImageGrid2D {
 public:
  ImageGrid2D() = default;
  ImageGrid2D(std::size_t rows, std::size_t cols, double row_spacing, double col_spacing, double fill = 0.0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double row_spacing() const { return row_spacing_; }
  double col_spacing() const { return col_spacing_; }
  std::size_t size() const { return data_.size(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  friend bool operator==(const ImageGrid2D&, const ImageGrid2D&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  double row_spacing_ = 1.0;
  double col_spacing_ = 1.0;
  std::vector<double> data_;
};

/// Linear attenuation of water used by the HU conversion, 1/mm.
inline constexpr double kDefaultMuWater = 0.02;

/// mu = mu_water * (1 + HU/1000), clamped below at zero.
Volume hu_to_attenuation(const Volume& hu, double mu_water = kDefaultMuWater);
/// Inverse map on the unclamped branch: HU = 1000 * (mu / mu_water - 1).
Volume attenuation_to_hu(const Volume& mu, double mu_water = kDefaultMuWater);

/// Resamples onto `target` voxel counts spanning the same world box. Queries
/// are trilinear with clamp-to-edge inside the voxel box, 0 outside it.
Volume resample_trilinear(const Volume& v, const Dims3& target);

/// Trilinear sample at continuous voxel-index coordinates (x fastest).
/// Returns 0 outside the voxel box [-0.5, n-0.5] on any axis.
double sample_trilinear(const Volume& v, double z, double y, double x);

}  // namespace drrkit
