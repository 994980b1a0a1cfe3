#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>

#include "drrkit/geometry.hpp"
#include "drrkit/simd/kernels.hpp"
#include "drrkit/volume.hpp"

namespace drrkit {

enum class ProjectionMode { Parallel, ConeBeam };

/// Detector and source description in the camera frame. The camera looks
/// along +y; detector columns run along +x (u), rows along +z (v), and the
/// pixel (r, c) centre sits at u = (c - (cols-1)/2) * col spacing,
/// v = (r - (rows-1)/2) * row spacing.
///
/// Parallel rays pass through (u, *, v) along +y. Cone-beam rays leave the
/// source at (0, -source_to_isocenter, 0) towards the detector point
/// (u, source_to_detector - source_to_isocenter, v).
struct ProjectionGeometry {
  ProjectionMode mode = ProjectionMode::Parallel;
  std::size_t detector_rows = 224;
  std::size_t detector_cols = 224;
  double row_spacing = 1.0;  // mm, along v
  double col_spacing = 1.0;  // mm, along u
  double source_to_isocenter = 600.0;
  double source_to_detector = 1100.0;
  double ray_step = 0.8;  // mm

  /// Throws DegenerateGeometry naming the offending field.
  void validate() const;
};

/// Defaults sized for `grid`: ray_step is half the smallest voxel spacing
/// and the pixel pitch fits the largest grid extent on the detector with a
/// 5% margin (magnified at the near face for cone-beam).
ProjectionGeometry default_geometry(const GridGeometry& grid, ProjectionMode mode, std::size_t rows = 224,
                                    std::size_t cols = 224);

/// Rigid placement of the camera relative to the volume isocenter. The
/// rotation matrix is Rz(rz) * Ry(ry) * Rx(rx); a camera-frame point q maps to
/// the world point isocenter + translation + R q.
struct ViewPose {
  Vec3 rotation;     // radians
  Vec3 translation;  // mm

  Mat3 matrix() const { return rotation_z(rotation.z) * rotation_y(rotation.y) * rotation_x(rotation.x); }
  friend bool operator==(const ViewPose&, const ViewPose&) = default;
};

struct StandardViews {
  ViewPose pa;  // rays along y (anterior-posterior)
  ViewPose la;  // rays along x (left-right)
  ViewPose ax;  // rays along z (cranio-caudal)
};

StandardViews standard_views();

struct PerturbationSpec {
  double rotation_range = 5.0 * std::numbers::pi / 180.0;  // +/- radians, each axis
  double translation_range = 10.0;                        // +/- mm, each axis
  std::uint64_t seed = 0;

  void validate() const;
};

/// Adds independent uniform offsets in [-range, range) to each of the six
/// pose components. Component j of draw d uses element 6 d + j of the
/// SplitMix64 stream of `spec.seed` (see random.hpp).
ViewPose sample_perturbed_pose(const ViewPose& base, const PerturbationSpec& spec, std::uint64_t draw_index);

/// One detector pixel's ray expressed in voxel-index space of a grid.
simd::RaySegment pixel_ray(const GridGeometry& grid, const ProjectionGeometry& g, const ViewPose& pose,
                           std::size_t row, std::size_t col);

/// Line integrals: pixel = ray_step * sum of trilinear samples taken at
/// anchor + k * ray_step * dir for integer k. The anchor is the ray point
/// closest to the posed isocenter, so halving ray_step keeps every old
/// sample. Samples outside the voxel box contribute nothing; cone-beam
/// samples are further limited to the source-detector segment.
/// `v` must hold attenuation (1/mm). Pixels are computed in parallel; each
/// pixel's sum has a fixed order, so output does not depend on thread count.
ImageGrid2D project(const Volume& v, const ProjectionGeometry& g, const ViewPose& pose);

/// Exact adjoint of project() for the same grid: scatters ray_step * pixel
/// * weight onto every trilinear corner of every sample.
Volume backproject(const ImageGrid2D& img, const ProjectionGeometry& g, const ViewPose& pose,
                   const GridGeometry& target);

}  // namespace drrkit
