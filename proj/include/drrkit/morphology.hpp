#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "drrkit/volume.hpp"

namespace drrkit {

enum class ThresholdSense { Below, AboveOrEqual };

/// 1 where v < t (Below) or v >= t (AboveOrEqual).
Mask threshold(const Volume& v, double t, ThresholdSense sense);

/// Neighbourhoods: 6 = faces, 18 = faces + edges, 26 = faces + edges + corners.
enum class Connectivity { Six = 6, Eighteen = 18, TwentySix = 26 };

/// Throws InvalidArgument unless n is 6, 18 or 26.
Connectivity connectivity_from(int n);

struct VoxelIndex {
  std::size_t z = 0, y = 0, x = 0;
};

/// Exact squared Euclidean distance (mm^2 when `scale` is the voxel spacing)
/// from every voxel to the nearest voxel with features[i] != 0; +inf when
/// there are none. Separable lower-envelope transform.
std::vector<double> squared_distance_transform(const Mask& features, Vec3 scale = {1.0, 1.0, 1.0});

/// Ball structuring element {o : |o|^2 <= radius^2} in voxel units.
/// Dilation is clipped to the grid; erosion treats voxels outside the grid
/// as foreground.
Mask dilate_ball(const Mask& m, int radius);
Mask erode_ball(const Mask& m, int radius);
/// Closing of the mask extended by background beyond the grid, cropped back
/// to the grid: extensive and idempotent, with no artefacts where the
/// dilation reaches the border. Radius 0 returns the input.
Mask morph_close_3d(const Mask& m, int radius);

/// Connected component (under `conn`) of voxels equal to m[seed], containing
/// seed. Throws InvalidArgument when the seed is outside the grid.
Mask region_grow(const Mask& m, VoxelIndex seed, Connectivity conn);

struct ComponentLabels {
  std::vector<std::int32_t> labels;  // 0 = background, 1..n by first voxel in storage order
  std::vector<std::size_t> sizes;    // sizes[l - 1] = voxel count of label l
};

ComponentLabels label_components(const Mask& m, Connectivity conn);

/// Union of the components whose physical volume strictly exceeds v_t_ml.
Mask measure_components(const Mask& m, Connectivity conn, double v_t_ml);

}  // namespace drrkit
