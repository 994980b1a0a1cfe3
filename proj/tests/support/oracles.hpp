#pragma once

#include <span>
#include <vector>

#include "drrkit/metrics.hpp"
#include "drrkit/morphology.hpp"
#include "drrkit/projector.hpp"
#include "drrkit/volume.hpp"

// Independent reference implementations. Nothing here calls into the code
// under test except for value types and accessors.
namespace drrkit::oracle {

/// Marches every pixel's ray in world space and samples with a
/// from-scratch trilinear interpolator.
ImageGrid2D project(const Volume& v, const ProjectionGeometry& g, const ViewPose& pose);

/// Length of the parallel-beam ray of pixel (row, col) inside the voxel box
/// [origin - spacing/2, origin + (dims - 1/2) spacing], by slab clipping.
double box_chord(const GridGeometry& grid, const ProjectionGeometry& g, const ViewPose& pose, std::size_t row,
                 std::size_t col);

/// Dense operator: column j is project(e_j) built with the library
/// projector; rows are pixels in row-major order.
std::vector<std::vector<double>> dense_operator(const GridGeometry& grid, const ProjectionGeometry& g,
                                                const ViewPose& pose);

Mask dilate(const Mask& m, int radius);
Mask erode(const Mask& m, int radius);
/// Closing of the mask as a subset of the unbounded lattice, restricted to
/// the grid; evaluated literally from the ball definitions.
Mask close(const Mask& m, int radius);
/// Fixed-point flood fill.
Mask grow(const Mask& m, VoxelIndex seed, int connectivity);
/// Components of the foreground via repeated grow(); sizes in discovery order.
std::vector<Mask> components(const Mask& m, int connectivity);

double cosine(std::span<const double> a, std::span<const double> b);
double psnr(std::span<const double> a, std::span<const double> b, double range);
/// Literal windowed SSIM: every w^3 window is summed from scratch.
double ssim(const Volume& a, const Volume& b, std::size_t w, double range);
double dice(const Mask& a, const Mask& b);
double jaccard(const Mask& a, const Mask& b);
/// Exhaustive pairwise distances between surface voxels.
SurfaceDistances surface_distances(const Mask& a, const Mask& b);
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace drrkit::oracle
