#pragma once

#include <cstddef>
#include <span>

#include "drrkit/ptxseg.hpp"
#include "drrkit/volume.hpp"

namespace drrkit {

/// <a,b> / (|a| |b|) over all voxels. Throws UndefinedMetric when either
/// norm is zero.
double cosine_similarity(const Volume& a, const Volume& b);

inline constexpr double kDefaultDataRange = 4095.0;

/// 10 log10(range^2 / MSE); +infinity when the volumes are identical.
double psnr(const Volume& a, const Volume& b, double data_range = kDefaultDataRange);

struct SsimParams {
  std::size_t window = 7;  // cubic, uniform weights
  double data_range = kDefaultDataRange;
};

/// Mean local SSIM over every fully contained window position. Local
/// statistics use population (1/N) moments; C1 = (0.01 range)^2,
/// C2 = (0.03 range)^2.
double ssim(const Volume& a, const Volume& b, const SsimParams& params = {});

/// Both-empty masks score 1.
double dice(const Mask& a, const Mask& b);
double jaccard(const Mask& a, const Mask& b);

struct SurfaceDistances {
  double hd95 = 0.0;  // mm
  double asd = 0.0;   // mm
};

/// Surface voxels are foreground voxels with a face neighbour in the
/// background or on the grid boundary. hd95 is the larger of the two
/// directed nearest-rank 95th percentiles; asd the mean of the two directed
/// means. Throws UndefinedMetric if either mask is empty.
SurfaceDistances surface_distances(const Mask& a, const Mask& b);

/// Surface voxels as defined for surface_distances.
Mask surface_of(const Mask& m);

/// Sample Pearson correlation. Throws UndefinedMetric for a constant series
/// and InvalidArgument for mismatched or too-short input.
double pearson(std::span<const double> xs, std::span<const double> ys);

struct QuantReport {
  double right_lung_ml = 0.0;
  double left_lung_ml = 0.0;
  double air_ml = 0.0;
  double occupancy = 0.0;
};

/// air / (air + right + left), or 0 when the denominator is 0.
double occupancy_ratio(double air_ml, double right_lung_ml, double left_lung_ml);

/// Lung volumes count parenchyma only (lung voxels not labelled as
/// pneumothorax), so the occupancy denominator is the aerated union.
QuantReport quantify(const SegResult& seg);

}  // namespace drrkit
