#pragma once

#include <cstdint>

#include "drrkit/geometry.hpp"
#include "drrkit/metrics.hpp"
#include "drrkit/volume.hpp"

namespace drrkit {

/// Axis-aligned ellipsoid in world millimetres (x, y, z).
struct Ellipsoid {
  Vec3 center;
  Vec3 semi_axes;

  bool contains(const Vec3& p) const;
  double volume_ml() const;
};

/// Synthetic chest: an elliptical body in air with two lung ellipsoids.
/// Patient right is the smaller x; anterior is -y.
struct PhantomSpec {
  double spacing = 1.6;  // mm, isotropic
  int margin = 4;        // air voxels around the body's bounding box

  Ellipsoid body{{0.0, 0.0, 0.0}, {95.0, 70.0, 90.0}};
  Ellipsoid right_lung{{-45.0, 0.0, 0.0}, {32.0, 45.0, 70.0}};
  Ellipsoid left_lung{{45.0, 0.0, 0.0}, {32.0, 45.0, 70.0}};
  double body_hu = 40.0;
  double lung_hu = -800.0;
  double outside_hu = -1000.0;

  double cap_ml = 0.0;     // free air filling the anterior end of the right lung
  double pocket_ml = 0.0;  // free-air sphere at the left lung centre
  double decoy_ml = 0.0;   // sphere in the posterior right lung at decoy_hu
  double decoy_hu = -940.0;
  double air_hu = -1000.0;

  double noise_sigma = 0.0;  // HU, additive Gaussian
  std::uint64_t seed = 0;

  void validate() const;
};

struct Phantom {
  Volume ct;  // HU
  Mask body;
  Mask lungs;  // both lung ellipsoids, including the air regions inside them
  Mask right_lung;
  Mask left_lung;
  Mask cap;
  Mask pocket;
  Mask decoy;

  /// Closed-form volumes: parenchyma excludes cap and pocket.
  QuantReport analytic;
  double cap_height_mm = 0.0;
};

/// Height h of the cap {y < cy - b + h} whose volume is `ml`, by bisection
/// on pi a c h^2 (3b - h) / (3 b^2).
double cap_height_for_volume(const Ellipsoid& e, double ml);
double cap_volume_ml(const Ellipsoid& e, double height_mm);

Phantom make_phantom(const PhantomSpec& spec);

/// Reconstruction phantom in attenuation units (1/mm) on an n^3 grid: a
/// large ellipsoid at mu_water with a denser, off-centre inner ellipsoid.
Volume two_ellipsoid_phantom(std::size_t n, double spacing = 1.0, double mu_water = kDefaultMuWater);

}  // namespace drrkit
