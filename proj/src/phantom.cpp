#include "drrkit/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "drrkit/error.hpp"
#include "drrkit/random.hpp"

namespace drrkit {

bool Ellipsoid::contains(const Vec3& p) const {
  const double dx = (p.x - center.x) / semi_axes.x;
  const double dy = (p.y - center.y) / semi_axes.y;
  const double dz = (p.z - center.z) / semi_axes.z;
  return dx * dx + dy * dy + dz * dz <= 1.0;
}

double Ellipsoid::volume_ml() const {
  return 4.0 / 3.0 * std::numbers::pi * semi_axes.x * semi_axes.y * semi_axes.z / 1000.0;
}

namespace {

void check_ellipsoid(const Ellipsoid& e, const char* field) {
  if (!(e.semi_axes.x > 0.0 && e.semi_axes.y > 0.0 && e.semi_axes.z > 0.0))
    throw Error(ErrorCode::InvalidArgument, field, "semi-axes must be > 0");
}

double sphere_radius(double ml) { return std::cbrt(3.0 * ml * 1000.0 / (4.0 * std::numbers::pi)); }

std::size_t axis_count(double half_extent, double spacing, int margin) {
  return static_cast<std::size_t>(std::ceil(2.0 * half_extent / spacing)) + 2 * static_cast<std::size_t>(margin);
}

}  // namespace

void PhantomSpec::validate() const {
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "spacing", "must be > 0");
  if (margin < 1) throw Error(ErrorCode::InvalidArgument, "margin", "must be >= 1");
  check_ellipsoid(body, "body");
  check_ellipsoid(right_lung, "right_lung");
  check_ellipsoid(left_lung, "left_lung");
  if (cap_ml < 0.0 || cap_ml >= right_lung.volume_ml())
    throw Error(ErrorCode::InvalidArgument, "cap_ml", "must lie in [0, right lung volume)");
  if (pocket_ml < 0.0) throw Error(ErrorCode::InvalidArgument, "pocket_ml", "must be >= 0");
  if (decoy_ml < 0.0) throw Error(ErrorCode::InvalidArgument, "decoy_ml", "must be >= 0");
  if (pocket_ml > 0.0 && sphere_radius(pocket_ml) >= std::min({left_lung.semi_axes.x, left_lung.semi_axes.y,
                                                               left_lung.semi_axes.z}))
    throw Error(ErrorCode::InvalidArgument, "pocket_ml", "pocket does not fit inside the left lung");
  if (noise_sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "noise_sigma", "must be >= 0");
}

double cap_volume_ml(const Ellipsoid& e, double h) {
  const double a = e.semi_axes.x, b = e.semi_axes.y, c = e.semi_axes.z;
  return std::numbers::pi * a * c * h * h * (3.0 * b - h) / (3.0 * b * b) / 1000.0;
}

double cap_height_for_volume(const Ellipsoid& e, double ml) {
  if (ml <= 0.0) return 0.0;
  double lo = 0.0, hi = 2.0 * e.semi_axes.y;
  if (ml >= cap_volume_ml(e, hi)) throw Error(ErrorCode::InvalidArgument, "cap_ml", "exceeds the ellipsoid volume");
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (cap_volume_ml(e, mid) < ml ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Phantom make_phantom(const PhantomSpec& spec) {
  spec.validate();
  const double s = spec.spacing;
  const Vec3 half{std::fabs(spec.body.center.x) + spec.body.semi_axes.x,
                  std::fabs(spec.body.center.y) + spec.body.semi_axes.y,
                  std::fabs(spec.body.center.z) + spec.body.semi_axes.z};
  GridGeometry grid;
  grid.dims = {axis_count(half.z, s, spec.margin), axis_count(half.y, s, spec.margin),
               axis_count(half.x, s, spec.margin)};
  grid.spacing = {s, s, s};
  grid.origin = {-0.5 * s * static_cast<double>(grid.dims.width - 1),
                 -0.5 * s * static_cast<double>(grid.dims.height - 1),
                 -0.5 * s * static_cast<double>(grid.dims.depth - 1)};

  Phantom ph;
  ph.ct = Volume(grid, spec.outside_hu);
  ph.body = ph.lungs = ph.right_lung = ph.left_lung = ph.cap = ph.pocket = ph.decoy = Mask(grid);

  const Ellipsoid& rl = spec.right_lung;
  ph.cap_height_mm = cap_height_for_volume(rl, spec.cap_ml);
  const double cap_limit = rl.center.y - rl.semi_axes.y + ph.cap_height_mm;
  const Vec3 pocket_center = spec.left_lung.center;
  const double pocket_r = spec.pocket_ml > 0.0 ? sphere_radius(spec.pocket_ml) : 0.0;
  const Vec3 decoy_center{rl.center.x, rl.center.y + 0.4 * rl.semi_axes.y, rl.center.z};
  const double decoy_r = spec.decoy_ml > 0.0 ? sphere_radius(spec.decoy_ml) : 0.0;

  for (std::size_t z = 0; z < grid.dims.depth; ++z)
    for (std::size_t y = 0; y < grid.dims.height; ++y)
      for (std::size_t x = 0; x < grid.dims.width; ++x) {
        const std::size_t i = grid.linear(z, y, x);
        const Vec3 p = grid.world(static_cast<double>(z), static_cast<double>(y), static_cast<double>(x));
        if (!spec.body.contains(p)) continue;
        ph.body[i] = 1;
        double hu = spec.body_hu;
        if (rl.contains(p)) {
          ph.right_lung[i] = 1;
          hu = spec.lung_hu;
          if (spec.cap_ml > 0.0 && p.y < cap_limit) {
            ph.cap[i] = 1;
            hu = spec.air_hu;
          } else if (decoy_r > 0.0 && norm(p - decoy_center) <= decoy_r) {
            ph.decoy[i] = 1;
            hu = spec.decoy_hu;
          }
        } else if (spec.left_lung.contains(p)) {
          ph.left_lung[i] = 1;
          hu = spec.lung_hu;
          if (pocket_r > 0.0 && norm(p - pocket_center) <= pocket_r) {
            ph.pocket[i] = 1;
            hu = spec.air_hu;
          }
        }
        ph.ct[i] = hu;
      }
  ph.lungs = mask_union(ph.right_lung, ph.left_lung);

  if (spec.noise_sigma > 0.0) {
    StreamRng rng(spec.seed);
    for (auto& v : ph.ct.data()) v += spec.noise_sigma * rng.normal();
  }

  const double air = spec.cap_ml + spec.pocket_ml;
  ph.analytic.right_lung_ml = rl.volume_ml() - spec.cap_ml;
  ph.analytic.left_lung_ml = spec.left_lung.volume_ml() - spec.pocket_ml;
  ph.analytic.air_ml = air;
  ph.analytic.occupancy = occupancy_ratio(air, ph.analytic.right_lung_ml, ph.analytic.left_lung_ml);
  return ph;
}

Volume two_ellipsoid_phantom(std::size_t n, double spacing, double mu_water) {
  if (n < 4) throw Error(ErrorCode::InvalidArgument, "n", "must be >= 4");
  if (!(spacing > 0.0)) throw Error(ErrorCode::InvalidArgument, "spacing", "must be > 0");
  GridGeometry grid;
  grid.dims = {n, n, n};
  grid.spacing = {spacing, spacing, spacing};
  const double o = -0.5 * spacing * static_cast<double>(n - 1);
  grid.origin = {o, o, o};
  const double r = 0.5 * spacing * static_cast<double>(n);
  const Ellipsoid outer{{0.0, 0.0, 0.0}, {0.80 * r, 0.65 * r, 0.72 * r}};
  const Ellipsoid inner{{0.25 * r, -0.15 * r, 0.10 * r}, {0.28 * r, 0.22 * r, 0.35 * r}};
  Volume v(grid);
  for (std::size_t z = 0; z < n; ++z)
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x) {
        const Vec3 p = grid.world(static_cast<double>(z), static_cast<double>(y), static_cast<double>(x));
        double mu = 0.0;
        if (outer.contains(p)) mu = mu_water;
        if (inner.contains(p)) mu = 1.5 * mu_water;
        v.at(z, y, x) = mu;
      }
  return v;
}

}  // namespace drrkit
