#include <gtest/gtest.h>

#include <algorithm>

#include "drrkit/error.hpp"
#include "drrkit/volume.hpp"
#include "generators.hpp"

using namespace drrkit;

namespace {

GridGeometry cube(std::size_t n, double s = 1.0) {
  GridGeometry g;
  g.dims = {n, n, n};
  g.spacing = {s, s, s};
  return g;
}

}  // namespace

TEST(Volume, RejectsBadGeometry) {
  GridGeometry g = cube(2);
  g.dims.width = 0;
  EXPECT_THROW(Volume{g}, Error);
  g = cube(2);
  g.spacing.y = 0.0;
  try {
    Volume v(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.field(), "spacing.y");
  }
}

TEST(Volume, RejectsWrongLengthAndNonFinite) {
  EXPECT_THROW(Volume(cube(2), std::vector<double>(7)), Error);
  std::vector<double> d(8, 0.0);
  d[3] = std::nan("");
  EXPECT_THROW(Volume(cube(2), d), Error);
}

TEST(Volume, StorageOrderIsXFastest) {
  GridGeometry g;
  g.dims = {2, 3, 4};
  Volume v(g);
  v.at(1, 2, 3) = 5.0;
  EXPECT_EQ(v[(1 * 3 + 2) * 4 + 3], 5.0);
  EXPECT_EQ(g.linear(0, 0, 1), 1u);
  EXPECT_EQ(g.linear(0, 1, 0), 4u);
  EXPECT_EQ(g.linear(1, 0, 0), 12u);
}

TEST(Volume, MaskValuesAreBinary) {
  Mask m(cube(2), std::vector<std::uint8_t>{0, 2, 0, 7, 1, 0, 0, 0});
  EXPECT_EQ(m.count(), 3u);
  EXPECT_EQ(m[1], 1);
  EXPECT_DOUBLE_EQ(Mask(cube(10, 1.6), 1).volume_ml(), 4.096);
}

TEST(Volume, MaskSetAlgebra) {
  gen::Rng rng(3);
  const GridGeometry g = cube(5);
  const Mask a = gen::random_mask(rng, g, 0.4), b = gen::random_mask(rng, g, 0.4);
  const Mask u = mask_union(a, b), i = mask_intersection(a, b);
  EXPECT_TRUE(mask_subset(i, a));
  EXPECT_TRUE(mask_subset(a, u));
  EXPECT_EQ(u.count() + i.count(), a.count() + b.count());
  EXPECT_EQ(mask_complement(mask_complement(a)), a);
  EXPECT_EQ(mask_intersection(a, mask_complement(a)).count(), 0u);
}

TEST(HuConversion, Examples) {
  Volume v(cube(1), std::vector<double>{0.0});
  EXPECT_DOUBLE_EQ(hu_to_attenuation(v, 0.02)[0], 0.02);
  v[0] = -1000.0;
  EXPECT_EQ(hu_to_attenuation(v)[0], 0.0);
  v[0] = -1500.0;
  EXPECT_EQ(hu_to_attenuation(v)[0], 0.0);
}

TEST(HuConversion, MonotoneAndZeroBelowAir) {
  GridGeometry g;
  g.dims = {1, 1, 401};
  Volume v(g);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = -2000.0 + 10.0 * static_cast<double>(i);
  const Volume mu = hu_to_attenuation(v);
  for (std::size_t i = 1; i < mu.size(); ++i) EXPECT_LE(mu[i - 1], mu[i]);
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (v[i] <= -1000.0) { EXPECT_EQ(mu[i], 0.0); }
  const Volume back = attenuation_to_hu(mu);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] >= -1000.0) { EXPECT_NEAR(back[i], v[i], 1e-9); }
}

TEST(Resample, IdentityOnSameGrid) {
  gen::Rng rng(1);
  const GridGeometry g = gen::random_grid(rng, 2, 7);
  const Volume v = gen::random_volume(rng, g, -100, 100);
  const Volume r = resample_trilinear(v, g.dims);
  EXPECT_EQ(r, v);
}

TEST(Resample, ConstantStaysConstant) {
  gen::Rng rng(2);
  const GridGeometry g = gen::random_grid(rng, 1, 6);
  const Volume v(g, 7.0);
  const Volume r = resample_trilinear(v, {5, 3, 9});
  for (double x : r.data()) EXPECT_DOUBLE_EQ(x, 7.0);
}

TEST(Resample, RampMidpoint) {
  GridGeometry g;
  g.dims = {1, 1, 2};
  Volume v(g, std::vector<double>{0.0, 10.0});
  const Volume r = resample_trilinear(v, {1, 1, 3});
  // Output centres map to source x = -1/6, 1/2, 7/6; the middle one is halfway.
  EXPECT_DOUBLE_EQ(r[1], 5.0);
  EXPECT_DOUBLE_EQ(r[0], 0.0);
  EXPECT_DOUBLE_EQ(r[2], 10.0);
}

TEST(Resample, PreservesWorldBox) {
  gen::Rng rng(4);
  const GridGeometry g = gen::random_grid(rng, 2, 8);
  const Volume r = resample_trilinear(Volume(g), {3, 11, 5});
  const Vec3 e0 = g.extent(), e1 = r.geometry().extent();
  EXPECT_NEAR(e0.x, e1.x, 1e-12);
  EXPECT_NEAR(e0.y, e1.y, 1e-12);
  EXPECT_NEAR(e0.z, e1.z, 1e-12);
  // Lower box corner origin - spacing / 2 is shared.
  EXPECT_NEAR(g.origin.x - 0.5 * g.spacing.x, r.geometry().origin.x - 0.5 * r.geometry().spacing.x, 1e-12);
  EXPECT_NEAR(g.origin.z - 0.5 * g.spacing.z, r.geometry().origin.z - 0.5 * r.geometry().spacing.z, 1e-12);
}

TEST(Resample, PropertyValuesWithinInputRange) {
  gen::Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const GridGeometry g = gen::random_grid(rng, 1, 6);
    const Volume v = gen::random_volume(rng, g, -500, 500);
    const Dims3 t{gen::uniform_int(rng, 1, 9), gen::uniform_int(rng, 1, 9), gen::uniform_int(rng, 1, 9)};
    const Volume r = resample_trilinear(v, t);
    const auto [lo, hi] = std::minmax_element(v.data().begin(), v.data().end());
    for (double x : r.data()) {
      EXPECT_GE(x, *lo - 1e-9);
      EXPECT_LE(x, *hi + 1e-9);
    }
  }
}

TEST(SampleTrilinear, ZeroOutsideBoxAndClampInside) {
  GridGeometry g;
  g.dims = {1, 1, 2};
  Volume v(g, std::vector<double>{4.0, 8.0});
  EXPECT_EQ(sample_trilinear(v, 0, 0, -0.6), 0.0);
  EXPECT_EQ(sample_trilinear(v, 0, 0, 1.6), 0.0);
  EXPECT_EQ(sample_trilinear(v, 0, 0, -0.5), 4.0);
  EXPECT_EQ(sample_trilinear(v, 0, 0, 1.5), 8.0);
  EXPECT_DOUBLE_EQ(sample_trilinear(v, 0, 0, 0.25), 5.0);
  EXPECT_EQ(sample_trilinear(v, 0.7, 0, 0), 0.0);
}
