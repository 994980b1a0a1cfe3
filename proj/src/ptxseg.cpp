#include "drrkit/ptxseg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "drrkit/error.hpp"

namespace drrkit {

void SegParams::validate() const {
  if (k_l < 0) throw Error(ErrorCode::InvalidArgument, "k_l", "must be >= 0");
  if (k_b < 0) throw Error(ErrorCode::InvalidArgument, "k_b", "must be >= 0");
  if (k_p < 0) throw Error(ErrorCode::InvalidArgument, "k_p", "must be >= 0");
  if (!(v_t >= 0.0)) throw Error(ErrorCode::InvalidArgument, "v_t", "must be >= 0");
  if (!(air_hu < t_b)) throw Error(ErrorCode::InvalidArgument, "air_hu", "must be below t_b");
  if (!std::isfinite(t_p)) throw Error(ErrorCode::InvalidArgument, "t_p", "must be finite");
}

Mask ensemble_lungs(std::span<const Mask> masks, int k_l) {
  if (masks.empty()) throw Error(ErrorCode::InvalidArgument, "lung_masks", "at least one mask is required");
  Mask acc = masks.front();
  for (std::size_t i = 1; i < masks.size(); ++i) {
    if (!(masks[i].geometry() == acc.geometry()))
      throw Error(ErrorCode::GeometryMismatch, "lung_masks", "mask " + std::to_string(i) + " has a different geometry");
    acc = mask_union(acc, masks[i]);
  }
  return morph_close_3d(acc, k_l);
}

Mask body_mask(const Volume& ct, const SegParams& params) {
  params.validate();
  const Mask coarse = morph_close_3d(threshold(ct, params.t_b, ThresholdSense::AboveOrEqual), params.k_b);
  const Dims3 d = ct.dims();
  const VoxelIndex first{0, 0, 0};
  const VoxelIndex last{d.depth - 1, d.height - 1, d.width - 1};
  for (const VoxelIndex& seed : {first, last}) {
    if (coarse.at(seed.z, seed.y, seed.x))
      throw Error(ErrorCode::CornerSeedInsideBody, "seed",
                  "corner (" + std::to_string(seed.z) + "," + std::to_string(seed.y) + "," + std::to_string(seed.x) +
                      ") lies inside the coarse body mask");
  }
  const Mask outside = mask_union(region_grow(coarse, first, params.grow_connectivity),
                                  region_grow(coarse, last, params.grow_connectivity));
  return mask_complement(outside);
}

namespace {

// Keeps the `keep` largest components; ties broken by label order.
Mask largest_components(const Mask& m, Connectivity conn, std::size_t keep) {
  const ComponentLabels comps = label_components(m, conn);
  std::vector<std::size_t> order(comps.sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return comps.sizes[a] > comps.sizes[b]; });
  std::vector<std::uint8_t> selected(comps.sizes.size() + 1, 0);
  for (std::size_t i = 0; i < std::min(keep, order.size()); ++i) selected[order[i] + 1] = 1;
  Mask out(m.geometry());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = selected[static_cast<std::size_t>(comps.labels[i])];
  return out;
}

double centroid_x(const Mask& m, const ComponentLabels& comps, std::int32_t label) {
  const std::size_t W = m.dims().width;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (comps.labels[i] == label) {
      sum += static_cast<double>(i % W);
      ++n;
    }
  return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

namespace {

Mask lungs_inside(const Volume& ct, const Mask& body, const SegParams& params) {
  const Mask low = mask_intersection(threshold(ct, params.t_b, ThresholdSense::Below), body);
  return morph_close_3d(largest_components(low, params.label_connectivity, 2), params.k_l);
}

}  // namespace

Mask classical_lung_segment(const Volume& ct, const SegParams& params) {
  params.validate();
  return lungs_inside(ct, body_mask(ct, params), params);
}

std::pair<Mask, Mask> split_lungs(const Mask& lungs) {
  Mask right(lungs.geometry());
  Mask left(lungs.geometry());
  const ComponentLabels comps = label_components(lungs, Connectivity::TwentySix);
  const std::size_t W = lungs.dims().width;
  if (comps.sizes.empty()) return {right, left};

  if (comps.sizes.size() == 1) {
    const double cx = centroid_x(lungs, comps, 1);
    for (std::size_t i = 0; i < lungs.size(); ++i) {
      if (!lungs[i]) continue;
      (static_cast<double>(i % W) < cx ? right : left)[i] = 1;
    }
    return {right, left};
  }

  std::vector<std::size_t> order(comps.sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return comps.sizes[a] > comps.sizes[b]; });
  const auto la = static_cast<std::int32_t>(order[0] + 1);
  const auto lb = static_cast<std::int32_t>(order[1] + 1);
  double xa = centroid_x(lungs, comps, la);
  double xb = centroid_x(lungs, comps, lb);
  const std::int32_t right_label = xa <= xb ? la : lb;
  const double x_right = std::min(xa, xb), x_left = std::max(xa, xb);

  std::vector<std::uint8_t> is_right(comps.sizes.size() + 1, 0);
  for (std::size_t l = 1; l <= comps.sizes.size(); ++l) {
    const auto label = static_cast<std::int32_t>(l);
    if (label == la || label == lb) {
      is_right[l] = label == right_label;
      continue;
    }
    const double cx = centroid_x(lungs, comps, label);
    is_right[l] = std::fabs(cx - x_right) <= std::fabs(cx - x_left);
  }
  for (std::size_t i = 0; i < lungs.size(); ++i) {
    if (!lungs[i]) continue;
    (is_right[static_cast<std::size_t>(comps.labels[i])] ? right : left)[i] = 1;
  }
  return {right, left};
}

SegResult run_ptx_seg(const Volume& ct, std::span<const Mask> lung_masks, const SegParams& params) {
  params.validate();
  for (std::size_t i = 0; i < lung_masks.size(); ++i)
    if (!(lung_masks[i].geometry() == ct.geometry()))
      throw Error(ErrorCode::GeometryMismatch, "lung_masks", "mask " + std::to_string(i) + " does not match the CT grid");

  SegResult r;
  r.body = body_mask(ct, params);
  r.lungs = lung_masks.empty() ? lungs_inside(ct, r.body, params) : ensemble_lungs(lung_masks, params.k_l);

  // Candidate: CT below t_p inside lungs ∩ body.
  const Mask candidate = mask_intersection(
      mask_intersection(r.lungs, r.body), threshold(ct, params.t_p, ThresholdSense::Below));
  // Free-air refinement, closing, re-restriction to air inside the body, then
  // the volume filter last so every kept component exceeds v_t.
  const Mask air = threshold(ct, params.air_hu, ThresholdSense::Below);
  const Mask closed = morph_close_3d(mask_intersection(candidate, air), params.k_p);
  const Mask refined = mask_intersection(mask_intersection(closed, air), r.body);
  r.pneumothorax = measure_components(refined, params.label_connectivity, params.v_t);

  std::tie(r.right_lung, r.left_lung) = split_lungs(r.lungs);
  return r;
}

}  // namespace drrkit
