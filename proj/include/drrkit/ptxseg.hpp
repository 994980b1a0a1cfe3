#pragma once

#include <span>
#include <utility>

#include "drrkit/morphology.hpp"
#include "drrkit/volume.hpp"

namespace drrkit {

/// Knobs of the zero-shot pneumothorax pipeline. Radii are in voxels.
struct SegParams {
  double t_b = -400.0;     // body / air binarisation (HU, above_or_equal = body)
  double t_p = -500.0;     // candidate restriction inside lungs ∩ body (HU, below)
  double air_hu = -950.0;  // free-air ceiling (HU, below)
  int k_l = 2;
  int k_b = 6;
  int k_p = 2;
  Connectivity grow_connectivity = Connectivity::Six;
  Connectivity label_connectivity = Connectivity::TwentySix;
  double v_t = 10.0;  // ml; components must strictly exceed it

  void validate() const;
};

struct SegResult {
  Mask lungs;
  Mask body;
  Mask pneumothorax;
  Mask right_lung;
  Mask left_lung;
};

/// Voxelwise union of lung proposals followed by a closing with k_l.
Mask ensemble_lungs(std::span<const Mask> masks, int k_l);

/// Background grown from the (0,0,0) and (D-1,H-1,W-1) corners of the
/// closed coarse body, inverted. Throws CornerSeedInsideBody when either
/// corner belongs to the coarse body.
Mask body_mask(const Volume& ct, const SegParams& params);

/// Intensity-only lung/air-space proposal: HU < t_b inside the body, the
/// two largest components, closed with k_l.
Mask classical_lung_segment(const Volume& ct, const SegParams& params);

/// Two largest components split by centroid x (patient right = smaller x);
/// other components join the side whose main centroid is nearer in x. A
/// single component is cut at the sagittal plane through the mask centroid.
std::pair<Mask, Mask> split_lungs(const Mask& lungs);

/// End-to-end pipeline. Uses ensemble_lungs(lung_masks) when masks are
/// given, classical_lung_segment otherwise.
SegResult run_ptx_seg(const Volume& ct, std::span<const Mask> lung_masks, const SegParams& params);

}  // namespace drrkit
