#pragma once

#include <string>
#include <vector>

#include "drrkit/projector.hpp"
#include "drrkit/volume.hpp"

namespace drrkit {

struct DrrOptions {
  double mu_water = kDefaultMuWater;
  /// Emit exp(-line integral) before normalisation instead of the integral.
  bool radiographic = false;
};

struct DrrResult {
  ImageGrid2D pa;
  ImageGrid2D la;
  std::vector<std::string> warnings;
};

/// Min-max normalises to [0,1]. A constant image becomes all zeros and
/// `constant` is set.
ImageGrid2D normalize_min_max(const ImageGrid2D& img, bool* constant = nullptr);

/// Posteroanterior and lateral radiographs of a HU volume under the
/// standard views, each normalised to [0,1].
DrrResult drr_simulate(const Volume& ct_hu, const ProjectionGeometry& g, const DrrOptions& options = {});

}  // namespace drrkit
