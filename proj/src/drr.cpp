#include "drrkit/drr.hpp"

#include <algorithm>
#include <cmath>

namespace drrkit {

ImageGrid2D normalize_min_max(const ImageGrid2D& img, bool* constant) {
  ImageGrid2D out(img.rows(), img.cols(), img.row_spacing(), img.col_spacing());
  const auto [lo, hi] = std::minmax_element(img.data().begin(), img.data().end());
  const double range = *hi - *lo;
  if (constant) *constant = !(range > 0.0);
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < img.size(); ++i) out[i] = (img[i] - *lo) / range;
  return out;
}

DrrResult drr_simulate(const Volume& ct_hu, const ProjectionGeometry& g, const DrrOptions& options) {
  g.validate();
  const Volume mu = hu_to_attenuation(ct_hu, options.mu_water);
  const StandardViews views = standard_views();

  DrrResult result;
  auto render = [&](const ViewPose& pose, const char* name) {
    ImageGrid2D img = project(mu, g, pose);
    if (options.radiographic)
      for (auto& p : img.data()) p = std::exp(-p);
    bool constant = false;
    ImageGrid2D norm = normalize_min_max(img, &constant);
    if (constant) result.warnings.push_back(std::string(name) + " image is constant; normalised output set to zero");
    return norm;
  };
  result.pa = render(views.pa, "pa");
  result.la = render(views.la, "la");
  return result;
}

}  // namespace drrkit
