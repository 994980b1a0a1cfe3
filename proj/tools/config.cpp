#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include "cli.hpp"
#include "drrkit/error.hpp"

namespace drrkit::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad_type(const std::string& key, const char* expected) {
  throw Error(ErrorCode::Config, key, std::string("expected ") + expected);
}

double number(const std::string& key, const json& v) {
  if (!v.is_number()) bad_type(key, "a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad_type(key, "a finite number");
  return d;
}

std::int64_t integer(const std::string& key, const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9e15) return static_cast<std::int64_t>(d);
  }
  bad_type(key, "an integer");
}

std::size_t count(const std::string& key, const json& v) {
  const std::int64_t i = integer(key, v);
  if (i < 0) bad_type(key, "a non-negative integer");
  return static_cast<std::size_t>(i);
}

bool boolean(const std::string& key, const json& v) {
  if (!v.is_boolean()) bad_type(key, "true or false");
  return v.get<bool>();
}

std::string text(const std::string& key, const json& v) {
  if (!v.is_string()) bad_type(key, "a string");
  return v.get<std::string>();
}

Connectivity connectivity(const std::string& key, const json& v) {
  try {
    return connectivity_from(static_cast<int>(integer(key, v)));
  } catch (const Error&) {
    throw Error(ErrorCode::Config, key, "expected 6, 18 or 26");
  }
}

using Setter = std::function<void(RunConfig&, const std::string&, const json&)>;

#define NUMBER(field) [](RunConfig& c, const std::string& k, const json& v) { c.field = number(k, v); }
#define COUNT(field) [](RunConfig& c, const std::string& k, const json& v) { c.field = count(k, v); }
#define INT(field) \
  [](RunConfig& c, const std::string& k, const json& v) { c.field = static_cast<int>(integer(k, v)); }
#define TEXT(field) [](RunConfig& c, const std::string& k, const json& v) { c.field = text(k, v); }
#define BOOL(field) [](RunConfig& c, const std::string& k, const json& v) { c.field = boolean(k, v); }

const std::map<std::string, Setter>& registry() {
  static const std::map<std::string, Setter> table = {
      {"input", TEXT(input)},
      {"reference", TEXT(reference)},
      {"candidate", TEXT(candidate)},
      {"seg_dir", TEXT(seg_dir)},
      {"reference_seg_dir", TEXT(reference_seg_dir)},
      {"candidate_seg_dir", TEXT(candidate_seg_dir)},
      {"cohort", TEXT(cohort)},
      {"lung_masks",
       [](RunConfig& c, const std::string& k, const json& v) {
         if (!v.is_array()) bad_type(k, "an array of paths");
         c.lung_masks.clear();
         for (const json& e : v) c.lung_masks.push_back(text(k, e));
       }},
      {"output_dir", TEXT(output_dir)},
      {"case_id", TEXT(case_id)},
      {"threads", [](RunConfig& c, const std::string& k,
                     const json& v) { c.threads = static_cast<unsigned>(count(k, v)); }},
      {"seed", [](RunConfig& c, const std::string& k,
                  const json& v) { c.seed = static_cast<std::uint64_t>(count(k, v)); }},

      {"projection_mode",
       [](RunConfig& c, const std::string& k, const json& v) {
         const std::string s = text(k, v);
         if (s == "parallel")
           c.projection_mode = ProjectionMode::Parallel;
         else if (s == "cone_beam")
           c.projection_mode = ProjectionMode::ConeBeam;
         else
           throw Error(ErrorCode::Config, k, "expected \"parallel\" or \"cone_beam\"");
       }},
      {"detector_rows", COUNT(detector_rows)},
      {"detector_cols", COUNT(detector_cols)},
      {"row_spacing", NUMBER(row_spacing)},
      {"col_spacing", NUMBER(col_spacing)},
      {"source_to_isocenter", NUMBER(source_to_isocenter)},
      {"source_to_detector", NUMBER(source_to_detector)},
      {"ray_step", NUMBER(ray_step)},
      {"mu_water", NUMBER(mu_water)},
      {"radiographic", BOOL(radiographic)},

      {"t_b", NUMBER(seg.t_b)},
      {"t_p", NUMBER(seg.t_p)},
      {"air_hu", NUMBER(seg.air_hu)},
      {"k_l", INT(seg.k_l)},
      {"k_b", INT(seg.k_b)},
      {"k_p", INT(seg.k_p)},
      {"grow_connectivity", [](RunConfig& c, const std::string& k,
                               const json& v) { c.seg.grow_connectivity = connectivity(k, v); }},
      {"label_connectivity", [](RunConfig& c, const std::string& k,
                                const json& v) { c.seg.label_connectivity = connectivity(k, v); }},
      {"v_t", NUMBER(seg.v_t)},

      {"data_range", NUMBER(data_range)},
      {"ssim_window", COUNT(ssim_window)},

      {"views", INT(views)},
      {"arc_degrees", NUMBER(arc_degrees)},
      {"view_norm",
       [](RunConfig& c, const std::string& k, const json& v) {
         const std::string s = text(k, v);
         if (s == "l2")
           c.view_norm = ViewNorm::L2;
         else if (s == "smooth_l1")
           c.view_norm = ViewNorm::SmoothL1;
         else if (s == "l1")
           c.view_norm = ViewNorm::L1;
         else
           throw Error(ErrorCode::Config, k, "expected \"l2\", \"smooth_l1\" or \"l1\"");
       }},
      {"huber_delta", NUMBER(huber_delta)},
      {"lambda_re", NUMBER(lambda_re)},
      {"step", NUMBER(step)},
      {"iterations", INT(opt.iterations)},
      {"clamp_nonnegative", BOOL(opt.clamp_nonnegative)},
      {"tolerance", NUMBER(opt.tolerance)},
      {"log_every", INT(opt.log_every)},
      {"max_halvings", INT(opt.max_halvings)},
      {"power_iterations", INT(power_iterations)},
      {"perturb_views", BOOL(perturb_views)},
      {"perturb_rotation_deg", NUMBER(perturb_rotation_deg)},
      {"perturb_translation_mm", NUMBER(perturb_translation_mm)},

      {"phantom_kind",
       [](RunConfig& c, const std::string& k, const json& v) {
         c.phantom_kind = text(k, v);
         if (c.phantom_kind != "chest" && c.phantom_kind != "two_ellipsoid")
           throw Error(ErrorCode::Config, k, "expected \"chest\" or \"two_ellipsoid\"");
       }},
      {"phantom_spacing", NUMBER(phantom.spacing)},
      {"phantom_margin", INT(phantom.margin)},
      {"phantom_size", COUNT(phantom_size)},
      {"body_hu", NUMBER(phantom.body_hu)},
      {"lung_hu", NUMBER(phantom.lung_hu)},
      {"cap_ml", NUMBER(phantom.cap_ml)},
      {"pocket_ml", NUMBER(phantom.pocket_ml)},
      {"decoy_ml", NUMBER(phantom.decoy_ml)},
      {"decoy_hu", NUMBER(phantom.decoy_hu)},
      {"noise_sigma", NUMBER(phantom.noise_sigma)},
      {"right_lung_scale", NUMBER(right_lung_scale)},
      {"left_lung_scale", NUMBER(left_lung_scale)},
  };
  return table;
}

#undef NUMBER
#undef COUNT
#undef INT
#undef TEXT
#undef BOOL

void require(bool ok, const char* key, const char* message) {
  if (!ok) throw Error(ErrorCode::Config, key, message);
}

}  // namespace

void RunConfig::apply(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Config, "config", "expected a JSON object");
  const auto& table = registry();
  for (const auto& [key, value] : doc.items()) {
    const auto it = table.find(key);
    if (it == table.end()) throw Error(ErrorCode::Config, key, "unknown key");
    it->second(*this, key, value);
  }
}

std::vector<std::string> RunConfig::keys() {
  std::vector<std::string> out;
  for (const auto& [key, setter] : registry()) out.push_back(key);
  return out;
}

void RunConfig::validate() const {
  require(!output_dir.empty(), "output_dir", "must not be empty");
  require(!case_id.empty(), "case_id", "must not be empty");
  require(detector_rows >= 1, "detector_rows", "must be >= 1");
  require(detector_cols >= 1, "detector_cols", "must be >= 1");
  require(row_spacing >= 0.0, "row_spacing", "must be > 0, or 0 for automatic");
  require(col_spacing >= 0.0, "col_spacing", "must be > 0, or 0 for automatic");
  require(ray_step >= 0.0, "ray_step", "must be > 0, or 0 for automatic");
  require(mu_water > 0.0, "mu_water", "must be > 0");
  if (projection_mode == ProjectionMode::ConeBeam) {
    require(source_to_isocenter > 0.0, "source_to_isocenter", "must be > 0");
    require(source_to_isocenter < source_to_detector, "source_to_detector", "must exceed source_to_isocenter");
  }
  try {
    seg.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.field(), e.what());
  }
  require(data_range > 0.0, "data_range", "must be > 0");
  require(ssim_window >= 1, "ssim_window", "must be >= 1");

  require(views >= 1, "views", "at least one view is required");
  require(arc_degrees > 0.0, "arc_degrees", "must be > 0");
  require(huber_delta > 0.0, "huber_delta", "must be > 0");
  require(lambda_re >= 0.0, "lambda_re", "must be >= 0");
  require(step >= 0.0, "step", "must be > 0, or 0 for automatic");
  require(power_iterations >= 1, "power_iterations", "must be >= 1");
  require(perturb_rotation_deg >= 0.0, "perturb_rotation_deg", "must be >= 0");
  require(perturb_translation_mm >= 0.0, "perturb_translation_mm", "must be >= 0");
  OptSettings o = opt;
  o.step = 1.0;
  try {
    o.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.field(), e.what());
  }

  require(right_lung_scale > 0.0, "right_lung_scale", "must be > 0");
  require(left_lung_scale > 0.0, "left_lung_scale", "must be > 0");
  require(phantom_size >= 4, "phantom_size", "must be >= 4");
  try {
    phantom_spec().validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::Config, e.field(), e.what());
  }
}

ProjectionGeometry RunConfig::projection_for(const GridGeometry& grid) const {
  ProjectionGeometry g;
  g.mode = projection_mode;
  g.source_to_isocenter = source_to_isocenter;
  g.source_to_detector = source_to_detector;
  ProjectionGeometry automatic = g;
  const bool need_auto = row_spacing == 0.0 || col_spacing == 0.0 || ray_step == 0.0;
  if (need_auto) {
    automatic = default_geometry(grid, ProjectionMode::Parallel, detector_rows, detector_cols);
    if (projection_mode == ProjectionMode::ConeBeam) {
      // Same sizing rule as default_geometry, with the configured distances.
      const Vec3 e = grid.extent();
      const double largest = std::max({e.x, e.y, e.z});
      const double near_face = source_to_isocenter - 0.5 * largest;
      if (!(near_face > 0.0))
        throw Error(ErrorCode::DegenerateGeometry, "source_to_isocenter", "volume reaches the source");
      const double span = 1.05 * largest * source_to_detector / near_face;
      automatic.row_spacing = span / static_cast<double>(detector_rows);
      automatic.col_spacing = span / static_cast<double>(detector_cols);
    }
  }
  g.detector_rows = detector_rows;
  g.detector_cols = detector_cols;
  g.row_spacing = row_spacing > 0.0 ? row_spacing : automatic.row_spacing;
  g.col_spacing = col_spacing > 0.0 ? col_spacing : automatic.col_spacing;
  g.ray_step = ray_step > 0.0 ? ray_step : automatic.ray_step;
  g.validate();
  return g;
}

PhantomSpec RunConfig::phantom_spec() const {
  PhantomSpec s = phantom;
  s.seed = seed;
  for (Ellipsoid* lung : {&s.right_lung, &s.left_lung}) {
    const double k = lung == &s.right_lung ? right_lung_scale : left_lung_scale;
    lung->semi_axes = k * lung->semi_axes;
  }
  return s;
}

json parse_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw Error(ErrorCode::Config, "--set", "expected key=value, got \"" + assignment + "\"");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  json parsed = json::parse(value, nullptr, false);
  if (parsed.is_discarded()) parsed = value;
  return json{{key, parsed}};
}

}  // namespace drrkit::cli
