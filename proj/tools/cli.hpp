#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "drrkit/metrics.hpp"
#include "drrkit/objective.hpp"
#include "drrkit/phantom.hpp"
#include "drrkit/projector.hpp"
#include "drrkit/ptxseg.hpp"

namespace drrkit::cli {

inline constexpr const char* kSchemaVersion = "1.0";

enum ExitCode : int {
  kOk = 0,
  kOther = 1,
  kInput = 2,        // missing or unreadable input, I/O failure
  kConfig = 3,       // configuration rejected at load
  kComputation = 4,  // geometry mismatch, divergence, undefined results
};

/// Every command reads the same flat document; a command ignores keys it
/// does not use. Zero means "derive from the grid" for row_spacing,
/// col_spacing, ray_step and step.
struct RunConfig {
  std::string input;
  std::string reference;
  std::string candidate;
  std::string seg_dir;
  std::string reference_seg_dir;
  std::string candidate_seg_dir;
  std::string cohort;
  std::vector<std::string> lung_masks;
  std::string output_dir = ".";
  std::string case_id = "case";
  unsigned threads = 1;
  std::uint64_t seed = 0;

  ProjectionMode projection_mode = ProjectionMode::ConeBeam;
  std::size_t detector_rows = 224;
  std::size_t detector_cols = 224;
  double row_spacing = 0.0;
  double col_spacing = 0.0;
  double source_to_isocenter = 600.0;
  double source_to_detector = 1100.0;
  double ray_step = 0.0;
  double mu_water = kDefaultMuWater;
  bool radiographic = false;

  SegParams seg;

  double data_range = kDefaultDataRange;
  std::size_t ssim_window = 7;

  int views = 36;
  double arc_degrees = 180.0;
  ViewNorm view_norm = ViewNorm::L2;
  double huber_delta = 1e-3;
  double lambda_re = 0.0;
  double step = 0.0;
  OptSettings opt;
  int power_iterations = 20;
  bool perturb_views = false;
  double perturb_rotation_deg = 5.0;
  double perturb_translation_mm = 10.0;

  std::string phantom_kind = "chest";  // chest | two_ellipsoid
  PhantomSpec phantom;
  double right_lung_scale = 1.0;
  double left_lung_scale = 1.0;
  std::size_t phantom_size = 32;

  /// Applies each key of `doc` (an object); throws Error(Config) naming an
  /// unknown key or a value of the wrong type.
  void apply(const nlohmann::json& doc);
  /// Checks every module invariant that does not depend on input data.
  void validate() const;
  /// Sorted list of accepted keys.
  static std::vector<std::string> keys();

  ProjectionGeometry projection_for(const GridGeometry& grid) const;
  PhantomSpec phantom_spec() const;
};

/// Parses `key=value`; the value is read as JSON when it parses, otherwise
/// as a string.
nlohmann::json parse_assignment(const std::string& assignment);

struct CohortRecord {
  std::string case_id;
  QuantReport reference;
  QuantReport candidate;
};

nlohmann::json quant_to_json(const QuantReport& q);
QuantReport quant_from_json(const nlohmann::json& j);

/// RLCC, LLCC, ARCC and OCC over the paired series; an undefined
/// coefficient is null with its reason under "undefined".
nlohmann::json compare_cohort(const std::vector<CohortRecord>& records);

/// Entry point shared by the binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace drrkit::cli
