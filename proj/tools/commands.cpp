#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "commands.hpp"
#include "drrkit/drr.hpp"
#include "drrkit/metaimage.hpp"
#include "drrkit/parallel.hpp"

namespace drrkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json null_or(double value) {
  if (!std::isfinite(value)) return nullptr;
  return value;
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json grid_json(const GridGeometry& g) {
  return {{"dims", json::array({g.dims.width, g.dims.height, g.dims.depth})},
          {"spacing", vec_json(g.spacing)},
          {"origin", vec_json(g.origin)}};
}

json geometry_json(const ProjectionGeometry& g) {
  return {{"mode", g.mode == ProjectionMode::Parallel ? "parallel" : "cone_beam"},
          {"detector_rows", g.detector_rows},
          {"detector_cols", g.detector_cols},
          {"row_spacing", g.row_spacing},
          {"col_spacing", g.col_spacing},
          {"source_to_isocenter", g.source_to_isocenter},
          {"source_to_detector", g.source_to_detector},
          {"ray_step", g.ray_step}};
}

json pose_json(const ViewPose& p) {
  return {{"rotation", vec_json(p.rotation)}, {"translation", vec_json(p.translation)}};
}

std::string require_path(const std::string& value, const char* key) {
  if (value.empty()) throw Error(ErrorCode::Config, key, "required by this command");
  return value;
}

std::vector<Mask> load_lung_masks(const RunConfig& cfg) {
  std::vector<Mask> masks;
  for (const std::string& p : cfg.lung_masks) masks.push_back(load_mask(p));
  return masks;
}

SegResult load_segmentation(const fs::path& dir) {
  SegResult s;
  s.lungs = load_mask(dir / "lungs.mhd");
  s.body = load_mask(dir / "body.mhd");
  s.pneumothorax = load_mask(dir / "pneumothorax.mhd");
  s.right_lung = load_mask(dir / "right_lung.mhd");
  s.left_lung = load_mask(dir / "left_lung.mhd");
  for (const Mask* m : {&s.body, &s.pneumothorax, &s.right_lung, &s.left_lung})
    if (m->geometry() != s.lungs.geometry())
      throw Error(ErrorCode::GeometryMismatch, dir.string(), "segmentation masks disagree on the grid");
  return s;
}

SegResult segmentation_for(const std::string& seg_dir, const Volume& ct, const RunConfig& cfg) {
  if (!seg_dir.empty()) {
    SegResult s = load_segmentation(seg_dir);
    if (s.lungs.geometry() != ct.geometry())
      throw Error(ErrorCode::GeometryMismatch, seg_dir, "segmentation grid differs from the volume");
    return s;
  }
  const std::vector<Mask> masks = load_lung_masks(cfg);
  return run_ptx_seg(ct, masks, cfg.seg);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string(), "cannot open");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::MalformedHeader, path.string(), "not valid JSON");
  return doc;
}

std::vector<ViewPose> reconstruction_poses(const RunConfig& cfg) {
  const double arc = cfg.arc_degrees * std::numbers::pi / 180.0;
  const PerturbationSpec perturb{cfg.perturb_rotation_deg * std::numbers::pi / 180.0, cfg.perturb_translation_mm,
                                 cfg.seed};
  std::vector<ViewPose> poses;
  for (int i = 0; i < cfg.views; ++i) {
    ViewPose base{{0.0, 0.0, arc * i / cfg.views}, {}};
    poses.push_back(cfg.perturb_views ? sample_perturbed_pose(base, perturb, static_cast<std::uint64_t>(i)) : base);
  }
  return poses;
}

void write_trace(const std::vector<TraceEntry>& trace, const fs::path& path) {
  std::ofstream out(path);
  out << "iteration,objective,step\n";
  char line[96];
  for (const TraceEntry& t : trace) {
    std::snprintf(line, sizeof line, "%d,%.17g,%.17g\n", t.iteration, t.objective, t.step);
    out << line;
  }
  if (!out) throw Error(ErrorCode::IoFailure, path.string(), "write failed");
}

double relative_error(const Volume& v, const Volume& truth) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    num += (v[i] - truth[i]) * (v[i] - truth[i]);
    den += truth[i] * truth[i];
  }
  if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return std::sqrt(num / den);
}

}  // namespace

Staging::Staging(const fs::path& output_dir) : final_(output_dir) {
  const fs::path parent = final_.empty() ? fs::path(".") : final_;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw Error(ErrorCode::IoFailure, parent.string(), "cannot create output directory: " + ec.message());
  temp_ = parent / (".tmp-" + std::to_string(::getpid()));
  fs::remove_all(temp_, ec);
  fs::create_directory(temp_, ec);
  if (ec) throw Error(ErrorCode::IoFailure, temp_.string(), "cannot create staging directory: " + ec.message());
}

Staging::~Staging() {
  std::error_code ec;
  fs::remove_all(temp_, ec);
}

void Staging::commit() {
  for (const auto& entry : fs::directory_iterator(temp_)) {
    std::error_code ec;
    fs::rename(entry.path(), final_ / entry.path().filename(), ec);
    if (ec) throw Error(ErrorCode::IoFailure, entry.path().filename().string(), "cannot move into place: " + ec.message());
  }
}

void Staging::write_json(const std::string& name, const json& doc) {
  std::ofstream out(path(name));
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, name, "write failed");
}

json report_header(const RunConfig& cfg) { return {{"schema_version", kSchemaVersion}, {"case_id", cfg.case_id}}; }

json quant_to_json(const QuantReport& q) {
  return {{"right_lung_ml", q.right_lung_ml},
          {"left_lung_ml", q.left_lung_ml},
          {"air_ml", q.air_ml},
          {"occupancy", q.occupancy}};
}

QuantReport quant_from_json(const json& j) {
  QuantReport q;
  const auto field = [&](const char* key) {
    if (!j.is_object() || !j.contains(key) || !j.at(key).is_number())
      throw Error(ErrorCode::MalformedHeader, key, "missing or non-numeric");
    return j.at(key).get<double>();
  };
  q.right_lung_ml = field("right_lung_ml");
  q.left_lung_ml = field("left_lung_ml");
  q.air_ml = field("air_ml");
  q.occupancy = field("occupancy");
  return q;
}

json compare_cohort(const std::vector<CohortRecord>& records) {
  if (records.size() < 2) throw Error(ErrorCode::InvalidArgument, "records", "at least two records are required");
  json out = {{"records", records.size()}};
  json undefined = json::object();
  const auto series = [&](const char* name, double QuantReport::*member) {
    std::vector<double> xs, ys;
    for (const CohortRecord& r : records) {
      xs.push_back(r.reference.*member);
      ys.push_back(r.candidate.*member);
    }
    try {
      out[name] = pearson(xs, ys);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UndefinedMetric) throw;
      out[name] = nullptr;
      undefined[name] = e.what();
    }
  };
  series("rlcc", &QuantReport::right_lung_ml);
  series("llcc", &QuantReport::left_lung_ml);
  series("arcc", &QuantReport::air_ml);
  series("occ", &QuantReport::occupancy);
  out["undefined"] = undefined;
  return out;
}

int cmd_phantom(const RunConfig& cfg, std::ostream&, std::ostream&) {
  Staging stage(cfg.output_dir);
  json doc = report_header(cfg);
  doc["kind"] = cfg.phantom_kind;
  if (cfg.phantom_kind == "two_ellipsoid") {
    const Volume mu = two_ellipsoid_phantom(cfg.phantom_size, cfg.phantom.spacing, cfg.mu_water);
    save_volume(attenuation_to_hu(mu, cfg.mu_water), stage.path("ct.mhd"));
    doc["grid"] = grid_json(mu.geometry());
  } else {
    const Phantom p = make_phantom(cfg.phantom_spec());
    const Mask air = mask_union(p.cap, p.pocket);
    save_volume(p.ct, stage.path("ct.mhd"));
    save_mask(p.body, stage.path("body.mhd"));
    save_mask(p.lungs, stage.path("lungs.mhd"));
    save_mask(p.right_lung, stage.path("right_lung.mhd"));
    save_mask(p.left_lung, stage.path("left_lung.mhd"));
    save_mask(air, stage.path("pneumothorax.mhd"));
    save_mask(p.decoy, stage.path("decoy.mhd"));

    const Mask aerated_right = mask_intersection(p.right_lung, mask_complement(air));
    const Mask aerated_left = mask_intersection(p.left_lung, mask_complement(air));
    QuantReport voxel;
    voxel.right_lung_ml = aerated_right.volume_ml();
    voxel.left_lung_ml = aerated_left.volume_ml();
    voxel.air_ml = air.volume_ml();
    voxel.occupancy = occupancy_ratio(voxel.air_ml, voxel.right_lung_ml, voxel.left_lung_ml);
    doc["grid"] = grid_json(p.ct.geometry());
    doc["analytic"] = quant_to_json(p.analytic);
    doc["voxelized"] = quant_to_json(voxel);
    doc["cap_height_mm"] = p.cap_height_mm;
    doc["decoy_ml"] = p.decoy.volume_ml();
  }
  stage.write_json("phantom.json", doc);
  stage.commit();
  return kOk;
}

int cmd_drr(const RunConfig& cfg, std::ostream&, std::ostream& err) {
  const Volume ct = load_volume(require_path(cfg.input, "input"));
  const ProjectionGeometry g = cfg.projection_for(ct.geometry());
  const DrrResult r = drr_simulate(ct, g, DrrOptions{cfg.mu_water, cfg.radiographic});
  for (const std::string& w : r.warnings) err << "warning: " << w << '\n';

  Staging stage(cfg.output_dir);
  save_pgm16(r.pa, stage.path("pa.pgm"));
  save_pgm16(r.la, stage.path("la.pgm"));
  save_image2d(r.pa, stage.path("pa.mhd"));
  save_image2d(r.la, stage.path("la.mhd"));
  const StandardViews views = standard_views();
  json doc = report_header(cfg);
  doc["geometry"] = geometry_json(g);
  doc["views"] = {{"pa", pose_json(views.pa)}, {"la", pose_json(views.la)}};
  doc["mu_water"] = cfg.mu_water;
  doc["radiographic"] = cfg.radiographic;
  doc["warnings"] = r.warnings;
  stage.write_json("geometry.json", doc);
  stage.commit();
  return kOk;
}

int cmd_segment(const RunConfig& cfg, std::ostream&, std::ostream&) {
  const Volume ct = load_volume(require_path(cfg.input, "input"));
  const std::vector<Mask> masks = load_lung_masks(cfg);
  const SegResult s = run_ptx_seg(ct, masks, cfg.seg);

  Staging stage(cfg.output_dir);
  json counts = json::object();
  const std::pair<const char*, const Mask*> outputs[] = {{"lungs", &s.lungs},
                                                         {"body", &s.body},
                                                         {"pneumothorax", &s.pneumothorax},
                                                         {"right_lung", &s.right_lung},
                                                         {"left_lung", &s.left_lung}};
  for (const auto& [name, mask] : outputs) {
    save_mask(*mask, stage.path(std::string(name) + ".mhd"));
    counts[name] = {{"voxels", mask->count()}, {"ml", mask->volume_ml()}};
  }
  json doc = report_header(cfg);
  doc["grid"] = grid_json(ct.geometry());
  doc["masks"] = counts;
  doc["lung_source"] = masks.empty() ? "classical" : "ensemble";
  doc["quant"] = quant_to_json(quantify(s));
  stage.write_json("segment.json", doc);
  stage.commit();
  return kOk;
}

int cmd_quantify(const RunConfig& cfg, std::ostream&, std::ostream&) {
  SegResult s;
  if (!cfg.seg_dir.empty())
    s = load_segmentation(cfg.seg_dir);
  else
    s = segmentation_for("", load_volume(require_path(cfg.input, "input")), cfg);
  json doc = report_header(cfg);
  doc.update(quant_to_json(quantify(s)));

  Staging stage(cfg.output_dir);
  stage.write_json("quantify.json", doc);
  stage.commit();
  return kOk;
}

int cmd_evaluate(const RunConfig& cfg, std::ostream&, std::ostream&) {
  const Volume ref = load_volume(require_path(cfg.reference, "reference"));
  const Volume cand = load_volume(require_path(cfg.candidate, "candidate"));
  if (ref.geometry() != cand.geometry())
    throw Error(ErrorCode::GeometryMismatch, "candidate", "grid differs from the reference");
  const SegResult ref_seg = segmentation_for(cfg.reference_seg_dir, ref, cfg);
  const SegResult cand_seg = segmentation_for(cfg.candidate_seg_dir, cand, cfg);

  json doc = report_header(cfg);
  json undefined = json::object();
  try {
    doc["cs"] = cosine_similarity(cand, ref);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UndefinedMetric) throw;
    doc["cs"] = nullptr;
    undefined["cs"] = e.what();
  }
  const double p = psnr(cand, ref, cfg.data_range);
  doc["psnr"] = null_or(p);
  if (!std::isfinite(p)) undefined["psnr"] = "infinite";
  doc["ssim"] = ssim(cand, ref, SsimParams{cfg.ssim_window, cfg.data_range});

  json d = json::object(), j = json::object(), hd = json::object(), asd = json::object();
  const std::pair<const char*, const Mask SegResult::*> structures[] = {
      {"right_lung", &SegResult::right_lung},
      {"left_lung", &SegResult::left_lung},
      {"pneumothorax", &SegResult::pneumothorax}};
  for (const auto& [name, member] : structures) {
    const Mask& a = cand_seg.*member;
    const Mask& b = ref_seg.*member;
    d[name] = dice(a, b);
    j[name] = jaccard(a, b);
    try {
      const SurfaceDistances s = surface_distances(a, b);
      hd[name] = s.hd95;
      asd[name] = s.asd;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UndefinedMetric) throw;
      hd[name] = nullptr;
      asd[name] = nullptr;
      undefined[std::string("hd95.") + name] = e.what();
      undefined[std::string("asd.") + name] = e.what();
    }
  }
  doc["dice"] = d;
  doc["jaccard"] = j;
  doc["hd95"] = hd;
  doc["asd"] = asd;
  doc["undefined"] = undefined;

  Staging stage(cfg.output_dir);
  stage.write_json("evaluate.json", doc);
  stage.commit();
  return kOk;
}

int cmd_reconstruct(const RunConfig& cfg, std::ostream&, std::ostream& err) {
  const Volume truth = hu_to_attenuation(load_volume(require_path(cfg.input, "input")), cfg.mu_water);
  std::optional<Volume> prior;
  if (cfg.lambda_re > 0.0) {
    prior = hu_to_attenuation(load_volume(require_path(cfg.reference, "reference")), cfg.mu_water);
    if (prior->geometry() != truth.geometry())
      throw Error(ErrorCode::GeometryMismatch, "reference", "grid differs from the input");
  }
  const GridGeometry& grid = truth.geometry();
  const ProjectionGeometry g = cfg.projection_for(grid);
  const std::vector<ViewPose> poses = reconstruction_poses(cfg);

  Objective obj = make_objective(truth, g, poses, cfg.view_norm);
  obj.huber_delta = cfg.huber_delta;
  obj.lambda_re = cfg.lambda_re;
  obj.reference = prior;
  obj.validate();

  OptSettings opt = cfg.opt;
  opt.step = cfg.step > 0.0 ? cfg.step : suggest_step(obj, grid, cfg.power_iterations);

  const auto log = [&](const TraceEntry& t) {
    err << "iteration " << t.iteration << " objective " << t.objective << " step " << t.step << '\n';
  };

  Staging stage(cfg.output_dir);
  ReconResult r;
  try {
    r = reconstruct_iterative(obj, Volume(grid, 0.0), opt, log);
  } catch (const DivergenceError& e) {
    write_trace(e.trace(), stage.path("trace.csv"));
    stage.commit();
    throw;
  }
  save_volume(attenuation_to_hu(r.volume, cfg.mu_water), stage.path("recon.mhd"));
  write_trace(r.trace, stage.path("trace.csv"));

  json doc = report_header(cfg);
  doc["geometry"] = geometry_json(g);
  doc["views"] = poses.size();
  doc["perturb_views"] = cfg.perturb_views;
  doc["step"] = opt.step;
  doc["iterations"] = r.trace.back().iteration;
  doc["initial_objective"] = r.trace.front().objective;
  doc["final_objective"] = r.trace.back().objective;
  doc["converged"] = r.converged;
  doc["relative_error"] = null_or(relative_error(r.volume, truth));
  stage.write_json("reconstruct.json", doc);
  stage.commit();
  return kOk;
}

int cmd_compare_cohort(const RunConfig& cfg, std::ostream&, std::ostream&) {
  const fs::path manifest = require_path(cfg.cohort, "cohort");
  const json doc = read_json(manifest);
  if (!doc.is_object() || !doc.contains("records") || !doc.at("records").is_array())
    throw Error(ErrorCode::MalformedHeader, "records", "manifest needs a \"records\" array");

  const auto resolve = [&](const json& entry, const char* key) -> json {
    if (entry.is_string()) {
      fs::path p = entry.get<std::string>();
      if (p.is_relative()) p = manifest.parent_path() / p;
      return read_json(p);
    }
    if (entry.is_object()) return entry;
    throw Error(ErrorCode::MalformedHeader, key, "expected a path or an object");
  };

  std::vector<CohortRecord> records;
  for (const json& rec : doc.at("records")) {
    if (!rec.is_object() || !rec.contains("reference") || !rec.contains("candidate"))
      throw Error(ErrorCode::MalformedHeader, "records", "each record needs reference and candidate");
    const json ref = resolve(rec.at("reference"), "reference");
    const json cand = resolve(rec.at("candidate"), "candidate");
    CohortRecord r;
    if (rec.contains("case_id") && rec.at("case_id").is_string()) r.case_id = rec.at("case_id").get<std::string>();
    for (const json* side : {&ref, &cand}) {
      if (!side->contains("case_id")) continue;
      const std::string id = side->at("case_id").get<std::string>();
      if (r.case_id.empty()) r.case_id = id;
      if (id != r.case_id)
        throw Error(ErrorCode::Config, "case_id", "record pairs \"" + r.case_id + "\" with \"" + id + "\"");
    }
    r.reference = quant_from_json(ref);
    r.candidate = quant_from_json(cand);
    records.push_back(std::move(r));
  }

  json out = report_header(cfg);
  out.update(compare_cohort(records));
  Staging stage(cfg.output_dir);
  stage.write_json("cohort.json", out);
  stage.commit();
  return kOk;
}

}  // namespace drrkit::cli
