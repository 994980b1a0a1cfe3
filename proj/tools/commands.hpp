#pragma once

#include <filesystem>
#include <string>

#include "cli.hpp"

namespace drrkit::cli {

/// Outputs are written into a private directory under the output directory
/// and moved into place by commit(); anything not committed is removed.
class Staging {
 public:
  explicit Staging(const std::filesystem::path& output_dir);
  ~Staging();
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;

  std::filesystem::path path(const std::string& name) const { return temp_ / name; }
  void write_json(const std::string& name, const nlohmann::json& doc);
  void commit();

 private:
  std::filesystem::path final_;
  std::filesystem::path temp_;
};

nlohmann::json report_header(const RunConfig& cfg);

int cmd_phantom(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_drr(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_segment(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_quantify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_reconstruct(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_compare_cohort(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace drrkit::cli
