#include <fstream>
#include <functional>
#include <map>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "drrkit/parallel.hpp"

namespace drrkit::cli {

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile:
    case ErrorCode::MalformedHeader:
    case ErrorCode::UnsupportedElementType:
    case ErrorCode::DataSizeMismatch:
    case ErrorCode::IoFailure:
      return kInput;
    case ErrorCode::Config:
      return kConfig;
    default:
      return kComputation;
  }
}

struct Flags {
  std::string config;
  std::vector<std::string> sets;
  std::string output_dir;
  std::string case_id;
  unsigned threads = 0;
  std::uint64_t seed = 0;
};

RunConfig build_config(const Flags& f, const CLI::App& sub) {
  RunConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw Error(ErrorCode::MissingFile, f.config, "cannot open config");
    const nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw Error(ErrorCode::Config, f.config, "config is not valid JSON");
    cfg.apply(doc);
  }
  for (const std::string& s : f.sets) cfg.apply(parse_assignment(s));
  if (sub.count("--output-dir")) cfg.output_dir = f.output_dir;
  if (sub.count("--case-id")) cfg.case_id = f.case_id;
  if (sub.count("--threads")) cfg.threads = f.threads;
  if (sub.count("--seed")) cfg.seed = f.seed;
  if (cfg.threads < 1) throw Error(ErrorCode::Config, "threads", "must be >= 1");
  cfg.validate();
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using Command = int (*)(const RunConfig&, std::ostream&, std::ostream&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"phantom", "Write a synthetic chest or reconstruction phantom", cmd_phantom},
      {"drr", "Simulate posteroanterior and lateral radiographs", cmd_drr},
      {"segment", "Segment lungs, body and pneumothorax", cmd_segment},
      {"quantify", "Lung and free-air volumes with the occupancy ratio", cmd_quantify},
      {"reconstruct", "Iterative reconstruction from simulated projections", cmd_reconstruct},
      {"evaluate", "Compare a candidate volume with a reference", cmd_evaluate},
      {"compare-cohort", "Pearson correlations over paired quantifications", cmd_compare_cohort},
  };

  CLI::App app{"Radiograph simulation, pneumothorax segmentation and reconstruction tools", "drrkit"};
  app.require_subcommand(1);
  Flags flags;
  std::map<const CLI::App*, Command> dispatch;
  for (const auto& [name, help, fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", flags.config, "JSON configuration document");
    sub->add_option("--set", flags.sets, "Override one key, key=value (repeatable)")->allow_extra_args(false);
    sub->add_option("--output-dir", flags.output_dir, "Directory receiving the outputs");
    sub->add_option("--case-id", flags.case_id, "Case identifier written into reports");
    sub->add_option("--threads", flags.threads, "Worker threads");
    sub->add_option("--seed", flags.seed, "Seed for noise and pose perturbation");
    sub->add_flag_callback(
        "--list-keys",
        [&out] {
          for (const std::string& k : RunConfig::keys()) out << k << '\n';
          throw CLI::Success();
        },
        "Print the accepted configuration keys");
    dispatch[sub] = fn;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfig;
  }

  const CLI::App* sub = app.get_subcommands().front();
  try {
    const RunConfig cfg = build_config(flags, *sub);
    set_thread_count(cfg.threads);
    return dispatch.at(sub)(cfg, out, err);
  } catch (const Error& e) {
    err << "drrkit " << sub->get_name() << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "drrkit " << sub->get_name() << ": " << e.what() << '\n';
    return kOther;
  }
}

}  // namespace drrkit::cli
