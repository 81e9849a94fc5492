// Command-line front end: run configs or presets, list presets, audit a run.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "maser/runner.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Three-level maser heat engine: simulation and thermodynamic analysis"};
  app.require_subcommand(1);

  std::vector<std::string> config_files, preset_names;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "integrate configs or presets and write outputs");
  run->add_option("--config", config_files, "JSON run config (repeatable)");
  run->add_option("--preset", preset_names, "named preset (repeatable)");
  run->add_option("--out", out_dir, "output directory (default: runs/<name>)");

  auto* list = app.add_subcommand("list-presets", "print the named presets as JSON configs");

  std::string trajectory_dir;
  auto* audit = app.add_subcommand("audit", "re-check a run directory");
  audit->add_option("--trajectory", trajectory_dir, "output directory of a run")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : maser::kExitConfig;
  }

  if (*list) {
    for (const auto& c : maser::presets()) std::cout << maser::to_json(c).dump() << '\n';
    return 0;
  }

  if (*audit) {
    const maser::AuditResult r = maser::audit_directory(trajectory_dir);
    for (const auto& line : r.lines) std::cout << line << '\n';
    return r.exit_code;
  }

  std::vector<maser::RunConfig> configs;
  try {
    for (const auto& f : config_files) configs.push_back(maser::load_config(f));
    for (const auto& n : preset_names) configs.push_back(maser::preset(n));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return maser::kExitConfig;
  }
  if (configs.empty()) {
    std::cerr << "error: run needs --config or --preset\n";
    return maser::kExitConfig;
  }
  const fs::path out = out_dir.empty() ? (configs.size() == 1 ? fs::path("runs") / configs[0].name
                                                              : fs::path("runs"))
                                       : fs::path(out_dir);
  const auto results = maser::run_all(configs, out, maser::worker_count());
  int code = maser::kExitOk;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    std::cout << configs[k].name << ": exit " << r.exit_code;
    if (!r.message.empty()) std::cout << " (" << r.message << ")";
    std::cout << '\n';
    for (const auto& f : r.files) std::cout << "  " << f.string() << '\n';
    code = std::max(code, r.exit_code);
  }
  return code;
}
