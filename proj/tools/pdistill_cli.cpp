#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "pdistill/config.hpp"
#include "pdistill/errors.hpp"
#include "pdistill/harness.hpp"
#include "pdistill/parallel.hpp"
#include "pdistill/textio.hpp"

using namespace pdistill;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  ExperimentConfig c = load_config(path);
  if (seed) c.seed = *seed;
  return c;
}

int print_findings(const std::vector<Finding>& findings) {
  int errors = 0;
  for (const auto& f : findings) {
    errors += f.severity == Severity::kError;
    std::cout << (f.severity == Severity::kError ? "error" : "warning") << ": " << f.field << ": " << f.message
              << '\n';
  }
  return errors;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-parity distillation laboratory"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;

  auto* run_cmd = app.add_subcommand("run", "Run an experiment and write a result bundle");
  run_cmd->add_option("--config", config_path, "Experiment config file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides the config's out key)");
  run_cmd->add_option("--seed", seed, "Global seed (overrides the config)");
  run_cmd->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");

  auto* validate_cmd = app.add_subcommand("validate", "Check a config without running it");
  validate_cmd->add_option("--config", config_path, "Experiment config file")->required();
  validate_cmd->add_option("--seed", seed, "Global seed (overrides the config)");

  auto* report_cmd = app.add_subcommand("report", "Verify a result bundle and print its summary");
  report_cmd->add_option("--out", out_dir, "Bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*validate_cmd) {
      ExperimentConfig c = load(config_path, seed);
      return print_findings(validate(c)) ? kExitConfig : 0;
    }
    if (*run_cmd) {
      ExperimentConfig c = load(config_path, seed);
      if (print_findings(validate(c))) return kExitConfig;
      std::filesystem::path dir = out_dir.empty() ? c.out_dir : std::filesystem::path(out_dir);
      if (dir.empty()) throw ConfigError("out", "no output directory given (--out or out key)");
      if (threads) set_worker_count(threads);
      ResultBundle b = run(c, dir);
      std::cout << b.summary.dump(2) << '\n';
      std::cout << "wrote " << b.files.size() << " files and manifest.json to " << b.dir.string() << '\n';
      return 0;
    }
    if (*report_cmd) {
      BundleCheck chk = check_bundle(out_dir);
      std::cout << read_text_file(std::filesystem::path(out_dir) / "summary.json");
      for (const auto& p : chk.problems) std::cout << "problem: " << p << '\n';
      std::cout << (chk.problems.empty() ? "bundle verified: " : "bundle NOT verified: ")
                << chk.manifest.at("files").size() << " files\n";
      return chk.problems.empty() ? 0 : kExitRuntime;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
