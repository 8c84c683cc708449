#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdistill/config.hpp"

namespace pdistill {

struct ManifestEntry {
  std::string path;  // relative to the bundle directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct ResultBundle {
  std::filesystem::path dir;
  std::vector<ManifestEntry> files;
  nlohmann::json environment;
  nlohmann::json summary;
  bool partial = false;
  std::string error;
};

// version, compiler, precision modes; nothing host- or time-dependent.
nlohmann::json environment_fingerprint(const ExperimentConfig& c);

// Runs the configured pipeline into out_dir and writes manifest.json last.
// Throws ConfigError when validate() reports errors. On a runtime failure the
// manifest is written with "partial": true before the exception propagates.
ResultBundle run(const ExperimentConfig& c, const std::filesystem::path& out_dir);

// Reads manifest.json and checks every listed file against its hash.
struct BundleCheck {
  nlohmann::json manifest;
  std::vector<std::string> problems;
};
BundleCheck check_bundle(const std::filesystem::path& dir);

}  // namespace pdistill
