#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pdistill/distill.hpp"

namespace pdistill {

enum class ExperimentKind { kTeacher, kCurriculum, kOneShot, kCompare, kDiagnostics, kPcfg };

struct DiagnosticsOptions {
  int projection_rows = 200;
  std::size_t sample_size = 0;  // 0: exact expectations (needs d <= 24)
};

struct PcfgOptions {
  std::size_t n_samples = 100000;
  std::size_t corpus_sentences = 1000;  // written to corpus.txt
  std::size_t masked_sentences = 1000;  // written to masked.tsv
  double mask_fraction = 0.30;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kTeacher;
  std::string run_id = "run";
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;  // empty: decided by the caller
  int d = 0;
  int k = 0;
  std::vector<int> support;  // empty: {1..k}
  int m_t = 0;
  int m_s = 0;
  TrainConfig teacher;
  TrainConfig student;
  // Rates and target only; budgets always equal the student's.
  TrainConfig oneshot;
  DiagnosticsOptions diagnostics;
  PcfgOptions pcfg;

  ParityTask task() const;
  bool uses_task() const { return kind != ExperimentKind::kPcfg; }
};

std::string to_string(ExperimentKind k);

// Line format: key = value, '#' starts a comment. Unknown keys, repeated keys
// and malformed values throw ConfigError carrying the key as field path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text listing every key; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& c);

// One-shot arm settings: the student budget with the one-shot rates.
TrainConfig oneshot_train_config(const ExperimentConfig& c);

enum class Severity { kError, kWarning };

struct Finding {
  Severity severity;
  std::string field;
  std::string message;
};

// Schema and canonical-relation checks. Overrides of the canonical relations are
// errors in canonical mode and warnings otherwise.
std::vector<Finding> validate(const ExperimentConfig& c);

}  // namespace pdistill
