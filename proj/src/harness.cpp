#include "pdistill/harness.hpp"

#include <Eigen/Core>
#include <fstream>
#include <sstream>

#include "pdistill/diagnostics.hpp"
#include "pdistill/errors.hpp"
#include "pdistill/pcfg.hpp"
#include "pdistill/textio.hpp"

namespace pdistill {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* precision_name(Precision p) { return p == Precision::kDouble ? "double" : "float"; }

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) {}
  void emit(const std::string& rel, const std::string& contents) {
    write_text_file(dir_ / rel, contents);
    files_.push_back({rel, sha256_hex(contents), contents.size()});
  }
  void emit_json(const std::string& rel, const json& j) { emit(rel, j.dump(2) + "\n"); }
  const std::vector<ManifestEntry>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<ManifestEntry> files_;
};

template <class F>
std::string to_string_with(F&& f) {
  std::ostringstream o;
  f(o);
  return o.str();
}

// Held-out accuracy: the full cube in exact mode, else 2^16 fresh samples.
json test_metrics(const TwoLayerMlp& model, const ParityTask& task, bool exact, const Rng& rng) {
  Batch b;
  if (exact) {
    b = population_chunk<double>(task, 0, static_cast<std::size_t>(cube_size(task.d())));
  } else {
    Rng r = rng;
    b = sample_batch(task, 1u << 16, r);
  }
  return {{"test_points", b.size()}, {"test_accuracy", accuracy(model, b)}, {"test_hinge_loss", mean_hinge_loss(model, b)}};
}

json trace_summary(const TrainingTrace& t) {
  double best = 0.0;
  for (const auto& r : t.records()) best = std::max(best, r.eval_accuracy);
  json j{{"samples_consumed", t.samples_consumed()}, {"best_eval_accuracy", best}};
  if (!t.records().empty()) j["last_eval_accuracy"] = t.records().back().eval_accuracy;
  return j;
}

struct Arm {
  std::string method;
  TrainResult result;
};

void emit_traces(Writer& w, const std::string& run_id, const std::vector<Arm>& arms) {
  w.emit("traces.csv", to_string_with([&](std::ostream& o) {
           TrainingTrace::write_csv_header(o);
           for (const auto& a : arms) a.result.trace.write_csv_rows(o, run_id, a.method);
         }));
  for (const auto& a : arms) {
    w.emit("checkpoints/" + a.method + ".ckpt", to_string_with([&](std::ostream& o) { write_checkpoint(a.result.model, o); }));
    w.emit("checkpoints/" + a.method + "_stage1.ckpt",
           to_string_with([&](std::ostream& o) { write_checkpoint(a.result.after_stage1, o); }));
  }
}

// Both arms must report at the same sample counts.
std::string compare_csv(const std::string& run_id, const TrainingTrace& cur, const TrainingTrace& one) {
  const auto& a = cur.records();
  const auto& b = one.records();
  if (a.size() != b.size()) throw std::runtime_error("compare arms produced traces of different lengths");
  std::ostringstream o;
  o << "run_id,step,samples_consumed,curriculum_loss,curriculum_accuracy,oneshot_loss,oneshot_accuracy\n";
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].samples_consumed != b[i].samples_consumed || a[i].step != b[i].step)
      throw std::runtime_error("compare arms disagree on the samples_consumed grid at row " + std::to_string(i));
    o << run_id << ',' << a[i].step << ',' << a[i].samples_consumed << ',' << format_g17(a[i].eval_loss) << ','
      << format_g17(a[i].eval_accuracy) << ',' << format_g17(b[i].eval_loss) << ',' << format_g17(b[i].eval_accuracy)
      << '\n';
  }
  return o.str();
}

json run_training(const ExperimentConfig& c, Writer& w) {
  const ParityTask task = c.task();
  const Rng root(c.seed);
  const Rng test_rng = root.split(stream::kEval);
  std::vector<Arm> arms;
  json summary;

  Rng tr = root.split(stream::kTeacher);
  TrainResult teacher = train_teacher(task, c.m_t, c.teacher, tr);
  summary["teacher"] = trace_summary(teacher.trace);
  summary["teacher"].update(test_metrics(teacher.model, task, c.teacher.exact_mode, test_rng));
  summary["teacher"]["stage1_gap"] = weight_gap(teacher.after_stage1, task).summary();
  arms.push_back({"teacher", teacher});

  const auto kind = c.kind;
  if (kind == ExperimentKind::kCurriculum || kind == ExperimentKind::kCompare) {
    Rng r = root.split(stream::kCurriculum);
    TrainResult s = train_student_curriculum(task, teacher.model, c.m_s, c.student, r);
    summary["curriculum"] = trace_summary(s.trace);
    summary["curriculum"].update(test_metrics(s.model, task, c.student.exact_mode, test_rng));
    summary["curriculum"]["stage1_support_recovery"] = support_recovery_score(s.after_stage1, task);
    arms.push_back({"curriculum", std::move(s)});
  }
  if (kind == ExperimentKind::kOneShot || kind == ExperimentKind::kCompare) {
    TrainConfig oc = oneshot_train_config(c);
    Rng r = root.split(stream::kOneShot);
    TrainResult s = train_student_oneshot(task, teacher.model, c.m_s, oc, r);
    summary["oneshot"] = trace_summary(s.trace);
    summary["oneshot"].update(test_metrics(s.model, task, oc.exact_mode, test_rng));
    summary["oneshot"]["stage1_support_recovery"] = support_recovery_score(s.after_stage1, task);
    arms.push_back({"oneshot", std::move(s)});
  }
  emit_traces(w, c.run_id, arms);
  w.emit("teacher_stage1_gap.csv", to_string_with([&](std::ostream& o) { weight_gap(teacher.after_stage1, task).write_csv(o); }));
  if (kind == ExperimentKind::kCompare) {
    w.emit("compare.csv", compare_csv(c.run_id, arms[1].result.trace, arms[2].result.trace));
    summary["sample_budget"] = arms[1].result.trace.samples_consumed();
    summary["accuracy_gap"] = summary["curriculum"]["test_accuracy"].get<double>() -
                              summary["oneshot"]["test_accuracy"].get<double>();
  }
  return summary;
}

json run_diagnostics(const ExperimentConfig& c, Writer& w) {
  const ParityTask task = c.task();
  const Rng root(c.seed);
  const EstimateMode mode = c.diagnostics.sample_size == 0 ? EstimateMode::kExact : EstimateMode::kSampled;
  const std::size_t B = c.diagnostics.sample_size;
  json summary;

  Rng tr = root.split(stream::kTeacher);
  TrainResult teacher = train_teacher(task, c.m_t, c.teacher, tr);
  const TwoLayerMlp& t1 = teacher.after_stage1;
  auto gap = weight_gap(t1, task);
  summary["teacher_stage1_gap"] = gap.summary();
  w.emit("teacher_stage1_gap.csv", to_string_with([&](std::ostream& o) { gap.write_csv(o); }));

  Rng pr = root.split(stream::kProjection);
  auto A = sample_projection(c.m_t, c.diagnostics.projection_rows, pr);
  Rng est = root.split(stream::kStage1);
  auto corr = correlation_report(t1, A, task, mode, B, &est);
  summary["correlation"] = corr.summary();
  w.emit("correlations.csv", to_string_with([&](std::ostream& o) { corr.write_csv(o); }));
  w.emit("correlation_histogram.csv", to_string_with([&](std::ostream& o) { write_histogram_csv(corr.histogram, o); }));
  if (corr.s.size() > 0) {
    auto sb = scaling_factor_bounds(corr, c.m_t);
    summary["scaling_bounds"] = {{"in_threshold", sb.in_threshold}, {"out_ceiling", sb.out_ceiling}};
  }

  Rng ir = root.split(stream::kInit);
  auto s0 = symmetric_init(c.m_s, task.d(), task.k(), ir, c.student.mirror);
  Rng spr = root.split(stream::kProjection).split(1);
  auto As = sample_projection(c.m_t, c.m_s, spr);
  auto dec = gradient_decomposition(s0, t1, As, task, mode, B, &est);
  summary["gradient_decomposition"] = dec.summary();
  if (task.d() <= kMaxEnumerationDim) {
    std::vector<double> ones(static_cast<std::size_t>(task.d()), 1.0);
    summary["expected_majority_all_ones"] = expected_majority(ones);
  }

  Rng cr = root.split(stream::kCurriculum);
  TrainResult s = train_student_curriculum(task, teacher.model, c.m_s, c.student, cr);
  summary["curriculum"] = trace_summary(s.trace);
  summary["curriculum"]["stage1_support_recovery"] = support_recovery_score(s.after_stage1, task);
  summary["curriculum"]["stage1_gap"] = weight_gap(s.after_stage1, task).summary();
  emit_traces(w, c.run_id, {{"teacher", teacher}, {"curriculum", s}});
  return summary;
}

json run_pcfg(const ExperimentConfig& c, Writer& w) {
  const Rng root(c.seed);
  const Grammar g = cfg3b();
  auto corpus = sample_corpus(g, c.pcfg.n_samples, root.split(stream::kCorpus));
  std::vector<double> lengths;
  std::size_t tokens = 0;
  for (const auto& s : corpus) {
    lengths.push_back(static_cast<double>(s.size()));
    tokens += s.size();
  }
  auto p = length_percentiles(lengths);
  std::vector<std::vector<Symbol>> head(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(c.pcfg.corpus_sentences));
  w.emit("corpus.txt", to_string_with([&](std::ostream& o) { write_corpus(head, o); }));
  std::size_t head_tokens = 0;
  for (const auto& s : head) head_tokens += s.size();
  w.emit_json("corpus.meta.json", {{"grammar", g.name()},
                                   {"seed", c.seed},
                                   {"run_id", c.run_id},
                                   {"sentences", head.size()},
                                   {"tokens", head_tokens},
                                   {"shard_size", 1024}});

  Rng mr = root.split(stream::kMasking);
  std::vector<MaskedSample> masked;
  std::size_t positions = 0, selected = 0, n_mask = 0, n_random = 0, n_keep = 0;
  for (std::size_t i = 0; i < c.pcfg.masked_sentences; ++i) {
    masked.push_back(mask_sequence(corpus[i], g.terminals(), mr, c.pcfg.mask_fraction));
    positions += corpus[i].size();
    selected += masked.back().positions.size();
    for (auto k : masked.back().kinds) {
      n_mask += k == Corruption::kMaskToken;
      n_random += k == Corruption::kRandomToken;
      n_keep += k == Corruption::kUnchanged;
    }
  }
  w.emit("masked.tsv", to_string_with([&](std::ostream& o) { write_masked_dataset(masked, o); }));
  auto frac = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  json summary{{"grammar", g.name()},
               {"n_samples", c.pcfg.n_samples},
               {"total_tokens", tokens},
               {"length_percentiles", {{"p25", p.p25}, {"p50", p.p50}, {"p75", p.p75}, {"p95", p.p95}}},
               {"masking",
                {{"positions", positions},
                 {"selected_fraction", frac(selected, positions)},
                 {"mask_token_fraction", frac(n_mask, selected)},
                 {"random_token_fraction", frac(n_random, selected)},
                 {"unchanged_fraction", frac(n_keep, selected)}}}};
  return summary;
}

void write_manifest(const ExperimentConfig& c, const ResultBundle& b) {
  json files = json::array();
  for (const auto& f : b.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  json m{{"run_id", c.run_id},     {"seed", c.seed},         {"kind", to_string(c.kind)},
         {"environment", b.environment}, {"partial", b.partial}, {"files", files}};
  if (b.partial) m["error"] = b.error;
  write_text_file(b.dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

json environment_fingerprint(const ExperimentConfig& c) {
  json env{{"version", PDISTILL_VERSION},
           {"compiler", __VERSION__},
           {"cxx_standard", __cplusplus},
           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION)}};
  if (c.uses_task())
    env["precision"] = {{"teacher", precision_name(c.teacher.precision)},
                        {"student", precision_name(c.student.precision)}};
  return env;
}

ResultBundle run(const ExperimentConfig& c, const fs::path& out_dir) {
  for (const auto& f : validate(c))
    if (f.severity == Severity::kError) throw ConfigError(f.field, f.message);
  ResultBundle b;
  b.dir = out_dir;
  b.environment = environment_fingerprint(c);
  fs::create_directories(out_dir);
  Writer w(out_dir);
  try {
    w.emit("config.cfg", to_text(c));
    switch (c.kind) {
      case ExperimentKind::kPcfg:
        b.summary = run_pcfg(c, w);
        break;
      case ExperimentKind::kDiagnostics:
        b.summary = run_diagnostics(c, w);
        break;
      default:
        b.summary = run_training(c, w);
    }
    b.summary["run_id"] = c.run_id;
    b.summary["seed"] = c.seed;
    w.emit_json("summary.json", b.summary);
  } catch (const std::exception& e) {
    b.files = w.files();
    b.partial = true;
    b.error = e.what();
    write_manifest(c, b);
    throw;
  }
  b.files = w.files();
  write_manifest(c, b);
  return b;
}

BundleCheck check_bundle(const fs::path& dir) {
  BundleCheck r;
  r.manifest = json::parse(read_text_file(dir / "manifest.json"));
  if (r.manifest.value("partial", false)) r.problems.push_back("manifest is flagged partial");
  for (const auto& f : r.manifest.at("files")) {
    const fs::path p = dir / f.at("path").get<std::string>();
    if (!fs::exists(p)) {
      r.problems.push_back("missing " + p.string());
      continue;
    }
    if (sha256_file(p) != f.at("sha256").get<std::string>()) r.problems.push_back("hash mismatch " + p.string());
  }
  return r;
}

}  // namespace pdistill
