#include "pdistill/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "pdistill/boolean_fourier.hpp"
#include "pdistill/errors.hpp"
#include "pdistill/textio.hpp"

namespace pdistill {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, "malformed number '" + v + "'");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) throw ConfigError(key, "must be finite");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, trim(item)));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

const std::map<std::string, ExperimentKind>& kind_names() {
  static const std::map<std::string, ExperimentKind> m{
      {"teacher", ExperimentKind::kTeacher}, {"curriculum", ExperimentKind::kCurriculum},
      {"oneshot", ExperimentKind::kOneShot}, {"compare", ExperimentKind::kCompare},
      {"diagnostics", ExperimentKind::kDiagnostics}, {"pcfg", ExperimentKind::kPcfg}};
  return m;
}

using Setter = std::function<void(const std::string& key, const std::string& value)>;

// B1 may be "bound"; resolved once the task and widths are known.
struct Pending {
  bool teacher_b1_bound = false;
  bool student_b1_bound = false;
};

void add_train_keys(std::map<std::string, Setter>& keys, const std::string& prefix, TrainConfig& t, bool* b1_bound,
                    bool rates_only) {
  keys[prefix + "eta1"] = [&t](auto& k, auto& v) { t.eta1 = parse_number<double>(k, v); };
  keys[prefix + "lambda1"] = [&t](auto& k, auto& v) { t.lambda1 = parse_number<double>(k, v); };
  keys[prefix + "eta2"] = [&t](auto& k, auto& v) { t.eta2 = parse_number<double>(k, v); };
  keys[prefix + "eta2_inner"] = [&t](auto& k, auto& v) { t.eta2_inner = parse_number<double>(k, v); };
  keys[prefix + "train_inner_final"] = [&t](auto& k, auto& v) { t.train_inner_final = parse_bool(k, v); };
  keys[prefix + "target"] = [&t](auto& k, auto& v) {
    if (v == "hard_label")
      t.target = OutputTarget::kHardLabel;
    else if (v == "logit_mse")
      t.target = OutputTarget::kLogitMse;
    else
      throw ConfigError(k, "expected hard_label or logit_mse");
  };
  if (rates_only) return;
  keys[prefix + "B1"] = [&t, b1_bound](auto& k, auto& v) {
    if (v == "bound")
      *b1_bound = true;
    else
      t.B1 = parse_number<std::size_t>(k, v);
  };
  keys[prefix + "B2"] = [&t](auto& k, auto& v) { t.B2 = parse_number<std::size_t>(k, v); };
  keys[prefix + "T1"] = [&t](auto& k, auto& v) { t.T1 = parse_number<std::size_t>(k, v); };
  keys[prefix + "T2"] = [&t](auto& k, auto& v) { t.T2 = parse_number<std::size_t>(k, v); };
  keys[prefix + "epsilon"] = [&t](auto& k, auto& v) { t.epsilon = parse_number<double>(k, v); };
  keys[prefix + "tau_g"] = [&t](auto& k, auto& v) { t.tau_g = parse_number<double>(k, v); };
  keys[prefix + "delta"] = [&t](auto& k, auto& v) { t.delta = parse_number<double>(k, v); };
  keys[prefix + "exact_mode"] = [&t](auto& k, auto& v) { t.exact_mode = parse_bool(k, v); };
  keys[prefix + "analytic_stage1"] = [&t](auto& k, auto& v) { t.analytic_stage1 = parse_bool(k, v); };
  keys[prefix + "canonical"] = [&t](auto& k, auto& v) { t.canonical = parse_bool(k, v); };
  keys[prefix + "eval_size"] = [&t](auto& k, auto& v) { t.eval_size = parse_number<std::size_t>(k, v); };
  keys[prefix + "eval_every"] = [&t](auto& k, auto& v) { t.eval_every = parse_number<std::size_t>(k, v); };
  keys[prefix + "precision"] = [&t](auto& k, auto& v) {
    if (v == "double")
      t.precision = Precision::kDouble;
    else if (v == "float")
      t.precision = Precision::kFloat;
    else
      throw ConfigError(k, "expected double or float");
  };
  keys[prefix + "mirror"] = [&t](auto& k, auto& v) {
    if (v == "mirrored")
      t.mirror = MirrorConvention::kMirrored;
    else if (v == "negated")
      t.mirror = MirrorConvention::kNegated;
    else
      throw ConfigError(k, "expected mirrored or negated");
  };
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

void write_train(std::ostream& o, const std::string& prefix, const TrainConfig& t, bool rates_only) {
  if (t.eta1) o << prefix << "eta1 = " << format_g17(*t.eta1) << '\n';
  if (t.lambda1) o << prefix << "lambda1 = " << format_g17(*t.lambda1) << '\n';
  if (t.eta2) o << prefix << "eta2 = " << format_g17(*t.eta2) << '\n';
  o << prefix << "eta2_inner = " << format_g17(t.eta2_inner) << '\n';
  o << prefix << "train_inner_final = " << bool_text(t.train_inner_final) << '\n';
  o << prefix << "target = " << (t.target == OutputTarget::kHardLabel ? "hard_label" : "logit_mse") << '\n';
  if (rates_only) return;
  o << prefix << "B1 = " << t.B1 << '\n';
  o << prefix << "B2 = " << t.B2 << '\n';
  o << prefix << "T1 = " << t.T1 << '\n';
  o << prefix << "T2 = " << t.T2 << '\n';
  o << prefix << "epsilon = " << format_g17(t.epsilon) << '\n';
  o << prefix << "tau_g = " << format_g17(t.tau_g) << '\n';
  o << prefix << "delta = " << format_g17(t.delta) << '\n';
  o << prefix << "exact_mode = " << bool_text(t.exact_mode) << '\n';
  o << prefix << "analytic_stage1 = " << bool_text(t.analytic_stage1) << '\n';
  o << prefix << "canonical = " << bool_text(t.canonical) << '\n';
  o << prefix << "eval_size = " << t.eval_size << '\n';
  o << prefix << "eval_every = " << t.eval_every << '\n';
  o << prefix << "precision = " << (t.precision == Precision::kDouble ? "double" : "float") << '\n';
  o << prefix << "mirror = " << (t.mirror == MirrorConvention::kMirrored ? "mirrored" : "negated") << '\n';
}

}  // namespace

ParityTask ExperimentConfig::task() const {
  if (!support.empty()) {
    ParityTask t(d, support);
    if (t.k() != k) throw ConfigError("task.support", "size differs from task.k");
    return t;
  }
  return ParityTask::prefix(d, k);
}

std::string to_string(ExperimentKind k) {
  for (const auto& [name, v] : kind_names())
    if (v == k) return name;
  return "unknown";
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  Pending pending;
  std::map<std::string, Setter> keys;
  keys["kind"] = [&c](auto& k, auto& v) {
    auto it = kind_names().find(v);
    if (it == kind_names().end()) throw ConfigError(k, "unknown experiment kind '" + v + "'");
    c.kind = it->second;
  };
  keys["run_id"] = [&c](auto& k, auto& v) {
    for (char ch : v)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.'))
        throw ConfigError(k, "run id may contain only letters, digits, '_', '-', '.'");
    c.run_id = v;
  };
  keys["seed"] = [&c](auto& k, auto& v) { c.seed = parse_number<std::uint64_t>(k, v); };
  keys["out"] = [&c](auto&, auto& v) { c.out_dir = v; };
  keys["task.d"] = [&c](auto& k, auto& v) { c.d = parse_number<int>(k, v); };
  keys["task.k"] = [&c](auto& k, auto& v) { c.k = parse_number<int>(k, v); };
  keys["task.support"] = [&c](auto& k, auto& v) { c.support = parse_int_list(k, v); };
  keys["width.teacher"] = [&c](auto& k, auto& v) { c.m_t = parse_number<int>(k, v); };
  keys["width.student"] = [&c](auto& k, auto& v) { c.m_s = parse_number<int>(k, v); };
  add_train_keys(keys, "teacher.", c.teacher, &pending.teacher_b1_bound, false);
  add_train_keys(keys, "student.", c.student, &pending.student_b1_bound, false);
  add_train_keys(keys, "oneshot.", c.oneshot, nullptr, true);
  keys["diagnostics.projection_rows"] = [&c](auto& k, auto& v) { c.diagnostics.projection_rows = parse_number<int>(k, v); };
  keys["diagnostics.sample_size"] = [&c](auto& k, auto& v) { c.diagnostics.sample_size = parse_number<std::size_t>(k, v); };
  keys["pcfg.n_samples"] = [&c](auto& k, auto& v) { c.pcfg.n_samples = parse_number<std::size_t>(k, v); };
  keys["pcfg.corpus_sentences"] = [&c](auto& k, auto& v) { c.pcfg.corpus_sentences = parse_number<std::size_t>(k, v); };
  keys["pcfg.masked_sentences"] = [&c](auto& k, auto& v) { c.pcfg.masked_sentences = parse_number<std::size_t>(k, v); };
  keys["pcfg.mask_fraction"] = [&c](auto& k, auto& v) { c.pcfg.mask_fraction = parse_number<double>(k, v); };

  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    auto it = keys.find(key);
    if (it == keys.end()) {
      if (key.rfind("oneshot.", 0) == 0 && keys.count("student." + key.substr(8)))
        throw ConfigError(key, "one-shot budgets are shared with the student; set student." + key.substr(8));
      throw ConfigError(key, "unknown key");
    }
    if (seen.count(key)) throw ConfigError(key, "repeated key (first on line " + std::to_string(seen[key]) + ")");
    seen[key] = lineno;
    if (value.empty()) throw ConfigError(key, "missing value");
    it->second(key, value);
  }
  if (!seen.count("kind")) throw ConfigError("kind", "required");
  if (c.uses_task()) {
    for (const char* req : {"task.d", "task.k", "width.teacher"})
      if (!seen.count(req)) throw ConfigError(req, "required for kind " + to_string(c.kind));
    if (c.kind != ExperimentKind::kTeacher && !seen.count("width.student"))
      throw ConfigError("width.student", "required for kind " + to_string(c.kind));
    try {
      (void)c.task();
    } catch (const ArgumentError& e) {
      throw ConfigError(c.support.empty() ? "task" : "task.support", e.what());
    }
    if (pending.teacher_b1_bound)
      c.teacher.B1 = static_cast<std::size_t>(std::ceil(teacher_batch_bound(c.teacher.tau_g, c.m_t, c.d, c.teacher.delta)));
    if (pending.student_b1_bound)
      c.student.B1 = static_cast<std::size_t>(std::ceil(student_batch_bound(c.k, c.d, c.m_t, c.student.delta)));
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("config", e.what());
  }
  return parse_config(text);
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "kind = " << to_string(c.kind) << '\n';
  o << "run_id = " << c.run_id << '\n';
  o << "seed = " << c.seed << '\n';
  if (c.kind == ExperimentKind::kPcfg) {
    o << "pcfg.n_samples = " << c.pcfg.n_samples << '\n';
    o << "pcfg.corpus_sentences = " << c.pcfg.corpus_sentences << '\n';
    o << "pcfg.masked_sentences = " << c.pcfg.masked_sentences << '\n';
    o << "pcfg.mask_fraction = " << format_g17(c.pcfg.mask_fraction) << '\n';
    return o.str();
  }
  o << "task.d = " << c.d << '\n';
  o << "task.k = " << c.k << '\n';
  o << "task.support = ";
  auto S = c.task().support();
  for (std::size_t i = 0; i < S.size(); ++i) o << (i ? "," : "") << S[i];
  o << '\n';
  o << "width.teacher = " << c.m_t << '\n';
  if (c.kind != ExperimentKind::kTeacher) o << "width.student = " << c.m_s << '\n';
  write_train(o, "teacher.", c.teacher, false);
  write_train(o, "student.", c.student, false);
  write_train(o, "oneshot.", c.oneshot, true);
  o << "diagnostics.projection_rows = " << c.diagnostics.projection_rows << '\n';
  o << "diagnostics.sample_size = " << c.diagnostics.sample_size << '\n';
  return o.str();
}

TrainConfig oneshot_train_config(const ExperimentConfig& c) {
  TrainConfig t = c.student;
  t.eta1 = c.oneshot.eta1;
  t.lambda1 = c.oneshot.lambda1;
  t.eta2 = c.oneshot.eta2;
  t.eta2_inner = c.oneshot.eta2_inner;
  t.train_inner_final = c.oneshot.train_inner_final;
  t.target = c.oneshot.target;
  return t;
}

std::vector<Finding> validate(const ExperimentConfig& c) {
  std::vector<Finding> out;
  if (c.kind == ExperimentKind::kPcfg) {
    if (c.pcfg.n_samples < 100) out.push_back({Severity::kError, "pcfg.n_samples", "must be >= 100"});
    if (!(c.pcfg.mask_fraction > 0.0 && c.pcfg.mask_fraction < 1.0))
      out.push_back({Severity::kError, "pcfg.mask_fraction", "must lie in (0, 1)"});
    if (c.pcfg.corpus_sentences > c.pcfg.n_samples || c.pcfg.masked_sentences > c.pcfg.n_samples)
      out.push_back({Severity::kError, "pcfg", "written sentence counts cannot exceed n_samples"});
    return out;
  }
  ParityTask task = c.task();
  struct Arm {
    const char* section;
    Role role;
    TrainConfig cfg;
    int m;
  };
  std::vector<Arm> arms{{"teacher", Role::kTeacher, c.teacher, c.m_t}};
  const auto kind = c.kind;
  if (kind == ExperimentKind::kCurriculum || kind == ExperimentKind::kCompare)
    arms.push_back({"student", Role::kCurriculumStudent, c.student, c.m_s});
  if (kind == ExperimentKind::kOneShot || kind == ExperimentKind::kCompare)
    arms.push_back({"oneshot", Role::kOneShotStudent, oneshot_train_config(c), c.m_s});
  if (kind == ExperimentKind::kDiagnostics) {
    if (c.diagnostics.projection_rows < 1)
      out.push_back({Severity::kError, "diagnostics.projection_rows", "must be >= 1"});
    if (c.diagnostics.sample_size == 0 && c.d > kMaxEnumerationDim)
      out.push_back({Severity::kError, "diagnostics.sample_size",
                     "capacity: exact diagnostics need d <= " + std::to_string(kMaxEnumerationDim)});
    if (c.m_s < 2 || c.m_s % 2) out.push_back({Severity::kError, "width.student", "must be even and >= 2"});
  }
  for (const auto& arm : arms) {
    const std::string p = std::string(arm.section) + ".";
    // One-shot budgets live under student.
    const std::string bp = arm.role == Role::kOneShotStudent ? "student." : p;
    TrainConfig relaxed = arm.cfg;
    relaxed.canonical = false;
    try {
      (void)resolve_config(arm.role, relaxed, task, arm.m, c.m_t);
    } catch (const ConfigError& e) {
      out.push_back({Severity::kError, (e.field() == "width" || e.field() == "m_t" ? "width." : p) + e.field(), e.what()});
      continue;
    } catch (const CapacityError& e) {
      std::string field = arm.cfg.exact_mode && task.d() > kMaxEnumerationDim ? bp + "exact_mode" : p + "analytic_stage1";
      out.push_back({Severity::kError, field, std::string("capacity: ") + e.what()});
      continue;
    }
    if (arm.cfg.exact_mode && arm.cfg.analytic_stage1)
      out.push_back({Severity::kWarning, p + "analytic_stage1", "overrides exact_mode for stage 1"});
    for (const auto& issue : canonical_issues(arm.role, arm.cfg, task, arm.m, c.m_t)) {
      const bool budget = issue.field == "B1" || issue.field == "T1";
      out.push_back({arm.cfg.canonical ? Severity::kError : Severity::kWarning, (budget ? bp : p) + issue.field,
                     issue.message});
    }
  }
  return out;
}

}  // namespace pdistill
