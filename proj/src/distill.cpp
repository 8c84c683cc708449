#include "pdistill/distill.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "pdistill/boolean_fourier.hpp"
#include "pdistill/errors.hpp"
#include "pdistill/parallel.hpp"
#include "pdistill/textio.hpp"

namespace pdistill {

namespace {

double zeta_any(int d, int i) {
  return majority_zeta(d, i, d <= kMaxEnumerationDim ? ZetaMode::kEnumerate : ZetaMode::kCombinatorial);
}

bool differs(double a, double b) { return std::abs(a - b) > 1e-12 * std::max(std::abs(a), std::abs(b)); }

double role_eta1(Role role, const ParityTask& task, int m, int m_teacher) {
  if (role == Role::kCurriculumStudent) return student_eta1(m_teacher);
  return teacher_eta1(m, task.k(), task.d());
}

}  // namespace

Stage1Estimator stage1_estimator(const TrainConfig& cfg) {
  if (cfg.analytic_stage1) return Stage1Estimator::kAnalytic;
  return cfg.exact_mode ? Stage1Estimator::kEnumerated : Stage1Estimator::kSampled;
}

double teacher_eta1(int m, int k, int d) {
  double z = std::abs(zeta_any(d, k - 1));
  if (z == 0.0) throw ArgumentError("zeta_{k-1} vanishes for this (d, k)");
  return m / (k * z);
}

double student_eta1(int m_t) { return std::sqrt(static_cast<double>(m_t)); }

double canonical_eta2(int k, int d, int m, std::size_t T2) {
  if (T2 < 2) throw ConfigError("T2", "the default eta2 needs T2 >= 2");
  return 4.0 * std::pow(k, 1.5) / (static_cast<double>(d) * m * static_cast<double>(T2 - 1));
}

double student_batch_bound(int k, int d, int m_t, double delta) {
  double kd = static_cast<double>(k) * d;
  return kd * kd * std::log(static_cast<double>(m_t) * d / delta);
}

double teacher_batch_bound(double tau_g, int m, int d, double delta) {
  return std::log(static_cast<double>(m) * d / delta) / (tau_g * tau_g);
}

std::vector<ConfigIssue> canonical_issues(Role role, const TrainConfig& cfg, const ParityTask& task, int m,
                                               int m_teacher) {
  std::vector<ConfigIssue> out;
  if (cfg.T1 != 1) out.push_back({"T1", "canonical mode uses a single stage-1 step"});
  double eta1 = role_eta1(role, task, m, m_teacher);
  if (cfg.eta1 && differs(*cfg.eta1, eta1))
    out.push_back({"eta1", "expected " + format_g17(eta1) + " for this role"});
  double e1 = cfg.eta1.value_or(eta1);
  if (cfg.lambda1 && differs(*cfg.lambda1, 1.0 / (2.0 * e1)))
    out.push_back({"lambda1", "expected 1/(2 eta1) = " + format_g17(1.0 / (2.0 * e1))});
  if (stage1_estimator(cfg) == Stage1Estimator::kSampled) {
    double bound = role == Role::kTeacher ? teacher_batch_bound(cfg.tau_g, m, task.d(), cfg.delta)
                                          : student_batch_bound(task.k(), task.d(), m_teacher, cfg.delta);
    if (static_cast<double>(cfg.B1) < bound)
      out.push_back({"B1", "below the stage-1 batch bound " + format_fixed(std::ceil(bound), 0)});
  }
  return out;
}

TrainConfig resolve_config(Role role, const TrainConfig& cfg, const ParityTask& task, int m, int m_teacher) {
  if (m < 2 || m % 2 != 0) throw ConfigError("width", "hidden width must be even and >= 2");
  if (role != Role::kTeacher && (m_teacher < 2 || m_teacher % 2 != 0))
    throw ConfigError("m_t", "teacher width must be even and >= 2");
  if (cfg.B1 < 1) throw ConfigError("B1", "must be >= 1");
  if (cfg.B2 < 1) throw ConfigError("B2", "must be >= 1");
  if (cfg.eval_size < 1) throw ConfigError("eval_size", "must be >= 1");
  if (cfg.delta <= 0.0 || cfg.delta >= 1.0) throw ConfigError("delta", "must lie in (0, 1)");
  if (cfg.tau_g <= 0.0) throw ConfigError("tau_g", "must be positive");
  if (cfg.exact_mode && task.d() > kMaxEnumerationDim)
    throw CapacityError("exact_mode needs d <= " + std::to_string(kMaxEnumerationDim));
  if (cfg.analytic_stage1 && role != Role::kTeacher)
    throw ConfigError("analytic_stage1", "closed-form stage 1 exists only for the teacher");
  if (cfg.analytic_stage1 && cfg.mirror != MirrorConvention::kMirrored)
    throw ConfigError("analytic_stage1", "closed-form stage 1 needs the mirrored init");
  if (cfg.analytic_stage1 && task.d() > kMaxCombinatorialDim)
    throw CapacityError("closed-form stage 1 needs d <= " + std::to_string(kMaxCombinatorialDim));
  if (cfg.canonical) {
    auto issues = canonical_issues(role, cfg, task, m, m_teacher);
    if (!issues.empty()) throw ConfigError(issues.front().field, issues.front().message);
  }
  TrainConfig r = cfg;
  if (!r.eta1) r.eta1 = role_eta1(role, task, m, m_teacher);
  if (!r.lambda1) r.lambda1 = 1.0 / (2.0 * *r.eta1);
  if (!r.eta2) r.eta2 = canonical_eta2(task.k(), task.d(), m, r.T2);
  if (*r.eta1 <= 0.0) throw ConfigError("eta1", "must be positive");
  if (*r.eta2 <= 0.0) throw ConfigError("eta2", "must be positive");
  if (*r.lambda1 < 0.0) throw ConfigError("lambda1", "must be nonnegative");
  if (r.train_inner_final && r.eta2_inner <= 0.0) throw ConfigError("eta2_inner", "must be positive");
  if (r.eval_every == 0) r.eval_every = std::max<std::size_t>(1, r.T2 / 20);
  return r;
}

// ---- trace ----

void TrainingTrace::append(TraceRecord r) {
  if (!records_.empty() && r.step <= records_.back().step)
    throw std::logic_error("trace steps must increase strictly");
  records_.push_back(std::move(r));
}

void TrainingTrace::write_csv_header(std::ostream& out) {
  out << "run_id,method,stage,step,samples_consumed,eval_loss,eval_accuracy\n";
}

void TrainingTrace::write_csv_rows(std::ostream& out, const std::string& run_id, const std::string& method) const {
  for (const auto& r : records_)
    out << run_id << ',' << method << ',' << r.stage << ',' << r.step << ',' << r.samples_consumed << ','
        << format_g17(r.eval_loss) << ',' << format_g17(r.eval_accuracy) << '\n';
}

// ---- projection ----

SymmetricProjection::SymmetricProjection(RowMat<double> A) : A_(std::move(A)) {
  const auto m_t = A_.cols();
  if (A_.rows() < 1 || m_t < 2 || m_t % 2 != 0) throw ArgumentError("projection must be m_s x m_t with m_t even");
  const double mag = 1.0 / static_cast<double>(m_t);
  const auto h = m_t / 2;
  for (Eigen::Index l = 0; l < A_.rows(); ++l)
    for (Eigen::Index i = 0; i < h; ++i) {
      if (std::abs(A_(l, i)) != mag) throw ArgumentError("projection entries must be +-1/m_t");
      if (A_(l, i + h) != -A_(l, i)) throw ArgumentError("projection must satisfy A[l,i+m_t/2] = -A[l,i]");
    }
}

SymmetricProjection sample_projection(int m_t, int m_s, Rng& rng) {
  if (m_t < 2 || m_t % 2 != 0) throw ArgumentError("sample_projection needs an even m_t");
  if (m_s < 1) throw ArgumentError("sample_projection needs m_s >= 1");
  RowMat<double> A(m_s, m_t);
  const int h = m_t / 2;
  for (int l = 0; l < m_s; ++l)
    for (int i = 0; i < h; ++i) {
      A(l, i) = rng.sign() / m_t;
      A(l, i + h) = -A(l, i);
    }
  return SymmetricProjection(std::move(A));
}

ProjectedHidden::ProjectedHidden(const TwoLayerMlp& teacher, const SymmetricProjection& A)
    : m_s_(A.m_s()), paired_(has_symmetric_pairing(teacher)) {
  if (A.m_t() != teacher.width()) throw ArgumentError("projection columns must equal the teacher width");
  if (paired_) {
    const int h = teacher.width() / 2;
    net_d_ = {teacher.W.topRows(h), teacher.b.head(h), teacher.a.head(h)};
    A_d_ = A.matrix().leftCols(h);
  } else {
    net_d_ = teacher;
    A_d_ = A.matrix();
  }
  net_f_ = net_d_.cast<float>();
  A_f_ = A_d_.cast<float>();
}

template <class S>
RowMat<S> ProjectedHidden::evaluate(const RowMat<S>& X) const {
  const BasicMlp<S>* net;
  const RowMat<S>* A;
  if constexpr (std::is_same_v<S, float>) {
    net = &net_f_;
    A = &A_f_;
  } else {
    net = &net_d_;
    A = &A_d_;
  }
  if (X.cols() != net->input_dim()) throw ArgumentError("input dimension mismatch");
  RowMat<S> H;
  if (paired_) {
    // phi_b(t) = relu(t + b) - relu(-t + b), exactly odd in t.
    RowMat<S> T(X.rows(), net->W.rows());
    T.noalias() = X * net->W.transpose();
    RowMat<S> plus = T;
    plus.rowwise() += net->b.transpose();
    RowMat<S> minus = -T;
    minus.rowwise() += net->b.transpose();
    H = plus.cwiseMax(S(0)) - minus.cwiseMax(S(0));
  } else {
    H = hidden_batch(*net, X);
  }
  RowMat<S> G(X.rows(), m_s_);
  G.noalias() = H * A->transpose();
  return G;
}

template RowMat<double> ProjectedHidden::evaluate<double>(const RowMat<double>&) const;
template RowMat<float> ProjectedHidden::evaluate<float>(const RowMat<float>&) const;

Eigen::VectorXd ProjectedHidden::operator()(std::span<const double> x) const {
  RowMat<double> X(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) X(0, static_cast<Eigen::Index>(j)) = x[j];
  return evaluate<double>(X).row(0).transpose();
}

ProjectedHidden projected_teacher_hidden(const TwoLayerMlp& teacher, const SymmetricProjection& A) {
  return ProjectedHidden(teacher, A);
}

// ---- stage-1 gradients ----

namespace {

template <class S, class Fn>
RowMat<double> chunked_mean(const ParityTask& task, Stage1Estimator est, std::size_t B, const Rng& base, Fn&& fn) {
  if (est == Stage1Estimator::kSampled && B < 1) throw ArgumentError("batch size must be >= 1");
  const std::uint64_t n = est == Stage1Estimator::kEnumerated ? cube_size(task.d()) : B;
  const std::size_t chunks = static_cast<std::size_t>((n + kChunk - 1) / kChunk);
  RowMat<double> sum = map_reduce_chunks<RowMat<double>>(chunks, [&](std::size_t c) {
    const std::uint64_t first = c * kChunk;
    const std::size_t count = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, n - first));
    if (est == Stage1Estimator::kEnumerated) return fn(population_chunk<S>(task, first, count));
    Rng r = base.split(c);
    return fn(sample_batch_as<S>(task, count, r));
  });
  return sum / static_cast<double>(n);
}

RowMat<double> analytic_teacher_gradient(const TwoLayerMlp& model, const ParityTask& task) {
  if (!has_mirrored_pairing(model)) throw ArgumentError("closed-form stage 1 needs a mirrored symmetric init");
  if (!(model.W.array().abs() == 1.0).all()) throw ArgumentError("closed-form stage 1 needs +-1 inner weights");
  const int d = task.d(), k = task.k();
  std::map<std::pair<int, double>, double> cache;
  auto h = [&](int t, double b) {
    auto key = std::make_pair(t, b);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, threshold_coefficient(d, t, b)).first;
    return it->second;
  };
  // f == 0, so the hinge is active everywhere and
  // E[-y a_i 1{w.x+b>=0} x_j] = -a_i chi_{S^j}(w_i) E_z[1{sum z + b >= 0} chi_{S^j}(z)].
  RowMat<double> G(model.width(), d);
  for (int i = 0; i < model.width(); ++i) {
    double p = 1.0;
    for (int j : task.support()) p *= model.W(i, j - 1);
    for (int j = 0; j < d; ++j) {
      int t = task.in_support(j + 1) ? k - 1 : k + 1;
      G(i, j) = -model.a(i) * p * model.W(i, j) * h(t, model.b(i));
    }
  }
  return G;
}

template <class S>
struct TeacherView {
  const TwoLayerMlp* teacher = nullptr;
  BasicMlp<S> net;
  explicit TeacherView(const TwoLayerMlp* t) : teacher(t) {
    if (t) net = t->template cast<S>();
  }
  // Training target for X: true labels without a teacher.
  Vec<S> target(const BasicBatch<S>& batch, OutputTarget kind) const {
    if (!teacher) return batch.y;
    Vec<S> f = forward_batch(net, batch.x);
    if (kind == OutputTarget::kLogitMse) return f;
    return (f.array() >= S(0)).select(Vec<S>::Ones(f.size()), -Vec<S>::Ones(f.size()));
  }
};

template <class S>
RowMat<double> output_inner_gradient(const TwoLayerMlp& model, const TeacherView<S>& tv, OutputTarget kind,
                                     const ParityTask& task, Stage1Estimator est, std::size_t B, const Rng& base) {
  if (est == Stage1Estimator::kAnalytic) {
    if (tv.teacher) throw ArgumentError("closed-form stage 1 exists only for teacher training");
    return analytic_teacher_gradient(model, task);
  }
  BasicMlp<S> m = model.cast<S>();
  return chunked_mean<S>(task, est, B, base, [&](const BasicBatch<S>& batch) -> RowMat<double> {
    Vec<S> t = tv.target(batch, kind);
    if (tv.teacher && kind == OutputTarget::kLogitMse)
      return logit_mse_gradient_sum(m, batch.x, t).W.template cast<double>();
    return hinge_gradient_sum(m, batch.x, t).W.template cast<double>();
  });
}

template <class S>
RowMat<double> projected_gradient(const TwoLayerMlp& student, const ProjectedHidden& g, LossKind kind,
                                  const ParityTask& task, Stage1Estimator est, std::size_t B, const Rng& base) {
  if (est == Stage1Estimator::kAnalytic) throw ArgumentError("closed-form stage 1 exists only for the teacher");
  if (g.output_dim() != student.width()) throw ArgumentError("projection rows must equal the student width");
  BasicMlp<S> m = student.cast<S>();
  return chunked_mean<S>(task, est, B, base, [&](const BasicBatch<S>& batch) -> RowMat<double> {
    RowMat<S> G = g.evaluate<S>(batch.x);
    if (kind == LossKind::kProjectedMse) return projected_mse_gradient_sum(m, batch.x, G).template cast<double>();
    return distill_gradient_sum(m, batch.x, G).template cast<double>();
  });
}

}  // namespace

RowMat<double> teacher_stage1_gradient(const TwoLayerMlp& model, const ParityTask& task, Stage1Estimator est,
                                       std::size_t B, Rng& rng, Precision p) {
  if (model.input_dim() != task.d()) throw ArgumentError("model and task dimensions differ");
  if (p == Precision::kFloat)
    return output_inner_gradient<float>(model, TeacherView<float>(nullptr), OutputTarget::kHardLabel, task, est, B, rng);
  return output_inner_gradient<double>(model, TeacherView<double>(nullptr), OutputTarget::kHardLabel, task, est, B, rng);
}

RowMat<double> distill_stage1_gradient(const TwoLayerMlp& student, const ProjectedHidden& g, const ParityTask& task,
                                       Stage1Estimator est, std::size_t B, Rng& rng, Precision p) {
  if (student.input_dim() != task.d()) throw ArgumentError("model and task dimensions differ");
  if (p == Precision::kFloat)
    return projected_gradient<float>(student, g, LossKind::kProjectedCorrelation, task, est, B, rng);
  return projected_gradient<double>(student, g, LossKind::kProjectedCorrelation, task, est, B, rng);
}

// ---- schedules ----

void CurriculumSchedule::validate() const {
  if (stages.empty()) throw ArgumentError("schedule has no stages");
  std::size_t full = 0;
  for (const auto& s : stages) {
    if (s.loss == LossKind::kFullOutput) {
      ++full;
    } else if (s.layer != 1) {
      throw ArgumentError("a two-layer student has only layer 1 below the output");
    }
  }
  if (full != 1 || stages.back().loss != LossKind::kFullOutput)
    throw ArgumentError("schedule needs exactly one full-output stage, placed last");
}

CurriculumSchedule curriculum_schedule(std::size_t T1, std::size_t T2) {
  return {{{1, T1, LossKind::kProjectedCorrelation}, {0, T2, LossKind::kFullOutput}}};
}

namespace {

using Clock = std::chrono::steady_clock;

template <class S>
struct EvalSet {
  RowMat<S> X;
  Vec<S> y;
};

template <class S>
EvalSet<S> make_eval_set(const ParityTask& task, const TrainConfig& cfg, Rng rng) {
  BasicBatch<S> b = cfg.exact_mode ? population_chunk<S>(task, 0, cube_size(task.d()))
                                   : sample_batch_as<S>(task, cfg.eval_size, rng);
  return {std::move(b.x), std::move(b.y)};
}

struct LossAcc {
  double loss = 0.0;
  double hits = 0.0;
  LossAcc& operator+=(const LossAcc& o) {
    loss += o.loss;
    hits += o.hits;
    return *this;
  }
};

template <class S>
std::pair<double, double> evaluate(const BasicMlp<S>& m, const EvalSet<S>& e) {
  const auto n = static_cast<std::size_t>(e.X.rows());
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  LossAcc total = map_reduce_chunks<LossAcc>(chunks, [&](std::size_t c) {
    const auto first = static_cast<Eigen::Index>(c * kChunk);
    const auto count = static_cast<Eigen::Index>(std::min(kChunk, n - c * kChunk));
    RowMat<S> X = e.X.middleRows(first, count);
    Vec<S> f = forward_batch(m, X);
    auto y = e.y.segment(first, count).array();
    LossAcc acc;
    acc.loss = (S(1) - f.array() * y).max(S(0)).template cast<double>().sum();
    acc.hits = ((f.array() >= S(0)) == (y > S(0))).template cast<double>().sum();
    return acc;
  });
  return {total.loss / static_cast<double>(n), total.hits / static_cast<double>(n)};
}

void stage1_update(TwoLayerMlp& model, const RowMat<double>& G, double eta1, double lambda1) {
  // w <- w - eta1 (grad + 2 lambda1 w); the decay factor is 0 when lambda1 = 1/(2 eta1).
  double kappa = 1.0 - 2.0 * eta1 * lambda1;
  if (std::abs(kappa) <= 4.0 * std::numeric_limits<double>::epsilon()) kappa = 0.0;
  model.W = kappa * model.W - eta1 * G;
  if (kappa == 0.0) {
    double resid = (model.W + eta1 * G).cwiseAbs().maxCoeff();
    if (resid > 1e-12 * std::max(1.0, (eta1 * G).cwiseAbs().maxCoeff()))
      throw std::logic_error("stage-1 assignment identity violated");
  }
}

template <class S>
TrainResult run_engine(TwoLayerMlp model, const TwoLayerMlp* teacher, const std::optional<SymmetricProjection>& A,
                       const std::vector<ScheduleStage>& stages, const ParityTask& task, const TrainConfig& r,
                       Rng& rng) {
  const auto start = Clock::now();
  auto wall = [&] { return std::chrono::duration<double>(Clock::now() - start).count(); };
  const Stage1Estimator est = stage1_estimator(r);
  const EvalSet<S> eval = make_eval_set<S>(task, r, rng.split(stream::kEval));
  const TeacherView<S> tv(teacher);
  std::optional<ProjectedHidden> g;
  if (A) g.emplace(*teacher, *A);

  TrainingTrace trace;
  std::size_t step = 0;
  std::size_t layer_iter = 0;
  const Rng stage1_rng = rng.split(stream::kStage1);
  auto record = [&](const char* stage, const BasicMlp<S>& m) {
    auto [loss, acc] = evaluate(m, eval);
    trace.append({stage, step, trace.samples_consumed(), loss, acc, wall()});
    return loss;
  };

  TrainResult result{model, {}, A, model};
  for (const auto& stage : stages) {
    if (stage.iterations == 0) continue;
    if (stage.loss != LossKind::kFullOutput) {
      for (std::size_t t = 0; t < stage.iterations; ++t) {
        Rng base = stage1_rng.split(++layer_iter);
        RowMat<double> G;
        if (stage.loss == LossKind::kOutputInner) {
          G = output_inner_gradient<S>(model, tv, r.target, task, est, r.B1, base);
        } else {
          if (!g) throw ArgumentError("projected stages need a teacher");
          G = projected_gradient<S>(model, *g, stage.loss, task, est, r.B1, base);
        }
        stage1_update(model, G, *r.eta1, *r.lambda1);
        if (est == Stage1Estimator::kSampled) trace.add_samples(r.B1);
        if (est == Stage1Estimator::kEnumerated) trace.add_samples(cube_size(task.d()));
        ++step;
        record("stage1", model.cast<S>());
      }
      result.after_stage1 = model;
      continue;
    }
    // Output stage: SGD on a (and W when train_inner_final), biases frozen.
    BasicMlp<S> m = model.cast<S>();
    BasicMlp<S> best = m;
    double best_loss = std::numeric_limits<double>::infinity();
    Rng data = rng.split(stream::kStage2);
    const S lr_a = static_cast<S>(*r.eta2 / static_cast<double>(r.B2));
    const S lr_w = static_cast<S>(r.eta2_inner / static_cast<double>(r.B2));
    for (std::size_t t = 1; t <= stage.iterations; ++t) {
      BasicBatch<S> batch = sample_batch_as<S>(task, r.B2, data);
      Vec<S> target = tv.target(batch, r.target);
      Gradients<S> grad = (teacher && r.target == OutputTarget::kLogitMse)
                              ? logit_mse_gradient_sum(m, batch.x, target, r.train_inner_final)
                              : hinge_gradient_sum(m, batch.x, target, r.train_inner_final);
      m.a -= lr_a * grad.a;
      if (r.train_inner_final) m.W -= lr_w * grad.W;
      trace.add_samples(r.B2);
      ++step;
      if (t % r.eval_every == 0 || t == stage.iterations) {
        double loss = record("stage2", m);
        if (loss < best_loss) {
          best_loss = loss;
          best = m;
        }
      }
    }
    model = best.template cast<double>();
  }
  result.model = std::move(model);
  result.trace = std::move(trace);
  return result;
}

TrainResult dispatch(TwoLayerMlp model, const TwoLayerMlp* teacher, const std::optional<SymmetricProjection>& A,
                     const std::vector<ScheduleStage>& stages, const ParityTask& task, const TrainConfig& r,
                     Rng& rng) {
  if (model.input_dim() != task.d()) throw ArgumentError("model and task dimensions differ");
  if (teacher && teacher->input_dim() != task.d()) throw ArgumentError("teacher and task dimensions differ");
  if (r.precision == Precision::kFloat) return run_engine<float>(std::move(model), teacher, A, stages, task, r, rng);
  return run_engine<double>(std::move(model), teacher, A, stages, task, r, rng);
}

}  // namespace

TrainResult train_teacher(const ParityTask& task, int m_t, const TrainConfig& cfg, Rng& rng) {
  TrainConfig r = resolve_config(Role::kTeacher, cfg, task, m_t);
  Rng init = rng.split(stream::kInit);
  TwoLayerMlp model = symmetric_init(m_t, task.d(), task.k(), init, r.mirror);
  std::vector<ScheduleStage> stages{{1, r.T1, LossKind::kOutputInner}, {0, r.T2, LossKind::kFullOutput}};
  return dispatch(std::move(model), nullptr, std::nullopt, stages, task, r, rng);
}

TrainResult run_schedule(TwoLayerMlp student, const TwoLayerMlp& teacher, const CurriculumSchedule& schedule,
                         const ParityTask& task, const TrainConfig& cfg, Rng& rng) {
  schedule.validate();
  TrainConfig r = resolve_config(Role::kCurriculumStudent, cfg, task, student.width(), teacher.width());
  Rng proj = rng.split(stream::kProjection);
  std::optional<SymmetricProjection> A = sample_projection(teacher.width(), student.width(), proj);
  return dispatch(std::move(student), &teacher, A, schedule.stages, task, r, rng);
}

TrainResult train_student_curriculum(const ParityTask& task, const TwoLayerMlp& teacher, int m_s,
                                     const TrainConfig& cfg, Rng& rng) {
  TrainConfig r = resolve_config(Role::kCurriculumStudent, cfg, task, m_s, teacher.width());
  Rng init = rng.split(stream::kInit);
  TwoLayerMlp student = symmetric_init(m_s, task.d(), task.k(), init, r.mirror);
  return run_schedule(std::move(student), teacher, curriculum_schedule(r.T1, r.T2), task, r, rng);
}

TrainResult train_student_oneshot(const ParityTask& task, const TwoLayerMlp& teacher, int m_s,
                                  const TrainConfig& cfg, Rng& rng) {
  TrainConfig r = resolve_config(Role::kOneShotStudent, cfg, task, m_s, teacher.width());
  Rng init = rng.split(stream::kInit);
  TwoLayerMlp student = symmetric_init(m_s, task.d(), task.k(), init, r.mirror);
  std::vector<ScheduleStage> stages{{1, r.T1, LossKind::kOutputInner}, {0, r.T2, LossKind::kFullOutput}};
  return dispatch(std::move(student), &teacher, std::nullopt, stages, task, r, rng);
}

}  // namespace pdistill
