#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdistill/mlp.hpp"
#include "pdistill/parity_data.hpp"
#include "pdistill/rng.hpp"

namespace pdistill {

enum class Stage1Estimator {
  kSampled,     // B1 fresh samples per step
  kEnumerated,  // full cube, d <= 24
  kAnalytic     // closed form, teacher at mirrored init only
};

// Target for full-output stages and the one-shot baseline.
enum class OutputTarget {
  kHardLabel,  // hinge on sign(f_t(x))
  kLogitMse    // (f_s(x) - f_t(x))^2
};

enum class Precision { kDouble, kFloat };

struct TrainConfig {
  std::optional<double> eta1;     // unset: canonical formula for the role
  std::optional<double> lambda1;  // unset: 1 / (2 eta1)
  std::optional<double> eta2;     // unset: 4 k^1.5 / (d m (T2 - 1))
  double eta2_inner = 0.0;        // inner rate when train_inner_final
  bool train_inner_final = false;
  std::size_t B1 = 1;
  std::size_t B2 = 1;
  std::size_t T1 = 1;
  std::size_t T2 = 2;
  double epsilon = 0.1;
  double tau_g = 0.01;
  double delta = 0.1;
  std::uint64_t seed = 0;
  bool exact_mode = false;
  bool analytic_stage1 = false;
  bool canonical = true;
  std::size_t eval_size = 4096;
  std::size_t eval_every = 0;  // 0: T2 / 20, at least 1
  OutputTarget target = OutputTarget::kHardLabel;
  Precision precision = Precision::kDouble;
  MirrorConvention mirror = MirrorConvention::kMirrored;
};

enum class Role { kTeacher, kCurriculumStudent, kOneShotStudent };

Stage1Estimator stage1_estimator(const TrainConfig& cfg);

double teacher_eta1(int m, int k, int d);
double student_eta1(int m_t);
double canonical_eta2(int k, int d, int m, std::size_t T2);
// (k d)^2 ln(m_t d / delta)
double student_batch_bound(int k, int d, int m_t, double delta);
// tau_g^-2 ln(m d / delta)
double teacher_batch_bound(double tau_g, int m, int d, double delta);

struct ConfigIssue {
  std::string field;
  std::string message;
};

// Departures from the canonical rate and batch relations for this role.
std::vector<ConfigIssue> canonical_issues(Role role, const TrainConfig& cfg, const ParityTask& task, int m,
                                               int m_teacher = 0);
// Fills unset rates; throws ConfigError on issues when canonical.
TrainConfig resolve_config(Role role, const TrainConfig& cfg, const ParityTask& task, int m, int m_teacher = 0);

struct TraceRecord {
  std::string stage;
  std::size_t step;
  std::uint64_t samples_consumed;
  double eval_loss;
  double eval_accuracy;
  double wall_clock_s;
};

class TrainingTrace {
 public:
  void append(TraceRecord r);
  const std::vector<TraceRecord>& records() const { return records_; }
  std::uint64_t samples_consumed() const { return samples_; }
  void add_samples(std::uint64_t n) { samples_ += n; }
  std::size_t last_step() const { return records_.empty() ? 0 : records_.back().step; }
  // run_id,method,stage,step,samples_consumed,eval_loss,eval_accuracy
  static void write_csv_header(std::ostream& out);
  void write_csv_rows(std::ostream& out, const std::string& run_id, const std::string& method) const;

 private:
  std::vector<TraceRecord> records_;
  std::uint64_t samples_ = 0;
};

// A (m_s x m_t), |A_{l,i}| = 1/m_t, A_{l,i+m_t/2} = -A_{l,i}.
class SymmetricProjection {
 public:
  explicit SymmetricProjection(RowMat<double> A);
  const RowMat<double>& matrix() const { return A_; }
  int m_s() const { return static_cast<int>(A_.rows()); }
  int m_t() const { return static_cast<int>(A_.cols()); }
  SymmetricProjection negated() const { return SymmetricProjection(-A_); }

 private:
  RowMat<double> A_;
};

SymmetricProjection sample_projection(int m_t, int m_s, Rng& rng);

// x -> A relu(W_t x + b_t). Uses the paired form A_half phi_b(W_half x) when the
// teacher has the symmetric pairing.
class ProjectedHidden {
 public:
  ProjectedHidden(const TwoLayerMlp& teacher, const SymmetricProjection& A);
  Eigen::VectorXd operator()(std::span<const double> x) const;
  template <class S>
  RowMat<S> evaluate(const RowMat<S>& X) const;
  int output_dim() const { return m_s_; }
  bool paired() const { return paired_; }

 private:
  int m_s_;
  bool paired_;
  BasicMlp<double> net_d_;
  BasicMlp<float> net_f_;
  RowMat<double> A_d_;
  RowMat<float> A_f_;
};

ProjectedHidden projected_teacher_hidden(const TwoLayerMlp& teacher, const SymmetricProjection& A);

struct TrainResult {
  TwoLayerMlp model;
  TrainingTrace trace;
  std::optional<SymmetricProjection> projection;
  // Weights right after the inner-layer stage(s), before any output training.
  TwoLayerMlp after_stage1;
};

TrainResult train_teacher(const ParityTask& task, int m_t, const TrainConfig& cfg, Rng& rng);
TrainResult train_student_curriculum(const ParityTask& task, const TwoLayerMlp& teacher, int m_s,
                                     const TrainConfig& cfg, Rng& rng);
TrainResult train_student_oneshot(const ParityTask& task, const TwoLayerMlp& teacher, int m_s,
                                  const TrainConfig& cfg, Rng& rng);

enum class LossKind {
  kProjectedMse,
  kProjectedCorrelation,
  kFullOutput,
  kOutputInner  // inner-layer step on the full-output loss (one-shot stage 1)
};

struct ScheduleStage {
  int layer;  // 1 for the hidden layer; ignored for full-output
  std::size_t iterations;
  LossKind loss;
};

struct CurriculumSchedule {
  std::vector<ScheduleStage> stages;
  // Throws ArgumentError when malformed.
  void validate() const;
};

CurriculumSchedule curriculum_schedule(std::size_t T1, std::size_t T2);

// Samples A from rng.split(stream::kProjection) and trains student through the
// schedule. Stage-2 labels come from the teacher, evaluation uses true labels.
TrainResult run_schedule(TwoLayerMlp student, const TwoLayerMlp& teacher, const CurriculumSchedule& schedule,
                         const ParityTask& task, const TrainConfig& cfg, Rng& rng);

// Mean stage-1 gradients (m x d) on the cube or on B fresh samples.
RowMat<double> teacher_stage1_gradient(const TwoLayerMlp& model, const ParityTask& task, Stage1Estimator est,
                                       std::size_t B, Rng& rng, Precision p = Precision::kDouble);
RowMat<double> distill_stage1_gradient(const TwoLayerMlp& student, const ProjectedHidden& g, const ParityTask& task,
                                       Stage1Estimator est, std::size_t B, Rng& rng,
                                       Precision p = Precision::kDouble);

}  // namespace pdistill
