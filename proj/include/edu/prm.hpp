#pragma once
// Feature-based process reward model, plus the oracle and scripted scorers
// used to isolate search behaviour from PRM quality.
#include "edu/labeler.hpp"
#include "edu/lm.hpp"
#include "edu/prm_score.hpp"
#include "edu/tree.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace edu {

struct FeatureConfig {
  std::size_t hash_buckets = 64;  // hashed bigram counts
  std::size_t last_k = 2;         // one-hot of the last k tokens
  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Fixed-length features of (task prompt, generated prefix): prefix length,
/// last-k token one-hots, hashed bigram counts and the running verifier
/// state of the recurrence (steps written, step errors, answer status).
class FeatureExtractor {
 public:
  FeatureExtractor(Vocabulary vocab, FeatureConfig config = {});
  std::size_t dimension() const;
  Eigen::VectorXd extract(const Task& task, TokenSpan prefix) const;
  const Vocabulary& vocabulary() const { return vocab_; }
  const FeatureConfig& config() const { return config_; }

  static constexpr std::size_t kStateFeatures = 8;

 private:
  Vocabulary vocab_;
  FeatureConfig config_;
};

/// Parameter layout of the two-class classifier. hidden == 0 is linear
/// (z = W x + b); otherwise z = W2 max(0, W1 x + b1) + b2.
struct PrmShape {
  std::size_t input = 0;
  std::size_t hidden = 0;
  std::size_t parameter_count() const;
};

/// Mean two-class cross-entropy -1/N sum_i sum_k y_ik log p_ik with targets
/// (1 - label, label), and its gradient with respect to the flattened
/// parameters. Rows of `x` are examples.
struct LossGrad {
  double loss = 0;
  Eigen::VectorXd gradient;
};
LossGrad loss_and_gradient(const PrmShape& shape, const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& labels);
/// Class probabilities (incorrect, correct) for each row of x.
Eigen::MatrixXd predict(const PrmShape& shape, const Eigen::VectorXd& params, const Eigen::MatrixXd& x);

struct TrainConfig {
  std::size_t hidden = 0;
  std::size_t epochs = 5;
  double learning_rate = 1e-3;
  double warmup_ratio = 0.01;
  double floor_ratio = 1e-4;
  std::size_t batch_size = 32;
  double validation_fraction = 0.1;
  FeatureConfig features;
  void validate() const;
};

/// Linear warmup over warmup_ratio of the steps, then cosine decay from the
/// initial rate to floor_ratio times it.
double learning_rate_at(const TrainConfig& config, std::size_t step, std::size_t total_steps);

/// Index of the smallest loss; the earliest wins ties.
std::size_t select_checkpoint(const std::vector<double>& validation_losses);

struct TrainingMeta {
  std::size_t epochs = 0;
  double learning_rate = 0;
  double warmup_ratio = 0;
  double floor_ratio = 0;
  std::uint64_t seed = 0;
  std::size_t selected_epoch = 0;
  std::vector<double> train_losses;
  std::vector<double> validation_losses;
};

class PrmModel {
 public:
  PrmModel(Vocabulary vocab, FeatureConfig features, std::size_t hidden);

  const FeatureExtractor& features() const { return extractor_; }
  const PrmShape& shape() const { return shape_; }
  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }
  /// Standardization applied before the classifier.
  Eigen::VectorXd& feature_mean() { return mean_; }
  Eigen::VectorXd& feature_scale() { return scale_; }
  TrainingMeta& meta() { return meta_; }
  const TrainingMeta& meta() const { return meta_; }

  Eigen::MatrixXd design_matrix(const std::vector<std::pair<const Task*, TokenSeq>>& rows) const;
  Eigen::RowVectorXd standardize(const Eigen::VectorXd& raw) const;
  PrmScore score(const Task& task, TokenSpan prefix) const;

  void save(std::ostream& out) const;
  static PrmModel load(std::istream& in);

 private:
  FeatureExtractor extractor_;
  PrmShape shape_;
  Eigen::VectorXd params_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
  TrainingMeta meta_;
};

/// Trains on labeled fragments; `tasks` resolves each example's prompt.
/// Holds out validation_fraction of the task ids (not fragments) and returns
/// the epoch with the lowest held-out loss. Throws Errc::empty_dataset and
/// Errc::non_finite_loss.
PrmModel train_prm(const std::vector<LabeledExample>& dataset, const std::map<std::string, Task>& tasks,
                   const Vocabulary& vocab, const TrainConfig& config, std::uint64_t seed);

PrmScore score_prefix(const PrmModel& model, const Task& task, TokenSpan prefix);

Scorer make_prm_scorer(std::shared_ptr<const PrmModel> model);

/// Exact scorer: a finished trace scores its verdict; an open prefix scores
/// the correct-leaf fraction of the small EDU rollout tree grown from it.
struct OracleOptions {
  std::size_t rollout_branches = 4;
  double threshold = kDefaultThreshold;
  std::size_t length_cap = kDefaultLengthCap;
};
Scorer make_oracle_scorer(ModelHandle model, OracleOptions options = {});

/// Scores looked up by the exact (task id, prefix) pair; `fallback` otherwise.
Scorer make_scripted_scorer(std::map<std::pair<std::string, TokenSeq>, double> table, double fallback = 0.5);

/// Server side of `SCORE <task id> <base64 prefix ids>` -> `OK <decimal>`.
/// Never throws; failures become `ERR <code>`.
std::string handle_score_request(const Scorer& scorer, const std::map<std::string, Task>& tasks,
                                 std::string_view line);

/// Area under the ROC curve with tie-averaged ranks; 0.5 when one class is
/// empty.
double roc_auc(const std::vector<double>& scores, const std::vector<bool>& positive);

}  // namespace edu
