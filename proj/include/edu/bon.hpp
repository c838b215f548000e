#pragma once
// Best-of-N selection and strategy-level evaluation reports.
#include "edu/lm.hpp"
#include "edu/prm_score.hpp"
#include "edu/tree.hpp"

#include <iosfwd>
#include <random>
#include <vector>

namespace edu {

struct Candidate {
  TokenSeq trace;
  Verdict verdict;
};

struct CandidateSet {
  Task task;
  std::vector<Candidate> traces;
};

/// Complete traces offered for selection: every surviving terminal leaf, in
/// left-to-right order.
CandidateSet candidates_from_tree(const DecodeTree& tree, const Task& task);

/// Argmax of the full-trace score; lowest index on ties.
std::size_t select_bon(const CandidateSet& set, const Scorer& scorer);
/// Largest group of equal normalized answers (traces without an answer do
/// not vote); lowest index in that group. Group-size ties go to the group
/// that occurs first. All traces unanswered -> 0.
std::size_t select_majority(const CandidateSet& set, const Vocabulary& vocab);
inline std::size_t select_first(const CandidateSet&) { return 0; }
std::size_t select_random(const CandidateSet& set, std::mt19937_64& rng);

enum class SelectionMode { prm, majority, first, random };
const char* to_string(SelectionMode mode);
SelectionMode parse_selection(std::string_view name);

struct TaskOutcome {
  std::string task_id;
  std::size_t candidates = 0;
  std::size_t correct_candidates = 0;
  std::size_t selected = 0;
  bool correct = false;
  std::size_t tokens = 0;
};

struct StrategyReport {
  StrategyConfig strategy;
  std::size_t n = 0;
  double threshold = 0;
  std::size_t tasks = 0;
  std::size_t repeats = 1;
  double accuracy = 0;
  std::size_t total_tokens = 0;
  double avg_tokens = 0;
  double mean_relative_branch_depth = 0;
  std::size_t branch_events = 0;
  /// Mean fraction of correct candidates; the expected accuracy of picking
  /// a candidate uniformly at random.
  double candidate_accuracy = 0;
  std::vector<TaskOutcome> outcomes;
};

struct ExperimentOptions {
  SelectionMode selection = SelectionMode::prm;
  std::size_t workers = 1;
  std::size_t repeats = 1;
  /// When set, receives every built tree in (strategy, repeat, task) order.
  std::vector<DecodeTree>* trees = nullptr;
};

/// Per-repeat seed: the base seed for repeat 0, a derived seed afterwards.
std::uint64_t repeat_seed(std::uint64_t seed, std::size_t repeat);

/// Builds each strategy's tree per task, selects one candidate, verifies and
/// aggregates. Results merge in task order, so output is independent of the
/// worker count. Failures are rethrown with the offending task id.
std::vector<StrategyReport> run_experiment(const std::vector<Task>& tasks, const ModelHandle& model,
                                           const std::vector<StrategyConfig>& strategies, const Scorer& scorer,
                                           std::uint64_t seed, const ExperimentOptions& options = {});

/// Columns: strategy, N, threshold, accuracy, total_tokens, avg_tokens,
/// mean_relative_branch_depth.
void write_report_csv(std::ostream& out, const std::vector<StrategyReport>& reports);

}  // namespace edu
