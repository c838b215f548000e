#pragma once
// Branch-position diagnostics over decoding trees.
#include "edu/bon.hpp"
#include "edu/tree.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace edu {

struct BranchEvent {
  std::string task_id;
  std::size_t token_index = 0;  // d, 1-based index of the branch token
  std::size_t trace_length = 0; // L, full length of the containing path
  double relative_depth = 0;    // d / L
  std::string branch_word;
  /// Taken by the unconditional first-position rule.
  bool forced = false;
};

/// One event per (branch node, terminal leaf below it).
std::vector<BranchEvent> relative_depths(const DecodeTree& tree, const Vocabulary& vocab);
std::vector<BranchEvent> relative_depths(const std::vector<DecodeTree>& trees, const Vocabulary& vocab);

/// Mean r over entropy-triggered events; forced first-position branches are
/// excluded. 0 when there are none.
double mean_relative_depth(const std::vector<BranchEvent>& events);

struct HistogramBin {
  double lo = 0;
  double hi = 0;
  std::size_t count = 0;
};
/// Uniform bins over (0, 1]; bin k holds r in (k/bins, (k+1)/bins].
std::vector<HistogramBin> depth_histogram(const std::vector<BranchEvent>& events, std::size_t bins);

/// Descending count, lexicographic on ties.
std::vector<std::pair<std::string, std::size_t>> branch_word_frequency(const std::vector<BranchEvent>& events);

struct SweepRow {
  double threshold = 0;
  double accuracy = 0;
  double avg_tokens = 0;
  double mean_r = 0;
};

std::vector<SweepRow> threshold_sweep(const ModelHandle& model, const std::vector<Task>& tasks,
                                      const std::vector<double>& thresholds, const StrategyConfig& base,
                                      const Scorer& scorer, std::uint64_t seed, const ExperimentOptions& options = {});

void write_depth_histogram_csv(std::ostream& out, double threshold, const std::vector<HistogramBin>& bins,
                               bool header = true);
void write_branch_words_csv(std::ostream& out, const std::vector<std::pair<std::string, std::size_t>>& words);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Fixed-precision rendering shared by all CSV writers.
std::string format_real(double value);

}  // namespace edu
