#include "edu/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

namespace edu {

std::vector<BranchEvent> relative_depths(const DecodeTree& tree, const Vocabulary& vocab) {
  std::vector<BranchEvent> events;
  for (NodeId leaf : tree.leaves()) {
    if (!tree.nodes[leaf].terminal) continue;
    const auto path = tree.path(leaf);
    const std::size_t length = tree.path_offset(leaf) + tree.nodes[leaf].span.size();
    for (NodeId id : path) {
      const auto& n = tree.nodes[id];
      if (!n.branch_token) continue;
      BranchEvent e;
      e.task_id = tree.task_id;
      e.token_index = tree.path_offset(id) + 1;
      e.trace_length = length;
      e.relative_depth = double(e.token_index) / double(length);
      e.branch_word = vocab.surface(*n.branch_token);
      e.forced = n.forced;
      events.push_back(std::move(e));
    }
  }
  return events;
}

std::vector<BranchEvent> relative_depths(const std::vector<DecodeTree>& trees, const Vocabulary& vocab) {
  std::vector<BranchEvent> events;
  for (const auto& t : trees) {
    auto e = relative_depths(t, vocab);
    events.insert(events.end(), std::make_move_iterator(e.begin()), std::make_move_iterator(e.end()));
  }
  return events;
}

double mean_relative_depth(const std::vector<BranchEvent>& events) {
  double sum = 0;
  std::size_t n = 0;
  for (const auto& e : events) {
    if (e.forced) continue;
    sum += e.relative_depth;
    ++n;
  }
  return n ? sum / double(n) : 0.0;
}

std::vector<HistogramBin> depth_histogram(const std::vector<BranchEvent>& events, std::size_t bins) {
  if (bins == 0) throw Error(Errc::invalid_argument, "bins must be positive");
  std::vector<HistogramBin> out(bins);
  for (std::size_t k = 0; k < bins; ++k) out[k] = {double(k) / double(bins), double(k + 1) / double(bins), 0};
  for (const auto& e : events) {
    // (k/bins, (k+1)/bins] in exact integer arithmetic on d/L
    std::size_t k = (e.token_index * bins + e.trace_length - 1) / e.trace_length;
    k = std::clamp<std::size_t>(k, 1, bins) - 1;
    ++out[k].count;
  }
  return out;
}

std::vector<std::pair<std::string, std::size_t>> branch_word_frequency(const std::vector<BranchEvent>& events) {
  std::map<std::string, std::size_t> counts;
  for (const auto& e : events) ++counts[e.branch_word];
  std::vector<std::pair<std::string, std::size_t>> out(counts.begin(), counts.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

std::vector<SweepRow> threshold_sweep(const ModelHandle& model, const std::vector<Task>& tasks,
                                      const std::vector<double>& thresholds, const StrategyConfig& base,
                                      const Scorer& scorer, std::uint64_t seed, const ExperimentOptions& options) {
  if (thresholds.empty()) throw Error(Errc::invalid_argument, "no thresholds");
  std::vector<StrategyConfig> configs;
  for (double t : thresholds) {
    StrategyConfig c = base;
    c.policy.threshold_nats = t;
    configs.push_back(std::move(c));
  }
  auto reports = run_experiment(tasks, model, configs, scorer, seed, options);
  std::vector<SweepRow> rows;
  for (const auto& r : reports) rows.push_back({r.threshold, r.accuracy, r.avg_tokens, r.mean_relative_branch_depth});
  return rows;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos && !s.empty()) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

void write_depth_histogram_csv(std::ostream& out, double threshold, const std::vector<HistogramBin>& bins,
                               bool header) {
  if (header) out << "threshold,bin_lo,bin_hi,count\n";
  for (const auto& b : bins)
    out << format_real(threshold) << ',' << format_real(b.lo) << ',' << format_real(b.hi) << ',' << b.count << '\n';
  if (!out) throw Error(Errc::sink_write_failure, "depth_hist.csv");
}

void write_branch_words_csv(std::ostream& out, const std::vector<std::pair<std::string, std::size_t>>& words) {
  out << "word,count\n";
  for (const auto& [w, c] : words) out << csv_field(w) << ',' << c << '\n';
  if (!out) throw Error(Errc::sink_write_failure, "branch_words.csv");
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "threshold,accuracy,avg_tokens,mean_r\n";
  for (const auto& r : rows)
    out << format_real(r.threshold) << ',' << format_real(r.accuracy) << ',' << format_real(r.avg_tokens) << ','
        << format_real(r.mean_r) << '\n';
  if (!out) throw Error(Errc::sink_write_failure, "sweep.csv");
}

}  // namespace edu
