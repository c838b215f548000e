#include "edu/bon.hpp"

#include "edu/analysis.hpp"
#include "edu/sampler.hpp"

#include <map>
#include <ostream>

namespace edu {

CandidateSet candidates_from_tree(const DecodeTree& tree, const Task& task) {
  CandidateSet set{task, {}};
  for (NodeId leaf : tree.surviving_leaves()) {
    Candidate c;
    c.trace = tree.path_tokens(leaf);
    if (!tree.nodes[leaf].verdict) throw Error(Errc::unverified_leaf, tree.task_id);
    c.verdict = *tree.nodes[leaf].verdict;
    set.traces.push_back(std::move(c));
  }
  return set;
}

std::size_t select_bon(const CandidateSet& set, const Scorer& scorer) {
  if (set.traces.empty()) throw Error(Errc::invalid_argument, "empty candidate set for " + set.task.id);
  std::size_t best = 0;
  double best_score = scorer(set.task, set.traces[0].trace).p_correct;
  for (std::size_t i = 1; i < set.traces.size(); ++i) {
    double s = scorer(set.task, set.traces[i].trace).p_correct;
    if (s > best_score) {
      best = i;
      best_score = s;
    }
  }
  return best;
}

std::size_t select_majority(const CandidateSet& set, const Vocabulary& vocab) {
  if (set.traces.empty()) throw Error(Errc::invalid_argument, "empty candidate set for " + set.task.id);
  struct Group {
    std::size_t first = 0;
    std::size_t size = 0;
  };
  std::map<std::string, Group> groups;
  for (std::size_t i = 0; i < set.traces.size(); ++i) {
    auto answer = extract_answer(vocab, set.traces[i].trace);
    if (!answer) continue;
    auto [it, inserted] = groups.try_emplace(normalize_answer(*answer), Group{i, 0});
    ++it->second.size;
  }
  std::size_t best = 0, best_size = 0;
  for (const auto& [answer, g] : groups)
    if (g.size > best_size || (g.size == best_size && g.first < best)) {
      best = g.first;
      best_size = g.size;
    }
  return best;
}

std::size_t select_random(const CandidateSet& set, std::mt19937_64& rng) {
  if (set.traces.empty()) throw Error(Errc::invalid_argument, "empty candidate set for " + set.task.id);
  return std::uniform_int_distribution<std::size_t>(0, set.traces.size() - 1)(rng);
}

const char* to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::prm: return "prm";
    case SelectionMode::majority: return "majority";
    case SelectionMode::first: return "first";
    case SelectionMode::random: return "random";
  }
  return "?";
}

SelectionMode parse_selection(std::string_view name) {
  for (auto m : {SelectionMode::prm, SelectionMode::majority, SelectionMode::first, SelectionMode::random})
    if (name == to_string(m)) return m;
  throw Error(Errc::invalid_argument, "unknown selection mode " + std::string(name));
}

std::uint64_t repeat_seed(std::uint64_t seed, std::size_t repeat) {
  return repeat == 0 ? seed : derive_seed(seed, std::uint64_t(repeat));
}

namespace {

struct TaskRun {
  TaskOutcome outcome;
  std::vector<BranchEvent> events;
  DecodeTree tree;
};

TaskRun run_task(const Task& task, const LanguageModel& model, const StrategyConfig& config, const Scorer& scorer,
                 std::uint64_t seed, SelectionMode mode, bool keep_tree) {
  TaskRun run;
  DecodeTree tree = build_tree(model, task, config, scorer, seed);
  CandidateSet set = candidates_from_tree(tree, task);
  auto& o = run.outcome;
  o.task_id = task.id;
  o.tokens = tree.total_tokens;
  o.candidates = set.traces.size();
  for (const auto& c : set.traces) o.correct_candidates += c.verdict.correct ? 1 : 0;
  if (!set.traces.empty()) {
    switch (mode) {
      case SelectionMode::prm: o.selected = select_bon(set, scorer); break;
      case SelectionMode::majority: o.selected = select_majority(set, model.vocabulary()); break;
      case SelectionMode::first: o.selected = select_first(set); break;
      case SelectionMode::random: {
        std::mt19937_64 rng(derive_seed(seed, task.id + "/select"));
        o.selected = select_random(set, rng);
        break;
      }
    }
    o.correct = set.traces[o.selected].verdict.correct;
  }
  run.events = relative_depths(tree, model.vocabulary());
  if (keep_tree) run.tree = std::move(tree);
  return run;
}

}  // namespace

std::vector<StrategyReport> run_experiment(const std::vector<Task>& tasks, const ModelHandle& model,
                                           const std::vector<StrategyConfig>& strategies, const Scorer& scorer,
                                           std::uint64_t seed, const ExperimentOptions& options) {
  if (tasks.empty()) throw Error(Errc::invalid_argument, "no tasks");
  if (strategies.empty()) throw Error(Errc::invalid_argument, "no strategies");
  if (!model) throw Error(Errc::invalid_argument, "no model");
  if (options.repeats == 0) throw Error(Errc::invalid_argument, "repeats must be positive");
  std::vector<StrategyReport> reports;
  for (const auto& config : strategies) {
    config.validate();
    StrategyReport report;
    report.strategy = config;
    report.n = config.budget();
    report.threshold = config.policy.threshold_nats;
    report.tasks = tasks.size();
    report.repeats = options.repeats;
    std::vector<BranchEvent> events;
    std::size_t correct = 0;
    double candidate_acc = 0;
    for (std::size_t r = 0; r < options.repeats; ++r) {
      std::vector<TaskRun> runs(tasks.size());
      const std::uint64_t s = repeat_seed(seed, r);
      parallel_for(tasks.size(), options.workers, [&](std::size_t i) {
        try {
          runs[i] = run_task(tasks[i], *model, config, scorer, s, options.selection, options.trees != nullptr);
        } catch (const Error& e) {
          throw Error(e.code(), "task " + tasks[i].id + ": " + e.what());
        } catch (const std::exception& e) {
          throw std::runtime_error("task " + tasks[i].id + ": " + e.what());
        }
      });
      for (auto& run : runs) {
        const auto& o = run.outcome;
        correct += o.correct ? 1 : 0;
        report.total_tokens += o.tokens;
        if (o.candidates) candidate_acc += double(o.correct_candidates) / double(o.candidates);
        events.insert(events.end(), run.events.begin(), run.events.end());
        report.outcomes.push_back(o);
        if (options.trees) options.trees->push_back(std::move(run.tree));
      }
    }
    const double runs = double(tasks.size() * options.repeats);
    report.accuracy = double(correct) / runs;
    report.avg_tokens = double(report.total_tokens) / runs;
    report.candidate_accuracy = candidate_acc / runs;
    report.mean_relative_branch_depth = mean_relative_depth(events);
    for (const auto& e : events) report.branch_events += e.forced ? 0 : 1;
    reports.push_back(std::move(report));
  }
  return reports;
}

void write_report_csv(std::ostream& out, const std::vector<StrategyReport>& reports) {
  out << "strategy,N,threshold,accuracy,total_tokens,avg_tokens,mean_relative_branch_depth\n";
  for (const auto& r : reports)
    out << to_string(r.strategy.kind) << ',' << r.n << ',' << format_real(r.threshold) << ','
        << format_real(r.accuracy) << ',' << r.total_tokens << ',' << format_real(r.avg_tokens) << ','
        << format_real(r.mean_relative_branch_depth) << '\n';
  if (!out) throw Error(Errc::sink_write_failure, "report csv");
}

}  // namespace edu
