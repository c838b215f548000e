#include "edu/cli.hpp"

#include "edu/analysis.hpp"
#include "edu/bon.hpp"
#include "edu/builtin.hpp"
#include "edu/labeler.hpp"
#include "edu/prm.hpp"
#include "edu/sampler.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

namespace edu {

using nlohmann::json;
namespace fs = std::filesystem;

#define EDU_CONFIG_FIELDS(X)                                                                                     \
  X(subcommand) X(family) X(count) X(difficulty) X(model) X(strategies) X(max_branches) X(entropy_threshold)    \
  X(thresholds) X(whitelist) X(prune_threshold) X(prune_first_branch_only) X(mcts_depth) X(temperature)         \
  X(length_cap) X(seed) X(repeats) X(scorer) X(selection) X(tasks) X(trees) X(dataset) X(extra_completions)     \
  X(epochs) X(learning_rate) X(hidden) X(batch_size) X(bins) X(corpus_size) X(order) X(smoothing)

void to_json(json& j, const RunConfig& c) {
  j = json::object();
#define EDU_PUT(f) j[#f] = c.f;
  EDU_CONFIG_FIELDS(EDU_PUT)
#undef EDU_PUT
}

void from_json(const json& j, RunConfig& c) {
  RunConfig d;
#define EDU_GET(f) c.f = j.value(#f, d.f);
  EDU_CONFIG_FIELDS(EDU_GET)
#undef EDU_GET
}

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

std::vector<Task> load_tasks(const RunConfig& c) {
  if (!c.tasks.empty()) {
    std::ifstream in(c.tasks);
    if (!in) throw ConfigError("--tasks", "cannot open " + c.tasks);
    return read_tasks(in, task_vocabulary());
  }
  return generate_tasks(parse_family(c.family), c.count, c.difficulty, c.seed);
}

ModelHandle open_model(const RunConfig& c) {
  try {
    return load_model(c.model);
  } catch (const Error& e) {
    throw ConfigError("--model", e.what());
  }
}

std::set<std::string> whitelist_of(const RunConfig& c) {
  if (c.whitelist.empty()) return default_whitelist();
  std::ifstream in(c.whitelist);
  if (!in) throw ConfigError("--whitelist", "cannot open " + c.whitelist);
  return read_whitelist(in);
}

StrategyConfig strategy_of(const RunConfig& c, const std::string& name, std::size_t n) {
  StrategyConfig s;
  try {
    s.kind = parse_strategy(name);
  } catch (const Error& e) {
    throw ConfigError("--strategy", e.what());
  }
  s.policy.threshold_nats = c.entropy_threshold;
  s.policy.max_branches = n;
  s.policy.whitelist = whitelist_of(c);
  s.n_samples = n;
  s.temperature = c.temperature;
  s.prune_threshold = c.prune_threshold;
  s.prune_first_branch_only = c.prune_first_branch_only;
  s.rollout_depth = c.mcts_depth;
  s.length_cap = c.length_cap;
  return s;
}

std::shared_ptr<const PrmModel> open_prm(const std::string& path, const std::string& flag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(flag, "cannot open " + path);
  return std::make_shared<const PrmModel>(PrmModel::load(in));
}

Scorer scorer_of(const RunConfig& c, const ModelHandle& model) {
  if (c.scorer == "oracle") return make_oracle_scorer(model);
  if (c.scorer.starts_with("prm:")) return make_prm_scorer(open_prm(c.scorer.substr(4), "--scorer"));
  throw ConfigError("--scorer", "expected 'oracle' or 'prm:<file>', got '" + c.scorer + "'");
}

fs::path output_dir(const RunConfig& c) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("--out", "cannot create " + c.out + ": " + ec.message());
  return dir;
}

std::ofstream open_output(const fs::path& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error(Errc::sink_write_failure, "cannot write " + path.string());
  return out;
}

void write_run_config(const RunConfig& c, const fs::path& dir) {
  auto out = open_output(dir / "run_config.json");
  out << json(c).dump(2) << '\n';
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::map<std::string, Task> task_index(const std::vector<Task>& tasks) {
  std::map<std::string, Task> index;
  for (const auto& t : tasks) index.emplace(t.id, t);
  return index;
}

std::vector<DecodeTree> load_trees(const RunConfig& c) {
  std::vector<DecodeTree> trees;
  for (const auto& path : c.trees) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--trees", "cannot open " + path);
    auto t = read_trees(in);
    trees.insert(trees.end(), std::make_move_iterator(t.begin()), std::make_move_iterator(t.end()));
  }
  return trees;
}

// ---------------------------------------------------------------------------
// Subcommands

void cmd_gen_tasks(const RunConfig& c, std::ostream& log) {
  auto tasks = load_tasks(c);
  auto dir = output_dir(c);
  auto out = open_output(dir / "tasks.jsonl");
  write_tasks(out, tasks, task_vocabulary());
  write_run_config(c, dir);
  log << "gen-tasks: " << tasks.size() << " tasks (" << c.family << ", difficulty " << c.difficulty << ")\n";
}

void cmd_train_lm(const RunConfig& c, std::ostream& log) {
  BuiltinModelSpec spec;
  spec.corpus_size = c.corpus_size;
  spec.order = c.order;
  spec.smoothing = c.smoothing;
  spec.corpus_seed = c.seed;
  auto model = builtin_model(parse_family(c.family), spec);
  auto dir = output_dir(c);
  auto out = open_output(dir / "model.ngram", true);
  model->save(out);
  write_run_config(c, dir);
  log << "train-lm: " << model->identity() << " on " << c.corpus_size << " teacher traces\n";
}

void cmd_sample(const RunConfig& c, std::ostream& log) {
  auto tasks = load_tasks(c);
  auto model = open_model(c);
  auto config = strategy_of(c, c.strategies.front(), c.max_branches.front());
  Scorer scorer = (config.kind == StrategyKind::p_edu || config.kind == StrategyKind::mcts_edu)
                      ? scorer_of(c, model)
                      : Scorer([](const Task&, TokenSpan) { return PrmScore{}; });
  std::vector<DecodeTree> trees(tasks.size() * c.repeats);
  for (std::size_t r = 0; r < c.repeats; ++r) {
    const std::uint64_t seed = repeat_seed(c.seed, r);
    parallel_for(tasks.size(), c.workers, [&](std::size_t i) {
      try {
        trees[r * tasks.size() + i] = build_tree(*model, tasks[i], config, scorer, seed);
      } catch (const std::exception& e) {
        throw Error(Errc::invalid_argument, "task " + tasks[i].id + ": " + e.what());
      }
    });
  }
  auto dir = output_dir(c);
  auto out = open_output(dir / "trees.jsonl");
  std::size_t leaves = 0, tokens = 0, correct = 0;
  for (const auto& t : trees) {
    write_tree(out, t, model->vocabulary());
    leaves += t.leaf_count;
    tokens += t.total_tokens;
    for (NodeId l : t.surviving_leaves()) correct += t.nodes[l].verdict && t.nodes[l].verdict->correct ? 1 : 0;
  }
  if (!out) throw Error(Errc::sink_write_failure, "trees.jsonl");
  write_run_config(c, dir);
  log << "sample: " << trees.size() << " trees, strategy " << to_string(config.kind) << ", " << leaves
      << " leaves, " << correct << " correct, " << tokens << " tokens\n";
}

void cmd_build_dataset(const RunConfig& c, std::ostream& log) {
  auto trees = load_trees(c);
  std::stable_sort(trees.begin(), trees.end(),
                   [](const DecodeTree& a, const DecodeTree& b) { return a.task_id < b.task_id; });
  ModelHandle model;
  std::map<std::string, Task> tasks;
  if (c.extra_completions > 0) {
    model = open_model(c);
    tasks = task_index(load_tasks(c));
  }
  std::vector<std::vector<LabeledExample>> per_tree(trees.size());
  parallel_for(trees.size(), c.workers, [&](std::size_t i) {
    ExtraCompletions extra;
    if (c.extra_completions > 0) {
      auto it = tasks.find(trees[i].task_id);
      if (it == tasks.end()) throw Error(Errc::invalid_argument, "task " + trees[i].task_id + ": not in --tasks");
      extra = {model.get(), &it->second, c.extra_completions, c.temperature, c.seed};
    }
    try {
      per_tree[i] = label_tree(trees[i], extra);
    } catch (const Error& e) {
      throw Error(e.code(), "task " + trees[i].task_id + ": " + e.what());
    }
  });
  std::vector<LabeledExample> examples;
  for (auto& v : per_tree) examples.insert(examples.end(), v.begin(), v.end());
  auto dir = output_dir(c);
  auto out = open_output(dir / "dataset.jsonl");
  EmitStats stats = emit_dataset(out, examples, task_vocabulary());
  write_run_config(c, dir);
  log << "build-dataset: " << stats.records << " records from " << trees.size() << " trees, hard fraction "
      << fixed(stats.hard_fraction()) << "\n";
}

void cmd_train_prm(const RunConfig& c, std::ostream& log) {
  std::ifstream in(c.dataset);
  if (!in) throw ConfigError("--dataset", "cannot open " + c.dataset);
  auto dataset = read_dataset(in, task_vocabulary());
  auto tasks = task_index(load_tasks(c));
  TrainConfig tc;
  tc.epochs = c.epochs;
  tc.learning_rate = c.learning_rate;
  tc.hidden = c.hidden;
  tc.batch_size = c.batch_size;
  PrmModel model = train_prm(dataset, tasks, task_vocabulary(), tc, c.seed);
  auto dir = output_dir(c);
  auto out = open_output(dir / "prm.bin", true);
  model.save(out);
  auto csv = open_output(dir / "training.csv");
  csv << "epoch,train_loss,validation_loss\n";
  for (std::size_t e = 0; e < model.meta().train_losses.size(); ++e)
    csv << e + 1 << ',' << format_real(model.meta().train_losses[e]) << ','
        << format_real(model.meta().validation_losses[e]) << '\n';
  write_run_config(c, dir);
  log << "train-prm: " << dataset.size() << " examples, selected epoch " << model.meta().selected_epoch + 1
      << ", validation loss " << fixed(model.meta().validation_losses[model.meta().selected_epoch]) << "\n";
}

void cmd_evaluate(const RunConfig& c, std::ostream& log) {
  auto tasks = load_tasks(c);
  auto model = open_model(c);
  std::vector<StrategyConfig> configs;
  for (const auto& s : c.strategies)
    for (std::size_t n : c.max_branches) configs.push_back(strategy_of(c, s, n));
  Scorer scorer = scorer_of(c, model);
  ExperimentOptions opts;
  opts.selection = parse_selection(c.selection);
  opts.workers = c.workers;
  opts.repeats = c.repeats;
  auto reports = run_experiment(tasks, model, configs, scorer, c.seed, opts);
  auto dir = output_dir(c);
  auto out = open_output(dir / "report.csv");
  write_report_csv(out, reports);
  write_run_config(c, dir);
  for (const auto& r : reports)
    log << "evaluate: " << to_string(r.strategy.kind) << " N=" << r.n << " accuracy " << fixed(r.accuracy)
        << " avg tokens " << fixed(r.avg_tokens, 1) << "\n";
}

void cmd_sweep(const RunConfig& c, std::ostream& log) {
  auto tasks = load_tasks(c);
  auto model = open_model(c);
  StrategyConfig base = strategy_of(c, c.strategies.empty() ? "edu" : c.strategies.front(), c.max_branches.front());
  Scorer scorer = scorer_of(c, model);
  std::vector<DecodeTree> trees;
  ExperimentOptions opts;
  opts.selection = parse_selection(c.selection);
  opts.workers = c.workers;
  opts.repeats = c.repeats;
  opts.trees = &trees;
  auto rows = threshold_sweep(model, tasks, c.thresholds, base, scorer, c.seed, opts);
  auto dir = output_dir(c);
  auto out = open_output(dir / "sweep.csv");
  write_sweep_csv(out, rows);
  auto hist = open_output(dir / "depth_hist.csv");
  const std::size_t per = tasks.size() * c.repeats;
  for (std::size_t k = 0; k < c.thresholds.size(); ++k) {
    std::vector<DecodeTree> slice(std::make_move_iterator(trees.begin() + std::ptrdiff_t(k * per)),
                                  std::make_move_iterator(trees.begin() + std::ptrdiff_t((k + 1) * per)));
    write_depth_histogram_csv(hist, c.thresholds[k], depth_histogram(relative_depths(slice, model->vocabulary()), c.bins),
                              k == 0);
  }
  write_run_config(c, dir);
  for (const auto& r : rows)
    log << "sweep: threshold " << fixed(r.threshold, 2) << " accuracy " << fixed(r.accuracy) << " avg tokens "
        << fixed(r.avg_tokens, 1) << " mean r " << fixed(r.mean_r) << "\n";
}

void cmd_analyze(const RunConfig& c, std::ostream& log) {
  auto trees = load_trees(c);
  const auto& vocab = task_vocabulary();
  std::map<double, std::vector<BranchEvent>> by_threshold;
  std::vector<BranchEvent> all;
  for (const auto& t : trees) {
    auto events = relative_depths(t, vocab);
    auto& bucket = by_threshold[t.strategy.policy.threshold_nats];
    bucket.insert(bucket.end(), events.begin(), events.end());
    all.insert(all.end(), events.begin(), events.end());
  }
  auto dir = output_dir(c);
  auto hist = open_output(dir / "depth_hist.csv");
  bool header = true;
  for (const auto& [threshold, events] : by_threshold) {
    write_depth_histogram_csv(hist, threshold, depth_histogram(events, c.bins), header);
    header = false;
  }
  if (header) hist << "threshold,bin_lo,bin_hi,count\n";
  auto words = open_output(dir / "branch_words.csv");
  auto ranked = branch_word_frequency(all);
  write_branch_words_csv(words, ranked);
  write_run_config(c, dir);
  log << "analyze: " << trees.size() << " trees, " << all.size() << " branch events, mean r "
      << fixed(mean_relative_depth(all)) << ", " << ranked.size() << " distinct branch words\n";
}

// ---------------------------------------------------------------------------
// Validation

void require(bool ok, const std::string& flag, const std::string& message) {
  if (!ok) throw ConfigError(flag, message);
}

void validate(const RunConfig& c) {
  const auto& s = c.subcommand;
  const bool needs_tasks = s == "gen-tasks" || s == "sample" || s == "evaluate" || s == "sweep" ||
                           s == "train-prm" || (s == "build-dataset" && c.extra_completions > 0);
  if (needs_tasks && c.tasks.empty()) {
    try {
      parse_family(c.family);
    } catch (const Error& e) {
      throw ConfigError("--family", e.what());
    }
    require(c.family != "scripted", "--family", "scripted tasks have no generator");
    require(c.count > 0, "--count", "must be positive");
    require(c.difficulty >= 1 && c.difficulty <= 9, "--difficulty", "must lie in [1, 9]");
  }
  if (s == "train-lm") {
    try {
      parse_family(c.family);
    } catch (const Error& e) {
      throw ConfigError("--family", e.what());
    }
    require(c.family != "scripted", "--family", "scripted tasks have no teacher");
    require(c.corpus_size > 0, "--corpus-size", "must be positive");
    require(c.order >= 1, "--order", "must be positive");
    require(c.smoothing >= 0, "--smoothing", "must be non-negative");
  }
  if (s == "sample" || s == "evaluate" || s == "sweep") {
    if (s != "sweep") require(!c.strategies.empty(), "--strategy", "at least one strategy is required");
    require(s != "sample" || c.strategies.size() == 1, "--strategy", "sample takes exactly one strategy");
    for (const auto& name : c.strategies) {
      try {
        parse_strategy(name);
      } catch (const Error& e) {
        throw ConfigError("--strategy", e.what());
      }
    }
    require(!c.max_branches.empty(), "--max-branches", "at least one value is required");
    require(s == "evaluate" || c.max_branches.size() == 1, "--max-branches", "takes a single value here");
    for (std::size_t n : c.max_branches) require(n >= 1, "--max-branches", "must be positive");
    require(c.entropy_threshold > 0, "--entropy-threshold", "must be positive");
    require(c.prune_threshold >= 0 && c.prune_threshold <= 1, "--prune-threshold", "must lie in [0, 1]");
    require(c.mcts_depth >= 1, "--mcts-depth", "must be positive");
    require(c.temperature >= 0, "--temperature", "must be non-negative");
    require(c.length_cap >= 1, "--length-cap", "must be positive");
    require(c.repeats >= 1, "--repeats", "must be positive");
    try {
      parse_selection(c.selection);
    } catch (const Error& e) {
      throw ConfigError("--selection", e.what());
    }
  }
  if (s == "sweep") {
    require(!c.thresholds.empty(), "--thresholds", "at least one threshold is required");
    for (double t : c.thresholds) require(t > 0, "--thresholds", "must be positive");
  }
  if (s == "build-dataset" || s == "analyze") require(!c.trees.empty(), "--trees", "at least one tree file is required");
  if (s == "train-prm") {
    require(!c.dataset.empty(), "--dataset", "a dataset file is required");
    require(c.epochs >= 1, "--epochs", "must be positive");
    require(c.learning_rate > 0, "--learning-rate", "must be positive");
    require(c.batch_size >= 1, "--batch-size", "must be positive");
  }
  if (s == "analyze" || s == "sweep") require(c.bins >= 1, "--bins", "must be positive");
  require(c.workers >= 1, "--workers", "must be positive");
}

std::string env_name(const std::string& flag) {
  std::string name = "EDU_";
  for (char ch : flag.substr(2)) name += ch == '-' ? '_' : char(std::toupper(static_cast<unsigned char>(ch)));
  return name;
}

template <typename T>
CLI::Option* option(CLI::App& app, const std::string& flag, T& target, const std::string& help) {
  auto* opt = app.add_option(flag, target, help)->envname(env_name(flag))->capture_default_str();
  if constexpr (requires { target.push_back(target.front()); }) opt->delimiter(',');
  return opt;
}

std::string scan_config_path(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    std::string_view a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.starts_with("--config=")) return std::string(a.substr(9));
  }
  return {};
}

}  // namespace

void run_command(const RunConfig& c, std::ostream& out) {
  validate(c);
  const auto& s = c.subcommand;
  if (s == "gen-tasks") return cmd_gen_tasks(c, out);
  if (s == "train-lm") return cmd_train_lm(c, out);
  if (s == "sample") return cmd_sample(c, out);
  if (s == "build-dataset") return cmd_build_dataset(c, out);
  if (s == "train-prm") return cmd_train_prm(c, out);
  if (s == "evaluate") return cmd_evaluate(c, out);
  if (s == "sweep") return cmd_sweep(c, out);
  if (s == "analyze") return cmd_analyze(c, out);
  throw ConfigError("subcommand", "unknown subcommand '" + s + "'");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::string config_path;
  try {
    config_path = scan_config_path(argc, argv);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("--config", "cannot open " + config_path);
      try {
        c = json::parse(in).get<RunConfig>();
      } catch (const json::exception& e) {
        throw ConfigError("--config", e.what());
      }
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  const RunConfig from_file = c;

  CLI::App app{"Entropy-driven tree sampling and process reward model pipeline", "edu"};
  app.require_subcommand(1);
  app.add_option("--config", config_path, "RunConfig JSON to start from");

  struct Sub {
    const char* name;
    const char* help;
  };
  const std::vector<Sub> subs{{"gen-tasks", "Generate synthetic tasks"},
                              {"train-lm", "Train and save a reference n-gram model"},
                              {"sample", "Build decoding trees"},
                              {"build-dataset", "Label tree fragments into a PRM dataset"},
                              {"train-prm", "Train the process reward model"},
                              {"evaluate", "Compare strategies with Best-of-N selection"},
                              {"sweep", "Sweep the entropy threshold"},
                              {"analyze", "Branch-depth and branch-word statistics from trees"}};
  for (const auto& sub : subs) {
    auto* a = app.add_subcommand(sub.name, sub.help);
    const std::string n = sub.name;
    option(*a, "--out", c.out, "Output directory");
    option(*a, "--seed", c.seed, "Random seed");
    option(*a, "--workers", c.workers, "Concurrent tasks");
    a->add_option("--config", config_path, "RunConfig JSON to start from");
    const bool task_source = n == "gen-tasks" || n == "sample" || n == "evaluate" || n == "sweep" ||
                             n == "train-prm" || n == "build-dataset";
    if (task_source) {
      option(*a, "--family", c.family, "Task family");
      option(*a, "--count", c.count, "Number of tasks");
      option(*a, "--difficulty", c.difficulty, "Recurrence steps per task");
      if (n != "gen-tasks") option(*a, "--tasks", c.tasks, "Tasks JSONL file (overrides generation)");
    }
    if (n == "train-lm") {
      option(*a, "--family", c.family, "Task family");
      option(*a, "--corpus-size", c.corpus_size, "Teacher traces");
      option(*a, "--order", c.order, "N-gram order");
      option(*a, "--smoothing", c.smoothing, "Add-k smoothing");
    }
    if (n == "sample" || n == "evaluate" || n == "sweep" || n == "build-dataset") {
      option(*a, "--model", c.model, "builtin:<family> or an EDUNGRAM1 file");
      option(*a, "--temperature", c.temperature, "Sampling temperature");
    }
    if (n == "sample" || n == "evaluate" || n == "sweep") {
      option(*a, "--strategy", c.strategies, "edu, sample_edu, p_edu, mcts_edu or ht_bon");
      option(*a, "--max-branches", c.max_branches, "Leaf budget N");
      option(*a, "--entropy-threshold", c.entropy_threshold, "Anchor entropy threshold (nats)");
      option(*a, "--whitelist", c.whitelist, "File of never-branched surfaces");
      option(*a, "--prune-threshold", c.prune_threshold, "P-EDU pruning score");
      a->add_flag("--prune-first-branch-only", c.prune_first_branch_only, "Score only the first branch")
          ->envname("EDU_PRUNE_FIRST_BRANCH_ONLY");
      option(*a, "--mcts-depth", c.mcts_depth, "MCTS rollout depth in anchor segments");
      option(*a, "--length-cap", c.length_cap, "Maximum generated tokens");
      option(*a, "--repeats", c.repeats, "Independent repetitions");
      option(*a, "--scorer", c.scorer, "oracle or prm:<file>");
    }
    if (n == "evaluate" || n == "sweep") option(*a, "--selection", c.selection, "prm, majority, first or random");
    if (n == "sweep") option(*a, "--thresholds", c.thresholds, "Entropy thresholds");
    if (n == "sweep" || n == "analyze") option(*a, "--bins", c.bins, "Histogram bins");
    if (n == "build-dataset" || n == "analyze") option(*a, "--trees", c.trees, "Tree JSONL files");
    if (n == "build-dataset") option(*a, "--extra-completions", c.extra_completions, "Sampled completions per node");
    if (n == "train-prm") {
      option(*a, "--dataset", c.dataset, "Dataset JSONL file");
      option(*a, "--epochs", c.epochs, "Training epochs");
      option(*a, "--learning-rate", c.learning_rate, "Initial learning rate");
      option(*a, "--hidden", c.hidden, "Hidden width (0 = linear)");
      option(*a, "--batch-size", c.batch_size, "Minibatch size");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  c.subcommand = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty() && !from_file.subcommand.empty() && from_file.subcommand != c.subcommand)
      throw ConfigError("--config", "was written by '" + from_file.subcommand + "', not '" + c.subcommand + "'");
    run_command(c, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace edu
