#include "edu/task.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <istream>
#include <ostream>

namespace edu {

using nlohmann::json;

const char* to_string(TaskFamily family) {
  switch (family) {
    case TaskFamily::chain_arithmetic: return "chain-arithmetic";
    case TaskFamily::modular_sum: return "modular-sum";
    case TaskFamily::digit_product: return "digit-product";
    case TaskFamily::scripted: return "scripted";
  }
  return "unknown";
}

TaskFamily parse_family(std::string_view name) {
  for (auto f : {TaskFamily::chain_arithmetic, TaskFamily::modular_sum, TaskFamily::digit_product,
                 TaskFamily::scripted})
    if (name == to_string(f)) return f;
  throw Error(Errc::unknown_family, std::string(name));
}

const std::vector<std::string>& opener_words() {
  static const std::vector<std::string> words{"first", "we", "start", "let"};
  return words;
}

const std::vector<std::string>& connective_words() {
  static const std::vector<std::string> words{
      "so",    "thus",   "hence",   "therefore", "then",  "finally", "now",     "and",
      "clearly", "giving", "which", "means",     "overall", "result", "since", "if"};
  return words;
}

const std::vector<std::string>& separator_tokens() {
  static const std::vector<std::string> seps{"\n", ";", ":"};
  return seps;
}

const Vocabulary& task_vocabulary() {
  static const Vocabulary vocab = [] {
    std::vector<std::string> t{"<eos>"};
    for (const auto& w : opener_words()) t.push_back(w);
    for (const auto& w : connective_words()) t.push_back(w);
    t.push_back("answer");
    t.push_back(kAnswerDelimiter);
    for (const auto& s : separator_tokens()) t.push_back(s);
    for (int i = 0; i < 100; ++i) t.push_back(std::to_string(i));
    for (int k = 1; k <= 9; ++k) t.push_back("+" + std::to_string(k));
    for (int k = 1; k <= 6; ++k) t.push_back("+" + std::to_string(k) + "%7");
    for (int k = 2; k <= 9; ++k) t.push_back("*" + std::to_string(k));
    for (int n = 1; n <= 9; ++n) t.push_back("x" + std::to_string(n));
    for (int n = 0; n <= 8; ++n) t.push_back("r" + std::to_string(n));
    return Vocabulary(std::move(t), 0);
  }();
  return vocab;
}

// ---------------------------------------------------------------------------
// Recurrences

int Recurrence::apply(int v) const {
  switch (family) {
    case TaskFamily::chain_arithmetic: return v + operand;
    case TaskFamily::modular_sum: return (v + operand) % 7;
    case TaskFamily::digit_product: return (v * operand) % 10;
    case TaskFamily::scripted: break;
  }
  return v;
}

bool Recurrence::is_hard(int v) const {
  switch (family) {
    case TaskFamily::chain_arithmetic: return v % 10 + operand >= 10;
    case TaskFamily::modular_sum: return v + operand >= 7;
    case TaskFamily::digit_product: return v * operand >= 10;
    case TaskFamily::scripted: break;
  }
  return false;
}

int Recurrence::misconception(int v) const {
  switch (family) {
    case TaskFamily::chain_arithmetic: return v + operand - 10;  // dropped carry
    case TaskFamily::modular_sum: return v + operand;            // missing reduction
    case TaskFamily::digit_product: return (v * operand) / 10;   // wrong digit kept
    case TaskFamily::scripted: break;
  }
  return v;
}

int Recurrence::value_limit() const {
  switch (family) {
    case TaskFamily::chain_arithmetic: return 100;
    case TaskFamily::modular_sum: return 13;
    case TaskFamily::digit_product: return 10;
    case TaskFamily::scripted: break;
  }
  return 100;
}

std::string Recurrence::op_surface() const {
  switch (family) {
    case TaskFamily::chain_arithmetic: return "+" + std::to_string(operand);
    case TaskFamily::modular_sum: return "+" + std::to_string(operand) + "%7";
    case TaskFamily::digit_product: return "*" + std::to_string(operand);
    case TaskFamily::scripted: break;
  }
  return "";
}

namespace {

std::optional<int> parse_int(std::string_view s) {
  if (s.empty() || s.size() > 3) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

Recurrence random_recurrence(TaskFamily family, int steps, std::mt19937_64& rng) {
  auto uniform = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  Recurrence r{family, 0, 0, steps};
  switch (family) {
    case TaskFamily::chain_arithmetic:
      r.start = uniform(0, 9);
      r.operand = uniform(1, 9);
      break;
    case TaskFamily::modular_sum:
      r.start = uniform(0, 6);
      r.operand = uniform(1, 6);
      break;
    case TaskFamily::digit_product:
      r.start = uniform(1, 9);
      r.operand = uniform(2, 9);
      break;
    case TaskFamily::scripted:
      throw Error(Errc::unknown_family, "scripted tasks are built by hand");
  }
  return r;
}

TokenSeq prompt_of(const Recurrence& r) {
  const auto& v = task_vocabulary();
  return {v.id("x" + std::to_string(r.steps)), v.id(r.op_surface()), v.id(std::to_string(r.start))};
}

int final_value(const Recurrence& r) {
  int y = r.start;
  for (int i = 0; i < r.steps; ++i) y = r.apply(y);
  return y;
}

}  // namespace

std::optional<Recurrence> parse_prompt(const Vocabulary& vocab, TokenSpan prompt) {
  if (prompt.size() != 3) return std::nullopt;
  for (TokenId t : prompt)
    if (!vocab.contains(t)) return std::nullopt;
  const std::string& count = vocab.surface(prompt[0]);
  const std::string& op = vocab.surface(prompt[1]);
  auto start = parse_int(vocab.surface(prompt[2]));
  if (count.size() != 2 || count[0] != 'x' || !start) return std::nullopt;
  Recurrence r{};
  r.steps = count[1] - '0';
  r.start = *start;
  if (r.steps < 1 || r.steps > 9 || op.size() < 2) return std::nullopt;
  if (op.ends_with("%7") && op[0] == '+') {
    r.family = TaskFamily::modular_sum;
    auto k = parse_int(op.substr(1, op.size() - 3));
    if (!k) return std::nullopt;
    r.operand = *k;
  } else if (op[0] == '+') {
    r.family = TaskFamily::chain_arithmetic;
    auto k = parse_int(op.substr(1));
    if (!k) return std::nullopt;
    r.operand = *k;
  } else if (op[0] == '*') {
    r.family = TaskFamily::digit_product;
    auto k = parse_int(op.substr(1));
    if (!k) return std::nullopt;
    r.operand = *k;
  } else {
    return std::nullopt;
  }
  return r;
}

std::vector<Task> generate_tasks(TaskFamily family, std::size_t count, int difficulty, std::uint64_t seed) {
  if (family == TaskFamily::scripted) throw Error(Errc::unknown_family, "scripted");
  if (count < 1) throw Error(Errc::invalid_argument, "task count must be >= 1");
  if (difficulty < 1) throw Error(Errc::invalid_argument, "difficulty must be >= 1");
  const int steps = std::min(difficulty, 9);
  std::mt19937_64 rng(derive_seed(seed, to_string(family)));
  std::vector<Task> tasks;
  tasks.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Recurrence r = random_recurrence(family, steps, rng);
    Task t;
    t.id = std::string(to_string(family)) + "-" + std::to_string(seed) + "-" + std::to_string(i);
    t.prompt = prompt_of(r);
    t.reference_answer = std::to_string(final_value(r));
    t.family = family;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

namespace {

// Emits a solution trace; `step_value` decides what the solver writes for
// each step given the previous written value.
template <typename StepFn, typename PickFn>
TokenSeq write_trace(const Recurrence& r, StepFn step_value, PickFn pick) {
  const auto& v = task_vocabulary();
  TokenSeq out;
  out.push_back(v.id(opener_words()[pick(opener_words().size(), 0)]));
  const TokenId op = v.id(r.op_surface());
  int y = r.start;
  for (int i = 1; i <= r.steps; ++i) {
    out.push_back(v.id("r" + std::to_string(r.steps - i)));
    out.push_back(op);
    y = step_value(y);
    out.push_back(v.id(std::to_string(y)));
    if (i < r.steps) out.push_back(v.id(separator_tokens()[pick(separator_tokens().size(), 1)]));
  }
  out.push_back(v.id(connective_words()[pick(connective_words().size(), 2)]));
  out.push_back(v.id("answer"));
  out.push_back(v.id(kAnswerDelimiter));
  out.push_back(v.id(std::to_string(y)));
  out.push_back(v.eos());
  return out;
}

}  // namespace

TokenSeq reference_trace(const Task& task) {
  auto r = parse_prompt(task_vocabulary(), task.prompt);
  if (!r) throw Error(Errc::unknown_family, "task " + task.id + " has no built-in solver");
  return write_trace(*r, [&](int y) { return r->apply(y); }, [](std::size_t, int) { return std::size_t{0}; });
}

std::vector<TokenSeq> teacher_corpus(TaskFamily family, std::size_t count, const TeacherConfig& config,
                                     std::uint64_t seed) {
  if (family == TaskFamily::scripted) throw Error(Errc::unknown_family, "scripted");
  std::mt19937_64 rng(derive_seed(seed, std::string("teacher:") + to_string(family)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::discrete_distribution<std::size_t> sep_dist(config.separator_weights.begin(),
                                                   config.separator_weights.end());
  std::vector<TokenSeq> corpus;
  corpus.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    int steps = std::uniform_int_distribution<int>(config.min_steps, config.max_steps)(rng);
    Recurrence r = random_recurrence(family, steps, rng);
    auto noisy_step = [&](int y) {
      const int limit = r.value_limit();
      const int correct = r.apply(y);
      const bool hard = r.is_hard(y);
      double u = unit(rng);
      int out = correct;
      if (hard) {
        if (u < config.hard_correct) {
          out = correct;
        } else if (u < config.hard_correct + config.hard_misconception) {
          out = r.misconception(y);
        } else {
          out = -1;
        }
      } else if (u >= config.easy_correct) {
        out = -1;
      }
      if (out < 0) {
        // near miss: +-1 or +-2 around the correct value, kept in range
        static constexpr int kOffsets[] = {-2, -1, 1, 2};
        do {
          out = correct + kOffsets[std::uniform_int_distribution<int>(0, 3)(rng)];
        } while (out < 0 || out >= limit);
      }
      return std::clamp(out, 0, 99);
    };
    auto pick = [&](std::size_t n, int what) -> std::size_t {
      if (what == 1) return sep_dist(rng);
      return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    };
    TokenSeq seq = prompt_of(r);
    TokenSeq trace = write_trace(r, noisy_step, pick);
    seq.insert(seq.end(), trace.begin(), trace.end());
    corpus.push_back(std::move(seq));
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Verification

std::string normalize_answer(std::string_view raw) {
  std::string s;
  for (char c : raw)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  std::size_t first = s.find_first_not_of('0');
  if (first == std::string::npos) return s.empty() ? s : "0";
  return s.substr(first);
}

std::optional<std::string> extract_answer(const Vocabulary& vocab, TokenSpan trace) {
  auto delim = vocab.find(kAnswerDelimiter);
  if (!delim) return std::nullopt;
  auto end = std::find(trace.begin(), trace.end(), vocab.eos());
  auto rpos = std::find(std::make_reverse_iterator(end), trace.rend(), *delim);
  if (rpos == trace.rend()) return std::nullopt;
  std::string raw;
  for (auto it = rpos.base(); it != end; ++it) raw += vocab.contains(*it) ? vocab.surface(*it) : "";
  std::string norm = normalize_answer(raw);
  if (norm.empty()) return std::nullopt;
  return norm;
}

Verdict verify(const Task& task, TokenSpan trace, const Vocabulary& vocab, std::size_t length_cap) {
  Verdict verdict;
  auto eos = std::find(trace.begin(), trace.end(), vocab.eos());
  const bool terminated = eos != trace.end() && std::size_t(eos - trace.begin()) < length_cap;
  verdict.extracted_answer = extract_answer(vocab, trace);
  verdict.correct = terminated && verdict.extracted_answer &&
                    *verdict.extracted_answer == normalize_answer(task.reference_answer);
  return verdict;
}

Verdict verify(const Task& task, TokenSpan trace) { return verify(task, trace, task_vocabulary()); }

// ---------------------------------------------------------------------------
// Serialization

void write_tasks(std::ostream& out, const std::vector<Task>& tasks, const Vocabulary& vocab) {
  for (const auto& t : tasks) {
    json rec{{"id", t.id},
             {"family", to_string(t.family)},
             {"prompt", vocab.surfaces(t.prompt)},
             {"reference_answer", t.reference_answer}};
    out << rec.dump() << '\n';
  }
  if (!out) throw Error(Errc::sink_write_failure, "writing tasks");
}

std::vector<Task> read_tasks(std::istream& in, const Vocabulary& vocab) {
  std::vector<Task> tasks;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      json rec = json::parse(line);
      Task t;
      t.id = rec.at("id").get<std::string>();
      t.family = parse_family(rec.at("family").get<std::string>());
      t.prompt = vocab.from_surfaces(rec.at("prompt").get<std::vector<std::string>>());
      t.reference_answer = rec.at("reference_answer").get<std::string>();
      tasks.push_back(std::move(t));
    } catch (const json::exception& e) {
      throw Error(Errc::bad_format, std::string("task record: ") + e.what());
    }
  }
  return tasks;
}

}  // namespace edu
