#pragma once

// Synthetic verifiable reasoning tasks.
//
// Every family is a k-step recurrence y_i = f(y_{i-1}) started from x0. A
// prompt is `x<n> <op> <x0>`; a solution trace is
//
//   <opener> { r<n-i> <op> <y_i> <sep> }... <connective> answer = <y_n> <eos>
//
// where the separator after the final step is replaced by a connective. The
// layout keeps every dependency within four tokens so an order-5 n-gram can
// represent the whole solution procedure.

#include "edu/common.hpp"
#include "edu/vocabulary.hpp"

#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace edu {

enum class TaskFamily { chain_arithmetic, modular_sum, digit_product, scripted };

const char* to_string(TaskFamily family);
/// Throws Errc::unknown_family.
TaskFamily parse_family(std::string_view name);

struct Task {
  std::string id;
  TokenSeq prompt;
  std::string reference_answer;
  TaskFamily family = TaskFamily::chain_arithmetic;

  friend bool operator==(const Task&, const Task&) = default;
};

struct Verdict {
  bool correct = false;
  std::optional<std::string> extracted_answer;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

/// Shared vocabulary of every built-in family.
const Vocabulary& task_vocabulary();

const std::vector<std::string>& opener_words();
const std::vector<std::string>& connective_words();
const std::vector<std::string>& separator_tokens();

inline constexpr std::size_t kDefaultLengthCap = 256;
inline constexpr const char* kAnswerDelimiter = "=";

/// Parameters of a built-in task decoded from its prompt.
struct Recurrence {
  TaskFamily family;
  int start = 0;
  int operand = 0;
  int steps = 0;

  int apply(int value) const;
  /// True where the teacher is prone to its family's systematic slip.
  bool is_hard(int value) const;
  /// The family's systematic slip for a hard step.
  int misconception(int value) const;
  int value_limit() const;  // values lie in [0, value_limit)
  std::string op_surface() const;
};

std::optional<Recurrence> parse_prompt(const Vocabulary& vocab, TokenSpan prompt);

std::vector<Task> generate_tasks(TaskFamily family, std::size_t count, int difficulty, std::uint64_t seed);

/// Canonical error-free solution trace (generated tokens only, ends at eos).
TokenSeq reference_trace(const Task& task);

/// Strip whitespace, then leading zeros (a lone "0" survives).
std::string normalize_answer(std::string_view raw);

/// Answer after the last delimiter, up to eos; nullopt if there is none.
std::optional<std::string> extract_answer(const Vocabulary& vocab, TokenSpan trace);

Verdict verify(const Task& task, TokenSpan trace, const Vocabulary& vocab,
               std::size_t length_cap = kDefaultLengthCap);
Verdict verify(const Task& task, TokenSpan trace);

/// Noise model of the solver that writes the n-gram training corpus.
struct TeacherConfig {
  double easy_correct = 0.92;
  double hard_correct = 0.46;
  double hard_misconception = 0.36;
  /// Relative weights of separators "\n", ";", ":".
  std::vector<double> separator_weights{0.6, 0.25, 0.15};
  int min_steps = 1;
  int max_steps = 6;
};

/// Prompt + noisy teacher trace for `count` random tasks of the family.
std::vector<TokenSeq> teacher_corpus(TaskFamily family, std::size_t count, const TeacherConfig& config,
                                     std::uint64_t seed);

void write_tasks(std::ostream& out, const std::vector<Task>& tasks, const Vocabulary& vocab);
std::vector<Task> read_tasks(std::istream& in, const Vocabulary& vocab);

}  // namespace edu
