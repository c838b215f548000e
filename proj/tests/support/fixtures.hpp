#pragma once
// Scripted models, scorers and trees shared by the unit tests and the
// acceptance runner.
#include "edu/lm.hpp"
#include "edu/prm_score.hpp"
#include "edu/sampler.hpp"
#include "edu/tree.hpp"

#include <random>
#include <string>
#include <vector>

namespace edu::testing {

/// "<eos>", letters "a".."l", "answer", "=", digits "0".."9", "then", "if",
/// plus the whitelisted symbols "\n", ":", "(" and " ".
const Vocabulary& scripted_vocabulary();

/// Logit vector with the listed surfaces at the given logits and every other
/// token at -40.
LogitVector peaked(const Vocabulary& vocab, const std::vector<std::pair<std::string, double>>& weights);

TokenSeq ids(const Vocabulary& vocab, const std::string& joined);

Task scripted_task(const Vocabulary& vocab, const std::string& id, const std::string& prompt,
                   const std::string& answer);

/// Deterministic pseudo-random logits: every (prompt, prefix, token) triple
/// hashes to a uniform draw scaled by `sharpness`; eos grows more likely with
/// the prefix length so every path ends well before the cap.
class HashModel final : public LanguageModel {
 public:
  HashModel(Vocabulary vocab, std::uint64_t salt, double sharpness, double eos_slope = 0.35);
  ModelKind kind() const override { return ModelKind::table; }
  std::string identity() const override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  LogitVector logits(TokenSpan prompt, TokenSpan prefix) const override;

 private:
  Vocabulary vocab_;
  std::uint64_t salt_;
  double sharpness_;
  double eos_slope_;
};

/// Leaves of the EDU tree computed by direct recursion with its own
/// extended-precision entropy, independent of the library builder.
struct ReferenceLeaf {
  TokenSeq trace;
  std::size_t branch_events = 0;
};
struct ReferenceTree {
  std::vector<ReferenceLeaf> leaves;
  std::size_t total_tokens = 0;
};
ReferenceTree reference_edu(const LanguageModel& model, const Task& task, const StrategyConfig& config);

/// Tasks whose first choice hides a delayed reward: the immediate score
/// favours the wrong child on trap tasks while deeper lookahead exposes it.
/// Every path holds exactly three anchors, so budgets of 8 or more never
/// change the decisions.
struct DelayedRewardSuite {
  std::shared_ptr<TableModel> model;
  std::vector<Task> tasks;
  Scorer scorer;
  std::size_t traps = 0;
};
DelayedRewardSuite delayed_reward_suite(std::size_t count, std::uint64_t seed);

/// Random full binary tree (children 0 or 2) with random verdicts on the
/// leaves and non-empty random spans.
DecodeTree random_verified_tree(std::mt19937_64& rng, std::size_t max_depth, const Vocabulary& vocab);

}  // namespace edu::testing
