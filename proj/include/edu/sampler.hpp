#pragma once

// Decoding-tree construction for the EDU family of strategies and the
// high-temperature Best-of-N baseline.
//
// Leaf budget: a node holding budget share s may branch when s >= 2 and it
// has made fewer than ceil(log2 N) branch events; an EDU branch hands
// ceil(s/2) to the top-1 child and floor(s/2) to the runner-up. Budget
// decisions are therefore local to a path, which keeps every pruned or
// reordered build a sub-tree of the plain EDU build.

#include "edu/lm.hpp"
#include "edu/prm_score.hpp"
#include "edu/tree.hpp"

namespace edu {

/// With a non-empty `prefix` the tree continues an existing partial trace;
/// node spans then hold only the newly generated tokens.
DecodeTree build_edu_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                          std::uint64_t seed, TokenSpan prefix = {});
DecodeTree build_sample_edu_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                                 std::uint64_t seed);
DecodeTree build_ht_candidates(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                               std::uint64_t seed);
DecodeTree build_pruned_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                             const Scorer& scorer, std::uint64_t seed);
DecodeTree build_mcts_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                           const Scorer& scorer, std::uint64_t seed);

/// Dispatches on config.kind. The scorer is only consulted by p_edu/mcts_edu.
DecodeTree build_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                      const Scorer& scorer, std::uint64_t seed);

/// Single greedy trace (argmax at every position) until eos or the cap.
TokenSeq greedy_trace(const LanguageModel& model, const Task& task, TokenSpan prefix = {},
                      std::size_t length_cap = kDefaultLengthCap);

}  // namespace edu
