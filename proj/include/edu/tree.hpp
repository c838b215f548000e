#pragma once

#include "edu/common.hpp"
#include "edu/entropy.hpp"
#include "edu/task.hpp"

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace edu {

enum class StrategyKind { edu, sample_edu, p_edu, mcts_edu, ht_bon };

const char* to_string(StrategyKind kind);
StrategyKind parse_strategy(std::string_view name);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::edu;
  AnchorPolicy policy;
  double temperature = 0.7;         // sample_edu, ht_bon
  double prune_threshold = 0.2;     // p_edu
  bool prune_first_branch_only = false;
  std::size_t rollout_depth = 3;    // mcts_edu
  std::size_t n_samples = 8;        // ht_bon
  std::size_t length_cap = kDefaultLengthCap;

  void validate() const;
  /// Candidate count N: n_samples for ht_bon, max_branches otherwise.
  std::size_t budget() const;
};

void to_json(nlohmann::json& j, const StrategyConfig& c);
void from_json(const nlohmann::json& j, StrategyConfig& c);

using NodeId = std::size_t;
inline constexpr NodeId kNoNode = std::numeric_limits<NodeId>::max();

struct BranchNode {
  NodeId parent = kNoNode;
  /// Tokens generated since the parent's branch point; starts with branch_token.
  TokenSeq span;
  std::optional<TokenId> branch_token;
  std::optional<double> entropy_at_branch;
  /// Branch taken by the unconditional first-position rule.
  bool forced = false;
  std::vector<NodeId> children;
  bool terminal = false;
  /// Dropped by P-EDU pruning or left unexpanded by MCTS commitment.
  bool pruned = false;
  std::optional<double> score;
  std::optional<Verdict> verdict;
};

struct DecodeTree {
  std::string task_id;
  std::vector<BranchNode> nodes;  // nodes[0] is the root
  std::size_t leaf_count = 0;
  std::size_t total_tokens = 0;
  /// Lookahead tokens spent by MCTS that are not part of any node span.
  std::size_t rollout_tokens = 0;
  StrategyConfig strategy;
  std::uint64_t seed = 0;

  const BranchNode& root() const { return nodes.front(); }
  std::vector<NodeId> path(NodeId node) const;
  TokenSeq path_tokens(NodeId node) const;
  /// Tokens on the path strictly before the node's span.
  std::size_t path_offset(NodeId node) const;
  std::vector<NodeId> leaves() const;
  /// Terminal leaves that were not pruned, in left-to-right order.
  std::vector<NodeId> surviving_leaves() const;
  std::size_t branch_events(NodeId leaf) const;
  std::size_t span_token_sum() const;
};

inline std::size_t ceil_log2(std::size_t n) {
  std::size_t d = 0;
  while ((std::size_t{1} << d) < n) ++d;
  return d;
}

void write_tree(std::ostream& out, const DecodeTree& tree, const Vocabulary& vocab);
std::vector<DecodeTree> read_trees(std::istream& in);

}  // namespace edu
