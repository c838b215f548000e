#include "edu/tree.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <istream>
#include <ostream>

namespace edu {

using nlohmann::json;

const char* to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::edu: return "edu";
    case StrategyKind::sample_edu: return "sample_edu";
    case StrategyKind::p_edu: return "p_edu";
    case StrategyKind::mcts_edu: return "mcts_edu";
    case StrategyKind::ht_bon: return "ht_bon";
  }
  return "unknown";
}

StrategyKind parse_strategy(std::string_view name) {
  for (auto k : {StrategyKind::edu, StrategyKind::sample_edu, StrategyKind::p_edu, StrategyKind::mcts_edu,
                 StrategyKind::ht_bon})
    if (name == to_string(k)) return k;
  if (name == "sample-edu") return StrategyKind::sample_edu;
  if (name == "p-edu") return StrategyKind::p_edu;
  if (name == "mcts-edu" || name == "mcts") return StrategyKind::mcts_edu;
  if (name == "ht" || name == "ht-bon") return StrategyKind::ht_bon;
  throw Error(Errc::invalid_argument, "unknown strategy '" + std::string(name) + "'");
}

void StrategyConfig::validate() const {
  policy.validate();
  if (!(temperature >= 0.0)) throw Error(Errc::invalid_argument, "temperature must be >= 0");
  if (!(prune_threshold >= 0.0 && prune_threshold <= 1.0))
    throw Error(Errc::invalid_argument, "prune threshold must lie in [0,1]");
  if (rollout_depth < 1) throw Error(Errc::invalid_argument, "rollout depth must be >= 1");
  if (n_samples < 1) throw Error(Errc::invalid_argument, "n_samples must be >= 1");
  if (length_cap < 1) throw Error(Errc::invalid_argument, "length cap must be >= 1");
}

std::size_t StrategyConfig::budget() const {
  return kind == StrategyKind::ht_bon ? n_samples : policy.max_branches;
}

void to_json(json& j, const StrategyConfig& c) {
  j = json{{"kind", to_string(c.kind)}, {"length_cap", c.length_cap}};
  if (c.kind == StrategyKind::ht_bon) {
    j["n_samples"] = c.n_samples;
    j["temperature"] = c.temperature;
    return;
  }
  j["entropy_threshold"] = c.policy.threshold_nats;
  j["epsilon"] = c.policy.epsilon;
  j["max_branches"] = c.policy.max_branches;
  j["whitelist"] = std::vector<std::string>(c.policy.whitelist.begin(), c.policy.whitelist.end());
  if (c.kind == StrategyKind::sample_edu) j["temperature"] = c.temperature;
  if (c.kind == StrategyKind::p_edu) {
    j["prune_threshold"] = c.prune_threshold;
    j["prune_first_branch_only"] = c.prune_first_branch_only;
  }
  if (c.kind == StrategyKind::mcts_edu) j["rollout_depth"] = c.rollout_depth;
}

void from_json(const json& j, StrategyConfig& c) {
  c = StrategyConfig{};
  c.kind = parse_strategy(j.at("kind").get<std::string>());
  c.length_cap = j.value("length_cap", kDefaultLengthCap);
  c.n_samples = j.value("n_samples", c.n_samples);
  c.temperature = j.value("temperature", c.temperature);
  c.policy.threshold_nats = j.value("entropy_threshold", c.policy.threshold_nats);
  c.policy.epsilon = j.value("epsilon", c.policy.epsilon);
  c.policy.max_branches = j.value("max_branches", c.policy.max_branches);
  if (j.contains("whitelist")) {
    auto w = j.at("whitelist").get<std::vector<std::string>>();
    c.policy.whitelist = std::set<std::string>(w.begin(), w.end());
  }
  c.prune_threshold = j.value("prune_threshold", c.prune_threshold);
  c.prune_first_branch_only = j.value("prune_first_branch_only", c.prune_first_branch_only);
  c.rollout_depth = j.value("rollout_depth", c.rollout_depth);
}

// ---------------------------------------------------------------------------

std::vector<NodeId> DecodeTree::path(NodeId node) const {
  std::vector<NodeId> out;
  for (NodeId n = node; n != kNoNode; n = nodes[n].parent) out.push_back(n);
  std::reverse(out.begin(), out.end());
  return out;
}

TokenSeq DecodeTree::path_tokens(NodeId node) const {
  TokenSeq out;
  for (NodeId n : path(node)) out.insert(out.end(), nodes[n].span.begin(), nodes[n].span.end());
  return out;
}

std::size_t DecodeTree::path_offset(NodeId node) const {
  std::size_t off = 0;
  for (NodeId n = nodes[node].parent; n != kNoNode; n = nodes[n].parent) off += nodes[n].span.size();
  return off;
}

std::vector<NodeId> DecodeTree::leaves() const {
  std::vector<NodeId> out;
  // preorder keeps left-to-right order
  std::vector<NodeId> stack{0};
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (nodes[n].children.empty()) {
      out.push_back(n);
      continue;
    }
    for (auto it = nodes[n].children.rbegin(); it != nodes[n].children.rend(); ++it) stack.push_back(*it);
  }
  return out;
}

std::vector<NodeId> DecodeTree::surviving_leaves() const {
  std::vector<NodeId> out;
  for (NodeId n : leaves())
    if (nodes[n].terminal && !nodes[n].pruned) out.push_back(n);
  return out;
}

std::size_t DecodeTree::branch_events(NodeId leaf) const {
  std::size_t events = 0;
  for (NodeId n : path(leaf))
    if (nodes[n].branch_token) ++events;
  return events;
}

std::size_t DecodeTree::span_token_sum() const {
  std::size_t s = 0;
  for (const auto& n : nodes) s += n.span.size();
  return s;
}

// ---------------------------------------------------------------------------

void write_tree(std::ostream& out, const DecodeTree& tree, const Vocabulary& vocab) {
  json header{{"type", "tree"},
              {"task_id", tree.task_id},
              {"seed", tree.seed},
              {"strategy", tree.strategy},
              {"leaf_count", tree.leaf_count},
              {"total_tokens", tree.total_tokens},
              {"rollout_tokens", tree.rollout_tokens},
              {"node_count", tree.nodes.size()}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    json rec{{"type", "node"},
             {"id", i},
             {"parent", n.parent == kNoNode ? json(nullptr) : json(n.parent)},
             {"span", n.span},
             {"span_text", vocab.join(n.span)},
             {"terminal", n.terminal}};
    if (n.branch_token) {
      rec["branch_token"] = *n.branch_token;
      rec["branch_surface"] = vocab.surface(*n.branch_token);
    }
    if (n.entropy_at_branch) rec["entropy"] = *n.entropy_at_branch;
    if (n.forced) rec["forced"] = true;
    if (n.pruned) rec["pruned"] = true;
    if (n.score) rec["score"] = *n.score;
    if (n.verdict) {
      rec["verdict"] = {{"correct", n.verdict->correct}};
      if (n.verdict->extracted_answer) rec["verdict"]["answer"] = *n.verdict->extracted_answer;
    }
    out << rec.dump() << '\n';
  }
  if (!out) throw Error(Errc::sink_write_failure, "writing tree " + tree.task_id);
}

std::vector<DecodeTree> read_trees(std::istream& in) {
  std::vector<DecodeTree> trees;
  std::string line;
  std::size_t expected = 0;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line);
      const auto type = rec.at("type").get<std::string>();
      if (type == "tree") {
        if (!trees.empty() && trees.back().nodes.size() != expected)
          throw Error(Errc::bad_format, "tree " + trees.back().task_id + " truncated");
        DecodeTree t;
        t.task_id = rec.at("task_id").get<std::string>();
        t.seed = rec.at("seed").get<std::uint64_t>();
        t.strategy = rec.at("strategy").get<StrategyConfig>();
        t.leaf_count = rec.at("leaf_count").get<std::size_t>();
        t.total_tokens = rec.at("total_tokens").get<std::size_t>();
        t.rollout_tokens = rec.value("rollout_tokens", std::size_t{0});
        expected = rec.at("node_count").get<std::size_t>();
        trees.push_back(std::move(t));
        continue;
      }
      if (type != "node" || trees.empty()) throw Error(Errc::bad_format, "node record outside a tree");
      auto& t = trees.back();
      if (rec.at("id").get<std::size_t>() != t.nodes.size()) throw Error(Errc::bad_format, "node ids out of order");
      BranchNode n;
      n.parent = rec.at("parent").is_null() ? kNoNode : rec.at("parent").get<NodeId>();
      n.span = rec.at("span").get<TokenSeq>();
      n.terminal = rec.at("terminal").get<bool>();
      if (rec.contains("branch_token")) n.branch_token = rec.at("branch_token").get<TokenId>();
      if (rec.contains("entropy")) n.entropy_at_branch = rec.at("entropy").get<double>();
      n.forced = rec.value("forced", false);
      n.pruned = rec.value("pruned", false);
      if (rec.contains("score")) n.score = rec.at("score").get<double>();
      if (rec.contains("verdict")) {
        Verdict v;
        v.correct = rec["verdict"].at("correct").get<bool>();
        if (rec["verdict"].contains("answer")) v.extracted_answer = rec["verdict"]["answer"].get<std::string>();
        n.verdict = v;
      }
      if (n.parent != kNoNode) {
        if (n.parent >= t.nodes.size()) throw Error(Errc::bad_format, "parent after child");
        t.nodes[n.parent].children.push_back(t.nodes.size());
      }
      t.nodes.push_back(std::move(n));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::bad_format, std::string("tree record: ") + e.what());
  }
  if (!trees.empty() && trees.back().nodes.size() != expected)
    throw Error(Errc::bad_format, "tree " + trees.back().task_id + " truncated");
  return trees;
}

}  // namespace edu
