#include "edu/sampler.hpp"

#include <algorithm>
#include <random>

namespace edu {

namespace {

struct Budget {
  std::size_t share = 1;
  std::size_t depth = 0;
};

enum class Stop { terminal, anchor };

struct Advance {
  Stop stop = Stop::terminal;
  AnchorDecision decision;
};

class TreeBuilder {
 public:
  TreeBuilder(const LanguageModel& model, const Task& task, const StrategyConfig& config, std::uint64_t seed)
      : model_(model), task_(task), config_(config), vocab_(model.vocabulary()), seed_(seed),
        max_depth_(ceil_log2(config.policy.max_branches)) {
    config_.validate();
    tree_.task_id = task.id;
    tree_.strategy = config;
    tree_.seed = seed;
    tree_.nodes.emplace_back();
  }

  DecodeTree finish() {
    tree_.leaf_count = tree_.leaves().size();
    tree_.total_tokens = tree_.span_token_sum() + tree_.rollout_tokens;
    return std::move(tree_);
  }

  DecodeTree& tree() { return tree_; }

  bool stochastic() const { return config_.kind == StrategyKind::sample_edu; }

  /// Decodes into `node` until the path terminates or reaches an anchor the
  /// budget allows. `path` is the full generated sequence and is extended.
  Advance advance(NodeId node, TokenSeq& path, const Budget& budget) {
    std::mt19937_64 rng(derive_seed(seed_, task_.id + "#" + std::to_string(node)));
    for (;;) {
      if (ends_path(path)) return {Stop::terminal, {}};
      LogitVector logits = next_logits(model_, task_.prompt, path);
      auto dist = softmax_entropy(logits, config_.policy.epsilon);
      const std::size_t remaining = budget.depth < max_depth_ ? budget.share - 1 : 0;
      AnchorDecision d = decide_branch(dist, vocab_, config_.policy, remaining, path.empty());
      if (d.is_anchor) return {Stop::anchor, d};
      TokenId next = d.top2.first;
      if (stochastic()) next = sample(logits, rng);
      tree_.nodes[node].span.push_back(next);
      path.push_back(next);
    }
  }

  /// Greedy continuation that ignores the budget; used for lookahead. With
  /// `through` set, the anchor at the current position is passed with its
  /// top-1 token. Stops at the next anchor or when the path terminates.
  Stop rollout_segment(TokenSeq& path, std::size_t& generated, bool through) {
    for (;;) {
      if (ends_path(path)) return Stop::terminal;
      LogitVector logits = next_logits(model_, task_.prompt, path);
      auto dist = softmax_entropy(logits, config_.policy.epsilon);
      AnchorDecision d = decide_branch(dist, vocab_, config_.policy, 1, false);
      if (d.is_anchor && !through) return Stop::anchor;
      through = false;
      path.push_back(d.top2.first);
      ++generated;
    }
  }

  bool ends_path(const TokenSeq& path) const {
    return (!path.empty() && path.back() == vocab_.eos()) || path.size() >= config_.length_cap;
  }

  void mark_terminal(NodeId node, const TokenSeq& path) {
    auto& n = tree_.nodes[node];
    n.terminal = true;
    n.verdict = verify(task_, path, vocab_, config_.length_cap);
  }

  /// Creates the two children of an anchor; returns their ids.
  std::pair<NodeId, NodeId> split(NodeId node, const AnchorDecision& d, bool forced) {
    NodeId a = add_child(node, d.top2.first, d.entropy_nats, forced);
    NodeId b = add_child(node, d.top2.second, d.entropy_nats, forced);
    return {a, b};
  }

  NodeId add_child(NodeId parent, TokenId token, double entropy, bool forced) {
    BranchNode c;
    c.parent = parent;
    c.span = {token};
    c.branch_token = token;
    c.entropy_at_branch = entropy;
    c.forced = forced;
    tree_.nodes.push_back(std::move(c));
    NodeId id = tree_.nodes.size() - 1;
    tree_.nodes[parent].children.push_back(id);
    return id;
  }

  const Task& task() const { return task_; }
  const StrategyConfig& config() const { return config_; }

 private:
  TokenId sample(const LogitVector& logits, std::mt19937_64& rng) const {
    Eigen::VectorXd p = tempered_probs(logits, config_.temperature);
    std::discrete_distribution<int> dist(p.data(), p.data() + p.size());
    return TokenId(dist(rng));
  }

  const LanguageModel& model_;
  const Task& task_;
  StrategyConfig config_;
  const Vocabulary& vocab_;
  std::uint64_t seed_;
  std::size_t max_depth_;
  DecodeTree tree_;
};

// --- EDU / Sample-EDU ------------------------------------------------------

void grow(TreeBuilder& b, NodeId node, TokenSeq path, Budget budget) {
  Advance adv = b.advance(node, path, budget);
  if (adv.stop == Stop::terminal) {
    b.mark_terminal(node, path);
    return;
  }
  const bool forced = path.empty();
  auto [top, runner] = b.split(node, adv.decision, forced);
  const Budget child_top{(budget.share + 1) / 2, budget.depth + 1};
  const Budget child_runner{budget.share / 2, budget.depth + 1};
  TokenSeq left = path;
  left.push_back(adv.decision.top2.first);
  grow(b, top, std::move(left), child_top);
  path.push_back(adv.decision.top2.second);
  grow(b, runner, std::move(path), child_runner);
}

DecodeTree build_edu_family(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                            std::uint64_t seed, TokenSpan prefix = {}) {
  TreeBuilder b(model, task, config, seed);
  grow(b, 0, TokenSeq(prefix.begin(), prefix.end()), Budget{config.policy.max_branches, 0});
  return b.finish();
}

// --- P-EDU -----------------------------------------------------------------

struct PruneState {
  std::size_t survivors = 0;  // terminal, unpruned leaves so far
  std::size_t pending = 0;    // retained children not yet expanded
};

void grow_pruned(TreeBuilder& b, const Scorer& scorer, PruneState& st, NodeId node, TokenSeq path,
                 Budget budget, Advance adv, std::size_t branch_index) {
  if (adv.stop == Stop::terminal) {
    b.mark_terminal(node, path);
    ++st.survivors;
    return;
  }
  const bool forced = path.empty();
  auto [top, runner] = b.split(node, adv.decision, forced);
  struct Child {
    NodeId id;
    TokenSeq path;
    Budget budget;
    Advance adv;
    double score = 1.0;
    bool keep = true;
  };
  std::array<Child, 2> kids{Child{top, path, {(budget.share + 1) / 2, budget.depth + 1}, {}},
                            Child{runner, path, {budget.share / 2, budget.depth + 1}, {}}};
  kids[0].path.push_back(adv.decision.top2.first);
  kids[1].path.push_back(adv.decision.top2.second);
  const bool scoring = !b.config().prune_first_branch_only || branch_index == 0;
  for (auto& k : kids) {
    k.adv = b.advance(k.id, k.path, k.budget);
    if (scoring) {
      k.score = scorer(b.task(), k.path).p_correct;
      b.tree().nodes[k.id].score = k.score;
      k.keep = !(k.score < b.config().prune_threshold);
    }
  }
  if (!kids[0].keep && !kids[1].keep && st.survivors == 0 && st.pending == 0) {
    // never leave the search without a live path
    kids[kids[1].score > kids[0].score ? 1 : 0].keep = true;
  }
  for (auto& k : kids) {
    if (k.keep) {
      ++st.pending;
    } else {
      auto& n = b.tree().nodes[k.id];
      n.pruned = true;
      if (k.adv.stop == Stop::terminal) b.mark_terminal(k.id, k.path);
    }
  }
  for (auto& k : kids) {
    if (!k.keep) continue;
    --st.pending;
    grow_pruned(b, scorer, st, k.id, std::move(k.path), k.budget, k.adv, branch_index + 1);
  }
}

// --- MCTS-EDU --------------------------------------------------------------

void grow_mcts(TreeBuilder& b, const Scorer& scorer, NodeId node, TokenSeq path, Budget budget) {
  Advance adv = b.advance(node, path, budget);
  if (adv.stop == Stop::terminal) {
    b.mark_terminal(node, path);
    return;
  }
  const bool forced = path.empty();
  auto [top, runner] = b.split(node, adv.decision, forced);
  const std::array<NodeId, 2> ids{top, runner};
  const std::array<TokenId, 2> tokens{adv.decision.top2.first, adv.decision.top2.second};
  std::array<double, 2> value{};
  std::array<TokenSeq, 2> first_segment;
  std::array<bool, 2> first_terminal{};
  for (int i = 0; i < 2; ++i) {
    TokenSeq sim = path;
    sim.push_back(tokens[i]);
    std::size_t generated = 0, segment_end = 0;
    double total = 0;
    std::size_t segments = 0;
    for (std::size_t depth = 0; depth < b.config().rollout_depth; ++depth) {
      Stop stop = b.rollout_segment(sim, generated, depth > 0);
      total += scorer(b.task(), sim).p_correct;
      ++segments;
      if (depth == 0) {
        segment_end = sim.size();
        first_terminal[i] = stop == Stop::terminal;
      }
      if (stop == Stop::terminal) break;
    }
    value[i] = total / double(segments);
    first_segment[i].assign(sim.begin() + std::ptrdiff_t(path.size()), sim.begin() + std::ptrdiff_t(segment_end));
    // tokens beyond the first segment exist only in the lookahead
    b.tree().rollout_tokens += generated - (first_segment[i].size() - 1);
    b.tree().nodes[ids[i]].score = value[i];
  }
  const int commit = value[1] > value[0] ? 1 : 0;
  const int other = 1 - commit;
  {
    auto& stub = b.tree().nodes[ids[other]];
    stub.span = first_segment[other];
    stub.pruned = true;
    if (first_terminal[other]) {
      TokenSeq full = path;
      full.insert(full.end(), stub.span.begin(), stub.span.end());
      b.mark_terminal(ids[other], full);
    }
  }
  path.push_back(tokens[commit]);
  Budget next{budget.share > 1 ? budget.share - 1 : 1, budget.depth + 1};
  grow_mcts(b, scorer, ids[commit], std::move(path), next);
}

}  // namespace

DecodeTree build_edu_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                          std::uint64_t seed, TokenSpan prefix) {
  if (config.kind != StrategyKind::edu) throw Error(Errc::invalid_argument, "build_edu_tree needs kind=edu");
  return build_edu_family(model, task, config, seed, prefix);
}

DecodeTree build_sample_edu_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                                 std::uint64_t seed) {
  if (config.kind != StrategyKind::sample_edu)
    throw Error(Errc::invalid_argument, "build_sample_edu_tree needs kind=sample_edu");
  return build_edu_family(model, task, config, seed);
}

DecodeTree build_pruned_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                             const Scorer& scorer, std::uint64_t seed) {
  if (config.kind != StrategyKind::p_edu) throw Error(Errc::invalid_argument, "build_pruned_tree needs kind=p_edu");
  TreeBuilder b(model, task, config, seed);
  PruneState st;
  TokenSeq path;
  Budget root{config.policy.max_branches, 0};
  Advance adv = b.advance(0, path, root);
  grow_pruned(b, scorer, st, 0, std::move(path), root, adv, 0);
  return b.finish();
}

DecodeTree build_mcts_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                           const Scorer& scorer, std::uint64_t seed) {
  if (config.kind != StrategyKind::mcts_edu) throw Error(Errc::invalid_argument, "build_mcts_tree needs kind=mcts_edu");
  TreeBuilder b(model, task, config, seed);
  grow_mcts(b, scorer, 0, {}, Budget{config.policy.max_branches, 0});
  return b.finish();
}

DecodeTree build_ht_candidates(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                               std::uint64_t seed) {
  if (config.kind != StrategyKind::ht_bon) throw Error(Errc::invalid_argument, "build_ht_candidates needs kind=ht_bon");
  config.validate();
  const auto& vocab = model.vocabulary();
  DecodeTree tree;
  tree.task_id = task.id;
  tree.strategy = config;
  tree.seed = seed;
  tree.nodes.emplace_back();
  for (std::size_t i = 0; i < config.n_samples; ++i) {
    std::mt19937_64 rng(derive_seed(seed, task.id + "/ht/" + std::to_string(i)));
    TokenSeq trace;
    while (!(!trace.empty() && trace.back() == vocab.eos()) && trace.size() < config.length_cap) {
      Eigen::VectorXd p = tempered_probs(next_logits(model, task.prompt, trace), config.temperature);
      std::discrete_distribution<int> dist(p.data(), p.data() + p.size());
      trace.push_back(TokenId(dist(rng)));
    }
    BranchNode chain;
    chain.parent = 0;
    chain.terminal = true;
    chain.verdict = verify(task, trace, vocab, config.length_cap);
    chain.span = std::move(trace);
    tree.nodes.push_back(std::move(chain));
    tree.nodes[0].children.push_back(tree.nodes.size() - 1);
  }
  tree.leaf_count = config.n_samples;
  tree.total_tokens = tree.span_token_sum();
  return tree;
}

DecodeTree build_tree(const LanguageModel& model, const Task& task, const StrategyConfig& config,
                      const Scorer& scorer, std::uint64_t seed) {
  switch (config.kind) {
    case StrategyKind::edu: return build_edu_tree(model, task, config, seed);
    case StrategyKind::sample_edu: return build_sample_edu_tree(model, task, config, seed);
    case StrategyKind::p_edu: return build_pruned_tree(model, task, config, scorer, seed);
    case StrategyKind::mcts_edu: return build_mcts_tree(model, task, config, scorer, seed);
    case StrategyKind::ht_bon: return build_ht_candidates(model, task, config, seed);
  }
  throw Error(Errc::invalid_argument, "unknown strategy");
}

TokenSeq greedy_trace(const LanguageModel& model, const Task& task, TokenSpan prefix, std::size_t length_cap) {
  const auto& vocab = model.vocabulary();
  TokenSeq path(prefix.begin(), prefix.end());
  while (!(!path.empty() && path.back() == vocab.eos()) && path.size() < length_cap)
    path.push_back(top2(next_logits(model, task.prompt, path)).first);
  return path;
}

}  // namespace edu
