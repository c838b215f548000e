#include "fixtures.hpp"

#include <cmath>
#include <sstream>

namespace edu::testing {

const Vocabulary& scripted_vocabulary() {
  static const Vocabulary vocab = [] {
    std::vector<std::string> t{"<eos>"};
    for (char c = 'a'; c <= 'l'; ++c) t.emplace_back(1, c);
    t.insert(t.end(), {"answer", "="});
    for (int d = 0; d < 10; ++d) t.push_back(std::to_string(d));
    t.insert(t.end(), {"then", "if", "\n", ":", "(", " ", "trap", "plain"});
    return Vocabulary(t, 0);
  }();
  return vocab;
}

LogitVector peaked(const Vocabulary& vocab, const std::vector<std::pair<std::string, double>>& weights) {
  LogitVector l = LogitVector::Constant(Eigen::Index(vocab.size()), -40.0);
  for (const auto& [s, w] : weights) l[vocab.id(s)] = w;
  return l;
}

TokenSeq ids(const Vocabulary& vocab, const std::string& joined) { return vocab.split(joined); }

Task scripted_task(const Vocabulary& vocab, const std::string& id, const std::string& prompt,
                   const std::string& answer) {
  Task t;
  t.id = id;
  t.prompt = ids(vocab, prompt);
  t.reference_answer = answer;
  t.family = TaskFamily::scripted;
  return t;
}

// ---------------------------------------------------------------------------

HashModel::HashModel(Vocabulary vocab, std::uint64_t salt, double sharpness, double eos_slope)
    : vocab_(std::move(vocab)), salt_(salt), sharpness_(sharpness), eos_slope_(eos_slope) {}

std::string HashModel::identity() const {
  std::ostringstream os;
  os << "hash:" << salt_ << ":" << sharpness_;
  return os.str();
}

LogitVector HashModel::logits(TokenSpan prompt, TokenSpan prefix) const {
  std::uint64_t h = mix_seed(salt_);
  for (TokenId t : prompt) h = mix_seed(h ^ std::uint64_t(t + 1));
  h = mix_seed(h ^ 0xabcdefULL);
  for (TokenId t : prefix) h = mix_seed(h ^ std::uint64_t(t + 1));
  LogitVector l(Eigen::Index(vocab_.size()));
  for (Eigen::Index v = 0; v < l.size(); ++v) {
    const double u = double(mix_seed(h + std::uint64_t(v)) >> 11) * 0x1.0p-53;
    l[v] = sharpness_ * (2.0 * u - 1.0);
  }
  l[vocab_.eos()] += eos_slope_ * double(prefix.size()) - 3.0;
  return l;
}

// ---------------------------------------------------------------------------

namespace {

void reference_grow(const LanguageModel& model, const Task& task, const StrategyConfig& config, TokenSeq path,
                    std::size_t share, std::size_t depth, std::size_t events, std::size_t node_start,
                    ReferenceTree& out) {
  const auto& vocab = model.vocabulary();
  const std::size_t max_depth = std::size_t(std::ceil(std::log2(double(config.policy.max_branches)) - 1e-12));
  for (;;) {
    if ((!path.empty() && path.back() == vocab.eos()) || path.size() >= config.length_cap) {
      out.total_tokens += path.size() - node_start;
      out.leaves.push_back({path, events});
      return;
    }
    LogitVector l = model.logits(task.prompt, path);
    // extended-precision softmax and entropy
    long double peak = l.maxCoeff(), z = 0;
    std::vector<long double> p(std::size_t(l.size()));
    for (std::size_t v = 0; v < p.size(); ++v) z += (p[v] = std::exp((long double)l[Eigen::Index(v)] - peak));
    long double h = 0;
    for (auto& q : p) {
      q /= z;
      if (q > 0) h -= q * std::log(q + (long double)config.policy.epsilon);
    }
    std::size_t first = 0, second = 1;
    for (std::size_t v = 0; v < p.size(); ++v)
      if (p[v] > p[first]) first = v;
    second = first == 0 ? 1 : 0;
    for (std::size_t v = 0; v < p.size(); ++v)
      if (v != first && p[v] > p[second]) second = v;
    const auto& wl = config.policy.whitelist;
    const bool symbol = wl.count(vocab.surface(TokenId(first))) || wl.count(vocab.surface(TokenId(second)));
    const bool uncertain = path.empty() || h > (long double)config.policy.threshold_nats;
    const bool budget = share >= 2 && depth < max_depth;
    if (uncertain && !symbol && budget) {
      out.total_tokens += path.size() - node_start;
      TokenSeq a = path, b = path;
      a.push_back(TokenId(first));
      b.push_back(TokenId(second));
      reference_grow(model, task, config, a, (share + 1) / 2, depth + 1, events + 1, path.size(), out);
      reference_grow(model, task, config, b, share / 2, depth + 1, events + 1, path.size(), out);
      return;
    }
    path.push_back(TokenId(first));
  }
}

}  // namespace

ReferenceTree reference_edu(const LanguageModel& model, const Task& task, const StrategyConfig& config) {
  ReferenceTree out;
  reference_grow(model, task, config, {}, config.policy.max_branches, 0, 0, 0, out);
  return out;
}

// ---------------------------------------------------------------------------

DelayedRewardSuite delayed_reward_suite(std::size_t count, std::uint64_t seed) {
  const auto& v = scripted_vocabulary();
  DelayedRewardSuite suite;
  // Right branch: a b {c|d} e {f|g} answer = 1 ; wrong branch: h i {c|d} j {k|l} answer = 0
  auto model = std::make_shared<TableModel>(v, peaked(v, {{"<eos>", 5.0}}), "delayed-reward");
  auto rule = [&](const std::string& suffix, LogitVector l, std::optional<std::size_t> position = std::nullopt) {
    TableModel::Rule r;
    r.position = position;
    r.suffix = suffix.empty() ? TokenSeq{} : ids(v, suffix);
    r.logits = std::move(l);
    model->add_rule(std::move(r));
  };
  const double even = 0.0;
  rule("", peaked(v, {{"a", even}, {"h", even}, {"then", even}}), 0);
  rule("a", peaked(v, {{"b", 5.0}}));
  rule("h", peaked(v, {{"i", 5.0}}));
  rule("b", peaked(v, {{"c", even}, {"d", even}, {"if", even}}));
  rule("i", peaked(v, {{"c", even}, {"d", even}, {"if", even}}));
  for (const char* mid : {"c", "d"}) {
    rule(std::string("b ") + mid, peaked(v, {{"e", 5.0}}));
    rule(std::string("i ") + mid, peaked(v, {{"j", 5.0}}));
  }
  rule("e", peaked(v, {{"f", even}, {"g", even}, {"then", even}}));
  rule("j", peaked(v, {{"k", even}, {"l", even}, {"then", even}}));
  for (const char* s : {"f", "g", "k", "l"}) rule(s, peaked(v, {{"answer", 5.0}}));
  rule("answer", peaked(v, {{"=", 5.0}}));
  for (const char* s : {"f", "g"}) rule(std::string(s) + " answer =", peaked(v, {{"1", 5.0}}));
  for (const char* s : {"k", "l"}) rule(std::string(s) + " answer =", peaked(v, {{"0", 5.0}}));
  suite.model = model;

  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    const bool trap = std::bernoulli_distribution(0.5)(rng);
    suite.traps += trap ? 1 : 0;
    suite.tasks.push_back(scripted_task(v, "delayed-" + std::to_string(i), trap ? "trap" : "plain", "1"));
  }
  const TokenId trap_id = v.id("trap"), a = v.id("a"), h = v.id("h");
  suite.scorer = [trap_id, a, h](const Task& task, TokenSpan prefix) -> PrmScore {
    if (prefix.empty()) return {0.5};
    const bool trap = !task.prompt.empty() && task.prompt.front() == trap_id;
    if (prefix.front() == a) return {trap ? 0.6 : 0.8};
    if (prefix.front() == h) {
      if (!trap) return {0.2};
      // looks best right after the branch, collapses once the path commits
      return {prefix.size() <= 2 ? 0.9 : 0.1};
    }
    return {0.0};
  };
  return suite;
}

// ---------------------------------------------------------------------------

namespace {

void random_subtree(std::mt19937_64& rng, DecodeTree& tree, NodeId node, std::size_t depth, std::size_t max_depth,
                    const Vocabulary& vocab) {
  std::uniform_int_distribution<TokenId> tok(1, TokenId(vocab.size()) - 1);
  std::uniform_int_distribution<int> len(1, 4);
  const bool split = depth < max_depth && std::bernoulli_distribution(depth == 0 ? 0.95 : 0.6)(rng);
  if (!split) {
    auto& n = tree.nodes[node];
    n.span.push_back(vocab.eos());
    n.terminal = true;
    n.verdict = Verdict{std::bernoulli_distribution(0.5)(rng), std::nullopt};
    return;
  }
  for (int c = 0; c < 2; ++c) {
    BranchNode child;
    child.parent = node;
    const int n = len(rng);
    for (int k = 0; k < n; ++k) child.span.push_back(tok(rng));
    child.branch_token = child.span.front();
    child.entropy_at_branch = 1.5;
    tree.nodes.push_back(std::move(child));
    const NodeId id = tree.nodes.size() - 1;
    tree.nodes[node].children.push_back(id);
    random_subtree(rng, tree, id, depth + 1, max_depth, vocab);
  }
}

}  // namespace

DecodeTree random_verified_tree(std::mt19937_64& rng, std::size_t max_depth, const Vocabulary& vocab) {
  DecodeTree tree;
  tree.task_id = "random-" + std::to_string(rng() % 1000000);
  tree.nodes.emplace_back();
  std::uniform_int_distribution<TokenId> tok(1, TokenId(vocab.size()) - 1);
  const int prefix = std::uniform_int_distribution<int>(0, 3)(rng);
  for (int k = 0; k < prefix; ++k) tree.nodes[0].span.push_back(tok(rng));
  random_subtree(rng, tree, 0, 0, max_depth, vocab);
  tree.leaf_count = tree.leaves().size();
  tree.total_tokens = tree.span_token_sum();
  return tree;
}

}  // namespace edu::testing
