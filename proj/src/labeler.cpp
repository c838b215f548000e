#include "edu/labeler.hpp"

#include "edu/entropy.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <istream>
#include <ostream>
#include <random>

namespace edu {

const char* to_string(LabelKind kind) { return kind == LabelKind::hard ? "hard" : "soft"; }

std::vector<LeafTally> tally_leaves(const DecodeTree& tree) {
  std::vector<LeafTally> tally(tree.nodes.size());
  // children always carry larger ids than their parent
  for (std::size_t i = tree.nodes.size(); i-- > 0;) {
    const auto& n = tree.nodes[i];
    if (n.pruned) continue;
    if (n.children.empty()) {
      if (!n.verdict) throw Error(Errc::unverified_leaf, tree.task_id + " node " + std::to_string(i));
      tally[i] = {n.verdict->correct ? 1u : 0u, 1};
      continue;
    }
    for (NodeId c : n.children) {
      tally[i].correct += tally[c].correct;
      tally[i].total += tally[c].total;
    }
  }
  return tally;
}

namespace {

LeafTally extra_tally(const ExtraCompletions& extra, const TokenSeq& prefix, NodeId node) {
  LeafTally t;
  if (!extra.model || !extra.task || extra.per_node == 0) return t;
  const auto& vocab = extra.model->vocabulary();
  for (std::size_t k = 0; k < extra.per_node; ++k) {
    std::mt19937_64 rng(derive_seed(extra.seed, extra.task->id + "/mc/" + std::to_string(node) + "/" +
                                                    std::to_string(k)));
    TokenSeq trace = prefix;
    while (!(!trace.empty() && trace.back() == vocab.eos()) && trace.size() < kDefaultLengthCap) {
      Eigen::VectorXd p = tempered_probs(next_logits(*extra.model, extra.task->prompt, trace), extra.temperature);
      std::discrete_distribution<int> pick(p.data(), p.data() + p.size());
      trace.push_back(TokenId(pick(rng)));
    }
    t.correct += verify(*extra.task, trace, vocab).correct ? 1 : 0;
    ++t.total;
  }
  return t;
}

void collect(const DecodeTree& tree, const std::vector<LeafTally>& tally, const ExtraCompletions& extra,
             NodeId node, TokenSeq prefix, std::size_t segment, std::vector<LabeledExample>& out) {
  const auto& n = tree.nodes[node];
  if (n.pruned || tally[node].total == 0) return;
  prefix.insert(prefix.end(), n.span.begin(), n.span.end());
  if (!n.span.empty()) {
    LabeledExample ex;
    ex.fragment = {tree.task_id, prefix, n.span, segment};
    if (n.children.empty()) {
      ex.label = tally[node].correct ? 1.0 : 0.0;
      ex.label_kind = LabelKind::hard;
    } else {
      LeafTally t = tally[node];
      LeafTally e = extra_tally(extra, prefix, node);
      ex.label = double(t.correct + e.correct) / double(t.total + e.total);
    }
    out.push_back(std::move(ex));
    ++segment;
  }
  for (NodeId c : n.children) collect(tree, tally, extra, c, prefix, segment, out);
}

}  // namespace

std::vector<LabeledExample> label_tree(const DecodeTree& tree, const ExtraCompletions& extra) {
  std::vector<LabeledExample> out;
  if (tree.nodes.empty()) return out;
  auto tally = tally_leaves(tree);
  collect(tree, tally, extra, 0, {}, 0, out);
  return out;
}

std::string format_label(double label) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", label);
  return buf;
}

EmitStats emit_dataset(std::ostream& out, const std::vector<LabeledExample>& examples, const Vocabulary& vocab) {
  EmitStats stats;
  out << nlohmann::json{{"schema", kDatasetSchema}}.dump() << '\n';
  for (const auto& ex : examples) {
    nlohmann::ordered_json j;
    j["task_id"] = ex.fragment.task_id;
    j["segment_index"] = ex.fragment.segment_index;
    j["prefix_tokens"] = vocab.join(ex.fragment.path_prefix);
    j["fragment_tokens"] = vocab.join(ex.fragment.fragment_span);
    j["label"] = nullptr;
    j["label_kind"] = to_string(ex.label_kind);
    std::string line = j.dump();
    const std::string placeholder = "\"label\":null";
    line.replace(line.find(placeholder), placeholder.size(), "\"label\":" + format_label(ex.label));
    out << line << '\n';
    ++stats.records;
    if (ex.label_kind == LabelKind::hard) ++stats.hard;
  }
  out.flush();
  if (!out) throw Error(Errc::sink_write_failure, "dataset stream");
  return stats;
}

std::vector<LabeledExample> read_dataset(std::istream& in, const Vocabulary& vocab) {
  std::vector<LabeledExample> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::bad_format, std::string("dataset line: ") + e.what());
    }
    if (!header) {
      if (j.value("schema", "") != kDatasetSchema) throw Error(Errc::bad_format, "missing dataset schema header");
      header = true;
      continue;
    }
    LabeledExample ex;
    ex.fragment.task_id = j.at("task_id").get<std::string>();
    ex.fragment.segment_index = j.at("segment_index").get<std::size_t>();
    ex.fragment.path_prefix = vocab.split(j.at("prefix_tokens").get<std::string>());
    ex.fragment.fragment_span = vocab.split(j.at("fragment_tokens").get<std::string>());
    ex.label = j.at("label").get<double>();
    const auto kind = j.at("label_kind").get<std::string>();
    if (kind != "hard" && kind != "soft") throw Error(Errc::bad_format, "label_kind " + kind);
    ex.label_kind = kind == "hard" ? LabelKind::hard : LabelKind::soft;
    if (!(ex.label >= 0 && ex.label <= 1)) throw Error(Errc::bad_format, "label out of range");
    out.push_back(std::move(ex));
  }
  if (!header) throw Error(Errc::bad_format, "empty dataset stream");
  return out;
}

}  // namespace edu
