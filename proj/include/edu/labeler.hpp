#pragma once
// Monte-Carlo step labels over decoding trees and the PRM dataset format.
#include "edu/lm.hpp"
#include "edu/tree.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace edu {

struct Fragment {
  std::string task_id;
  /// Generated tokens up to and including this fragment.
  TokenSeq path_prefix;
  TokenSeq fragment_span;
  std::size_t segment_index = 0;
  friend bool operator==(const Fragment&, const Fragment&) = default;
};

enum class LabelKind { soft, hard };
const char* to_string(LabelKind kind);

struct LabeledExample {
  Fragment fragment;
  double label = 0;
  LabelKind label_kind = LabelKind::soft;
  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

/// Optional variance reduction: k extra sampled completions per internal node
/// are verified and pooled with the node's own subtree leaves.
struct ExtraCompletions {
  const LanguageModel* model = nullptr;
  const Task* task = nullptr;
  std::size_t per_node = 0;
  double temperature = 0.7;
  std::uint64_t seed = 0;
};

/// Per-node correct/total counts over surviving leaves. Pruned nodes and
/// subtrees without surviving leaves get {0, 0}.
struct LeafTally {
  std::size_t correct = 0;
  std::size_t total = 0;
};
std::vector<LeafTally> tally_leaves(const DecodeTree& tree);

/// One example per unpruned node with a non-empty span, in preorder. Terminal
/// nodes carry hard labels from their verdict; internal nodes carry the
/// correct fraction of their subtree's surviving leaves.
std::vector<LabeledExample> label_tree(const DecodeTree& tree, const ExtraCompletions& extra = {});

struct EmitStats {
  std::size_t records = 0;
  std::size_t hard = 0;
  double hard_fraction() const { return records ? double(hard) / double(records) : 0.0; }
};

inline constexpr const char* kDatasetSchema = "eduprm-dataset/1";

/// Writes the schema header and one JSON record per example. Throws
/// Errc::sink_write_failure when the stream fails.
EmitStats emit_dataset(std::ostream& out, const std::vector<LabeledExample>& examples, const Vocabulary& vocab);
std::vector<LabeledExample> read_dataset(std::istream& in, const Vocabulary& vocab);

/// Fixed 6-decimal rendering used in dataset records.
std::string format_label(double label);

}  // namespace edu
