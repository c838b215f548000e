#pragma once

// Token-level generative model contract. Samplers only ever see logits, so
// any model that can map (prompt, prefix) to a LogitVector can drive them.

#include "edu/common.hpp"
#include "edu/vocabulary.hpp"

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace edu {

enum class ModelKind { table, ngram, remote };

const char* to_string(ModelKind kind);

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual ModelKind kind() const = 0;
  /// Opaque configuration id.
  virtual std::string identity() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  /// Unchecked; use the free next_logits() for id validation.
  virtual LogitVector logits(TokenSpan prompt, TokenSpan prefix) const = 0;
};

using ModelHandle = std::shared_ptr<const LanguageModel>;

/// Validates ids (Errc::unknown_token) and the finiteness/length of the result.
LogitVector next_logits(const LanguageModel& model, TokenSpan prompt, TokenSpan prefix);

/// Scripted model. Each rule may pin the prompt, the prefix length and a
/// required prefix suffix; the most specific matching rule wins (pinned
/// prompt, then pinned position, then longer suffix, then earlier rule).
class TableModel final : public LanguageModel {
 public:
  struct Rule {
    std::optional<TokenSeq> prompt;
    std::optional<std::size_t> position;
    TokenSeq suffix;
    LogitVector logits;
  };

  TableModel(Vocabulary vocab, LogitVector fallback, std::string name = "table");

  /// Model that puts a unique maximum on `token` at every position.
  static std::shared_ptr<TableModel> always(Vocabulary vocab, TokenId token);

  void add_rule(Rule rule);
  const std::vector<Rule>& rules() const { return rules_; }

  ModelKind kind() const override { return ModelKind::table; }
  std::string identity() const override { return name_; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  LogitVector logits(TokenSpan prompt, TokenSpan prefix) const override;

 private:
  Vocabulary vocab_;
  LogitVector fallback_;
  std::string name_;
  std::vector<Rule> rules_;
};

/// Count-based n-gram model with add-k smoothing. The conditioning history is
/// the last (order - 1) tokens of prompt followed by prefix, left-padded with
/// a begin marker. Histories never seen in training back off to their longest
/// observed suffix.
class NgramModel final : public LanguageModel {
 public:
  static constexpr TokenId kBegin = -1;
  /// Logit assigned to zero-probability tokens (unsmoothed models).
  static constexpr double kZeroLogit = -1.0e4;

  NgramModel(Vocabulary vocab, std::size_t order, double smoothing);

  void observe(TokenSpan sequence);
  /// Rebuilds the backoff tables from the full-order counts.
  void finalize();

  std::size_t order() const { return order_; }
  double smoothing() const { return smoothing_; }

  /// Smoothed conditional distribution P(. | history).
  Eigen::VectorXd probabilities(TokenSpan prompt, TokenSpan prefix) const;

  ModelKind kind() const override { return ModelKind::ngram; }
  std::string identity() const override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  LogitVector logits(TokenSpan prompt, TokenSpan prefix) const override;

  void save(std::ostream& out) const;
  static std::shared_ptr<NgramModel> load(std::istream& in);

  /// Raw count of `next` after `history` (history length order - 1, padded).
  std::uint64_t count(TokenSpan history, TokenId next) const;

 private:
  struct Row {
    std::map<TokenId, std::uint64_t> next;
    std::uint64_t total = 0;
  };
  using Table = std::map<TokenSeq, Row>;

  TokenSeq history(TokenSpan prompt, TokenSpan prefix) const;

  Vocabulary vocab_;
  std::size_t order_;
  double smoothing_;
  Table full_;
  std::vector<Table> backoff_;  // backoff_[j]: histories of length j
};

/// Trains an n-gram handle over the corpus (each sequence is prompt + trace).
std::shared_ptr<NgramModel> train_ngram(const Vocabulary& vocab, const std::vector<TokenSeq>& corpus,
                                        std::size_t order, double smoothing);

/// Client of the newline-delimited logits protocol:
///   request  `LOGITS <base64(prompt ids)> <base64(prefix ids)>`
///   response `OK <comma-separated logits>` or `ERR <code>`.
/// One connection per instance; requests on it are serialized.
class RemoteModel final : public LanguageModel {
 public:
  RemoteModel(Vocabulary vocab, std::string host, int port);
  ~RemoteModel() override;
  RemoteModel(const RemoteModel&) = delete;
  RemoteModel& operator=(const RemoteModel&) = delete;

  ModelKind kind() const override { return ModelKind::remote; }
  std::string identity() const override;
  const Vocabulary& vocabulary() const override { return vocab_; }
  LogitVector logits(TokenSpan prompt, TokenSpan prefix) const override;

 private:
  Vocabulary vocab_;
  std::string host_;
  int port_;
  mutable std::mutex mutex_;
  mutable int fd_ = -1;
  mutable std::string buffer_;
};

/// Server-side handler for one LOGITS line. Never throws; protocol and model
/// errors become `ERR <code>` responses.
std::string handle_logits_request(const LanguageModel& model, std::string_view line);

std::string format_logits_response(const LogitVector& logits);
LogitVector parse_logits_response(std::string_view line, std::size_t expected_size);

}  // namespace edu
