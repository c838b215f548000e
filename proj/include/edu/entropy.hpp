#pragma once

#include "edu/common.hpp"
#include "edu/vocabulary.hpp"

#include <cmath>
#include <iosfwd>
#include <set>
#include <string>
#include <utility>

namespace edu {

template <typename Scalar = double>
struct TokenDistribution {
  Vector<Scalar> probs;
  Scalar entropy_nats = 0;
};

inline constexpr double kDefaultEpsilon = 1e-10;
inline constexpr double kDefaultThreshold = 1.0;

/// Softmax with max subtraction, then H = -sum_v p_v log(p_v + eps).
/// Exact zeros contribute nothing to the sum.
template <typename Derived>
TokenDistribution<typename Derived::Scalar> softmax_entropy(
    const Eigen::MatrixBase<Derived>& logits,
    typename Derived::Scalar epsilon = typename Derived::Scalar(kDefaultEpsilon)) {
  using Scalar = typename Derived::Scalar;
  TokenDistribution<Scalar> out;
  const Scalar peak = logits.maxCoeff();
  out.probs = (logits.array() - peak).exp().matrix();
  out.probs /= out.probs.sum();
  Scalar h = 0;
  for (Eigen::Index i = 0; i < out.probs.size(); ++i) {
    const Scalar p = out.probs[i];
    if (p > Scalar(0)) h -= p * std::log(p + epsilon);
  }
  out.entropy_nats = h > Scalar(0) ? h : Scalar(0);
  return out;
}

/// Temperature-scaled distribution used by the stochastic samplers.
Eigen::VectorXd tempered_probs(const LogitVector& logits, double temperature);

/// Two highest-probability ids, ties broken by lower id.
template <typename Derived>
std::pair<TokenId, TokenId> top2(const Eigen::MatrixBase<Derived>& probs) {
  TokenId first = 0, second = -1;
  for (Eigen::Index i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[first]) first = TokenId(i);
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (TokenId(i) == first) continue;
    if (second < 0 || probs[i] > probs[second]) second = TokenId(i);
  }
  return {first, second};
}

/// Formatting and bracket symbols that are never branched on.
const std::set<std::string>& default_whitelist();

/// One surface per line. Escapes "\n", "\r", "\t", "\s" (space) and "\\" are
/// decoded so whitespace tokens can be listed.
std::set<std::string> read_whitelist(std::istream& in);

struct AnchorPolicy {
  double threshold_nats = kDefaultThreshold;
  double epsilon = kDefaultEpsilon;
  std::set<std::string> whitelist = default_whitelist();
  std::size_t max_branches = 8;

  void validate() const;
};

struct AnchorDecision {
  bool is_anchor = false;
  std::pair<TokenId, TokenId> top2{0, -1};
  double entropy_nats = 0;
};

AnchorDecision decide_anchor(const TokenDistribution<double>& dist, const std::string& candidate_surface,
                             const AnchorPolicy& policy, std::size_t budget_remaining);

/// decide_anchor over the distribution's own greedy candidate, additionally
/// refusing positions whose runner-up is a whitelisted symbol. `forced`
/// skips the entropy test (first generated position).
AnchorDecision decide_branch(const TokenDistribution<double>& dist, const Vocabulary& vocab,
                             const AnchorPolicy& policy, std::size_t budget_remaining, bool forced);

}  // namespace edu
