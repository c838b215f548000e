#include "edu/entropy.hpp"

#include <istream>

namespace edu {

Eigen::VectorXd tempered_probs(const LogitVector& logits, double temperature) {
  Eigen::VectorXd p(logits.size());
  if (temperature <= 0.0) {
    p.setZero();
    p[top2(logits).first] = 1.0;
    return p;
  }
  const double peak = logits.maxCoeff();
  p = ((logits.array() - peak) / temperature).exp().matrix();
  return p / p.sum();
}

const std::set<std::string>& default_whitelist() {
  static const std::set<std::string> symbols{
      "\\", "$", "\n", "\r", " ", "_", "  ", ":", "\\(", "\\[", "\\{", "\\]", "\\)", "\\}",
      "(", "[", "{", "}"};
  return symbols;
}

std::set<std::string> read_whitelist(std::istream& in) {
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::string s;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '\\' && i + 1 < line.size()) {
        char c = line[i + 1];
        if (c == 'n') { s += '\n'; ++i; continue; }
        if (c == 'r') { s += '\r'; ++i; continue; }
        if (c == 't') { s += '\t'; ++i; continue; }
        if (c == 's') { s += ' '; ++i; continue; }
        if (c == '\\') { s += '\\'; ++i; continue; }
      }
      s += line[i];
    }
    out.insert(std::move(s));
  }
  return out;
}

void AnchorPolicy::validate() const {
  if (!(threshold_nats > 0.0)) throw Error(Errc::invalid_argument, "entropy threshold must be > 0");
  if (!(epsilon > 0.0)) throw Error(Errc::invalid_argument, "epsilon must be > 0");
  if (max_branches < 1) throw Error(Errc::invalid_argument, "max_branches must be >= 1");
}

AnchorDecision decide_anchor(const TokenDistribution<double>& dist, const std::string& candidate_surface,
                             const AnchorPolicy& policy, std::size_t budget_remaining) {
  AnchorDecision d;
  d.top2 = top2(dist.probs);
  d.entropy_nats = dist.entropy_nats;
  d.is_anchor = dist.entropy_nats > policy.threshold_nats && !policy.whitelist.contains(candidate_surface) &&
                budget_remaining > 0;
  return d;
}

AnchorDecision decide_branch(const TokenDistribution<double>& dist, const Vocabulary& vocab,
                             const AnchorPolicy& policy, std::size_t budget_remaining, bool forced) {
  AnchorDecision d;
  d.top2 = top2(dist.probs);
  d.entropy_nats = dist.entropy_nats;
  const bool symbol = policy.whitelist.contains(vocab.surface(d.top2.first)) ||
                      (d.top2.second >= 0 && policy.whitelist.contains(vocab.surface(d.top2.second)));
  const bool uncertain = forced || dist.entropy_nats > policy.threshold_nats;
  d.is_anchor = uncertain && !symbol && budget_remaining > 0 && d.top2.second >= 0;
  return d;
}

}  // namespace edu
