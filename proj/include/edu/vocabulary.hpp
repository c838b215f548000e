#pragma once

#include "edu/common.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace edu {

/// Dense token index set. Surfaces are unique; ids run 0..size()-1.
class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, TokenId eos_id);

  std::size_t size() const { return tokens_.size(); }
  TokenId eos() const { return eos_; }
  bool contains(TokenId id) const { return id >= 0 && std::size_t(id) < tokens_.size(); }

  const std::string& surface(TokenId id) const;
  std::optional<TokenId> find(std::string_view surface) const;
  /// Throws Errc::unknown_token when the surface is absent.
  TokenId id(std::string_view surface) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Space-joined surfaces; the dataset and CSV formats use this form.
  std::string join(TokenSpan ids) const;
  std::vector<std::string> surfaces(TokenSpan ids) const;
  TokenSeq from_surfaces(const std::vector<std::string>& surfaces) const;
  TokenSeq split(std::string_view joined) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.eos_ == b.eos_ && a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_ = 0;
};

}  // namespace edu
