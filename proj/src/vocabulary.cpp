#include "edu/vocabulary.hpp"

namespace edu {

Vocabulary::Vocabulary(std::vector<std::string> tokens, TokenId eos_id)
    : tokens_(std::move(tokens)), eos_(eos_id) {
  if (!contains(eos_)) throw Error(Errc::invalid_argument, "eos id outside vocabulary");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    auto [it, inserted] = index_.emplace(tokens_[i], TokenId(i));
    if (!inserted) throw Error(Errc::invalid_argument, "duplicate token surface '" + tokens_[i] + "'");
  }
}

const std::string& Vocabulary::surface(TokenId id) const {
  if (!contains(id)) throw Error(Errc::unknown_token, "token id " + std::to_string(id));
  return tokens_[std::size_t(id)];
}

std::optional<TokenId> Vocabulary::find(std::string_view surface) const {
  auto it = index_.find(std::string(surface));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view surface) const {
  auto found = find(surface);
  if (!found) throw Error(Errc::unknown_token, "surface '" + std::string(surface) + "'");
  return *found;
}

std::string Vocabulary::join(TokenSpan ids) const {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += surface(ids[i]);
  }
  return out;
}

std::vector<std::string> Vocabulary::surfaces(TokenSpan ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId t : ids) out.push_back(surface(t));
  return out;
}

TokenSeq Vocabulary::from_surfaces(const std::vector<std::string>& surfaces) const {
  TokenSeq out;
  out.reserve(surfaces.size());
  for (const auto& s : surfaces) out.push_back(id(s));
  return out;
}

TokenSeq Vocabulary::split(std::string_view joined) const {
  TokenSeq out;
  if (joined.empty()) return out;
  std::size_t pos = 0;
  while (pos <= joined.size()) {
    std::size_t end = joined.find(' ', pos);
    if (end == std::string_view::npos) end = joined.size();
    out.push_back(id(joined.substr(pos, end - pos)));
    pos = end + 1;
  }
  return out;
}

}  // namespace edu
