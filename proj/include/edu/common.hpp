#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace edu {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;
using TokenSpan = std::span<const TokenId>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Unnormalized next-token scores, one entry per vocabulary item.
using LogitVector = Eigen::VectorXd;

enum class Errc {
  remote_unreachable,
  unknown_token,
  empty_corpus,
  unknown_family,
  unverified_leaf,
  empty_dataset,
  non_finite_loss,
  sink_write_failure,
  bad_format,
  invalid_argument,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// SplitMix64 finalizer; used to derive independent per-task and per-node seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view s);

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  return mix_seed(seed ^ mix_seed(salt));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view salt) {
  return derive_seed(seed, hash_string(salt));
}

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

/// Comma-separated decimal ids, the payload format of the line protocols.
std::string join_ids(TokenSpan ids);
TokenSeq split_ids(std::string_view text);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results must be
/// written to per-index slots by the caller so output order never depends on
/// scheduling. The first exception thrown is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace edu
