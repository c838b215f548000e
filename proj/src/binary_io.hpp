#pragma once

#include "edu/common.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace edu::io {

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (!in) throw Error(Errc::bad_format, "truncated model file");
  return value;
}

inline void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, std::uint32_t(s.size()));
  out.write(s.data(), std::streamsize(s.size()));
}

inline std::string get_string(std::istream& in) {
  auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw Error(Errc::bad_format, "truncated string");
  return s;
}

inline void put_vector(std::ostream& out, const Eigen::VectorXd& v) {
  put<std::uint64_t>(out, std::uint64_t(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
}

inline Eigen::VectorXd get_vector(std::istream& in) {
  auto n = get<std::uint64_t>(in);
  if (n > (std::uint64_t{1} << 32)) throw Error(Errc::bad_format, "vector too large");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(n * sizeof(double)));
  if (!in) throw Error(Errc::bad_format, "truncated vector");
  return v;
}

}  // namespace edu::io
