#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

namespace hsmc {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  BigInt out = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    out *= n - r + i;
    out /= i;
  }
  return out;
}

// Number of configurations of n cluster elements over t arrays, C(n+t-1, t-1).
inline BigInt epsilon(std::uint64_t n, std::uint64_t t) {
  if (t == 0) return n == 0 ? 1 : 0;
  return binomial(n + t - 1, t - 1);
}

// Length bound for tracks with no k-indistinguishable pair over w states.
inline BigInt tau(std::uint64_t w, std::uint64_t k) {
  BigInt a = boost::multiprecision::pow(BigInt(1 + w), static_cast<unsigned>(2 * k + 4));
  BigInt b = boost::multiprecision::pow(BigInt(k + 3), static_cast<unsigned>(w * w + 1));
  return 1 + w + (a < b ? a : b);
}

inline std::size_t saturate(const BigInt& v) {
  if (v > BigInt(std::numeric_limits<std::size_t>::max())) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(v);
}

} // namespace hsmc
