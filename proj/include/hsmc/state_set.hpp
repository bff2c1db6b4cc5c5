#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

namespace hsmc {

using StateId = std::uint32_t;

inline constexpr std::size_t kMaxStates = 64;

// Set of states packed into a single machine word.
class StateSet {
public:
  class iterator {
  public:
    using value_type = StateId;
    using difference_type = std::ptrdiff_t;

    constexpr iterator() = default;
    constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}

    constexpr StateId operator*() const { return static_cast<StateId>(std::countr_zero(rest_)); }
    constexpr iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    constexpr iterator operator++(int) {
      iterator old = *this;
      ++*this;
      return old;
    }
    constexpr bool operator==(const iterator&) const = default;

  private:
    std::uint64_t rest_ = 0;
  };

  constexpr StateSet() = default;

  static constexpr StateSet from_bits(std::uint64_t bits) {
    StateSet s;
    s.bits_ = bits;
    return s;
  }
  static constexpr StateSet single(StateId s) { return from_bits(std::uint64_t{1} << s); }
  static constexpr StateSet all(std::size_t n) {
    return from_bits(n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1);
  }

  constexpr bool contains(StateId s) const { return (bits_ >> s) & 1U; }
  constexpr void insert(StateId s) { bits_ |= std::uint64_t{1} << s; }
  constexpr void erase(StateId s) { bits_ &= ~(std::uint64_t{1} << s); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool subset_of(StateSet o) const { return (bits_ & ~o.bits_) == 0; }

  constexpr StateSet with(StateId s) const { return from_bits(bits_ | (std::uint64_t{1} << s)); }

  constexpr iterator begin() const { return iterator(bits_); }
  constexpr iterator end() const { return iterator(0); }

  friend constexpr StateSet operator|(StateSet a, StateSet b) { return from_bits(a.bits_ | b.bits_); }
  friend constexpr StateSet operator&(StateSet a, StateSet b) { return from_bits(a.bits_ & b.bits_); }
  friend constexpr StateSet operator-(StateSet a, StateSet b) { return from_bits(a.bits_ & ~b.bits_); }
  constexpr StateSet& operator|=(StateSet o) {
    bits_ |= o.bits_;
    return *this;
  }

  constexpr bool operator==(const StateSet&) const = default;
  constexpr auto operator<=>(const StateSet&) const = default;

private:
  std::uint64_t bits_ = 0;
};

} // namespace hsmc

template <>
struct std::hash<hsmc::StateSet> {
  std::size_t operator()(hsmc::StateSet s) const noexcept { return std::hash<std::uint64_t>{}(s.bits()); }
};
