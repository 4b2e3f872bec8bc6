#pragma once

// Subset algebra on the Boolean lattice of {1..n}, n <= 16.
//
// A subset is stored as a bitmask (bit i-1 <=> element i). The canonical
// index order for rows/columns of the inclusion matrix is the recursive block
// order: subsets of {1..n-1}, then {n}, then each S' u {n} in recursive
// order. That order coincides with ascending mask order, so
// canonical_index(T) == T.mask - 1.

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "evcs/errors.hpp"

namespace evcs {

inline constexpr int kMaxGroundSet = 16;

class Subset {
 public:
  constexpr Subset() = default;
  constexpr explicit Subset(std::uint32_t mask) : mask_(mask) {}

  // Builds a subset from 1-based element labels.
  static Subset of(std::initializer_list<int> elements) {
    return of(std::vector<int>(elements));
  }
  static Subset of(const std::vector<int>& elements) {
    std::uint32_t mask = 0;
    for (int e : elements) {
      if (e < 1 || e > kMaxGroundSet) {
        throw DomainError("subset element out of range: " + std::to_string(e));
      }
      mask |= 1u << (e - 1);
    }
    return Subset(mask);
  }
  static constexpr Subset full(int n) { return Subset((n >= 32) ? ~0u : ((1u << n) - 1u)); }
  static constexpr Subset single(int element) { return Subset(1u << (element - 1)); }

  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool contains(int element) const { return (mask_ >> (element - 1)) & 1u; }
  constexpr bool subset_of(Subset other) const { return (mask_ & ~other.mask_) == 0; }
  constexpr bool proper_subset_of(Subset other) const {
    return subset_of(other) && mask_ != other.mask_;
  }
  constexpr bool intersects(Subset other) const { return (mask_ & other.mask_) != 0; }
  // Highest element label, 0 for the empty set.
  constexpr int max_element() const { return 32 - std::countl_zero(mask_); }

  std::vector<int> elements() const {
    std::vector<int> out;
    for (std::uint32_t m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m) + 1);
    return out;
  }

  friend constexpr Subset operator|(Subset a, Subset b) { return Subset(a.mask_ | b.mask_); }
  friend constexpr Subset operator&(Subset a, Subset b) { return Subset(a.mask_ & b.mask_); }
  // Set difference a \ b.
  friend constexpr Subset operator-(Subset a, Subset b) { return Subset(a.mask_ & ~b.mask_); }
  friend constexpr bool operator==(Subset, Subset) = default;
  friend constexpr auto operator<=>(Subset a, Subset b) { return a.mask_ <=> b.mask_; }

 private:
  std::uint32_t mask_ = 0;
};

inline std::string to_string(Subset s) {
  std::string out = "{";
  bool first = true;
  for (int e : s.elements()) {
    if (!first) out += ",";
    out += std::to_string(e);
    first = false;
  }
  return out + "}";
}

inline void check_ground_set(int n, int cap = kMaxGroundSet) {
  if (n < 1 || n > cap) {
    throw DomainError("ground-set size must be in [1," + std::to_string(cap) +
                      "], got " + std::to_string(n));
  }
}

inline void check_in_ground_set(Subset s, int n) {
  if (!s.subset_of(Subset::full(n))) {
    throw DomainError("subset " + to_string(s) + " is not inside {1.." + std::to_string(n) + "}");
  }
}

// Number of subsets of {1..n}, including the empty set.
constexpr std::size_t lattice_size(int n) { return std::size_t{1} << n; }

constexpr std::size_t canonical_index(Subset s) { return s.mask() - 1; }
constexpr Subset subset_at(std::size_t index) { return Subset(static_cast<std::uint32_t>(index + 1)); }

// All nonempty subsets of {1..n} in canonical (recursive block) order.
inline std::vector<Subset> nonempty_subsets(int n) {
  check_ground_set(n);
  std::vector<Subset> order{Subset::single(1)};
  for (int k = 2; k <= n; ++k) {
    const Subset top = Subset::single(k);
    std::vector<Subset> next = order;
    next.push_back(top);
    for (Subset s : order) next.push_back(s | top);
    order = std::move(next);
  }
  return order;
}

// All T with lo <= T <= hi, ascending mask order.
inline std::vector<Subset> interval_subsets(Subset lo, Subset hi) {
  if (!lo.subset_of(hi)) {
    throw DomainError("interval_subsets: " + to_string(lo) + " is not a subset of " + to_string(hi));
  }
  const std::uint32_t free = (hi - lo).mask();
  std::vector<Subset> out;
  out.reserve(std::size_t{1} << std::popcount(free));
  // Enumerate submasks of `free` in ascending order.
  std::uint32_t sub = 0;
  while (true) {
    out.push_back(Subset(lo.mask() | sub));
    if (sub == free) break;
    sub = (sub - free) & free;
  }
  return out;
}

// Calls fn(T) for every T with lo <= T <= hi, no allocation. Order unspecified.
template <typename Fn>
void for_each_between(Subset lo, Subset hi, Fn&& fn) {
  const std::uint32_t free = (hi - lo).mask();
  std::uint32_t sub = free;
  while (true) {
    fn(Subset(lo.mask() | sub));
    if (sub == 0) break;
    sub = (sub - 1) & free;
  }
}

// (-1)^(|a|+|b|+n+1)
constexpr int parity_sign(Subset a, Subset b, int n) {
  return ((a.size() + b.size() + n + 1) % 2 == 0) ? 1 : -1;
}

// A family of nonempty subsets of {1..n}, deduplicated and kept in canonical order.
class Family {
 public:
  Family() = default;
  Family(int n, std::vector<Subset> members) : n_(n), members_(std::move(members)) {
    check_ground_set(n_);
    for (Subset s : members_) {
      if (s.empty()) throw DomainError("family members must be nonempty");
      check_in_ground_set(s, n_);
    }
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  }

  // P({1..n}) \ {empty}
  static Family all(int n) { return Family(n, nonempty_subsets(n)); }
  // P({1..n}) \ {empty, {1..n}}
  static Family all_but_top(int n) {
    auto members = nonempty_subsets(n);
    members.pop_back();
    return Family(n, std::move(members));
  }

  int n() const { return n_; }
  const std::vector<Subset>& members() const& { return members_; }
  std::vector<Subset> members() && { return std::move(members_); }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  Subset operator[](std::size_t i) const { return members_[i]; }

  bool contains(Subset s) const { return std::binary_search(members_.begin(), members_.end(), s); }
  // Position of s in members(), or -1.
  int index_of(Subset s) const {
    auto it = std::lower_bound(members_.begin(), members_.end(), s);
    return (it != members_.end() && *it == s) ? static_cast<int>(it - members_.begin()) : -1;
  }

  // Union of all members.
  Subset support() const {
    Subset u;
    for (Subset s : members_) u = u | s;
    return u;
  }

  // Bitmask over member indices of the members contained in `within`.
  std::uint64_t members_inside(Subset within) const {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (members_[i].subset_of(within)) bits |= std::uint64_t{1} << i;
    }
    return bits;
  }

  friend bool operator==(const Family&, const Family&) = default;

 private:
  int n_ = 0;
  std::vector<Subset> members_;
};

inline std::string to_string(const Family& f) {
  std::string out = "[";
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) out += ",";
    out += to_string(f[i]);
  }
  return out + "]";
}

// Image of a subset under a relabeling perm (perm[i] = new label of element i+1, 1-based).
inline Subset relabel(Subset s, const std::vector<int>& perm) {
  Subset out;
  for (int e : s.elements()) out = out | Subset::single(perm[e - 1]);
  return out;
}

inline Family relabel(const Family& f, const std::vector<int>& perm) {
  std::vector<Subset> members;
  for (Subset s : f.members()) members.push_back(relabel(s, perm));
  return Family(f.n(), std::move(members));
}

}  // namespace evcs
