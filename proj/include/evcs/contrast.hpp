#pragma once

// Contrast-level calculus: existence inequalities, tight levels, the
// pixel-expansion lower bound, the contrast trade-off and its realization,
// and the adjusted levels used when the family misses an even subset.
//
// All quantities are exact: integers for black counts, boost::rational for
// contrasts.

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "evcs/errors.hpp"
#include "evcs/lattice.hpp"

// Boost < 1.75 compares rational with an integer through a free template that
// C++20 reverses back onto itself, recursing forever. Exact non-template
// overloads win overload resolution and break the cycle.
namespace boost {
#define EVCS_RATIONAL_EQ(Int)                                                                                  \
  constexpr bool operator==(const rational<std::int64_t>& a, Int b) {                                          \
    return a.denominator() == 1 && a.numerator() == static_cast<std::int64_t>(b);                             \
  }                                                                                                            \
  constexpr bool operator==(Int b, const rational<std::int64_t>& a) { return a == b; }                         \
  constexpr bool operator!=(const rational<std::int64_t>& a, Int b) { return !(a == b); }                      \
  constexpr bool operator!=(Int b, const rational<std::int64_t>& a) { return !(a == b); }
EVCS_RATIONAL_EQ(int)
EVCS_RATIONAL_EQ(long)
EVCS_RATIONAL_EQ(long long)
#undef EVCS_RATIONAL_EQ
}  // namespace boost

namespace evcs {

using Rational = boost::rational<std::int64_t>;

inline std::string to_string(const Rational& q) {
  return std::to_string(q.numerator()) + "/" + std::to_string(q.denominator());
}

// Parses "p/q" or "p".
inline Rational parse_rational(const std::string& text) {
  try {
    const auto slash = text.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(text));
    const auto den = std::stoll(text.substr(slash + 1));
    if (den == 0) throw FormatError("zero denominator in rational: " + text);
    return Rational(std::stoll(text.substr(0, slash)), den);
  } catch (const std::logic_error&) {
    throw FormatError("malformed rational: " + text);
  }
}

struct LevelPair {
  std::int64_t h = 0;  // black count over a black secret pixel
  std::int64_t l = 0;  // black count over a white secret pixel
  friend bool operator==(const LevelPair&, const LevelPair&) = default;
};

// (h_T, l_T) for every nonempty T <= {1..n}. Entry 0 is unused.
class LevelMap {
 public:
  LevelMap() = default;
  explicit LevelMap(int n) : n_(n), levels_(lattice_size(n)) { check_ground_set(n); }

  int n() const { return n_; }
  const LevelPair& operator[](Subset s) const { return levels_[s.mask()]; }
  LevelPair& at(Subset s) { return levels_[s.mask()]; }

  std::int64_t delta(Subset s) const { return levels_[s.mask()].h - levels_[s.mask()].l; }

  friend bool operator==(const LevelMap&, const LevelMap&) = default;

 private:
  int n_ = 0;
  std::vector<LevelPair> levels_;
};

// delta_T = h_T - l_T for every nonempty T; zero encodes "not in the family".
class DeltaSpec {
 public:
  DeltaSpec() = default;
  explicit DeltaSpec(int n) : n_(n), deltas_(lattice_size(n), 0) { check_ground_set(n); }

  // value on members, zero elsewhere
  static DeltaSpec from_family(const Family& family, std::int64_t value = 1) {
    DeltaSpec d(family.n());
    for (Subset s : family.members()) d.set(s, value);
    return d;
  }

  int n() const { return n_; }
  std::int64_t operator[](Subset s) const { return deltas_[s.mask()]; }
  void set(Subset s, std::int64_t v) {
    if (s.empty()) throw DomainError("delta of the empty set is undefined");
    if (v < 0) throw DomainError("delta must be nonnegative at " + to_string(s));
    deltas_[s.mask()] = v;
  }

  // Members with positive delta.
  Family support_family() const {
    std::vector<Subset> members;
    for (std::uint32_t m = 1; m < deltas_.size(); ++m) {
      if (deltas_[m] > 0) members.push_back(Subset(m));
    }
    return Family(n_, std::move(members));
  }

  friend bool operator==(const DeltaSpec&, const DeltaSpec&) = default;

 private:
  int n_ = 0;
  std::vector<std::int64_t> deltas_;
};

constexpr std::int64_t pow2(int e) { return std::int64_t{1} << e; }

// Every S strictly inside {1..n} violating
//   sum_{S<=T, |T|=|S| mod 2} h_T  <=  sum_{S<=T, |T|!=|S| mod 2} l_T
// with h and l of the empty set taken as 0.
inline std::vector<Subset> existence_check(const LevelMap& levels) {
  const int n = levels.n();
  const Subset full = Subset::full(n);
  std::vector<Subset> violating;
  for (std::uint32_t mask = 0; mask < full.mask(); ++mask) {
    const Subset s(mask);
    std::int64_t same = 0;
    std::int64_t other = 0;
    for_each_between(s, full, [&](Subset t) {
      if (t.empty()) return;
      if ((t.size() - s.size()) % 2 == 0) {
        same += levels[t].h;
      } else {
        other += levels[t].l;
      }
    });
    if (same > other) violating.push_back(s);
  }
  return violating;
}

// The unique levels saturating every existence inequality:
//   h_T = sum_{T'} delta_T' 2^(|T'|-1) - sum_{T < T'} delta_T' 2^(|T'|-1-|T|)
inline LevelMap tight_levels(const DeltaSpec& delta) {
  const int n = delta.n();
  const Subset full = Subset::full(n);
  std::int64_t total = 0;
  for (std::uint32_t m = 1; m <= full.mask(); ++m) total += delta[Subset(m)] * pow2(Subset(m).size() - 1);
  LevelMap out(n);
  for (std::uint32_t m = 1; m <= full.mask(); ++m) {
    const Subset t(m);
    std::int64_t above = 0;
    for_each_between(t, full, [&](Subset u) {
      if (u != t) above += delta[u] * pow2(u.size() - 1 - t.size());
    });
    out.at(t) = {total - above, total - above - delta[t]};
  }
  return out;
}

// Minimum pixel expansion when every nonempty subset carries an image: (3^n-1)/2.
inline std::int64_t lower_bound(int n) {
  if (n < 1) throw DomainError("lower_bound needs n >= 1");
  std::int64_t p = 1;
  for (int i = 0; i < n; ++i) p *= 3;
  return (p - 1) / 2;
}

// Expansion of the block construction: sum over the family of 2^(|T|-1).
inline std::int64_t droste_expansion(const Family& family) {
  std::int64_t m = 0;
  for (Subset t : family.members()) m += pow2(t.size() - 1);
  return m;
}

// Same, with delta_T copies of each block.
inline std::int64_t droste_expansion(const DeltaSpec& delta) {
  std::int64_t m = 0;
  for (std::uint32_t mask = 1; mask < lattice_size(delta.n()); ++mask) {
    m += delta[Subset(mask)] * pow2(Subset(mask).size() - 1);
  }
  return m;
}

// Contrast targets alpha_T for every nonempty T. Entry 0 is unused.
using ContrastVector = std::vector<Rational>;

inline ContrastVector contrast_vector(int n) { return ContrastVector(lattice_size(n), Rational(0)); }

inline int ground_set_of(const ContrastVector& alphas) {
  const auto size = alphas.size();
  if (size < 2 || (size & (size - 1)) != 0) throw DomainError("contrast vector must have 2^n entries");
  const int n = std::countr_zero(size);
  check_ground_set(n);
  return n;
}

// sum_T 2^(|T|-1) alpha_T; a scheme exists only if this is <= 1.
inline Rational tradeoff_sum(const ContrastVector& alphas) {
  ground_set_of(alphas);
  Rational sum(0);
  for (std::uint32_t m = 1; m < alphas.size(); ++m) {
    if (alphas[m] < 0) throw DomainError("contrast must be nonnegative at " + to_string(Subset(m)));
    sum += alphas[m] * pow2(Subset(m).size() - 1);
  }
  return sum;
}

struct Realization {
  DeltaSpec delta;
  std::int64_t denominator = 0;  // total expansion M after always-black padding
  std::int64_t tight_expansion = 0;  // sum 2^(|T|-1) delta_T, before padding
};

// Smallest M (then smallest deltas) with delta_T = floor(alpha_T M) and
// alpha_T - delta_T/M < epsilon for every T; epsilon = 0 asks for an exact hit.
inline Realization realize_contrast(const ContrastVector& targets, const Rational& epsilon) {
  const int n = ground_set_of(targets);
  if (epsilon < 0) throw DomainError("epsilon must be nonnegative");
  if (tradeoff_sum(targets) > 1) {
    throw InfeasibleError("contrast targets violate the trade-off: sum 2^(|T|-1) alpha_T = " +
                          to_string(tradeoff_sum(targets)) + " > 1");
  }
  // M = lcm of the denominators always hits every target exactly.
  std::int64_t cap = 1;
  for (std::uint32_t m = 1; m < targets.size(); ++m) cap = std::lcm(cap, targets[m].denominator());

  for (std::int64_t big_m = 1; big_m <= cap; ++big_m) {
    DeltaSpec delta(n);
    bool ok = true;
    for (std::uint32_t m = 1; m < targets.size() && ok; ++m) {
      const Rational scaled = targets[m] * big_m;
      const std::int64_t d = scaled.numerator() / scaled.denominator();
      const Rational gap = targets[m] - Rational(d, big_m);
      ok = (epsilon == 0) ? gap == 0 : gap < epsilon;
      if (ok) delta.set(Subset(m), d);
    }
    if (!ok) continue;
    const std::int64_t tight = droste_expansion(delta);
    if (tight > big_m) continue;  // unreachable when the trade-off holds
    return {delta, big_m, tight};
  }
  throw InfeasibleError("no realization found up to M = " + std::to_string(cap));
}

// Adjusted levels for a family that misses an even subset `hole` whose
// members inside it are not confined to any proper subset of it.
//
// Inside P(hole) the levels of the hole sub-scheme are lowered by one, and the
// hole itself gets delta = -1: its stacked count may drop by one more for the
// single worst-case colouring. Blocks for members outside P(hole) are stacked
// on top exactly as in the tight formula.
inline LevelMap even_hole_levels(const Family& family, Subset hole) {
  const int n = family.n();
  check_in_ground_set(hole, n);
  if (hole.empty()) throw PreconditionError("hole must be nonempty");
  if (family.contains(hole)) throw PreconditionError("hole " + to_string(hole) + " is a family member");
  if (hole.size() % 2 != 0) throw PreconditionError("hole " + to_string(hole) + " has odd size");
  Subset covered;
  for (Subset s : family.members()) {
    if (s.subset_of(hole)) covered = covered | s;
  }
  if (covered != hole) {
    const int missing = (hole - covered).elements().front();
    throw PreconditionError("members inside " + to_string(hole) + " all lie in the proper subset " +
                            to_string(hole - Subset::single(missing)));
  }

  const Subset full = Subset::full(n);
  auto delta = [&](Subset s) -> std::int64_t {
    if (s == hole) return -1;
    return family.contains(s) ? 1 : 0;
  };

  // Tight levels of the sub-scheme on the hole's rows (delta = 1 on members inside).
  std::int64_t inner_total = 0;
  for (Subset s : family.members()) {
    if (s.subset_of(hole)) inner_total += pow2(s.size() - 1);
  }
  auto inner_h = [&](Subset s) {
    std::int64_t above = 0;
    for_each_between(s, hole, [&](Subset u) {
      if (u != s && family.contains(u)) above += pow2(u.size() - 1 - s.size());
    });
    return inner_total - above;
  };
  const std::int64_t hole_top_h = inner_h(hole) - 2;
  const std::int64_t hole_top_l = inner_h(hole) - 1;

  std::int64_t outer_total = 0;
  for (std::uint32_t m = 1; m <= full.mask(); ++m) {
    if (!Subset(m).subset_of(hole)) outer_total += delta(Subset(m)) * pow2(Subset(m).size() - 1);
  }

  LevelMap out(n);
  for (std::uint32_t m = 1; m <= full.mask(); ++m) {
    const Subset s(m);
    std::int64_t above = 0;
    for_each_between(s, full, [&](Subset u) {
      if (u != s && !u.subset_of(hole)) above += delta(u) * pow2(u.size() - 1 - s.size());
    });
    std::int64_t h = 0;
    if (!s.subset_of(hole)) {
      h = hole_top_l + outer_total - above;
    } else if (s == hole) {
      h = hole_top_h + outer_total - above;
    } else {
      h = inner_h(s) - 1 + outer_total - above;
    }
    out.at(s) = {h, h - delta(s)};
  }
  return out;
}

}  // namespace evcs
