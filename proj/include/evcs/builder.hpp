#pragma once

// Scheme constructions: the (k,k)-threshold blocks, the block construction
// over a family, the general builder that solves M x = r per colour
// assignment, and the improved construction for families missing an even
// subset.

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "evcs/contrast.hpp"
#include "evcs/errors.hpp"
#include "evcs/lattice.hpp"
#include "evcs/linsys.hpp"
#include "evcs/scheme.hpp"

namespace evcs {

struct ThresholdProfiles {
  PixelProfile white;
  PixelProfile black;
};

// (k,k)-threshold basis matrices on rows {1..k}: the white matrix has one
// column per even-size subset, the black matrix one per odd-size subset.
inline ThresholdProfiles kk_threshold_profiles(int k) {
  check_ground_set(k);
  ThresholdProfiles out{PixelProfile(k), PixelProfile(k)};
  for (std::uint32_t m = 0; m < lattice_size(k); ++m) {
    const Subset s(m);
    (s.size() % 2 == 0 ? out.white : out.black).at(s) += 1;
  }
  return out;
}

namespace detail {

// Packs the bits of s that lie in `support` into the low bits.
inline Subset compress(Subset s, Subset support) {
  std::uint32_t out = 0;
  int pos = 0;
  for (int e : support.elements()) {
    if (s.contains(e)) out |= 1u << pos;
    ++pos;
  }
  return Subset(out);
}

inline Subset expand(Subset s, Subset support) {
  std::uint32_t out = 0;
  int pos = 0;
  for (int e : support.elements()) {
    if ((s.mask() >> pos) & 1u) out |= 1u << (e - 1);
    ++pos;
  }
  return Subset(out);
}

inline void fill_levels_from_profiles(SchemeTable& table) {
  const Assignment all_black = (Assignment{1} << table.family.size()) - 1;
  const RVector high = apply_m(table.profiles[all_black]);
  const RVector low = apply_m(table.profiles[0]);
  table.levels.clear();
  for (Subset s : table.family.members()) table.levels.push_back({high[s], low[s]});
}

inline void pad_white(std::vector<PixelProfile>& profiles, std::int64_t m) {
  for (auto& p : profiles) p.at(Subset()) += m - p.total();
}

}  // namespace detail

// Block construction: for each member T, 2^(|T|-1) columns forming a
// (|T|,|T|)-threshold scheme on the rows of T, black on every row outside T.
inline SchemeTable droste_scheme(const Family& family) {
  check_table_size(family);
  const int n = family.n();
  const Subset full = Subset::full(n);
  SchemeTable table;
  table.n = n;
  table.family = family;
  table.m = droste_expansion(family);
  table.provenance.construction = Construction::droste;
  table.profiles.assign(std::size_t{1} << family.size(), PixelProfile(n));
  for (Assignment a = 0; a < table.profiles.size(); ++a) {
    auto& x = table.profiles[a];
    for (std::size_t i = 0; i < family.size(); ++i) {
      const Subset t = family[i];
      const int parity = is_black(a, static_cast<int>(i)) ? 1 : 0;
      for_each_between(Subset(), t, [&](Subset v) {
        if (v.size() % 2 == parity) x.at(v | (full - t)) += 1;
      });
    }
  }
  detail::fill_levels_from_profiles(table);
  return table;
}

// Stacked counts for one colour assignment.
//
// Members take h or l by colour. A non-member T with h_T == l_T is constant.
// A non-member with h_T != l_T takes the smaller value exactly when the
// members strictly inside T are coloured in the worst-case parity pattern
// (black iff |S| has the parity of |T|), and the larger value otherwise.
// Either way r_T depends only on the colours of members inside T.
inline RVector canonical_r(const Family& family, const LevelMap& levels, Assignment assignment) {
  const int n = family.n();
  if (levels.n() != n) throw DomainError("level map and family disagree on n");
  RVector r(n);
  for (std::uint32_t m = 1; m < lattice_size(n); ++m) {
    const Subset t(m);
    const LevelPair lv = levels[t];
    const int idx = family.index_of(t);
    if (idx >= 0) {
      r.set(t, is_black(assignment, idx) ? lv.h : lv.l);
      continue;
    }
    if (lv.h == lv.l) {
      r.set(t, lv.h);
      continue;
    }
    bool worst_case = true;
    for (std::size_t i = 0; i < family.size() && worst_case; ++i) {
      const Subset s = family[i];
      if (!s.proper_subset_of(t)) continue;
      const bool want_black = (t.size() - s.size()) % 2 == 0;
      worst_case = is_black(assignment, static_cast<int>(i)) == want_black;
    }
    r.set(t, worst_case ? std::min(lv.h, lv.l) : std::max(lv.h, lv.l));
  }
  return r;
}

namespace detail {

inline SchemeTable build_unprojected(const Family& family, const LevelMap& levels, Construction tag) {
  const int n = family.n();
  for (Subset s : family.members()) {
    const auto lv = levels[s];
    if (lv.l < 0 || lv.h <= lv.l) {
      throw InfeasibleError("member " + to_string(s) + " needs h > l >= 0, got (" + std::to_string(lv.h) +
                            "," + std::to_string(lv.l) + ")");
    }
  }
  bool ordered = true;
  for (std::uint32_t m = 1; m < lattice_size(n); ++m) ordered = ordered && levels[Subset(m)].h >= levels[Subset(m)].l;
  if (ordered) {
    const auto violating = existence_check(levels);
    if (!violating.empty()) {
      throw InfeasibleError("levels violate the existence inequality at S = " + to_string(violating.front()));
    }
  }

  SchemeTable table;
  table.n = n;
  table.family = family;
  table.provenance.construction = tag;
  table.profiles.resize(std::size_t{1} << family.size());
  for (Assignment a = 0; a < table.profiles.size(); ++a) {
    const RVector r = canonical_r(family, levels, a);
    PixelProfile x = solve_x(r);
    const auto negative = x.negative_supports();
    if (!negative.empty()) {
      auto blacks = blacks_of(family, a);
      std::string names;
      for (Subset b : blacks) names += to_string(b);
      throw InfeasibleError("negative column count at support " + to_string(negative.front()) +
                            " for black images [" + names + "]");
    }
    table.m = std::max(table.m, x.total());
    table.profiles[a] = std::move(x);
  }
  for (const auto& p : table.profiles) table.provenance.white_padding |= p.total() != table.m;
  pad_white(table.profiles, table.m);
  for (Subset s : family.members()) table.levels.push_back(levels[s]);
  return table;
}

}  // namespace detail

// Solves M x = canonical_r(...) for every colour assignment and pads with
// all-white columns to a common m. A family confined to a proper subset U of
// the rows is built on U and lifted with all-white rows elsewhere.
inline SchemeTable build_scheme(const Family& family, const LevelMap& levels,
                                Construction tag = Construction::tight) {
  check_table_size(family);
  if (levels.n() != family.n()) throw DomainError("level map and family disagree on n");
  const Subset support = family.support();
  if (support == Subset::full(family.n())) return detail::build_unprojected(family, levels, tag);

  const int k = support.size();
  std::vector<Subset> members;
  for (Subset s : family.members()) members.push_back(detail::compress(s, support));
  const Family inner(k, members);
  LevelMap inner_levels(k);
  for (std::uint32_t m = 1; m < lattice_size(k); ++m) {
    inner_levels.at(Subset(m)) = levels[detail::expand(Subset(m), support)];
  }
  SchemeTable small = detail::build_unprojected(inner, inner_levels, tag);

  // Member order is preserved by compress (it is monotone on masks within the support).
  SchemeTable table;
  table.n = family.n();
  table.family = family;
  table.m = small.m;
  table.levels = small.levels;
  table.provenance = small.provenance;
  table.provenance.projected = true;
  table.profiles.assign(small.profiles.size(), PixelProfile(family.n()));
  for (std::size_t a = 0; a < small.profiles.size(); ++a) {
    for (std::uint32_t m = 0; m < lattice_size(k); ++m) {
      table.profiles[a].at(detail::expand(Subset(m), support)) = small.profiles[a][Subset(m)];
    }
  }
  return table;
}

// Even subsets outside the family whose members inside them are not confined
// to a proper subset, smallest first (ties by mask).
inline std::vector<Subset> qualifying_holes(const Family& family) {
  std::vector<Subset> out;
  for (Subset t : nonempty_subsets(family.n())) {
    if (t.size() % 2 != 0 || family.contains(t)) continue;
    Subset covered;
    for (Subset s : family.members()) {
      if (s.subset_of(t)) covered = covered | s;
    }
    if (covered == t) out.push_back(t);
  }
  std::stable_sort(out.begin(), out.end(), [](Subset a, Subset b) { return a.size() < b.size(); });
  return out;
}

// The improved construction. Tries qualifying holes in order and returns the
// first table that builds with m below the block construction.
inline SchemeTable improved_scheme(const Family& family) {
  check_table_size(family);
  const auto holes = qualifying_holes(family);
  if (holes.empty()) {
    throw NotApplicableError("no even subset outside the family qualifies; the block construction stands");
  }
  const std::int64_t droste_m = droste_expansion(family);
  std::string failures;
  for (Subset hole : holes) {
    try {
      SchemeTable table = build_scheme(family, even_hole_levels(family, hole), Construction::improved);
      if (table.m < droste_m) {
        table.provenance.hole = hole;
        return table;
      }
      failures += " " + to_string(hole) + ": m=" + std::to_string(table.m);
    } catch (const InfeasibleError& e) {
      failures += " " + to_string(hole) + ": " + e.what();
    }
  }
  throw NotApplicableError("qualifying holes did not yield a smaller scheme;" + failures);
}

// Appends `count` always-black columns to every profile; every stacked count
// rises by `count`.
inline SchemeTable pad_always_black(SchemeTable table, std::int64_t count) {
  if (count < 0) throw DomainError("padding must be nonnegative");
  const Subset full = Subset::full(table.n);
  for (auto& p : table.profiles) p.at(full) += count;
  for (auto& lv : table.levels) {
    lv.h += count;
    lv.l += count;
  }
  table.m += count;
  table.provenance.black_padding += count;
  return table;
}

// Scheme whose contrasts are delta_T / M for the realization of `targets`:
// tight levels for delta, then always-black padding up to M columns.
inline SchemeTable realize_scheme(const ContrastVector& targets, const Rational& epsilon) {
  const Realization real = realize_contrast(targets, epsilon);
  const Family family = real.delta.support_family();
  if (family.empty()) throw InfeasibleError("every realized contrast is zero; nothing to encode");
  SchemeTable table = build_scheme(family, tight_levels(real.delta), Construction::realized);
  table = pad_always_black(std::move(table), real.denominator - table.m);
  table.provenance.construction = Construction::realized;
  return table;
}

}  // namespace evcs
