#include <gtest/gtest.h>

#include <map>

#include "evcs/search.hpp"

using namespace evcs;

namespace {

std::vector<Family> all_families(int n) {
  const std::uint32_t sets = static_cast<std::uint32_t>(lattice_size(n) - 1);
  std::vector<Family> out;
  for (std::uint32_t bits = 1; bits < (1u << sets); ++bits) {
    std::vector<Subset> m;
    for (std::uint32_t i = 0; i < sets; ++i) {
      if ((bits >> i) & 1u) m.push_back(subset_at(i));
    }
    out.emplace_back(n, m);
  }
  return out;
}

Family without(const Family& f, Subset s) {
  std::vector<Subset> m;
  for (Subset t : f.members()) {
    if (t != s) m.push_back(t);
  }
  return Family(f.n(), m);
}

void compositions(int parts, std::int64_t total, std::vector<std::int64_t>& cur, std::vector<std::vector<std::int64_t>>& out) {
  if (static_cast<int>(cur.size()) == parts - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::int64_t k = 0; k <= total; ++k) {
    cur.push_back(k);
    compositions(parts, total - k, cur, out);
    cur.pop_back();
  }
}

// Brute force over whole tables: profiles per assignment drawn from all
// compositions of m, checked directly against both conditions.
bool brute_feasible(const Family& f, std::int64_t m) {
  const int n = f.n();
  std::vector<std::vector<std::int64_t>> comps;
  std::vector<std::int64_t> cur;
  compositions(static_cast<int>(lattice_size(n)), m, cur, comps);
  std::vector<PixelProfile> candidates;
  for (const auto& c : comps) {
    PixelProfile p(n);
    for (std::uint32_t u = 0; u < c.size(); ++u) p.at(Subset(u)) = c[u];
    candidates.push_back(p);
  }
  const Assignment count = Assignment{1} << f.size();
  std::vector<PixelProfile> chosen;
  std::function<bool()> rec = [&]() -> bool {
    const Assignment a = chosen.size();
    if (a == count) {
      // contrast: black weight strictly above white weight, each constant
      for (std::size_t i = 0; i < f.size(); ++i) {
        std::optional<std::int64_t> h, l;
        for (Assignment b = 0; b < count; ++b) {
          const std::int64_t w = or_weight(chosen[b], f[i]);
          auto& slot = is_black(b, static_cast<int>(i)) ? h : l;
          if (slot && *slot != w) return false;
          slot = w;
        }
        if (*h <= *l) return false;
      }
      return true;
    }
    for (const auto& p : candidates) {
      bool ok = true;
      // security against every earlier assignment in the same class
      for (std::uint32_t q = 1; q < lattice_size(n) && ok; ++q) {
        const auto inside = f.members_inside(Subset(q));
        for (Assignment b = 0; b < a && ok; ++b) {
          if ((a & inside) == (b & inside)) ok = restrict_profile(p, Subset(q)) == restrict_profile(chosen[b], Subset(q));
        }
      }
      // constant counts within each colour
      for (std::size_t i = 0; i < f.size() && ok; ++i) {
        for (Assignment b = 0; b < a && ok; ++b) {
          if (is_black(a, static_cast<int>(i)) == is_black(b, static_cast<int>(i))) {
            ok = or_weight(p, f[i]) == or_weight(chosen[b], f[i]);
          }
        }
      }
      if (!ok) continue;
      chosen.push_back(p);
      if (rec()) return true;
      chosen.pop_back();
    }
    return false;
  };
  return rec();
}

std::int64_t brute_min(const Family& f) {
  for (std::int64_t m = 1;; ++m) {
    if (brute_feasible(f, m)) return m;
  }
}

}  // namespace

TEST(Search, SpecExamples) {
  auto r = min_expansion(Family::all(2));
  ASSERT_EQ(r.status, SearchStatus::optimal);
  EXPECT_EQ(*r.m_star, 4);
  EXPECT_EQ(*r.optimal_droste, true);

  r = min_expansion(Family(2, {Subset::of({1}), Subset::of({2})}));
  EXPECT_EQ(*r.m_star, 1);
  EXPECT_EQ(r.droste_m, 2);
  EXPECT_EQ(*r.optimal_droste, false);

  r = min_expansion(Family::all_but_top(3));
  EXPECT_EQ(*r.m_star, 9);
  EXPECT_EQ(r.droste_m, 9);
  EXPECT_TRUE(*r.optimal_droste);

  r = min_expansion(Family::all(3));
  EXPECT_EQ(*r.m_star, 13);
  EXPECT_EQ(*r.m_star, lower_bound(3));
}

TEST(Search, MatchesBruteForceAtN2) {
  for (const Family& f : all_families(2)) {
    const auto r = min_expansion(f);
    ASSERT_TRUE(r.m_star) << to_string(f);
    EXPECT_EQ(*r.m_star, brute_min(f)) << to_string(f);
  }
}

TEST(Search, WitnessesCertifiedUpToN3) {
  for (int n = 1; n <= 3; ++n) {
    for (const Family& f : all_families(n)) {
      const auto r = min_expansion(f);
      ASSERT_EQ(r.status, SearchStatus::optimal) << to_string(f);
      EXPECT_LE(*r.m_star, r.droste_m);
      EXPECT_EQ(r.lower_bound, *r.m_star);
      ASSERT_TRUE(r.witness);
      EXPECT_EQ(r.witness->m, *r.m_star);
      const Certificate c = certify(*r.witness);
      EXPECT_TRUE(c.passed()) << to_string(f);
      for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(r.witness->levels[i].h - r.witness->levels[i].l, 1);
    }
  }
}

TEST(Search, GapWheneverAHoleQualifies) {
  for (int n = 2; n <= 3; ++n) {
    for (const Family& f : all_families(n)) {
      if (qualifying_holes(f).empty()) continue;
      const auto r = min_expansion(f);
      EXPECT_LT(*r.m_star, droste_expansion(f)) << to_string(f);
      EXPECT_LE(*r.m_star, improved_scheme(f).m) << to_string(f);
    }
  }
}

TEST(Search, MonotoneUnderEnlargement) {
  std::map<std::vector<Subset>, std::int64_t> best;
  const auto families = all_families(3);
  for (const Family& f : families) best[f.members()] = *min_expansion(f).m_star;
  for (const Family& f : families) {
    for (Subset extra : nonempty_subsets(3)) {
      if (f.contains(extra)) continue;
      auto bigger = f.members();
      bigger.push_back(extra);
      const Family g(3, bigger);
      EXPECT_GE(best[g.members()], best[f.members()]) << to_string(f) << " + " << to_string(extra);
    }
  }
}

TEST(Search, RelabelingSymmetry) {
  std::vector<int> perm{1, 2, 3};
  for (const Family& f : all_families(3)) {
    const auto m = *min_expansion(f).m_star;
    std::vector<int> p = perm;
    while (std::next_permutation(p.begin(), p.end())) {
      EXPECT_EQ(*min_expansion(relabel(f, p)).m_star, m) << to_string(f);
    }
  }
}

TEST(Search, GeneralDelta) {
  DeltaSpec d(2);
  d.set(Subset::of({1}), 2);
  d.set(Subset::of({1, 2}), 1);
  const auto r = min_expansion(d.support_family(), d);
  ASSERT_TRUE(r.m_star);
  EXPECT_LE(*r.m_star, droste_expansion(d));
  EXPECT_TRUE(certify(*r.witness).passed());
  EXPECT_EQ(r.witness->level(Subset::of({1})).h - r.witness->level(Subset::of({1})).l, 2);
  DeltaSpec bad(2);
  bad.set(Subset::of({2}), 1);
  EXPECT_THROW(min_expansion(Family::all(2), bad), DomainError);
}

TEST(Search, TieBreakIsLexicographicallySmallest) {
  // any other witness at m_star has a level vector at least as large
  const Family f = without(Family::all(3), Subset::of({1, 2}));
  const auto r = min_expansion(f);
  std::vector<std::int64_t> got;
  for (const auto& lv : r.witness->levels) got.push_back(lv.l);
  const SchemeTable improved = improved_scheme(f);
  if (improved.m == *r.m_star) {
    std::vector<std::int64_t> other;
    for (const auto& lv : improved.levels) other.push_back(lv.l);
    EXPECT_LE(got, other);
  }
  EXPECT_EQ(min_expansion(f).witness->profiles, r.witness->profiles);
}

TEST(Search, BudgetExhaustion) {
  SearchBudget b;
  b.node_limit = 1;
  const auto r = min_expansion(Family::all(3), b);
  EXPECT_EQ(r.status, SearchStatus::lower_bound_only);
  EXPECT_FALSE(r.m_star);
  EXPECT_LE(r.lower_bound, 13);
  EXPECT_GE(r.lower_bound, 1);
  ASSERT_TRUE(r.witness);
  EXPECT_EQ(r.upper_bound, 13);
  EXPECT_TRUE(certify(*r.witness).passed());
}

TEST(Search, TimeBudgetAtN4) {
  SearchBudget b;
  b.time_limit_s = 2;
  const auto r = min_expansion(Family::all(4), b);
  EXPECT_LE(r.lower_bound, 40);
  EXPECT_EQ(r.upper_bound, 40);
  if (r.status == SearchStatus::lower_bound_only) {
    EXPECT_FALSE(r.m_star);
  }
}

TEST(Search, TractabilityGate) {
  std::vector<Subset> members;
  for (Subset s : nonempty_subsets(5)) {
    if (members.size() < 13) members.push_back(s);
  }
  EXPECT_THROW(min_expansion(Family(5, members)), TractabilityError);
  members.pop_back();
  EXPECT_NO_THROW(check_search_gate(Family(5, members)));
}

TEST(Gap, Examples) {
  auto g = droste_gap(Family(2, {Subset::of({1}), Subset::of({2})}));
  EXPECT_EQ(g.droste_m, 2);
  EXPECT_EQ(g.improved_m, 1);
  EXPECT_EQ(g.search.m_star, 1);
  EXPECT_TRUE(g.gap_predicted);
  EXPECT_EQ(g.gap_observed, true);
  EXPECT_FALSE(g.contradiction);

  g = droste_gap(Family::all(3));
  EXPECT_EQ(g.droste_m, 13);
  EXPECT_FALSE(g.improved_m);
  EXPECT_EQ(g.search.m_star, 13);
  EXPECT_EQ(g.gap_observed, false);
  EXPECT_FALSE(g.contradiction);
}

TEST(Gap, AllButTopN4) {
  SearchBudget b;
  b.time_limit_s = 2;
  const auto g = droste_gap(Family::all_but_top(4), b);
  EXPECT_EQ(g.droste_m, 32);
  ASSERT_TRUE(g.improved_m);
  EXPECT_LT(*g.improved_m, 32);
  EXPECT_EQ(g.gap_observed, true);
}

TEST(Conjecture, Predicates) {
  const Family two(2, {Subset::of({1}), Subset::of({2})});
  EXPECT_FALSE(conjecture_predicts_intersection(two));
  EXPECT_TRUE(conjecture_predicts_intersection(Family::all(2)));
  EXPECT_TRUE(conjecture_predicts_intersection(Family::all_but_top(3)));
  EXPECT_TRUE(conjecture_predicts_intersection(Family(2, {Subset::of({1})})));
  EXPECT_FALSE(conjecture_predicts_union(Family(2, {Subset::of({1})})));
  EXPECT_TRUE(conjecture_predicts_union(Family::all_but_top(3)));
  // the intersection reading is exactly "no qualifying hole"
  for (int n = 1; n <= 3; ++n) {
    for (const Family& f : all_families(n)) {
      EXPECT_EQ(conjecture_predicts_intersection(f), qualifying_holes(f).empty()) << to_string(f);
    }
  }
}

TEST(Conjecture, ScanN2) {
  const auto rows = conjecture_scan(2);
  EXPECT_EQ(rows.size(), 5u);  // 7 families, 5 up to swapping 1 and 2
  for (const auto& r : rows) {
    ASSERT_TRUE(r.droste_optimal);
    EXPECT_TRUE(*r.agree_intersection) << to_string(r.family);
  }
}

TEST(Conjecture, ScanN3IsExhaustiveUpToRelabeling) {
  const auto rows = conjecture_scan(3);
  EXPECT_EQ(rows.size(), 39u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.droste_optimal.has_value());
    EXPECT_EQ(canonical_form(r.family), r.family);
  }
}

TEST(Conjecture, SampledN4NeedsSamples) {
  EXPECT_THROW(scan_families(4, {}), TractabilityError);
  ScanOptions o;
  o.samples = 5;
  o.seed = 3;
  const auto a = scan_families(4, o);
  const auto b = scan_families(4, o);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}
