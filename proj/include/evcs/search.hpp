#pragma once

// Certified minimum pixel expansion for a family and per-member contrasts.
//
// A scheme (one column profile per colour assignment, all with m columns) is
// described by its stacked counts r^a. Members T contribute r_T = l_T or
// l_T + delta_T by colour. A non-member T may take any value that depends
// only on the colours of members inside T; that is exactly what the security
// condition allows, since a restriction to rows Q is determined by the
// counts (r_S) for S inside Q. Feasibility is then the integer system
//
//   solve_x(r^a) >= 0 and r^a_{1..n} <= m   for every assignment a,
//
// over the member levels l_T and one free value per (non-member, class).
// The solver is a depth-first branch and bound with interval propagation on
// those inequalities (plus their restrictions to every row subset, which
// prune early). The search is exhaustive, so an infeasible answer is a proof.
// Since all-white columns pad any scheme, feasibility is monotone in m and
// the first feasible m scanned upward is the minimum.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "evcs/builder.hpp"
#include "evcs/contrast.hpp"
#include "evcs/errors.hpp"
#include "evcs/lattice.hpp"
#include "evcs/linsys.hpp"
#include "evcs/scheme.hpp"
#include "evcs/verifier.hpp"

namespace evcs {

struct SearchBudget {
  std::int64_t max_m = 0;             // 0: twice the block-construction expansion
  std::int64_t node_limit = 50'000'000;  // total branch nodes over all m
  double time_limit_s = 0;               // 0: no wall-clock limit
};

enum class SearchStatus { optimal, lower_bound_only };

inline std::string to_string(SearchStatus s) {
  return s == SearchStatus::optimal ? "optimal" : "lower_bound_only";
}

struct SearchResult {
  Family family;
  DeltaSpec delta;
  SearchStatus status = SearchStatus::lower_bound_only;
  std::optional<std::int64_t> m_star;  // set iff status == optimal
  std::int64_t lower_bound = 0;        // every m below this was proved infeasible
  std::int64_t upper_bound = 0;        // expansion of `witness`
  std::optional<SchemeTable> witness;
  std::int64_t droste_m = 0;
  std::optional<bool> optimal_droste;  // known iff status == optimal
  std::int64_t nodes = 0;
};

namespace detail {

struct Term {
  int var;
  std::int64_t coef;
  friend bool operator==(const Term&, const Term&) = default;
};

// sum coef * var + constant >= 0
struct Constraint {
  std::vector<Term> terms;
  std::int64_t constant = 0;
  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct ConstraintHash {
  std::size_t operator()(const Constraint& c) const {
    std::size_t h = std::hash<std::int64_t>{}(c.constant);
    for (const auto& t : c.terms) {
      h ^= std::hash<std::int64_t>{}(t.var * 3 + t.coef) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
  }
};

struct BudgetExhausted {};

struct Limits {
  std::int64_t nodes = 0;
  std::int64_t node_limit = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline;

  void check_time() const {
    if (deadline && std::chrono::steady_clock::now() > *deadline) throw BudgetExhausted{};
  }
};

class ExpansionModel {
 public:
  ExpansionModel(const Family& family, const DeltaSpec& delta, std::int64_t m)
      : family_(family), delta_(delta), m_(m), n_(family.n()) {
    build_variables();
    build_constraints();
  }

  // Explores until a solution, exhaustion, or the budget.
  // Returns true iff a solution was found; throws BudgetExhausted.
  bool solve(Limits& limits) {
    limits_ = &limits;
    if (trivially_infeasible_) return false;
    lo_.assign(vars_.size(), 0);
    hi_.assign(vars_.size(), m_);
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      if (vars_[v].member) hi_[v] = m_ - delta_[vars_[v].set];
    }
    std::vector<int> all(constraints_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    if (!propagate(all)) return false;
    return dfs();
  }

  // Stacked counts for assignment a under the solution.
  RVector stacked(Assignment a) const {
    RVector r(n_);
    for (std::uint32_t t = 1; t < lattice_size(n_); ++t) {
      const auto [var, offset] = term_for(Subset(t), a);
      r.set(Subset(t), lo_[var] + offset);
    }
    return r;
  }

  std::int64_t level(Subset member) const {
    return lo_[member_var_[family_.index_of(member)]];
  }

 private:
  struct VarInfo {
    Subset set;
    bool member = false;
  };

  // r_T under assignment a = value(var) + offset
  std::pair<int, std::int64_t> term_for(Subset t, Assignment a) const {
    const int idx = family_.index_of(t);
    if (idx >= 0) return {member_var_[idx], is_black(a, idx) ? delta_[t] : 0};
    const auto& inside = inside_[t.mask()];
    std::size_t cls = 0;
    for (std::size_t k = 0; k < inside.size(); ++k) {
      if (is_black(a, inside[k])) cls |= std::size_t{1} << k;
    }
    return {class_base_[t.mask()] + static_cast<int>(cls), 0};
  }

  void build_variables() {
    const std::size_t size = lattice_size(n_);
    inside_.resize(size);
    class_base_.assign(size, -1);
    member_var_.assign(family_.size(), -1);
    // Member levels first in canonical order, so the first solution found has
    // the lexicographically smallest level map; then the non-member classes.
    for (std::size_t i = 0; i < family_.size(); ++i) {
      member_var_[i] = static_cast<int>(vars_.size());
      vars_.push_back({family_[i], true});
    }
    for (std::uint32_t mask = 1; mask < size; ++mask) {
      const Subset t(mask);
      if (family_.contains(t)) continue;
      for (std::size_t i = 0; i < family_.size(); ++i) {
        if (family_[i].proper_subset_of(t)) inside_[t.mask()].push_back(static_cast<int>(i));
      }
      class_base_[t.mask()] = static_cast<int>(vars_.size());
      const std::size_t classes = std::size_t{1} << inside_[t.mask()].size();
      for (std::size_t c = 0; c < classes; ++c) vars_.push_back({t, false});
    }
  }

  void add(std::unordered_set<Constraint, ConstraintHash>& seen, Constraint c) {
    std::sort(c.terms.begin(), c.terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> merged;
    for (const auto& t : c.terms) {
      if (!merged.empty() && merged.back().var == t.var) {
        merged.back().coef += t.coef;
      } else {
        merged.push_back(t);
      }
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0; });
    c.terms = std::move(merged);
    if (c.terms.empty()) {
      if (c.constant < 0) trivially_infeasible_ = true;
      return;
    }
    if (seen.insert(c).second) constraints_.push_back(std::move(c));
  }

  // y_V >= 0 on the rows of q, for assignment a (only colours inside q matter),
  // and m - r_q >= 0.
  void restricted_system(std::unordered_set<Constraint, ConstraintHash>& seen, Subset q, Assignment a) {
    const int k = q.size();
    for_each_between(Subset(), q, [&](Subset v) {
      if (v.empty()) return;
      Constraint c;
      for_each_between(q - v, q, [&](Subset w) {
        if (w.empty()) return;
        const auto [var, offset] = term_for(w, a);
        const std::int64_t sign = ((w.size() + v.size() + k + 1) % 2 == 0) ? 1 : -1;
        c.terms.push_back({var, sign});
        c.constant += sign * offset;
      });
      add(seen, std::move(c));
    });
    const auto [var, offset] = term_for(q, a);
    add(seen, Constraint{{{var, -1}}, m_ - offset});
  }

  void build_constraints() {
    std::unordered_set<Constraint, ConstraintHash> seen;
    const Assignment assignments = Assignment{1} << family_.size();
    for (std::uint32_t q = 1; q < lattice_size(n_); ++q) {
      const Subset rows(q);
      const Assignment inside = family_.members_inside(rows);
      // one representative per colour class inside q
      Assignment sub = inside;
      while (true) {
        restricted_system(seen, rows, sub);
        if (sub == 0) break;
        sub = (sub - 1) & inside;
      }
    }
    (void)assignments;
    watchers_.assign(vars_.size(), {});
    for (std::size_t i = 0; i < constraints_.size(); ++i) {
      for (const auto& t : constraints_[i].terms) watchers_[t.var].push_back(static_cast<int>(i));
    }
  }

  struct TrailEntry {
    int var;
    std::int64_t lo, hi;
  };

  static std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
  }
  static std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

  bool set_bounds(int v, std::int64_t lo, std::int64_t hi, std::vector<int>& queue) {
    if (lo <= lo_[v] && hi >= hi_[v]) return true;
    trail_.push_back({v, lo_[v], hi_[v]});
    lo_[v] = std::max(lo_[v], lo);
    hi_[v] = std::min(hi_[v], hi);
    if (lo_[v] > hi_[v]) return false;
    for (int c : watchers_[v]) {
      if (!queued_[c]) {
        queued_[c] = true;
        queue.push_back(c);
      }
    }
    return true;
  }

  bool propagate(std::vector<int> queue) {
    queued_.assign(constraints_.size(), false);
    for (int c : queue) queued_[c] = true;
    bool ok = true;
    std::size_t steps = 0;
    while (!queue.empty() && ok) {
      if ((++steps & 0xffff) == 0) limits_->check_time();
      const int ci = queue.back();
      queue.pop_back();
      queued_[ci] = false;
      const auto& c = constraints_[ci];
      std::int64_t maxsum = c.constant;
      for (const auto& t : c.terms) maxsum += t.coef > 0 ? t.coef * hi_[t.var] : t.coef * lo_[t.var];
      if (maxsum < 0) {
        ok = false;
        break;
      }
      for (const auto& t : c.terms) {
        const std::int64_t own = t.coef > 0 ? t.coef * hi_[t.var] : t.coef * lo_[t.var];
        const std::int64_t rest = maxsum - own;  // coef * v >= -rest
        if (t.coef > 0) {
          const std::int64_t bound = ceil_div(-rest, t.coef);
          if (bound > lo_[t.var] && !set_bounds(t.var, bound, hi_[t.var], queue)) {
            ok = false;
            break;
          }
        } else {
          const std::int64_t bound = floor_div(-rest, t.coef);
          if (bound < hi_[t.var] && !set_bounds(t.var, lo_[t.var], bound, queue)) {
            ok = false;
            break;
          }
        }
      }
    }
    for (int c : queue) queued_[c] = false;
    return ok;
  }

  void undo(std::size_t mark) {
    while (trail_.size() > mark) {
      const auto& e = trail_.back();
      lo_[e.var] = e.lo;
      hi_[e.var] = e.hi;
      trail_.pop_back();
    }
  }

  bool dfs() {
    int var = -1;
    for (std::size_t v = 0; v < vars_.size(); ++v) {
      if (lo_[v] != hi_[v]) {
        var = static_cast<int>(v);
        break;
      }
    }
    if (var < 0) return true;
    if (++limits_->nodes > limits_->node_limit) throw BudgetExhausted{};
    limits_->check_time();

    const std::size_t mark = trail_.size();
    std::vector<int> queue;
    const std::int64_t value = lo_[var];
    if (set_bounds(var, value, value, queue) && propagate(queue) && dfs()) return true;
    undo(mark);
    queue.clear();
    if (set_bounds(var, value + 1, hi_[var], queue) && propagate(queue) && dfs()) return true;
    undo(mark);
    return false;
  }

  Family family_;
  DeltaSpec delta_;
  std::int64_t m_;
  int n_;
  std::vector<VarInfo> vars_;
  std::vector<std::vector<int>> inside_;
  std::vector<int> class_base_;
  std::vector<int> member_var_;
  std::vector<Constraint> constraints_;
  std::vector<std::vector<int>> watchers_;
  std::vector<std::int64_t> lo_, hi_;
  std::vector<char> queued_;
  std::vector<TrailEntry> trail_;
  bool trivially_infeasible_ = false;
  Limits* limits_ = nullptr;
};

inline SchemeTable witness_from(const ExpansionModel& model, const Family& family, const DeltaSpec& delta,
                                std::int64_t m) {
  SchemeTable table;
  table.n = family.n();
  table.family = family;
  table.m = m;
  table.provenance.construction = Construction::search;
  for (Subset s : family.members()) {
    const std::int64_t l = model.level(s);
    table.levels.push_back({l + delta[s], l});
  }
  for (Assignment a = 0; a < (Assignment{1} << family.size()); ++a) {
    PixelProfile x = solve_x(model.stacked(a));
    x.at(Subset()) = m - x.total();
    table.provenance.white_padding |= x[Subset()] != 0;
    table.profiles.push_back(std::move(x));
  }
  return table;
}

}  // namespace detail

inline void check_search_gate(const Family& family) {
  if (family.n() > 4 && family.size() > 12) {
    throw TractabilityError("search needs n <= 4 or |family| <= 12; got n = " + std::to_string(family.n()) +
                            ", |family| = " + std::to_string(family.size()));
  }
  check_table_size(family);
}

// Decides whether a scheme with exactly m columns exists; fills `witness`.
// Throws detail::BudgetExhausted when the budget runs out.
inline bool expansion_feasible(const Family& family, const DeltaSpec& delta, std::int64_t m, detail::Limits& limits,
                               std::optional<SchemeTable>* witness = nullptr) {
  detail::ExpansionModel model(family, delta, m);
  if (!model.solve(limits)) return false;
  if (witness) *witness = detail::witness_from(model, family, delta, m);
  return true;
}

inline SearchResult min_expansion(const Family& family, const DeltaSpec& delta, SearchBudget budget = {}) {
  check_search_gate(family);
  if (delta.n() != family.n()) throw DomainError("delta and family disagree on n");
  for (std::uint32_t t = 1; t < lattice_size(family.n()); ++t) {
    const bool member = family.contains(Subset(t));
    if (member && delta[Subset(t)] < 1) {
      throw DomainError("member " + to_string(Subset(t)) + " needs delta >= 1");
    }
    if (!member && delta[Subset(t)] != 0) {
      throw DomainError("non-member " + to_string(Subset(t)) + " must have delta 0");
    }
  }

  SearchResult result;
  result.family = family;
  result.delta = delta;
  result.droste_m = droste_expansion(delta);
  const std::int64_t max_m = budget.max_m > 0 ? budget.max_m : 2 * result.droste_m;

  std::int64_t start = 1;
  for (Subset s : family.members()) start = std::max(start, delta[s]);
  result.lower_bound = start;

  detail::Limits limits;
  limits.node_limit = budget.node_limit;
  if (budget.time_limit_s > 0) {
    limits.deadline = std::chrono::steady_clock::now() +
                      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(budget.time_limit_s));
  }
  try {
    for (std::int64_t m = start; m <= max_m; ++m) {
      std::optional<SchemeTable> witness;
      const bool feasible = expansion_feasible(family, delta, m, limits, &witness);
      result.nodes = limits.nodes;
      if (feasible) {
        result.status = SearchStatus::optimal;
        result.m_star = m;
        result.upper_bound = m;
        result.witness = std::move(witness);
        result.optimal_droste = (m == result.droste_m);
        return result;
      }
      result.lower_bound = m + 1;
    }
  } catch (const detail::BudgetExhausted&) {
    result.nodes = limits.nodes;
  }
  // Budget ran out: fall back to the tight-level table as the upper bound.
  result.status = SearchStatus::lower_bound_only;
  result.witness = build_scheme(family, tight_levels(delta), Construction::tight);
  result.upper_bound = result.witness->m;
  return result;
}

inline SearchResult min_expansion(const Family& family, SearchBudget budget = {}) {
  return min_expansion(family, DeltaSpec::from_family(family), budget);
}

struct DrosteGap {
  Family family;
  std::int64_t droste_m = 0;
  std::optional<std::int64_t> improved_m;
  std::string improved_note;  // why improved_m is absent
  SearchResult search;
  bool gap_predicted = false;  // some even hole qualifies
  // true: a strictly smaller scheme exists; false: proved none does;
  // nullopt: undecided within budget
  std::optional<bool> gap_observed;
  // prediction contradicted by a certified optimum
  bool contradiction = false;
};

inline DrosteGap droste_gap(const Family& family, SearchBudget budget = {}) {
  DrosteGap gap;
  gap.family = family;
  gap.droste_m = droste_expansion(family);
  gap.gap_predicted = !qualifying_holes(family).empty();
  try {
    gap.improved_m = improved_scheme(family).m;
  } catch (const NotApplicableError& e) {
    gap.improved_note = e.what();
  }
  gap.search = min_expansion(family, budget);
  if (gap.search.m_star) {
    gap.gap_observed = *gap.search.m_star < gap.droste_m;
  } else if (gap.improved_m && *gap.improved_m < gap.droste_m) {
    gap.gap_observed = true;
  } else if (gap.search.lower_bound >= gap.droste_m) {
    gap.gap_observed = false;
  }
  gap.contradiction = gap.gap_predicted && gap.gap_observed == false;
  return gap;
}

// The intersection reading of the closing conjecture: for every nonempty
// T outside the family, |T| is odd or the members inside T lie in P(T') for
// some proper T' < T.
inline bool conjecture_predicts_intersection(const Family& family) {
  const Subset full = Subset::full(family.n());
  for (std::uint32_t t = 1; t <= full.mask(); ++t) {
    const Subset set(t);
    if (family.contains(set) || set.size() % 2 == 1) continue;
    bool confined = false;
    for_each_between(Subset(), set, [&](Subset proper) {
      if (confined || proper == set) return;
      bool all_inside = true;
      for (Subset s : family.members()) {
        if (s.subset_of(set) && !s.subset_of(proper)) all_inside = false;
      }
      confined = all_inside;
    });
    if (!confined) return false;
  }
  return true;
}

// The literal union reading: the family together with P(T) inside P(T').
// P(T) always contains T itself, so the clause never holds for T' < T.
inline bool conjecture_predicts_union(const Family& family) {
  const Subset full = Subset::full(family.n());
  for (std::uint32_t t = 1; t <= full.mask(); ++t) {
    const Subset set(t);
    if (family.contains(set) || set.size() % 2 == 1) continue;
    bool clause = false;
    for_each_between(Subset(), set, [&](Subset proper) {
      if (clause || proper == set) return;
      bool all_inside = set.subset_of(proper);  // T in P(T) must lie in P(T')
      for (Subset s : family.members()) all_inside = all_inside && s.subset_of(proper);
      clause = all_inside;
    });
    if (!clause) return false;
  }
  return true;
}

struct ConjectureRow {
  Family family;
  std::int64_t droste_m = 0;
  SearchStatus status = SearchStatus::lower_bound_only;
  std::optional<std::int64_t> m_star;
  std::int64_t lower_bound = 0;
  std::optional<bool> droste_optimal;
  bool predicts_intersection = false;
  bool predicts_union = false;
  std::optional<bool> agree_intersection;
  std::optional<bool> agree_union;
  std::int64_t nodes = 0;
};

// Canonical representative under relabeling: the lexicographically smallest
// sorted mask list over all permutations of {1..n}.
inline Family canonical_form(const Family& family) {
  std::vector<int> perm(family.n());
  for (int i = 0; i < family.n(); ++i) perm[i] = i + 1;
  std::optional<Family> best;
  do {
    Family image = relabel(family, perm);
    if (!best || image.members() < best->members()) best = std::move(image);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return *best;
}

struct ScanOptions {
  std::size_t samples = 0;  // 0: exhaustive (n <= 3 only)
  std::uint64_t seed = 1;
  SearchBudget budget{};
};

// Nonempty families up to relabeling: all of them for n <= 3, otherwise
// `samples` seeded draws.
inline std::vector<Family> scan_families(int n, const ScanOptions& options) {
  check_ground_set(n, 4);
  const std::uint32_t sets = static_cast<std::uint32_t>(lattice_size(n) - 1);
  std::vector<Family> out;
  std::vector<std::vector<Subset>> seen;
  auto consider = [&](std::uint32_t bits) {
    std::vector<Subset> members;
    for (std::uint32_t i = 0; i < sets; ++i) {
      if ((bits >> i) & 1u) members.push_back(subset_at(i));
    }
    Family canon = canonical_form(Family(n, members));
    if (std::find(seen.begin(), seen.end(), canon.members()) != seen.end()) return;
    seen.push_back(canon.members());
    out.push_back(std::move(canon));
  };
  if (options.samples == 0) {
    if (n > 3) throw TractabilityError("exhaustive conjecture scan is limited to n <= 3; pass a sample count");
    for (std::uint32_t bits = 1; bits < (1u << sets); ++bits) consider(bits);
  } else {
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<std::uint32_t> pick(1, (1u << sets) - 1);
    for (std::size_t i = 0; i < options.samples; ++i) consider(pick(rng));
  }
  return out;
}

inline ConjectureRow conjecture_row(const Family& family, const SearchBudget& budget) {
  ConjectureRow row;
  row.family = family;
  row.droste_m = droste_expansion(family);
  row.predicts_intersection = conjecture_predicts_intersection(family);
  row.predicts_union = conjecture_predicts_union(family);
  const SearchResult res = min_expansion(family, budget);
  row.status = res.status;
  row.m_star = res.m_star;
  row.lower_bound = res.lower_bound;
  row.nodes = res.nodes;
  if (res.m_star) {
    row.droste_optimal = *res.m_star == row.droste_m;
  } else if (res.lower_bound >= row.droste_m) {
    row.droste_optimal = true;
  }
  if (row.droste_optimal) {
    row.agree_intersection = *row.droste_optimal == row.predicts_intersection;
    row.agree_union = *row.droste_optimal == row.predicts_union;
  }
  return row;
}

inline std::vector<ConjectureRow> conjecture_scan(int n, const ScanOptions& options = {}) {
  std::vector<ConjectureRow> rows;
  for (const Family& f : scan_families(n, options)) rows.push_back(conjecture_row(f, options.budget));
  return rows;
}

}  // namespace evcs
