#pragma once

// Brute-force certification of a scheme table against both scheme
// conditions:
//
//  1. contrast: for every assignment and member T, the OR of the rows in T
//     has weight h_T if T is black and l_T otherwise;
//  2. security: restricting to any rows Q gives identical column multisets
//     for assignments that agree on the members inside Q.
//
// Works only from the profiles and the definitions; it shares no code path
// with the builders.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evcs/contrast.hpp"
#include "evcs/errors.hpp"
#include "evcs/lattice.hpp"
#include "evcs/linsys.hpp"
#include "evcs/scheme.hpp"

namespace evcs {

// Hamming weight of the OR of `rows` over the basis matrix of `profile`.
inline std::int64_t or_weight(const PixelProfile& profile, Subset rows) {
  if (rows.empty()) throw DomainError("or_weight needs a nonempty row set");
  std::int64_t w = 0;
  for (std::uint32_t u = 1; u < lattice_size(profile.n()); ++u) {
    if (Subset(u).intersects(rows)) w += profile[Subset(u)];
  }
  return w;
}

// Column supports intersected with `rows`. The result keeps the original
// labels: counts sit on subsets of `rows` only, and the total is preserved.
inline PixelProfile restrict_profile(const PixelProfile& profile, Subset rows) {
  PixelProfile out(profile.n());
  for (std::uint32_t u = 0; u < lattice_size(profile.n()); ++u) {
    out.at(Subset(u) & rows) += profile[Subset(u)];
  }
  return out;
}

struct StructureViolation {
  Assignment assignment = 0;
  std::string reason;
};

struct ContrastViolation {
  Assignment assignment = 0;
  Subset member;
  std::int64_t expected = 0;
  std::int64_t observed = 0;
};

struct SecurityViolation {
  Subset rows;
  Assignment assignment = 0;
  Assignment representative = 0;  // first assignment seen in the same class
};

struct Certificate {
  std::vector<StructureViolation> structure;
  std::vector<ContrastViolation> contrast;
  std::vector<SecurityViolation> security;
  std::optional<std::vector<LevelPair>> observed_levels;

  bool structure_ok() const { return structure.empty(); }
  bool contrast_ok() const { return structure.empty() && contrast.empty(); }
  bool security_ok() const { return structure.empty() && security.empty(); }
  bool passed() const { return structure.empty() && contrast.empty() && security.empty(); }
};

// Shape, nonnegativity and a common column count.
inline std::vector<StructureViolation> check_structure(const SchemeTable& table) {
  std::vector<StructureViolation> out;
  if (table.family.n() != table.n) out.push_back({0, "family ground set differs from n"});
  if (table.levels.size() != table.family.size()) out.push_back({0, "one level pair per member expected"});
  if (table.profiles.size() != (std::size_t{1} << table.family.size())) {
    out.push_back({0, "expected 2^|family| profiles"});
    return out;
  }
  for (Assignment a = 0; a < table.profiles.size(); ++a) {
    const auto& p = table.profiles[a];
    if (p.n() != table.n) {
      out.push_back({a, "profile has wrong ground set"});
    } else if (!p.nonnegative()) {
      out.push_back({a, "negative column count"});
    } else if (p.total() != table.m) {
      out.push_back({a, "profile has " + std::to_string(p.total()) + " columns, m = " + std::to_string(table.m)});
    }
  }
  return out;
}

inline std::vector<ContrastViolation> verify_contrast(const SchemeTable& table) {
  std::vector<ContrastViolation> out;
  for (Assignment a = 0; a < table.profiles.size(); ++a) {
    for (std::size_t i = 0; i < table.family.size(); ++i) {
      const Subset t = table.family[i];
      const std::int64_t want = is_black(a, static_cast<int>(i)) ? table.levels[i].h : table.levels[i].l;
      const std::int64_t got = or_weight(table.profiles[a], t);
      if (got != want) out.push_back({a, t, want, got});
    }
  }
  return out;
}

// Groups assignments by their colours inside P(Q) and compares each
// restricted profile with the first one in its class.
inline std::vector<SecurityViolation> verify_security(const SchemeTable& table) {
  std::vector<SecurityViolation> out;
  for (std::uint32_t q = 1; q < lattice_size(table.n); ++q) {
    const Subset rows(q);
    const Assignment inside = table.family.members_inside(rows);
    std::map<Assignment, std::pair<Assignment, PixelProfile>> classes;
    for (Assignment a = 0; a < table.profiles.size(); ++a) {
      PixelProfile restricted = restrict_profile(table.profiles[a], rows);
      auto [it, fresh] = classes.try_emplace(a & inside, a, restricted);
      if (!fresh && it->second.second != restricted) out.push_back({rows, a, it->second.first});
    }
  }
  return out;
}

// Levels realized by the table, read from the profiles. Throws if a member's
// count is not constant over its black (or white) assignments.
inline std::vector<LevelPair> measure_levels(const SchemeTable& table) {
  if (table.profiles.size() != (std::size_t{1} << table.family.size())) {
    throw VerificationError("table does not have 2^|family| profiles");
  }
  std::vector<LevelPair> out;
  for (std::size_t i = 0; i < table.family.size(); ++i) {
    const Subset t = table.family[i];
    std::optional<std::int64_t> h, l;
    for (Assignment a = 0; a < table.profiles.size(); ++a) {
      const std::int64_t w = or_weight(table.profiles[a], t);
      auto& slot = is_black(a, static_cast<int>(i)) ? h : l;
      if (slot && *slot != w) {
        throw VerificationError("stacked count of " + to_string(t) + " is not constant within a colour");
      }
      slot = w;
    }
    out.push_back({*h, *l});
  }
  return out;
}

inline Certificate certify(const SchemeTable& table) {
  Certificate cert;
  cert.structure = check_structure(table);
  if (!cert.structure.empty()) return cert;
  cert.contrast = verify_contrast(table);
  cert.security = verify_security(table);
  try {
    cert.observed_levels = measure_levels(table);
  } catch (const VerificationError&) {
    cert.observed_levels.reset();
  }
  return cert;
}

// Explicit n x m Boolean matrices, row-major, rows[i][j] = subpixel j of transparency i+1.
using BoolMatrix = std::vector<std::vector<std::uint8_t>>;

inline PixelProfile profile_of(const BoolMatrix& matrix, int n) {
  if (static_cast<int>(matrix.size()) != n) throw FormatError("matrix must have n rows");
  const std::size_t m = matrix.empty() ? 0 : matrix[0].size();
  PixelProfile p(n);
  for (const auto& row : matrix) {
    if (row.size() != m) throw FormatError("ragged matrix");
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::uint32_t support = 0;
    for (int i = 0; i < n; ++i) {
      if (matrix[i][j]) support |= 1u << i;
    }
    p.at(Subset(support)) += 1;
  }
  return p;
}

namespace detail {

// m! / prod(x_U!) or nullopt once it exceeds `limit`.
inline std::optional<std::uint64_t> arrangements(const PixelProfile& p, std::uint64_t limit) {
  std::uint64_t result = 1;
  std::int64_t placed = 0;
  for (auto c : p.raw()) {
    for (std::int64_t k = 1; k <= c; ++k) {
      ++placed;
      // result *= placed / k, kept exact: binomial-style accumulation
      result = result * static_cast<std::uint64_t>(placed) / static_cast<std::uint64_t>(k);
      if (result > limit) return std::nullopt;
    }
  }
  return result;
}

}  // namespace detail

// Converts explicit basis-matrix collections (one per assignment) into a
// table. Each collection must be exactly one column-permutation class: every
// distinct arrangement of a single profile, each with the same multiplicity.
inline SchemeTable import_collections(const Family& family, const std::vector<std::vector<BoolMatrix>>& collections) {
  check_table_size(family);
  const int n = family.n();
  if (collections.size() != (std::size_t{1} << family.size())) {
    throw FormatError("expected one collection per colour assignment");
  }
  SchemeTable table;
  table.n = n;
  table.family = family;
  table.provenance.construction = Construction::imported;
  for (std::size_t a = 0; a < collections.size(); ++a) {
    const auto& coll = collections[a];
    if (coll.empty()) throw FormatError("empty collection for assignment " + std::to_string(a));
    const PixelProfile base = profile_of(coll.front(), n);
    std::map<BoolMatrix, std::size_t> multiplicity;
    for (const auto& mat : coll) {
      if (profile_of(mat, n) != base) {
        throw FormatError("unsupported collection for assignment " + std::to_string(a) +
                          ": matrices are not column permutations of one another");
      }
      ++multiplicity[mat];
    }
    const auto distinct = detail::arrangements(base, coll.size());
    const bool uniform = std::all_of(multiplicity.begin(), multiplicity.end(), [&](const auto& kv) {
      return kv.second == multiplicity.begin()->second;
    });
    if (!distinct || *distinct != multiplicity.size() || !uniform) {
      throw FormatError("unsupported collection for assignment " + std::to_string(a) +
                        ": not exactly one full column-permutation class");
    }
    if (a == 0) table.m = base.total();
    if (base.total() != table.m) throw FormatError("collections disagree on m");
    table.profiles.push_back(base);
  }
  table.levels = measure_levels(table);
  return table;
}

}  // namespace evcs
