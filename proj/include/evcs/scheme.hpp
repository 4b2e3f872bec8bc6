#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evcs/contrast.hpp"
#include "evcs/errors.hpp"
#include "evcs/lattice.hpp"
#include "evcs/linsys.hpp"

namespace evcs {

// Which images are black at the current pixel: bit i set <=> family[i] is black.
using Assignment = std::uint64_t;

// Tables hold 2^|family| profiles of 2^n counts each.
inline constexpr int kMaxTableLog2 = 24;

inline void check_table_size(const Family& family) {
  if (family.empty()) throw DomainError("family must be nonempty");
  if (static_cast<int>(family.size()) + family.n() > kMaxTableLog2) {
    throw DomainError("scheme table too large: 2^" + std::to_string(family.size()) + " assignments x 2^" +
                      std::to_string(family.n()) + " supports");
  }
}

inline Assignment assignment_of(const Family& family, const std::vector<Subset>& blacks) {
  Assignment a = 0;
  for (Subset s : blacks) {
    const int i = family.index_of(s);
    if (i < 0) throw DomainError(to_string(s) + " is not a family member");
    a |= Assignment{1} << i;
  }
  return a;
}

inline bool is_black(Assignment a, int member_index) { return (a >> member_index) & 1u; }

inline std::vector<Subset> blacks_of(const Family& family, Assignment a) {
  std::vector<Subset> out;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (is_black(a, static_cast<int>(i))) out.push_back(family[i]);
  }
  return out;
}

enum class Construction { droste, tight, improved, realized, search, imported };

inline std::string to_string(Construction c) {
  switch (c) {
    case Construction::droste: return "droste";
    case Construction::tight: return "tight";
    case Construction::improved: return "improved";
    case Construction::realized: return "realized";
    case Construction::search: return "search";
    case Construction::imported: return "imported";
  }
  return "unknown";
}

inline Construction construction_from_string(const std::string& s) {
  for (auto c : {Construction::droste, Construction::tight, Construction::improved, Construction::realized,
                 Construction::search, Construction::imported}) {
    if (to_string(c) == s) return c;
  }
  throw FormatError("unknown construction: " + s);
}

struct Provenance {
  Construction construction = Construction::tight;
  // All-white columns were added to equalize column counts across assignments.
  bool white_padding = false;
  // Columns black on every transparency, appended to dilute contrast.
  std::int64_t black_padding = 0;
  // Even subset outside the family used by the improved construction.
  std::optional<Subset> hole;
  // Built on the union of the family and lifted with all-white extra rows.
  bool projected = false;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// A complete scheme: one column profile per colour assignment. The basis
// matrices for an assignment are all column permutations of its profile.
struct SchemeTable {
  int n = 0;
  Family family;
  std::int64_t m = 0;
  std::vector<LevelPair> levels;       // per family member, in family order
  std::vector<PixelProfile> profiles;  // indexed by Assignment
  Provenance provenance;

  std::size_t assignments() const { return profiles.size(); }
  const PixelProfile& profile(Assignment a) const { return profiles.at(a); }
  const LevelPair& level(Subset member) const {
    const int i = family.index_of(member);
    if (i < 0) throw DomainError(to_string(member) + " is not a family member");
    return levels[i];
  }
  Rational contrast(Subset member) const {
    const auto& lv = level(member);
    return Rational(lv.h - lv.l, m);
  }

  friend bool operator==(const SchemeTable&, const SchemeTable&) = default;
};

// Contrast vector over all nonempty subsets, zero off the family.
inline ContrastVector observed_contrasts(const SchemeTable& table) {
  auto alphas = contrast_vector(table.n);
  for (Subset s : table.family.members()) alphas[s.mask()] = table.contrast(s);
  return alphas;
}

}  // namespace evcs
