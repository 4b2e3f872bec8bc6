#pragma once

// JSON documents for families, level maps, scheme tables, certificates and
// search results.
//
//   subset      [1,3]
//   rational    "p/q"
//   level map   [[subset, h, l], ...]
//   delta       [[subset, delta], ...]
//   table       {"format": "evcs-scheme", "version": 1, "n", "family", "m",
//                "levels": [[subset, h, l], ...] in family order,
//                "profiles": {"<assignment>": [[subset, count], ...]},
//                "provenance": {...}, "verification": null | {...}}
//
// Profiles are keyed by the decimal assignment bitmask (bit i = family[i]
// black) and list nonzero counts only.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evcs/contrast.hpp"
#include "evcs/errors.hpp"
#include "evcs/lattice.hpp"
#include "evcs/scheme.hpp"
#include "evcs/search.hpp"
#include "evcs/verifier.hpp"

namespace evcs {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

// FNV-1a, 64 bit, as 16 lowercase hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---- primitives ----

inline Json to_json(Subset s) {
  Json out = Json::array();
  for (int e : s.elements()) out.push_back(e);
  return out;
}

inline Subset subset_from_json(const Json& j, int n) {
  if (!j.is_array()) throw FormatError("subset must be an array of element labels");
  std::vector<int> elements;
  for (const auto& e : j) {
    if (!e.is_number_integer()) throw FormatError("subset elements must be integers");
    elements.push_back(e.get<int>());
  }
  Subset s;
  try {
    s = Subset::of(elements);
  } catch (const DomainError& e) {
    throw FormatError(e.what());
  }
  if (n > 0 && !s.subset_of(Subset::full(n))) {
    throw FormatError("subset " + to_string(s) + " is outside {1.." + std::to_string(n) + "}");
  }
  return s;
}

inline Json to_json(const Family& f) {
  Json out = Json::array();
  for (Subset s : f.members()) out.push_back(to_json(s));
  return out;
}

inline Family family_from_json(const Json& j, int n) {
  if (!j.is_array()) throw FormatError("family must be an array of subsets");
  std::vector<Subset> members;
  for (const auto& s : j) {
    const Subset sub = subset_from_json(s, n);
    if (sub.empty()) throw FormatError("family members must be nonempty");
    members.push_back(sub);
  }
  return Family(n, std::move(members));
}

// Accepts the shorthands "all" and "all-but-top" or a JSON array.
inline Family parse_family(const std::string& text, int n) {
  check_ground_set(n);
  if (text == "all") return Family::all(n);
  if (text == "all-but-top") return Family::all_but_top(n);
  try {
    return family_from_json(Json::parse(text), n);
  } catch (const Json::exception& e) {
    throw FormatError(std::string("family is not valid JSON: ") + e.what());
  }
}

inline Json to_json(const Rational& q) { return to_string(q); }

inline Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  if (!j.is_string()) throw FormatError("rational must be a \"p/q\" string or an integer");
  return parse_rational(j.get<std::string>());
}

inline Json to_json(const LevelMap& levels) {
  Json out = Json::array();
  for (std::uint32_t m = 1; m < lattice_size(levels.n()); ++m) {
    const auto& lv = levels[Subset(m)];
    out.push_back(Json::array({to_json(Subset(m)), lv.h, lv.l}));
  }
  return out;
}

inline LevelMap level_map_from_json(const Json& j, int n) {
  if (!j.is_array()) throw FormatError("level map must be an array of [subset, h, l]");
  LevelMap out(n);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3) throw FormatError("level entry must be [subset, h, l]");
    const Subset s = subset_from_json(e[0], n);
    if (s.empty()) throw FormatError("levels are defined on nonempty subsets");
    out.at(s) = {e[1].get<std::int64_t>(), e[2].get<std::int64_t>()};
  }
  return out;
}

inline Json to_json(const DeltaSpec& delta) {
  Json out = Json::array();
  for (std::uint32_t m = 1; m < lattice_size(delta.n()); ++m) {
    if (delta[Subset(m)] != 0) out.push_back(Json::array({to_json(Subset(m)), delta[Subset(m)]}));
  }
  return out;
}

inline DeltaSpec delta_from_json(const Json& j, int n) {
  if (!j.is_array()) throw FormatError("delta must be an array of [subset, value]");
  DeltaSpec out(n);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[1].is_number_integer()) {
      throw FormatError("delta entry must be [subset, integer]");
    }
    const Subset s = subset_from_json(e[0], n);
    if (s.empty()) throw FormatError("delta is defined on nonempty subsets");
    if (e[1].get<std::int64_t>() < 0) throw FormatError("delta must be nonnegative at " + to_string(s));
    out.set(s, e[1].get<std::int64_t>());
  }
  return out;
}

inline Json to_json(const ContrastVector& alphas) {
  Json out = Json::array();
  for (std::uint32_t m = 1; m < alphas.size(); ++m) {
    if (alphas[m] != 0) out.push_back(Json::array({to_json(Subset(m)), to_json(alphas[m])}));
  }
  return out;
}

inline ContrastVector contrasts_from_json(const Json& j, int n) {
  if (!j.is_array()) throw FormatError("contrasts must be an array of [subset, \"p/q\"]");
  ContrastVector out = contrast_vector(n);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw FormatError("contrast entry must be [subset, \"p/q\"]");
    const Subset s = subset_from_json(e[0], n);
    if (s.empty()) throw FormatError("contrasts are defined on nonempty subsets");
    out[s.mask()] = rational_from_json(e[1]);
  }
  return out;
}

inline Json to_json(const PixelProfile& p) {
  Json out = Json::array();
  for (std::uint32_t u = 0; u < lattice_size(p.n()); ++u) {
    if (p[Subset(u)] != 0) out.push_back(Json::array({to_json(Subset(u)), p[Subset(u)]}));
  }
  return out;
}

inline PixelProfile profile_from_json(const Json& j, int n) {
  if (!j.is_array()) throw FormatError("profile must be an array of [subset, count]");
  PixelProfile p(n);
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2 || !e[1].is_number_integer()) {
      throw FormatError("profile entry must be [subset, integer]");
    }
    p.at(subset_from_json(e[0], n)) += e[1].get<std::int64_t>();
  }
  return p;
}

// ---- scheme tables ----

inline Json to_json(const Provenance& p) {
  Json out = {{"construction", to_string(p.construction)},
              {"white_padding", p.white_padding},
              {"black_padding", p.black_padding},
              {"hole", p.hole ? to_json(*p.hole) : Json(nullptr)},
              {"projected", p.projected}};
  return out;
}

inline Provenance provenance_from_json(const Json& j, int n) {
  Provenance p;
  p.construction = construction_from_string(j.at("construction").get<std::string>());
  p.white_padding = j.value("white_padding", false);
  p.black_padding = j.value("black_padding", std::int64_t{0});
  if (j.contains("hole") && !j["hole"].is_null()) p.hole = subset_from_json(j["hole"], n);
  p.projected = j.value("projected", false);
  return p;
}

// Content fields only; the verification stamp is excluded.
inline Json table_content_json(const SchemeTable& t) {
  Json levels = Json::array();
  for (std::size_t i = 0; i < t.family.size(); ++i) {
    levels.push_back(Json::array({to_json(t.family[i]), t.levels[i].h, t.levels[i].l}));
  }
  Json profiles = Json::object();
  for (Assignment a = 0; a < t.profiles.size(); ++a) profiles[std::to_string(a)] = to_json(t.profiles[a]);
  return Json{{"format", "evcs-scheme"}, {"version", kFormatVersion}, {"n", t.n},
              {"family", to_json(t.family)}, {"m", t.m}, {"levels", levels},
              {"profiles", profiles}, {"provenance", to_json(t.provenance)}};
}

inline std::string table_fingerprint(const SchemeTable& t) { return fnv1a_hex(table_content_json(t).dump()); }

// `verified` adds a stamp binding the verification result to the content.
inline Json to_json(const SchemeTable& t, bool verified = false) {
  Json out = table_content_json(t);
  out["verification"] = verified ? Json{{"status", "verified"}, {"fingerprint", table_fingerprint(t)}} : Json(nullptr);
  return out;
}

inline SchemeTable table_from_json(const Json& j) {
  try {
    if (j.at("format") != "evcs-scheme") throw FormatError("not an evcs-scheme document");
    if (j.at("version") != kFormatVersion) throw FormatError("unsupported scheme version");
    SchemeTable t;
    t.n = j.at("n").get<int>();
    check_ground_set(t.n);
    t.family = family_from_json(j.at("family"), t.n);
    check_table_size(t.family);
    t.m = j.at("m").get<std::int64_t>();
    const auto& levels = j.at("levels");
    if (!levels.is_array() || levels.size() != t.family.size()) {
      throw FormatError("levels must list one [subset, h, l] per member");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (subset_from_json(levels[i].at(0), t.n) != t.family[i]) {
        throw FormatError("levels must follow family order");
      }
      t.levels.push_back({levels[i].at(1).get<std::int64_t>(), levels[i].at(2).get<std::int64_t>()});
    }
    const auto& profiles = j.at("profiles");
    const std::size_t count = std::size_t{1} << t.family.size();
    if (!profiles.is_object() || profiles.size() != count) {
      throw FormatError("expected " + std::to_string(count) + " profiles");
    }
    for (Assignment a = 0; a < count; ++a) {
      const auto key = std::to_string(a);
      if (!profiles.contains(key)) throw FormatError("missing profile for assignment " + key);
      t.profiles.push_back(profile_from_json(profiles[key], t.n));
    }
    t.provenance = provenance_from_json(j.at("provenance"), t.n);
    return t;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("malformed scheme document: ") + e.what());
  } catch (const DomainError& e) {
    throw FormatError(std::string("malformed scheme document: ") + e.what());
  }
}

// True iff the document carries a stamp matching its content.
inline bool has_valid_stamp(const Json& doc, const SchemeTable& t) {
  if (!doc.contains("verification") || !doc["verification"].is_object()) return false;
  const auto& v = doc["verification"];
  return v.value("status", "") == "verified" && v.value("fingerprint", "") == table_fingerprint(t);
}

// ---- certificates and search results ----

inline Json to_json(const Certificate& c, const SchemeTable& t) {
  Json structure = Json::array();
  for (const auto& v : c.structure) structure.push_back({{"assignment", v.assignment}, {"reason", v.reason}});
  Json contrast = Json::array();
  for (const auto& v : c.contrast) {
    contrast.push_back({{"assignment", v.assignment}, {"member", to_json(v.member)},
                        {"expected", v.expected}, {"observed", v.observed}});
  }
  Json security = Json::array();
  for (const auto& v : c.security) {
    security.push_back({{"rows", to_json(v.rows)}, {"assignment", v.assignment},
                        {"representative", v.representative}});
  }
  Json observed = nullptr;
  if (c.observed_levels) {
    observed = Json::array();
    for (std::size_t i = 0; i < c.observed_levels->size(); ++i) {
      observed.push_back(Json::array({to_json(t.family[i]), (*c.observed_levels)[i].h, (*c.observed_levels)[i].l}));
    }
  }
  return Json{{"format", "evcs-certificate"}, {"version", kFormatVersion},
              {"table_fingerprint", table_fingerprint(t)}, {"passed", c.passed()},
              {"contrast_ok", c.contrast_ok()}, {"security_ok", c.security_ok()},
              {"structure", structure}, {"contrast", contrast}, {"security", security},
              {"observed_levels", observed}};
}

inline Json to_json(const SearchResult& r) {
  return Json{{"format", "evcs-search"},
              {"version", kFormatVersion},
              {"n", r.family.n()},
              {"family", to_json(r.family)},
              {"delta", to_json(r.delta)},
              {"status", to_string(r.status)},
              {"m_star", r.m_star ? Json(*r.m_star) : Json(nullptr)},
              {"lower_bound", r.lower_bound},
              {"upper_bound", r.upper_bound},
              {"droste_m", r.droste_m},
              {"optimal_droste", r.optimal_droste ? Json(*r.optimal_droste) : Json(nullptr)},
              {"nodes", r.nodes},
              {"witness", r.witness ? to_json(*r.witness, true) : Json(nullptr)}};
}

// ---- files ----

// Writes via a temporary file in the same directory and renames it into place.
inline void write_file_atomic(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace evcs
