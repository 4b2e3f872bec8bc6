// evcs: build, verify and apply extended visual cryptography schemes.
//
// Exit codes: 0 ok, 1 usage or malformed input, 2 infeasible,
// 3 verification failure, 4 search refused by the size gate.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evcs/builder.hpp"
#include "evcs/codec.hpp"
#include "evcs/contrast.hpp"
#include "evcs/json_io.hpp"
#include "evcs/search.hpp"
#include "evcs/verifier.hpp"

namespace fs = std::filesystem;
using namespace evcs;

namespace {

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 1, kInfeasible = 2, kVerification = 3, kTractability = 4 };

// Records what a command read and wrote, for reproduction.
struct Manifest {
  std::string command;
  std::vector<std::string> arguments;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::optional<std::uint64_t> seed;

  void write(const std::string& path) const {
    Json in = Json::object(), out = Json::object();
    for (const auto& p : inputs) in[p] = fnv1a_hex(read_file(p));
    for (const auto& p : outputs) out[p] = fnv1a_hex(read_file(p));
    Json doc{{"format", "evcs-manifest"}, {"version", kFormatVersion}, {"command", command},
             {"arguments", arguments}, {"inputs", in}, {"outputs", out},
             {"versions", {{"evcs", kVersion}, {"format", kFormatVersion}}},
             {"seed", seed ? Json(*seed) : Json(nullptr)}};
    write_file_atomic(path, doc.dump(2) + "\n");
  }
};

struct Globals {
  bool json = false;
  std::vector<std::string> argv;  // without the program name
};

// "1,3", "[1,3]" or "{1,3}"
Subset parse_subset(std::string text, int n) {
  for (char& c : text) {
    if (c == '[' || c == ']' || c == '{' || c == '}') c = ' ';
  }
  std::vector<int> elements;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.find_first_not_of(' ') == std::string::npos) continue;
    try {
      elements.push_back(std::stoi(tok));
    } catch (const std::logic_error&) {
      throw FormatError("bad subset element '" + tok + "'");
    }
  }
  const Subset s = Subset::of(elements);
  if (s.empty()) throw FormatError("subset must be nonempty");
  if (n > 0) check_in_ground_set(s, n);
  return s;
}

Json parse_json_arg(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw FormatError(what + " is not valid JSON: " + e.what());
  }
}

// "-" reads standard input.
Json read_json_input(const std::string& path) {
  if (path == "-") {
    try {
      return Json::parse(std::cin);
    } catch (const Json::exception& e) {
      throw FormatError(std::string("stdin: ") + e.what());
    }
  }
  return read_json_file(path);
}

void emit(const Globals& g, const Json& doc, const std::string& text) {
  if (g.json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << text;
  }
}

// Human-readable rational: "1" rather than "1/1".
std::string pretty(const Rational& q) {
  return q.denominator() == 1 ? std::to_string(q.numerator()) : to_string(q);
}

std::string levels_line(const SchemeTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.family.size(); ++i) {
    out += "  " + to_string(t.family[i]) + ": h=" + std::to_string(t.levels[i].h) +
           " l=" + std::to_string(t.levels[i].l) + " alpha=" + pretty(t.contrast(t.family[i])) + "\n";
  }
  return out;
}

// ---- build ----

struct BuildArgs {
  int n = 0;
  std::string family = "all";
  std::string mode = "droste";
  std::string delta;
  std::string levels;
  std::string contrasts;
  std::string epsilon = "0";
  std::string out;
};

int cmd_build(const Globals& g, const BuildArgs& a) {
  check_ground_set(a.n);
  SchemeTable table;
  std::string notice;
  if (a.mode == "realize") {
    if (a.contrasts.empty()) throw FormatError("--mode realize needs --contrasts");
    table = realize_scheme(contrasts_from_json(parse_json_arg(a.contrasts, "--contrasts"), a.n),
                           parse_rational(a.epsilon));
  } else {
    const Family family = parse_family(a.family, a.n);
    if (a.mode == "droste") {
      table = droste_scheme(family);
    } else if (a.mode == "tight") {
      if (!a.levels.empty()) {
        table = build_scheme(family, level_map_from_json(parse_json_arg(a.levels, "--levels"), a.n));
      } else {
        const DeltaSpec delta = a.delta.empty() ? DeltaSpec::from_family(family)
                                                : delta_from_json(parse_json_arg(a.delta, "--delta"), a.n);
        for (std::uint32_t m = 1; m < lattice_size(a.n); ++m) {
          const Subset s(m);
          if (family.contains(s) && delta[s] < 1) {
            throw InfeasibleError("delta must be positive on member " + to_string(s));
          }
          if (!family.contains(s) && delta[s] != 0) {
            throw InfeasibleError("delta must be zero off the family, at " + to_string(s));
          }
        }
        table = build_scheme(family, tight_levels(delta));
      }
    } else if (a.mode == "improved") {
      try {
        table = improved_scheme(family);
      } catch (const NotApplicableError& e) {
        notice = std::string("improved construction not applicable (") + e.what() + "); using droste";
        std::cerr << "notice: " << notice << "\n";
        table = droste_scheme(family);
      }
    } else {
      throw FormatError("unknown mode " + a.mode + " (droste, tight, improved, realize)");
    }
  }

  const std::string doc = to_json(table).dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << doc;
    return kOk;
  }
  write_file_atomic(a.out, doc);
  Manifest{"build", g.argv, {}, {a.out}, std::nullopt}.write(a.out + ".manifest.json");
  Json summary{{"out", a.out}, {"m", table.m}, {"construction", to_string(table.provenance.construction)},
               {"notice", notice}};
  emit(g, summary, "wrote " + a.out + " (m=" + std::to_string(table.m) + ", " +
                       to_string(table.provenance.construction) + ")\n");
  return kOk;
}

// ---- verify ----

int cmd_verify(const Globals& g, const std::string& in, const std::string& out, bool stamp) {
  const Json doc = read_json_input(in);
  const SchemeTable table = table_from_json(doc);
  const Certificate cert = certify(table);
  const Json cj = to_json(cert, table);
  std::vector<std::string> outputs;
  if (!out.empty()) {
    write_file_atomic(out, cj.dump(2) + "\n");
    outputs.push_back(out);
  }
  if (stamp && cert.passed()) {
    if (in == "-") throw FormatError("--stamp needs a table file, not stdin");
    write_file_atomic(in, to_json(table, true).dump(2) + "\n");
    outputs.push_back(in);
  }
  if (!outputs.empty()) {
    Manifest{"verify", g.argv, in == "-" || stamp ? std::vector<std::string>{} : std::vector<std::string>{in},
             outputs, std::nullopt}
        .write(outputs.front() + ".manifest.json");
  }
  std::string text = cert.passed() ? "VERIFIED" : "FAILED";
  text += " (contrast: " + std::string(cert.contrast_ok() ? "ok" : "violated") +
          ", security: " + (cert.security_ok() ? "ok" : "violated") + ")\n";
  for (const auto& v : cert.structure) text += "  structure: assignment " + std::to_string(v.assignment) + ": " + v.reason + "\n";
  for (const auto& v : cert.contrast) {
    text += "  contrast: assignment " + std::to_string(v.assignment) + " member " + to_string(v.member) +
            " expected " + std::to_string(v.expected) + " observed " + std::to_string(v.observed) + "\n";
  }
  for (const auto& v : cert.security) {
    text += "  security: rows " + to_string(v.rows) + " assignments " + std::to_string(v.assignment) + " vs " +
            std::to_string(v.representative) + "\n";
  }
  emit(g, cj, text);
  return cert.passed() ? kOk : kVerification;
}

// ---- encode / stack / measure ----

std::string share_path(const std::string& dir, int i) { return (fs::path(dir) / ("share_" + std::to_string(i) + ".pbm")).string(); }

int cmd_encode(const Globals& g, const std::string& scheme, const std::vector<std::string>& secrets,
               std::uint64_t seed, const std::string& layout_text, const std::string& dir, bool ascii) {
  const SchemeTable table = table_from_json(read_json_file(scheme));
  std::map<Subset, BitImage> images;
  std::vector<std::string> inputs{scheme};
  for (const auto& spec : secrets) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw FormatError("--secret expects T=path, got " + spec);
    const Subset t = parse_subset(spec.substr(0, eq), table.n);
    if (images.count(t)) throw FormatError("two secrets for " + to_string(t));
    images[t] = read_pbm(spec.substr(eq + 1));
    inputs.push_back(spec.substr(eq + 1));
  }
  const Layout layout = layout_text.empty() ? default_layout(table.m) : parse_layout(layout_text);
  const ShareSet shares = encode(images, table, seed, layout, table_fingerprint(table));

  std::vector<std::string> outputs;
  for (int i = 0; i < shares.n; ++i) {
    const auto path = share_path(dir, i + 1);
    write_file_atomic(path, format_pbm(shares.shares[i], !ascii));
    outputs.push_back(path);
  }
  const Json sidecar{{"format", "evcs-shares"}, {"version", kFormatVersion}, {"n", shares.n},
                     {"width", shares.width}, {"height", shares.height}, {"m", shares.m},
                     {"layout", to_string(shares.layout)}, {"seed", shares.seed},
                     {"scheme_fingerprint", shares.fingerprint}};
  const auto sidecar_path = (fs::path(dir) / "shares.json").string();
  write_file_atomic(sidecar_path, sidecar.dump(2) + "\n");
  outputs.push_back(sidecar_path);
  Manifest{"encode", g.argv, inputs, outputs, seed}.write((fs::path(dir) / "manifest.json").string());
  emit(g, sidecar, "wrote " + std::to_string(shares.n) + " shares to " + dir + " (layout " +
                       to_string(shares.layout) + ", m=" + std::to_string(shares.m) + ")\n");
  return kOk;
}

int cmd_stack(const Globals& g, const std::string& dir, const std::string& select, const std::string& out, bool ascii) {
  const Subset which = parse_subset(select, 0);
  std::vector<BitImage> shares;
  std::vector<std::string> inputs;
  for (int i = 1; i <= which.max_element(); ++i) {
    if (which.contains(i)) {
      inputs.push_back(share_path(dir, i));
      shares.push_back(read_pbm(inputs.back()));
    } else {
      shares.emplace_back();
    }
  }
  const BitImage stacked = stack(shares, which);
  write_file_atomic(out, format_pbm(stacked, !ascii));
  Manifest{"stack", g.argv, inputs, {out}, std::nullopt}.write(out + ".manifest.json");
  emit(g, Json{{"out", out}, {"black", stacked.black_count()}},
       "wrote " + out + " (" + std::to_string(stacked.black_count()) + " black subpixels)\n");
  return kOk;
}

int cmd_measure(const Globals& g, const std::string& stacked, const std::string& secret, const std::string& layout) {
  const Measurement m = measure(read_pbm(stacked), read_pbm(secret), parse_layout(layout));
  const auto opt = [](const std::optional<std::int64_t>& v) { return v ? Json(*v) : Json(nullptr); };
  const Json doc{{"l", opt(m.l)}, {"h", opt(m.h)}, {"capacity", m.capacity},
                 {"alpha", m.alpha ? to_json(*m.alpha) : Json(nullptr)}};
  std::string text = "l=" + (m.l ? std::to_string(*m.l) : std::string("n/a (no white pixel)")) +
                     " h=" + (m.h ? std::to_string(*m.h) : std::string("n/a (no black pixel)")) +
                     " capacity=" + std::to_string(m.capacity);
  if (m.alpha) text += " alpha=" + pretty(*m.alpha);
  emit(g, doc, text + "\n");
  return kOk;
}

// ---- search / gap / conjecture ----

struct SearchArgs {
  int n = 0;
  std::string family = "all";
  std::string delta;
  std::int64_t max_m = 0;
  std::int64_t node_limit = SearchBudget{}.node_limit;
  double time_limit = 0;
  std::string out;
};

SearchBudget budget_of(const SearchArgs& a) { return {a.max_m, a.node_limit, a.time_limit}; }

int cmd_search(const Globals& g, const SearchArgs& a) {
  const Family family = parse_family(a.family, a.n);
  const DeltaSpec delta =
      a.delta.empty() ? DeltaSpec::from_family(family) : delta_from_json(parse_json_arg(a.delta, "--delta"), a.n);
  const SearchResult r = min_expansion(family, delta, budget_of(a));
  const Json doc = to_json(r);
  if (!a.out.empty()) {
    write_file_atomic(a.out, doc.dump(2) + "\n");
    Manifest{"search", g.argv, {}, {a.out}, std::nullopt}.write(a.out + ".manifest.json");
  }
  std::string text;
  if (r.m_star) {
    text = "m_star=" + std::to_string(*r.m_star) + " droste=" + std::to_string(r.droste_m) +
           (*r.optimal_droste ? " (droste optimal)" : " (droste not optimal)") + "\n";
  } else {
    text = "budget exhausted: " + std::to_string(r.lower_bound) + " <= m_star <= " + std::to_string(r.upper_bound) +
           " droste=" + std::to_string(r.droste_m) + "\n";
  }
  if (g.json && a.out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    emit(g, Json{{"status", to_string(r.status)}, {"m_star", doc["m_star"]}, {"lower_bound", r.lower_bound},
                 {"upper_bound", r.upper_bound}, {"droste_m", r.droste_m}},
         text);
  }
  return kOk;
}

int cmd_gap(const Globals& g, const SearchArgs& a) {
  const DrosteGap gap = droste_gap(parse_family(a.family, a.n), budget_of(a));
  const auto& s = gap.search;
  const Json doc{{"family", to_json(gap.family)},
                 {"droste_m", gap.droste_m},
                 {"improved_m", gap.improved_m ? Json(*gap.improved_m) : Json(nullptr)},
                 {"improved_note", gap.improved_note},
                 {"search_status", to_string(s.status)},
                 {"m_star", s.m_star ? Json(*s.m_star) : Json(nullptr)},
                 {"lower_bound", s.lower_bound},
                 {"upper_bound", s.upper_bound},
                 {"gap_predicted", gap.gap_predicted},
                 {"gap_observed", gap.gap_observed ? Json(*gap.gap_observed) : Json(nullptr)},
                 {"contradiction", gap.contradiction}};
  std::string text = "droste=" + std::to_string(gap.droste_m) +
                     " improved=" + (gap.improved_m ? std::to_string(*gap.improved_m) : std::string("n/a")) +
                     " m_star=" + (s.m_star ? std::to_string(*s.m_star)
                                            : "[" + std::to_string(s.lower_bound) + "," + std::to_string(s.upper_bound) + "]") +
                     " predicted gap: " + (gap.gap_predicted ? "yes" : "no") + "\n";
  if (gap.contradiction) text += "CONTRADICTION: a gap was predicted but the optimum equals droste\n";
  emit(g, doc, text);
  return gap.contradiction ? kVerification : kOk;
}

std::string opt_bool(const std::optional<bool>& b) { return b ? (*b ? "true" : "false") : ""; }

std::string csv_quote(const std::string& s) { return "\"" + s + "\""; }

int cmd_conjecture(const Globals& g, int n, std::size_t samples, std::uint64_t seed, const SearchArgs& sa,
                   const std::string& out, const std::string& counterexamples) {
  ScanOptions opts;
  opts.samples = samples;
  opts.seed = seed;
  opts.budget = budget_of(sa);
  const auto rows = conjecture_scan(n, opts);

  std::string csv = "family,droste_m,status,m_star,lower_bound,droste_optimal,predicts_intersection,"
                    "agree_intersection,predicts_union,agree_union\n";
  Json records = Json::array();
  std::size_t disagree = 0, undecided = 0;
  for (const auto& r : rows) {
    csv += csv_quote(to_json(r.family).dump()) + "," + std::to_string(r.droste_m) + "," + to_string(r.status) + "," +
           (r.m_star ? std::to_string(*r.m_star) : "") + "," + std::to_string(r.lower_bound) + "," +
           opt_bool(r.droste_optimal) + "," + (r.predicts_intersection ? "true" : "false") + "," +
           opt_bool(r.agree_intersection) + "," + (r.predicts_union ? "true" : "false") + "," +
           opt_bool(r.agree_union) + "\n";
    if (!r.droste_optimal) ++undecided;
    if (r.agree_intersection == false) {
      ++disagree;
      records.push_back({{"family", to_json(r.family)}, {"droste_m", r.droste_m},
                         {"m_star", r.m_star ? Json(*r.m_star) : Json(nullptr)},
                         {"droste_optimal", *r.droste_optimal},
                         {"predicts_intersection", r.predicts_intersection}});
    }
  }
  std::vector<std::string> outputs;
  if (out.empty()) {
    if (!g.json) std::cout << csv;
  } else {
    write_file_atomic(out, csv);
    outputs.push_back(out);
  }
  if (!counterexamples.empty()) {
    write_file_atomic(counterexamples, records.dump(2) + "\n");
    outputs.push_back(counterexamples);
  }
  if (!outputs.empty()) Manifest{"conjecture", g.argv, {}, outputs, seed}.write(outputs.front() + ".manifest.json");
  const Json summary{{"n", n}, {"families", rows.size()}, {"disagreements", disagree},
                     {"undecided", undecided}, {"counterexamples", records}};
  const std::string text = "n=" + std::to_string(n) + ": " + std::to_string(rows.size()) + " families, " +
                           std::to_string(disagree) + " disagreements with the intersection reading, " +
                           std::to_string(undecided) + " undecided\n";
  if (g.json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    std::cerr << text;
  }
  return kOk;
}

// ---- report ----

int cmd_report(const Globals& g, const std::string& in, bool check) {
  const Json doc = read_json_input(in);
  const SchemeTable t = table_from_json(doc);
  const bool stamped = has_valid_stamp(doc, t);
  std::optional<bool> passed;
  if (check) passed = certify(t).passed();
  std::string status = passed ? (*passed ? "VERIFIED" : "FAILED") : (stamped ? "VERIFIED (stamp)" : "UNVERIFIED");

  const Rational sum = tradeoff_sum(observed_contrasts(t));
  const std::int64_t droste_m = droste_expansion(t.family);
  Json levels = Json::array();
  for (std::size_t i = 0; i < t.family.size(); ++i) {
    levels.push_back({{"member", to_json(t.family[i])}, {"h", t.levels[i].h}, {"l", t.levels[i].l},
                      {"alpha", to_json(t.contrast(t.family[i]))}});
  }
  const Json report{{"status", status}, {"n", t.n}, {"family", to_json(t.family)}, {"m", t.m},
                    {"levels", levels}, {"tradeoff_sum", to_json(sum)}, {"droste_m", droste_m},
                    {"lower_bound_full_family", lower_bound(t.n)},
                    {"construction", to_string(t.provenance.construction)}};
  std::string text = "status: " + status + "\n";
  text += "n=" + std::to_string(t.n) + " family=" + to_string(t.family) + " construction=" +
          to_string(t.provenance.construction) + "\n";
  text += "m=" + std::to_string(t.m) + ", sum 2^(|T|-1) alpha_T = " + pretty(sum) + "\n";
  text += levels_line(t);
  if (t.m < droste_m) {
    text += "m=" + std::to_string(t.m) + ", droste would use " + std::to_string(droste_m) + "\n";
  } else {
    text += "droste expansion: " + std::to_string(droste_m) + "\n";
  }
  if (t.family.size() == lattice_size(t.n) - 1) {
    text += "full-family lower bound (3^n-1)/2 = " + std::to_string(lower_bound(t.n)) + "\n";
  }
  emit(g, report, text);
  return passed == false ? kVerification : kOk;
}

int run(const std::vector<std::string>& args);

// Re-runs a manifest's command and compares output fingerprints.
int cmd_replay(const Globals& g, const std::string& path) {
  const Json m = read_json_file(path);
  if (m.value("format", "") != "evcs-manifest") throw FormatError(path + " is not an evcs manifest");
  const auto args = m.at("arguments").get<std::vector<std::string>>();
  if (!args.empty() && args.front() == "replay") throw FormatError("refusing to replay a replay");
  const int code = run(args);
  if (code != kOk) return code;
  std::vector<std::string> mismatched;
  for (const auto& [file, fp] : m.at("outputs").items()) {
    if (!fs::exists(file) || fnv1a_hex(read_file(file)) != fp.get<std::string>()) mismatched.push_back(file);
  }
  Json doc{{"reproduced", mismatched.empty()}, {"mismatched", mismatched}};
  std::string text = mismatched.empty() ? "reproduced all outputs\n" : "outputs differ:\n";
  for (const auto& f : mismatched) text += "  " + f + "\n";
  emit(g, doc, text);
  return mismatched.empty() ? kOk : kVerification;
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Extended visual cryptography schemes: build, verify, encode, search"};
  app.require_subcommand(1);
  Globals g;
  g.argv = args;
  app.add_flag("--json", g.json, "machine-readable output");
  app.set_version_flag("--version", kVersion);

  BuildArgs ba;
  auto* build = app.add_subcommand("build", "construct a scheme table");
  build->add_option("--n", ba.n, "number of transparencies")->required();
  build->add_option("--family", ba.family, "all | all-but-top | JSON list of subsets");
  build->add_option("--mode", ba.mode, "droste | tight | improved | realize");
  build->add_option("--delta", ba.delta, "JSON [[subset, delta], ...] for tight mode");
  build->add_option("--levels", ba.levels, "JSON [[subset, h, l], ...] for tight mode");
  build->add_option("--contrasts", ba.contrasts, "JSON [[subset, \"p/q\"], ...] for realize mode");
  build->add_option("--epsilon", ba.epsilon, "tolerance for realize mode");
  build->add_option("--out", ba.out, "table file (stdout if omitted)");

  std::string vin = "-", vout;
  bool stamp = false;
  auto* verify = app.add_subcommand("verify", "check a table against both scheme conditions");
  verify->add_option("--in", vin, "table file or - for stdin");
  verify->add_option("--out", vout, "certificate file");
  verify->add_flag("--stamp", stamp, "record the verification in the table file");

  std::string scheme, enc_dir, layout;
  std::vector<std::string> secrets;
  std::uint64_t seed = 0;
  bool ascii = false;
  auto* enc = app.add_subcommand("encode", "encode secret images into shares");
  enc->add_option("--scheme", scheme, "table file")->required();
  enc->add_option("--secret", secrets, "T=image.pbm, repeatable")->required();
  enc->add_option("--seed", seed, "64-bit seed")->required();
  enc->add_option("--layout", layout, "subpixel grid RxC");
  enc->add_option("--out", enc_dir, "output directory")->required();
  enc->add_flag("--ascii", ascii, "write P1 instead of P4");

  std::string shares_dir, select, stack_out;
  auto* stk = app.add_subcommand("stack", "OR selected shares together");
  stk->add_option("--shares", shares_dir, "share directory")->required();
  stk->add_option("--select", select, "share indices, e.g. 1,3")->required();
  stk->add_option("--out", stack_out, "output image")->required();
  stk->add_flag("--ascii", ascii, "write P1 instead of P4");

  std::string m_stacked, m_secret, m_layout;
  auto* meas = app.add_subcommand("measure", "per-colour black counts of a stacked image");
  meas->add_option("--stacked", m_stacked, "stacked image")->required();
  meas->add_option("--secret", m_secret, "secret image")->required();
  meas->add_option("--layout", m_layout, "subpixel grid RxC")->required();

  SearchArgs sa;
  auto add_search_options = [&](CLI::App* c) {
    c->add_option("--n", sa.n, "number of transparencies")->required();
    c->add_option("--family", sa.family, "all | all-but-top | JSON list of subsets");
    c->add_option("--max-m", sa.max_m, "largest m to try (default twice droste)");
    c->add_option("--node-limit", sa.node_limit, "branch node budget");
    c->add_option("--time-limit", sa.time_limit, "wall-clock budget in seconds");
  };
  auto* search = app.add_subcommand("search", "certified minimum pixel expansion");
  add_search_options(search);
  search->add_option("--delta", sa.delta, "JSON [[subset, delta], ...]");
  search->add_option("--out", sa.out, "result file");
  auto* gap = app.add_subcommand("gap", "compare droste, improved and optimal expansion");
  add_search_options(gap);

  int cn = 0;
  std::size_t samples = 0;
  std::uint64_t cseed = 1;
  std::string cout_path, cx_path;
  auto* conj = app.add_subcommand("conjecture", "scan families against the droste-optimality conjecture");
  conj->add_option("--n", cn, "number of transparencies")->required();
  conj->add_option("--samples", samples, "random families to draw (required for n = 4)");
  conj->add_option("--seed", cseed, "sampling seed");
  conj->add_option("--node-limit", sa.node_limit, "branch node budget per family");
  conj->add_option("--time-limit", sa.time_limit, "seconds per family");
  conj->add_option("--out", cout_path, "CSV file (stdout if omitted)");
  conj->add_option("--counterexamples", cx_path, "JSON file of disagreeing families");

  std::string rin = "-";
  bool check = false;
  auto* rep = app.add_subcommand("report", "summarize a table");
  rep->add_option("--in", rin, "table file or - for stdin");
  rep->add_flag("--check", check, "run the verifier instead of trusting the stamp");

  std::string manifest;
  auto* replay = app.add_subcommand("replay", "re-run a manifest and compare outputs");
  replay->add_option("manifest", manifest, "manifest file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*build) return cmd_build(g, ba);
    if (*verify) return cmd_verify(g, vin, vout, stamp);
    if (*enc) return cmd_encode(g, scheme, secrets, seed, layout, enc_dir, ascii);
    if (*stk) return cmd_stack(g, shares_dir, select, stack_out, ascii);
    if (*meas) return cmd_measure(g, m_stacked, m_secret, m_layout);
    if (*search) return cmd_search(g, sa);
    if (*gap) return cmd_gap(g, sa);
    if (*conj) return cmd_conjecture(g, cn, samples, cseed, sa, cout_path, cx_path);
    if (*rep) return cmd_report(g, rin, check);
    if (*replay) return cmd_replay(g, manifest);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const VerificationError& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kVerification;
  } catch (const TractabilityError& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return kTractability;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(std::vector<std::string>(argv + 1, argv + argc)); }
