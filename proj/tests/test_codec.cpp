#include <gtest/gtest.h>

#include <random>

#include "evcs/builder.hpp"
#include "evcs/codec.hpp"

using namespace evcs;

namespace {

BitImage random_image(int w, int h, std::mt19937& rng) {
  BitImage img(w, h);
  for (auto& b : img.bits) b = rng() & 1u;
  return img;
}

// Columns of share rows `rows` at secret pixel (x, y), as a profile.
PixelProfile block_profile(const ShareSet& s, Subset rows, int x, int y) {
  PixelProfile p(s.n);
  for (std::int64_t j = 0; j < s.layout.capacity(); ++j) {
    const int sx = x * s.layout.cols + static_cast<int>(j % s.layout.cols);
    const int sy = y * s.layout.rows + static_cast<int>(j / s.layout.cols);
    std::uint32_t sup = 0;
    for (int i : rows.elements()) sup |= s.shares[i - 1].at(sx, sy) ? 1u << (i - 1) : 0u;
    p.at(Subset(sup)) += 1;
  }
  return p;
}

}  // namespace

TEST(Pbm, RoundTripBothFormats) {
  std::mt19937 rng(1);
  for (int w : {1, 7, 8, 9, 17}) {
    const BitImage img = random_image(w, 5, rng);
    EXPECT_EQ(parse_pbm(format_pbm(img, true)), img);
    EXPECT_EQ(parse_pbm(format_pbm(img, false)), img);
  }
}

TEST(Pbm, AsciiVariants) {
  const BitImage img = parse_pbm("P1\n# comment\n3 2\n101\n0 1 0\n");
  EXPECT_EQ(img.width, 3);
  EXPECT_EQ(img.bits, (std::vector<std::uint8_t>{1, 0, 1, 0, 1, 0}));
}

TEST(Pbm, BinaryLayout) {
  BitImage img(9, 1);
  img.set(0, 0, true);
  img.set(8, 0, true);
  const std::string data = format_pbm(img, true);
  EXPECT_EQ(data.substr(0, 7), "P4\n9 1\n");
  ASSERT_EQ(data.size(), 9u);
  EXPECT_EQ(static_cast<unsigned char>(data[7]), 0x80);
  EXPECT_EQ(static_cast<unsigned char>(data[8]), 0x80);
}

TEST(Pbm, Errors) {
  EXPECT_THROW(parse_pbm("P2\n1 1\n0\n"), FormatError);
  EXPECT_THROW(parse_pbm("P1\n2 2\n0 1 1\n"), FormatError);
  EXPECT_THROW(parse_pbm("P1\n1 1\n2\n"), FormatError);
  EXPECT_THROW(parse_pbm("P4\n8 2\n\x01"), FormatError);
}

TEST(Layout, DefaultsAndParsing) {
  EXPECT_EQ(default_layout(1), (Layout{1, 1}));
  EXPECT_EQ(default_layout(4), (Layout{2, 2}));
  EXPECT_EQ(default_layout(13), (Layout{3, 5}));
  EXPECT_EQ(default_layout(9), (Layout{3, 3}));
  EXPECT_EQ(default_layout(10), (Layout{3, 4}));
  for (std::int64_t m = 1; m < 200; ++m) {
    const Layout l = default_layout(m);
    EXPECT_GE(l.capacity(), m);
    EXPECT_LE(std::int64_t(l.rows) * l.rows, m);
    EXPECT_GT(std::int64_t(l.rows + 1) * (l.rows + 1), m);
  }
  EXPECT_EQ(parse_layout("2x3"), (Layout{2, 3}));
  EXPECT_THROW(parse_layout("23"), FormatError);
  EXPECT_THROW(parse_layout("0x3"), FormatError);
}

TEST(Rng, SplitMixReferenceValues) {
  SplitMix64 r(0);
  EXPECT_EQ(r.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(r.next(), 0x06c45d188009454fULL);
}

TEST(Rng, BoundedDrawsAreUniform) {
  SplitMix64 r(42);
  std::vector<int> hist(6, 0);
  const int draws = 60000;
  for (int i = 0; i < draws; ++i) ++hist[r.below(6)];
  double chi = 0;
  for (int h : hist) chi += (h - draws / 6.0) * (h - draws / 6.0) / (draws / 6.0);
  EXPECT_LT(chi, 20.5);  // 5 dof, p ~ 0.001
}

TEST(Encode, AllWhiteDrosteN2) {
  const SchemeTable t = droste_scheme(Family::all(2));
  std::map<Subset, BitImage> secrets{{Subset::of({1}), BitImage(1, 1)}};
  const ShareSet s = encode(secrets, t, 5);
  EXPECT_EQ(s.layout, (Layout{2, 2}));
  for (const auto& share : s.shares) EXPECT_EQ(share.black_count(), 2);
  EXPECT_EQ(stack(s, Subset::of({1, 2})).black_count(), 3);
}

TEST(Encode, TopImageLevels) {
  const SchemeTable t = droste_scheme(Family::all(2));
  BitImage top(2, 1);
  top.set(0, 0, true);
  const ShareSet s = encode({{Subset::of({1, 2}), top}}, t, 9);
  const BitImage both = stack(s, Subset::of({1, 2}));
  const Measurement m = measure(both, top, s.layout);
  EXPECT_EQ(m.h, 4);
  EXPECT_EQ(m.l, 3);
  EXPECT_EQ(m.alpha, Rational(1, 4));
}

TEST(Encode, SingletonSchemeCopiesImages) {
  const SchemeTable t = improved_scheme(Family(2, {Subset::of({1}), Subset::of({2})}));
  ASSERT_EQ(t.m, 1);
  std::mt19937 rng(4);
  const BitImage a = random_image(6, 4, rng);
  const BitImage b = random_image(6, 4, rng);
  const ShareSet s = encode({{Subset::of({1}), a}, {Subset::of({2}), b}}, t, 1);
  EXPECT_EQ(s.shares[0], a);
  EXPECT_EQ(s.shares[1], b);
}

TEST(Encode, Deterministic) {
  const SchemeTable t = droste_scheme(Family::all(3));
  std::mt19937 rng(8);
  std::map<Subset, BitImage> secrets;
  for (Subset m : t.family.members()) secrets[m] = random_image(5, 3, rng);
  const ShareSet a = encode(secrets, t, 77);
  const ShareSet b = encode(secrets, t, 77);
  const ShareSet c = encode(secrets, t, 78);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(format_pbm(a.shares[i]), format_pbm(b.shares[i]));
  bool differs = false;
  for (int i = 0; i < 3; ++i) differs = differs || !(a.shares[i] == c.shares[i]);
  EXPECT_TRUE(differs);
}

TEST(Encode, RoundTripRecoversLevels) {
  std::mt19937 rng(6);
  const std::vector<SchemeTable> tables{droste_scheme(Family::all(3)),
                                        improved_scheme(Family(3, {Subset::of({1}), Subset::of({2}), Subset::of({3}),
                                                                   Subset::of({1, 2, 3})})),
                                        build_scheme(Family::all_but_top(3),
                                                     tight_levels(DeltaSpec::from_family(Family::all_but_top(3))))};
  for (const auto& t : tables) {
    std::map<Subset, BitImage> secrets;
    for (Subset m : t.family.members()) secrets[m] = random_image(8, 8, rng);
    const ShareSet s = encode(secrets, t, rng());
    const std::int64_t pad = s.layout.capacity() - t.m;  // spare cells are always black
    for (std::size_t i = 0; i < t.family.size(); ++i) {
      const Measurement m = measure(stack(s, t.family[i]), secrets[t.family[i]], s.layout);
      EXPECT_EQ(m.h, t.levels[i].h + pad);
      EXPECT_EQ(m.l, t.levels[i].l + pad);
    }
  }
}

TEST(Encode, ImageLevelSecurity) {
  // Shares on rows Q see one fixed column multiset per class of the images inside P(Q).
  const SchemeTable t = droste_scheme(Family::all(3));
  std::mt19937 rng(2);
  std::map<Subset, BitImage> secrets;
  for (Subset m : t.family.members()) secrets[m] = random_image(16, 16, rng);
  const ShareSet s = encode(secrets, t, 123);
  for (std::uint32_t q = 1; q < 7; ++q) {
    const Subset rows(q);
    std::map<Assignment, PixelProfile> seen;
    std::map<Assignment, int> per_outside_colour;
    for (int y = 0; y < 16; ++y) {
      for (int x = 0; x < 16; ++x) {
        Assignment cls = 0, all = 0;
        for (std::size_t i = 0; i < t.family.size(); ++i) {
          if (!secrets[t.family[i]].at(x, y)) continue;
          all |= Assignment{1} << i;
          if (t.family[i].subset_of(rows)) cls |= Assignment{1} << i;
        }
        const PixelProfile p = block_profile(s, rows, x, y);
        auto [it, fresh] = seen.try_emplace(cls, p);
        EXPECT_EQ(it->second, p) << "rows " << to_string(rows);
        ++per_outside_colour[all];
      }
    }
    EXPECT_GT(per_outside_colour.size(), 16u);  // many outside colourings share each class
  }
}

TEST(Encode, PaddedLayoutDilutes) {
  const SchemeTable t = droste_scheme(Family::all(2));
  BitImage img(2, 1);
  img.set(1, 0, true);
  const ShareSet s = encode({{Subset::of({1}), img}}, t, 3, Layout{2, 3});
  const Measurement m = measure(stack(s, Subset::of({1})), img, s.layout);
  EXPECT_EQ(m.l, 2 + 2);
  EXPECT_EQ(m.h, 3 + 2);
  EXPECT_EQ(m.alpha, Rational(1, 6));
}

TEST(Encode, Errors) {
  const SchemeTable t = droste_scheme(Family::all(2));
  EXPECT_THROW(encode({{Subset::of({1}), BitImage(2, 2)}, {Subset::of({2}), BitImage(3, 2)}}, t, 0), DomainError);
  EXPECT_THROW(encode({{Subset::of({1}), BitImage(2, 2)}}, t, 0, Layout{1, 3}), DomainError);
  EXPECT_THROW(encode({}, t, 0), DomainError);
  SchemeTable broken = t;
  broken.levels[0].h += 1;
  EXPECT_THROW(encode({{Subset::of({1}), BitImage(1, 1)}}, broken, 0), VerificationError);
  const Family single(2, {Subset::of({1})});
  EXPECT_THROW(encode({{Subset::of({2}), BitImage(1, 1)}}, droste_scheme(single), 0), DomainError);
}

TEST(Stack, Properties) {
  std::mt19937 rng(10);
  const std::vector<BitImage> shares{random_image(4, 4, rng), random_image(4, 4, rng), random_image(4, 4, rng)};
  EXPECT_EQ(stack(shares, Subset::of({2})), shares[1]);
  EXPECT_LE(stack(shares, Subset::of({1})).black_count(), stack(shares, Subset::of({1, 3})).black_count());
  EXPECT_LE(stack(shares, Subset::of({1, 3})).black_count(), stack(shares, Subset::of({1, 2, 3})).black_count());
  EXPECT_THROW(stack(shares, Subset()), DomainError);
  EXPECT_THROW(stack(shares, Subset::of({4})), DomainError);
}

TEST(Measure, MissingColourAndViolations) {
  const BitImage secret(2, 1);
  BitImage stacked(4, 2);
  const Measurement m = measure(stacked, secret, Layout{2, 2});
  EXPECT_EQ(m.l, 0);
  EXPECT_FALSE(m.h);
  EXPECT_FALSE(m.alpha);
  stacked.set(0, 0, true);
  EXPECT_THROW(measure(stacked, secret, Layout{2, 2}), VerificationError);
  EXPECT_THROW(measure(stacked, secret, Layout{1, 2}), DomainError);
}
