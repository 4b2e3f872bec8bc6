#pragma once

// Applies a scheme table to bitmaps: encoding into share images, stacking by
// OR, and measuring stacked black counts against a secret.
//
// Randomness: every secret pixel (x, y) gets its own SplitMix64 stream whose
// state starts at mix(seed ^ mix(y << 32 | x)), where mix is the SplitMix64
// finalizer. Columns are shuffled by Fisher-Yates with unbiased bounded draws.
// The output depends only on the seed and the inputs, never on pixel order.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "evcs/contrast.hpp"
#include "evcs/errors.hpp"
#include "evcs/lattice.hpp"
#include "evcs/scheme.hpp"
#include "evcs/verifier.hpp"

namespace evcs {

struct BitImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, 1 = black

  BitImage() = default;
  BitImage(int w, int h, std::uint8_t fill = 0) : width(w), height(h), bits(std::size_t(w) * h, fill) {
    if (w <= 0 || h <= 0) throw DomainError("image dimensions must be positive");
  }

  bool at(int x, int y) const { return bits[std::size_t(y) * width + x] != 0; }
  void set(int x, int y, bool black) { bits[std::size_t(y) * width + x] = black ? 1 : 0; }
  std::int64_t black_count() const { return std::count(bits.begin(), bits.end(), std::uint8_t{1}); }

  friend bool operator==(const BitImage&, const BitImage&) = default;
};

// ---- PBM ----

namespace detail {

class PbmReader {
 public:
  explicit PbmReader(const std::string& data) : data_(data) {}

  void skip_space() {
    while (pos_ < data_.size()) {
      if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  int read_int() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (start == pos_) throw FormatError("PBM: expected an integer");
    if (pos_ - start > 9) throw FormatError("PBM: dimension too large");
    return std::stoi(data_.substr(start, pos_ - start));
  }

  // P1 pixels may be packed without separators.
  bool read_ascii_bit() {
    skip_space();
    if (pos_ >= data_.size()) throw FormatError("PBM: truncated pixel data");
    const char c = data_[pos_++];
    if (c != '0' && c != '1') throw FormatError(std::string("PBM: bad pixel character '") + c + "'");
    return c == '1';
  }

  std::size_t pos() const { return pos_; }
  void advance(std::size_t k) { pos_ += k; }
  const std::string& data() const { return data_; }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline BitImage parse_pbm(const std::string& data) {
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '1' && data[1] != '4')) {
    throw FormatError("not a PBM file (expected P1 or P4 magic)");
  }
  const bool binary = data[1] == '4';
  detail::PbmReader in(data);
  in.advance(2);
  const int w = in.read_int();
  const int h = in.read_int();
  BitImage img(w, h);
  if (!binary) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) img.set(x, y, in.read_ascii_bit());
    }
    return img;
  }
  // exactly one whitespace byte separates the header from the raster
  if (in.pos() >= data.size() || !std::isspace(static_cast<unsigned char>(data[in.pos()]))) {
    throw FormatError("PBM: missing separator before raster");
  }
  in.advance(1);
  const std::size_t stride = (std::size_t(w) + 7) / 8;
  if (data.size() - in.pos() < stride * h) throw FormatError("PBM: truncated raster");
  const auto* raster = reinterpret_cast<const unsigned char*>(data.data() + in.pos());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      img.set(x, y, (raster[y * stride + x / 8] >> (7 - x % 8)) & 1u);
    }
  }
  return img;
}

inline std::string format_pbm(const BitImage& img, bool binary = true) {
  std::string out = (binary ? "P4\n" : "P1\n") + std::to_string(img.width) + " " + std::to_string(img.height) + "\n";
  if (binary) {
    const std::size_t stride = (std::size_t(img.width) + 7) / 8;
    std::string raster(stride * img.height, '\0');
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        if (img.at(x, y)) raster[y * stride + x / 8] |= static_cast<char>(1u << (7 - x % 8));
      }
    }
    return out + raster;
  }
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (x) out += ' ';
      out += img.at(x, y) ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline BitImage read_pbm(const std::string& path) { return parse_pbm(read_file(path)); }

// ---- layout and randomness ----

// Subpixel grid for one secret pixel. Cells past m are black on every share.
struct Layout {
  int rows = 1;
  int cols = 1;

  std::int64_t capacity() const { return std::int64_t(rows) * cols; }
  friend bool operator==(const Layout&, const Layout&) = default;
};

inline Layout default_layout(std::int64_t m) {
  if (m < 1) throw DomainError("layout needs m >= 1");
  const int rows = static_cast<int>(std::sqrt(static_cast<double>(m)));
  int r = std::max(1, rows);
  while (std::int64_t(r) * r > m) --r;  // floor(sqrt(m)) without rounding trouble
  while (std::int64_t(r + 1) * (r + 1) <= m) ++r;
  return {r, static_cast<int>((m + r - 1) / r)};
}

inline Layout parse_layout(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw FormatError("layout must look like RxC, got " + text);
  try {
    const int r = std::stoi(text.substr(0, x));
    const int c = std::stoi(text.substr(x + 1));
    if (r < 1 || c < 1) throw FormatError("layout dimensions must be positive");
    return {r, c};
  } catch (const std::logic_error&) {
    throw FormatError("layout must look like RxC, got " + text);
  }
}

inline std::string to_string(const Layout& l) { return std::to_string(l.rows) + "x" + std::to_string(l.cols); }

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

  // Uniform in [0, bound), by rejection.
  constexpr std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
      const std::uint64_t v = next();
      if (v >= threshold) return v % bound;
    }
  }

 private:
  std::uint64_t state_;
};

inline SplitMix64 pixel_stream(std::uint64_t seed, std::uint32_t x, std::uint32_t y) {
  return SplitMix64(splitmix64_mix(seed ^ splitmix64_mix((std::uint64_t{y} << 32) | x)));
}

// ---- shares ----

struct ShareSet {
  int n = 0;
  int width = 0;   // secret dimensions
  int height = 0;
  Layout layout;
  std::int64_t m = 0;
  std::uint64_t seed = 0;
  std::string fingerprint;  // of the scheme table
  std::vector<BitImage> shares;
};

// Columns of a profile as supports, ascending by support mask.
inline std::vector<Subset> columns_of(const PixelProfile& p) {
  std::vector<Subset> out;
  for (std::uint32_t u = 0; u < lattice_size(p.n()); ++u) {
    for (std::int64_t k = 0; k < p[Subset(u)]; ++k) out.push_back(Subset(u));
  }
  return out;
}

// Secrets are keyed by family member; members without an image are all
// white. The table is re-certified before use.
inline ShareSet encode(const std::map<Subset, BitImage>& secrets, const SchemeTable& table, std::uint64_t seed,
                       std::optional<Layout> layout = std::nullopt, const std::string& fingerprint = "") {
  if (secrets.empty()) throw DomainError("encode needs at least one secret image");
  const int w = secrets.begin()->second.width;
  const int h = secrets.begin()->second.height;
  for (const auto& [t, img] : secrets) {
    if (!table.family.contains(t)) throw DomainError("secret for " + to_string(t) + " which is not a family member");
    if (img.width != w || img.height != h) throw DomainError("secret images differ in dimensions");
  }
  const Certificate cert = certify(table);
  if (!cert.passed()) throw VerificationError("refusing to encode with a table that fails verification");
  const Layout grid = layout.value_or(default_layout(table.m));
  if (grid.capacity() < table.m) {
    throw DomainError("layout " + to_string(grid) + " holds fewer than m = " + std::to_string(table.m) + " cells");
  }

  std::vector<std::vector<Subset>> columns;
  for (const auto& p : table.profiles) columns.push_back(columns_of(p));
  std::vector<const BitImage*> images(table.family.size(), nullptr);
  for (const auto& [t, img] : secrets) images[table.family.index_of(t)] = &img;

  ShareSet out;
  out.n = table.n;
  out.width = w;
  out.height = h;
  out.layout = grid;
  out.m = table.m;
  out.seed = seed;
  out.fingerprint = fingerprint;
  out.shares.assign(table.n, BitImage(w * grid.cols, h * grid.rows, 1));

  std::vector<Subset> perm;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Assignment a = 0;
      for (std::size_t i = 0; i < images.size(); ++i) {
        if (images[i] && images[i]->at(x, y)) a |= Assignment{1} << i;
      }
      perm = columns[a];
      SplitMix64 rng = pixel_stream(seed, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y));
      for (std::size_t j = perm.size(); j > 1; --j) std::swap(perm[j - 1], perm[rng.below(j)]);
      for (std::size_t j = 0; j < perm.size(); ++j) {
        const int sx = x * grid.cols + static_cast<int>(j % grid.cols);
        const int sy = y * grid.rows + static_cast<int>(j / grid.cols);
        for (int i = 0; i < table.n; ++i) out.shares[i].set(sx, sy, perm[j].contains(i + 1));
      }
    }
  }
  return out;
}

// Pixelwise OR of the shares whose 1-based index is in `which`.
inline BitImage stack(const std::vector<BitImage>& shares, Subset which) {
  if (which.empty()) throw DomainError("stack needs a nonempty selection");
  const int top = which.max_element();
  if (top > static_cast<int>(shares.size())) {
    throw DomainError("selection " + to_string(which) + " names a missing share");
  }
  BitImage out = shares[which.elements().front() - 1];
  for (int i : which.elements()) {
    const BitImage& s = shares[i - 1];
    if (s.width != out.width || s.height != out.height) throw DomainError("shares differ in dimensions");
    for (std::size_t k = 0; k < out.bits.size(); ++k) out.bits[k] |= s.bits[k];
  }
  return out;
}

inline BitImage stack(const ShareSet& shares, Subset which) { return stack(shares.shares, which); }

struct Measurement {
  std::optional<std::int64_t> l;  // absent when the secret has no white pixel
  std::optional<std::int64_t> h;  // absent when the secret has no black pixel
  std::int64_t capacity = 0;
  std::optional<Rational> alpha;  // (h - l) / capacity when both are present
};

// Black counts per subpixel block, split by secret colour.
inline Measurement measure(const BitImage& stacked, const BitImage& secret, const Layout& layout) {
  if (stacked.width != secret.width * layout.cols || stacked.height != secret.height * layout.rows) {
    throw DomainError("stacked image is not secret dimensions times the layout");
  }
  Measurement out;
  out.capacity = layout.capacity();
  for (int y = 0; y < secret.height; ++y) {
    for (int x = 0; x < secret.width; ++x) {
      std::int64_t count = 0;
      for (int dy = 0; dy < layout.rows; ++dy) {
        for (int dx = 0; dx < layout.cols; ++dx) count += stacked.at(x * layout.cols + dx, y * layout.rows + dy);
      }
      auto& slot = secret.at(x, y) ? out.h : out.l;
      if (slot && *slot != count) {
        throw VerificationError("pixel (" + std::to_string(x) + "," + std::to_string(y) + ") has " +
                                std::to_string(count) + " black subpixels, others of its colour have " +
                                std::to_string(*slot));
      }
      slot = count;
    }
  }
  if (out.h && out.l) out.alpha = Rational(*out.h - *out.l, out.capacity);
  return out;
}

}  // namespace evcs
