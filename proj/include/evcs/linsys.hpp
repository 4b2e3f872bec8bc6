#pragma once

// The integer system M x = r linking column multiplicities to stacked
// black-subpixel counts.
//
// M is indexed by nonempty subsets, with M(S,T) = 1 iff S and T intersect.
// x_T counts columns that are black exactly on the rows in T; r_S counts the
// black subpixels when the transparencies in S are stacked. solve_x uses the
// closed-form inverse; build_m/inverse_m are kept for small n as test oracles.

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "evcs/errors.hpp"
#include "evcs/lattice.hpp"

namespace evcs {

// Largest r_S a builder may feed into solve_x. Alternating sums over at most
// 2^16 terms then stay far inside int64.
inline constexpr std::int64_t kMaxLevel = std::int64_t{1} << 31;

class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0) {}

  static IntMatrix identity(std::size_t size) {
    IntMatrix m(size, size);
    for (std::size_t i = 0; i < size; ++i) m(i, i) = 1;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::int64_t& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::int64_t operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
    if (a.cols_ != b.rows_) throw DomainError("matrix shape mismatch");
    IntMatrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const std::int64_t v = a(i, k);
        if (v == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += v * b(k, j);
      }
    }
    return out;
  }

  friend bool operator==(const IntMatrix&, const IntMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> data_;
};

// Stacked black counts r_S for every nonempty S. Index 0 (the empty set) is
// always zero.
class RVector {
 public:
  RVector() = default;
  explicit RVector(int n) : n_(n), values_(lattice_size(n), 0) { check_ground_set(n); }
  RVector(int n, const std::vector<std::int64_t>& canonical) : RVector(n) {
    if (canonical.size() + 1 != values_.size()) {
      throw DomainError("RVector needs 2^n-1 values in canonical order");
    }
    for (std::size_t i = 0; i < canonical.size(); ++i) values_[i + 1] = canonical[i];
  }

  int n() const { return n_; }
  std::int64_t operator[](Subset s) const { return values_[s.mask()]; }
  void set(Subset s, std::int64_t v) {
    if (s.empty()) throw DomainError("r of the empty set is fixed at 0");
    values_[s.mask()] = v;
  }
  const std::vector<std::int64_t>& raw() const { return values_; }

  friend bool operator==(const RVector&, const RVector&) = default;

 private:
  int n_ = 0;
  std::vector<std::int64_t> values_;
};

// Column multiplicities x_T for every T including the empty set (all-white
// padding columns). Entries may be negative only as raw solver output.
class PixelProfile {
 public:
  PixelProfile() = default;
  explicit PixelProfile(int n) : n_(n), counts_(lattice_size(n), 0) { check_ground_set(n); }

  int n() const { return n_; }
  std::int64_t operator[](Subset s) const { return counts_[s.mask()]; }
  std::int64_t& at(Subset s) { return counts_[s.mask()]; }
  const std::vector<std::int64_t>& raw() const { return counts_; }

  std::int64_t total() const { return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0}); }
  bool nonnegative() const {
    for (auto c : counts_) {
      if (c < 0) return false;
    }
    return true;
  }
  // Subsets with a negative count.
  std::vector<Subset> negative_supports() const {
    std::vector<Subset> out;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (counts_[i] < 0) out.push_back(Subset(static_cast<std::uint32_t>(i)));
    }
    return out;
  }

  friend bool operator==(const PixelProfile&, const PixelProfile&) = default;

 private:
  int n_ = 0;
  std::vector<std::int64_t> counts_;
};

inline constexpr int kMaxDenseN = 10;

inline IntMatrix build_m(int n) {
  check_ground_set(n, kMaxDenseN);
  const std::size_t dim = lattice_size(n) - 1;
  IntMatrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) m(i, j) = subset_at(i).intersects(subset_at(j)) ? 1 : 0;
  }
  return m;
}

// Inverse by the block recursion, starting from M_1^{-1} = (1):
//
//   M_{k+1}^{-1} = [     0      -M^{-1}e    M^{-1} ]
//                  [ -e'M^{-1}      0      e'M^{-1} ]
//                  [   M^{-1}     M^{-1}e   -M^{-1} ]
inline IntMatrix inverse_m(int n) {
  check_ground_set(n, kMaxDenseN);
  IntMatrix inv(1, 1);
  inv(0, 0) = 1;
  for (int k = 1; k < n; ++k) {
    const std::size_t d = inv.rows();
    std::vector<std::int64_t> col_sum(d, 0);  // M^{-1} e
    std::vector<std::int64_t> row_sum(d, 0);  // e' M^{-1}
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        col_sum[i] += inv(i, j);
        row_sum[j] += inv(i, j);
      }
    }
    IntMatrix next(2 * d + 1, 2 * d + 1);
    for (std::size_t i = 0; i < d; ++i) {
      next(i, d) = -col_sum[i];
      next(d, i) = -row_sum[i];
      next(d, d + 1 + i) = row_sum[i];
      next(d + 1 + i, d) = col_sum[i];
      for (std::size_t j = 0; j < d; ++j) {
        next(i, d + 1 + j) = inv(i, j);
        next(d + 1 + i, j) = inv(i, j);
        next(d + 1 + i, d + 1 + j) = -inv(i, j);
      }
    }
    inv = std::move(next);
  }
  return inv;
}

inline void check_level_bound(const RVector& r) {
  for (auto v : r.raw()) {
    if (v > kMaxLevel || v < -kMaxLevel) {
      throw DomainError("black count exceeds 2^31: " + std::to_string(v));
    }
  }
}

// Closed-form solution of M x = r:
//   x_S = sum over T with ({1..n} \ S) <= T of (-1)^(|T|+|S|+n+1) r_T.
// x of the empty set is left at 0. Entries may be negative.
inline PixelProfile solve_x(const RVector& r) {
  check_level_bound(r);
  const int n = r.n();
  const Subset full = Subset::full(n);
  PixelProfile x(n);
  for (std::uint32_t mask = 1; mask < lattice_size(n); ++mask) {
    const Subset s(mask);
    std::int64_t sum = 0;
    for_each_between(full - s, full, [&](Subset t) { sum += parity_sign(t, s, n) * r[t]; });
    x.at(s) = sum;
  }
  return x;
}

// Every S strictly inside {1..n} (the empty set included) whose alternating
// sum over supersets is positive. Empty iff solve_x(r) is nonnegative.
inline std::vector<Subset> check_nonnegative(const RVector& r) {
  check_level_bound(r);
  const int n = r.n();
  const Subset full = Subset::full(n);
  std::vector<Subset> violating;
  for (std::uint32_t mask = 0; mask < full.mask(); ++mask) {
    const Subset s(mask);
    std::int64_t sum = 0;
    for_each_between(s, full, [&](Subset t) { sum += ((s.size() + t.size()) % 2 == 0 ? 1 : -1) * r[t]; });
    if (sum > 0) violating.push_back(s);
  }
  return violating;
}

// M x == r, evaluated directly from the intersection rule.
inline bool verify_solution(const RVector& r, const PixelProfile& x) {
  if (r.n() != x.n()) return false;
  const std::size_t size = lattice_size(r.n());
  for (std::uint32_t s = 1; s < size; ++s) {
    std::int64_t sum = 0;
    for (std::uint32_t t = 1; t < size; ++t) {
      if (s & t) sum += x[Subset(t)];
    }
    if (sum != r[Subset(s)]) return false;
  }
  return true;
}

// r = M x for a profile (the forward map). Padding is ignored.
inline RVector apply_m(const PixelProfile& x) {
  RVector r(x.n());
  const std::size_t size = lattice_size(x.n());
  // r_S = total nonempty columns - columns whose support misses S.
  std::vector<std::int64_t> within(size, 0);  // sum of x_U over U <= complement
  for (std::uint32_t u = 0; u < size; ++u) within[u] = x[Subset(u)];
  for (int bit = 0; bit < x.n(); ++bit) {
    for (std::uint32_t u = 0; u < size; ++u) {
      if (u & (1u << bit)) within[u] += within[u ^ (1u << bit)];
    }
  }
  const std::uint32_t full = Subset::full(x.n()).mask();
  for (std::uint32_t s = 1; s < size; ++s) {
    r.set(Subset(s), within[full] - within[full & ~s]);
  }
  return r;
}

}  // namespace evcs
