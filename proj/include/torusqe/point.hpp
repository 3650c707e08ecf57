#pragma once

#include <algorithm>
#include <cmath>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>

namespace torusqe {

inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 8;

// Largest squared norm accepted anywhere in the library.
inline constexpr std::int64_t kMaxNormSq = std::int64_t{1} << 60;

/// An integer vector in Z^d, 1 <= d <= 8, stored inline.
///
/// Ordering is lexicographic on the coordinates (dimension compared first),
/// which is the canonical order used for shells and coefficient maps.
class LatticePoint {
 public:
  LatticePoint() = default;

  explicit LatticePoint(int dim) : dim_(check_dim(dim)) {}

  LatticePoint(std::initializer_list<std::int64_t> coords)
      : dim_(check_dim(static_cast<int>(coords.size()))) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  explicit LatticePoint(std::span<const std::int64_t> coords)
      : dim_(check_dim(static_cast<int>(coords.size()))) {
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  static LatticePoint zero(int dim) { return LatticePoint(dim); }

  int dim() const noexcept { return dim_; }

  std::int64_t operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  std::int64_t& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }

  std::span<const std::int64_t> coords() const noexcept {
    return {c_.data(), static_cast<std::size_t>(dim_)};
  }

  bool is_zero() const noexcept {
    return std::all_of(c_.begin(), c_.begin() + dim_, [](std::int64_t v) { return v == 0; });
  }

  std::int64_t norm_sq() const noexcept {
    std::int64_t s = 0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
    return s;
  }

  double norm() const noexcept { return std::sqrt(static_cast<double>(norm_sq())); }

  std::int64_t dot(const LatticePoint& o) const {
    require_same_dim(o);
    std::int64_t s = 0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * o.c_[i];
    return s;
  }

  LatticePoint operator-() const noexcept {
    LatticePoint r = *this;
    for (int i = 0; i < dim_; ++i) r.c_[i] = -r.c_[i];
    return r;
  }

  LatticePoint& operator+=(const LatticePoint& o) {
    require_same_dim(o);
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }

  LatticePoint& operator-=(const LatticePoint& o) {
    require_same_dim(o);
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }

  friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) { return a += b; }
  friend LatticePoint operator-(LatticePoint a, const LatticePoint& b) { return a -= b; }

  friend LatticePoint operator*(std::int64_t s, LatticePoint a) noexcept {
    for (int i = 0; i < a.dim_; ++i) a.c_[i] *= s;
    return a;
  }

  friend bool operator==(const LatticePoint& a, const LatticePoint& b) noexcept {
    return a.dim_ == b.dim_ && std::equal(a.c_.begin(), a.c_.begin() + a.dim_, b.c_.begin());
  }

  friend std::strong_ordering operator<=>(const LatticePoint& a, const LatticePoint& b) noexcept {
    if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
    for (int i = 0; i < a.dim_; ++i) {
      if (auto c = a.c_[i] <=> b.c_[i]; c != 0) return c;
    }
    return std::strong_ordering::equal;
  }

  std::string to_string() const {
    std::string s = "(";
    for (int i = 0; i < dim_; ++i) {
      if (i) s += ',';
      s += std::to_string(c_[i]);
    }
    return s + ")";
  }

  friend std::ostream& operator<<(std::ostream& os, const LatticePoint& p) {
    return os << p.to_string();
  }

 private:
  static int check_dim(int d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("lattice point dimension out of range");
    return d;
  }

  void require_same_dim(const LatticePoint& o) const {
    if (o.dim_ != dim_) throw std::invalid_argument("lattice point dimension mismatch");
  }

  std::array<std::int64_t, kMaxDim> c_{};
  int dim_ = 0;
};

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<std::uint64_t>(p.dim());
    for (std::int64_t v : p.coords()) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

/// n / gcd(|n_i|): the primitive lattice point generating n.
inline LatticePoint primitive(const LatticePoint& n) {
  if (n.is_zero()) throw std::invalid_argument("primitive: zero vector has no primitive generator");
  std::int64_t g = 0;
  for (std::int64_t v : n.coords()) g = std::gcd(g, v < 0 ? -v : v);
  LatticePoint r = n;
  for (int i = 0; i < r.dim(); ++i) r[i] /= g;
  return r;
}

}  // namespace torusqe
