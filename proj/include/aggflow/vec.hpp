#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>
#include <stdexcept>

namespace aggflow {

// Points, differences and subgradients all live in R^d with d in {1,2,3}.
// Fixed-capacity storage keeps pair loops allocation-free.
class Vec {
 public:
  static constexpr int kMaxDim = 3;

  Vec() = default;  // dim 0, assign before use
  explicit Vec(int dim) : n_(checked(dim)) {}
  Vec(std::initializer_list<double> xs) {
    if (xs.size() < 1 || xs.size() > kMaxDim)
      throw std::invalid_argument("Vec: dimension must be between 1 and 3");
    n_ = static_cast<int>(xs.size());
    int k = 0;
    for (double v : xs) c_[k++] = v;
  }

  static Vec zero(int dim) { return Vec(dim); }

  int dim() const { return n_; }

  double& operator[](int i) {
    assert(i >= 0 && i < n_);
    return c_[i];
  }
  double operator[](int i) const {
    assert(i >= 0 && i < n_);
    return c_[i];
  }

  Vec& operator+=(const Vec& o) {
    assert(n_ == o.n_);
    for (int i = 0; i < n_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    assert(n_ == o.n_);
    for (int i = 0; i < n_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < n_; ++i) c_[i] *= s;
    return *this;
  }

 private:
  static int checked(int d) {
    if (d < 1 || d > kMaxDim) throw std::invalid_argument("Vec: dimension must be between 1 and 3");
    return d;
  }

  std::array<double, kMaxDim> c_{};
  int n_ = 0;
};

inline Vec operator+(Vec a, const Vec& b) { return a += b; }
inline Vec operator-(Vec a, const Vec& b) { return a -= b; }
inline Vec operator*(double s, Vec v) { return v *= s; }
inline Vec operator*(Vec v, double s) { return v *= s; }
inline Vec operator-(Vec v) { return v *= -1.0; }

inline double dot(const Vec& a, const Vec& b) {
  assert(a.dim() == b.dim());
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& v) { return dot(v, v); }
inline double norm(const Vec& v) { return std::sqrt(norm_sq(v)); }
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }

inline bool exactly_equal(const Vec& a, const Vec& b) {
  if (a.dim() != b.dim()) return false;
  for (int i = 0; i < a.dim(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

inline void require_dim(const Vec& v, int d, const char* what) {
  if (v.dim() != d) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

}  // namespace aggflow
