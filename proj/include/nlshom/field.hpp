#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "nlshom/grid.hpp"

namespace nlshom {

using cplx = std::complex<double>;

/**
 * Complex scalar field sampled on a Grid2D.
 *
 * Sample (i, j) lives at x = (coord(i), coord(j)) and is stored at
 * index j*N + i, so memory walks the first coordinate fastest
 * (row-major with the second coordinate as row).
 */
class ComplexField {
 public:
  explicit ComplexField(const Grid2D& grid) : grid_(grid), v_(grid.size()) {}

  const Grid2D& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }

  cplx& at(int i, int j) { return v_[idx(i, j)]; }
  const cplx& at(int i, int j) const { return v_[idx(i, j)]; }
  cplx& operator[](std::size_t k) { return v_[k]; }
  const cplx& operator[](std::size_t k) const { return v_[k]; }
  cplx* data() { return v_.data(); }
  const cplx* data() const { return v_.data(); }

  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j) * grid_.points() + i;
  }

  ComplexField& operator+=(const ComplexField& o) {
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
  }
  ComplexField& operator-=(const ComplexField& o) {
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
  }
  ComplexField& operator*=(cplx s) {
    for (auto& z : v_) z *= s;
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& z : v_) m = std::max(m, std::abs(z));
    return m;
  }
  double max_abs_imag() const {
    double m = 0.0;
    for (const auto& z : v_) m = std::max(m, std::abs(z.imag()));
    return m;
  }

  /// Riemann L^p norm, (h^2 sum |v|^p)^(1/p); p = infinity gives max |v|.
  double lp_norm(double p) const {
    if (std::isinf(p)) return max_abs();
    double s = 0.0;
    if (p == 2.0) {
      for (const auto& z : v_) s += std::norm(z);
    } else {
      for (const auto& z : v_) s += std::pow(std::abs(z), p);
    }
    return std::pow(grid_.cell_area() * s, 1.0 / p);
  }
  double l2_norm() const { return lp_norm(2.0); }

  /// Riemann integral of |v|^2 (the conserved mass).
  double mass() const {
    double s = 0.0;
    for (const auto& z : v_) s += std::norm(z);
    return grid_.cell_area() * s;
  }

  bool finite() const {
    for (const auto& z : v_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

 private:
  Grid2D grid_;
  std::vector<cplx> v_;
};

inline void require_same_grid(const Grid2D& a, const Grid2D& b,
                              const char* what) {
  if (a != b) throw GridMismatchError(std::string(what) + ": grid mismatch");
}

inline ComplexField operator-(const ComplexField& a, const ComplexField& b) {
  require_same_grid(a.grid(), b.grid(), "field difference");
  ComplexField r = a;
  r -= b;
  return r;
}

}  // namespace nlshom
