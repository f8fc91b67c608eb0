#pragma once

#include <cstddef>
#include <string>

#include "nlshom/errors.hpp"

namespace nlshom {

inline constexpr double pi = 3.141592653589793238462643383279502884;

/**
 * Uniform N x N discretization of the centered square torus [-L/2, L/2)^2.
 *
 * Physical nodes per axis: x_i = i*h - L/2 with h = L/N, i in {0,...,N-1}.
 * Fourier modes per axis:  xi_m = 2*pi*signed(m)/L with
 * signed(m) in {-N/2,...,N/2-1}; storage follows the FFT layout
 * (signed(m) = m for m < N/2, m - N otherwise).
 *
 * Invariants: N is a power of two, N >= 8, L > 0.
 */
class Grid2D {
 public:
  Grid2D(int points, double length) : n_(points), length_(length) {
    if (points < 8 || (points & (points - 1)) != 0)
      throw ConfigError("grid points must be a power of two >= 8, got " +
                        std::to_string(points));
    if (!(length > 0.0))
      throw ConfigError("grid length must be positive");
  }

  int points() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / n_; }
  /// Riemann quadrature weight of one cell.
  double cell_area() const { return spacing() * spacing(); }
  std::size_t size() const {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
  }

  /// Physical coordinate of node i along either axis.
  double coord(int i) const { return i * spacing() - 0.5 * length_; }

  /// Signed integer mode for FFT slot m.
  int signed_mode(int m) const { return m < n_ / 2 ? m : m - n_; }

  /// Angular wavenumber of FFT slot m.
  double wavenumber(int m) const {
    return 2.0 * pi * signed_mode(m) / length_;
  }

  /// Magnitude pi*N/L of the extreme representable mode.
  double nyquist() const { return pi * n_ / length_; }

  /// FFT slot holding signed mode k, or -1 if k is not representable.
  int slot_of(int k) const {
    if (k < -n_ / 2 || k >= n_ / 2) return -1;
    return k >= 0 ? k : k + n_;
  }

  bool operator==(const Grid2D& o) const {
    return n_ == o.n_ && length_ == o.length_;
  }
  bool operator!=(const Grid2D& o) const { return !(*this == o); }

 private:
  int n_;
  double length_;
};

}  // namespace nlshom
