#pragma once

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

#include "nlshom/field.hpp"

namespace nlshom {

/**
 * Fourier coefficients of a ComplexField in FFT slot layout.
 *
 * Slot (mx, my) is stored at my*N + mx and carries the coefficient of
 * exp(i xi . x) with xi = (wavenumber(mx), wavenumber(my)), so
 *
 *   field(x) = sum over slots of coeff(mx, my) * exp(i xi . x).
 *
 * A plane wave exp(i k . x) with both components of k on the grid's
 * mode lattice has exactly one unit coefficient.
 */
class SpectralField {
 public:
  explicit SpectralField(const Grid2D& grid) : grid_(grid), c_(grid.size()) {}

  const Grid2D& grid() const { return grid_; }
  std::size_t size() const { return c_.size(); }

  cplx& at_slot(int mx, int my) { return c_[idx(mx, my)]; }
  const cplx& at_slot(int mx, int my) const { return c_[idx(mx, my)]; }
  cplx& operator[](std::size_t k) { return c_[k]; }
  const cplx& operator[](std::size_t k) const { return c_[k]; }
  cplx* data() { return c_.data(); }
  const cplx* data() const { return c_.data(); }

  std::size_t idx(int mx, int my) const {
    return static_cast<std::size_t>(my) * grid_.points() + mx;
  }

  /// Coefficient of signed integer mode (kx, ky); throws if unrepresentable.
  cplx& at_mode(int kx, int ky) {
    int sx = grid_.slot_of(kx), sy = grid_.slot_of(ky);
    if (sx < 0 || sy < 0)
      throw NyquistError("mode (" + std::to_string(kx) + "," +
                         std::to_string(ky) + ") not representable on grid");
    return at_slot(sx, sy);
  }
  const cplx& at_mode(int kx, int ky) const {
    return const_cast<SpectralField*>(this)->at_mode(kx, ky);
  }

 private:
  Grid2D grid_;
  std::vector<cplx> c_;
};

namespace detail {

/**
 * Unnormalized out-of-place 2D complex DFT via FFTW.
 *
 * One plan per (size, sign) is cached for the process lifetime. Plans use
 * FFTW_ESTIMATE (deterministic algorithm selection, arrays untouched during
 * planning) plus FFTW_UNALIGNED so the cached plan may execute on arbitrary
 * caller buffers through the new-array interface, which FFTW guarantees to
 * be thread-safe. Out-of-place c2c transforms preserve their input.
 */
inline void dft2d(int n, const cplx* in, cplx* out, int sign) {
  static std::mutex mtx;
  static std::map<std::pair<int, int>, fftw_plan> cache;

  auto* fin = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in));
  auto* fout = reinterpret_cast<fftw_complex*>(out);

  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it == cache.end()) {
      plan = fftw_plan_dft_2d(n, n, fin, fout, sign,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
      cache.emplace(key, plan);
    } else {
      plan = it->second;
    }
  }
  fftw_execute_dft(plan, fin, fout);
}

}  // namespace detail

/**
 * Forward transform with unit-coefficient normalization.
 *
 * Returns coefficients c(m) = (1/N^2) sum_j f(x_j) exp(-i xi_m . x_j).
 * Because nodes are centered (x_j = j*h - L/2), the raw DFT acquires the
 * phase exp(i xi_m L/2) = (-1)^(mx+my), which is folded in here.
 */
inline SpectralField forward_transform(const ComplexField& f) {
  const Grid2D& g = f.grid();
  int n = g.points();
  SpectralField out(g);
  detail::dft2d(n, f.data(), out.data(), FFTW_FORWARD);
  double scale = 1.0 / static_cast<double>(g.size());
  for (int my = 0; my < n; ++my)
    for (int mx = 0; mx < n; ++mx) {
      double s = ((mx + my) & 1) ? -scale : scale;
      out[out.idx(mx, my)] *= s;
    }
  return out;
}

/// Inverse of forward_transform: f(x_j) = sum_m c(m) exp(i xi_m . x_j).
inline ComplexField inverse_transform(const SpectralField& c) {
  const Grid2D& g = c.grid();
  int n = g.points();
  SpectralField staged(g);
  for (int my = 0; my < n; ++my)
    for (int mx = 0; mx < n; ++mx) {
      std::size_t k = c.idx(mx, my);
      staged[k] = ((mx + my) & 1) ? -c[k] : c[k];
    }
  ComplexField out(g);
  detail::dft2d(n, staged.data(), out.data(), FFTW_BACKWARD);
  return out;
}

}  // namespace nlshom
