#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "nlshom/fft.hpp"

namespace nlshom {

/**
 * Radial frequency bump used by the low-frequency projections.
 *
 * Published formula (bit-reproducible):
 *
 *   m(r) = 1                                   for r <= 1
 *   m(r) = psi(2 - r)                          for 1 < r < 2
 *   m(r) = 0                                   for r >= 2
 *
 * with psi(t) = h(t) / (h(t) + h(1 - t)) and h(t) = exp(-1/t) for t > 0,
 * h(t) = 0 otherwise. psi is the standard C-infinity step, so m is smooth
 * and compactly supported; every derivative vanishes at r = 1 and r = 2,
 * which the decay certificate below needs (a merely C^1 ramp leaks
 * polynomial tails into the projection kernel).
 */
inline double lp_bump(double r) {
  if (r <= 1.0) return 1.0;
  if (r >= 2.0) return 0.0;
  double t = 2.0 - r;                     // in (0,1)
  double h1 = std::exp(-1.0 / t);
  double h2 = std::exp(-1.0 / (1.0 - t));
  return h1 / (h1 + h2);
}

/**
 * Diagonal Fourier multiplier: one complex symbol value per FFT slot.
 * Applying it transforms, scales slotwise, and transforms back.
 */
class SpectralDiagonal {
 public:
  explicit SpectralDiagonal(const Grid2D& grid) : grid_(grid), d_(grid.size()) {}

  const Grid2D& grid() const { return grid_; }
  cplx& operator[](std::size_t k) { return d_[k]; }
  const cplx& operator[](std::size_t k) const { return d_[k]; }

  /// Build from a callable sigma(xi_x, xi_y).
  template <class F>
  static SpectralDiagonal from_symbol(const Grid2D& g, F&& sigma) {
    SpectralDiagonal d(g);
    int n = g.points();
    std::size_t k = 0;
    for (int my = 0; my < n; ++my) {
      double wy = g.wavenumber(my);
      for (int mx = 0; mx < n; ++mx, ++k) d.d_[k] = sigma(g.wavenumber(mx), wy);
    }
    return d;
  }

 private:
  Grid2D grid_;
  std::vector<cplx> d_;
};

/// (-Laplacian + 1)^(-1): symbol 1/(|xi|^2 + 1).
inline SpectralDiagonal inv_helmholtz_diagonal(const Grid2D& g) {
  return SpectralDiagonal::from_symbol(
      g, [](double wx, double wy) { return 1.0 / (wx * wx + wy * wy + 1.0); });
}

/// Laplacian: symbol -|xi|^2.
inline SpectralDiagonal laplacian_diagonal(const Grid2D& g) {
  return SpectralDiagonal::from_symbol(
      g, [](double wx, double wy) { return -(wx * wx + wy * wy); });
}

/// Free Schroedinger propagator over time t: symbol exp(-i t |xi|^2).
inline SpectralDiagonal free_propagator_diagonal(const Grid2D& g, double t) {
  return SpectralDiagonal::from_symbol(g, [t](double wx, double wy) {
    double ph = -t * (wx * wx + wy * wy);
    return cplx(std::cos(ph), std::sin(ph));
  });
}

/// Low-frequency projection at cutoff N: symbol m(|xi|/N). Requires N > 0.
inline SpectralDiagonal lp_low_diagonal(const Grid2D& g, double N) {
  if (!(N > 0.0)) throw ConfigError("projection cutoff must be positive");
  return SpectralDiagonal::from_symbol(g, [N](double wx, double wy) {
    return lp_bump(std::hypot(wx, wy) / N);
  });
}

/**
 * Derivative along one axis: symbol i*xi. The Nyquist slot is zeroed:
 * i*xi has no self-conjugate representative there, and zeroing keeps
 * gradients of real fields real.
 */
inline SpectralDiagonal gradient_diagonal(const Grid2D& g, int axis) {
  if (axis != 0 && axis != 1) throw ConfigError("gradient axis must be 0 or 1");
  int n = g.points();
  return SpectralDiagonal::from_symbol(g, [axis, n, &g](double wx, double wy) {
    double w = axis == 0 ? wx : wy;
    int m = static_cast<int>(std::lround(w * g.length() / (2.0 * pi)));
    if (m == -n / 2) return cplx(0.0, 0.0);
    return cplx(0.0, w);
  });
}

/**
 * Apply a diagonal multiplier: DFT, slotwise scale, inverse DFT.
 * The centering phases of the two transforms cancel, so the fused path
 * works on raw DFTs and only the 1/N^2 normalization remains.
 */
inline ComplexField apply_multiplier(const ComplexField& f,
                                     const SpectralDiagonal& d) {
  require_same_grid(f.grid(), d.grid(), "apply_multiplier");
  const Grid2D& g = f.grid();
  int n = g.points();
  std::vector<cplx> hat(g.size());
  detail::dft2d(n, f.data(), hat.data(), FFTW_FORWARD);
  double scale = 1.0 / static_cast<double>(g.size());
  for (std::size_t k = 0; k < hat.size(); ++k) hat[k] *= d[k] * scale;
  ComplexField out(g);
  detail::dft2d(n, hat.data(), out.data(), FFTW_BACKWARD);
  return out;
}

inline ComplexField inv_helmholtz(const ComplexField& f) {
  return apply_multiplier(f, inv_helmholtz_diagonal(f.grid()));
}

inline ComplexField free_propagator(const ComplexField& f, double t) {
  return apply_multiplier(f, free_propagator_diagonal(f.grid(), t));
}

inline ComplexField lp_project_low(const ComplexField& f, double N) {
  return apply_multiplier(f, lp_low_diagonal(f.grid(), N));
}

inline ComplexField lp_project_high(const ComplexField& f, double N) {
  ComplexField low = lp_project_low(f, N);
  ComplexField out = f;
  out -= low;
  return out;
}

/// Both components of the spectral gradient.
inline std::array<ComplexField, 2> gradient(const ComplexField& f) {
  return {apply_multiplier(f, gradient_diagonal(f.grid(), 0)),
          apply_multiplier(f, gradient_diagonal(f.grid(), 1))};
}

/// Fraction of spectral l^2 mass at Euclidean |xi| > cutoff.
inline double spectral_tail_fraction(const ComplexField& f, double cutoff) {
  SpectralField hat = forward_transform(f);
  const Grid2D& g = f.grid();
  int n = g.points();
  double tail = 0.0, total = 0.0;
  std::size_t k = 0;
  for (int my = 0; my < n; ++my) {
    double wy = g.wavenumber(my);
    for (int mx = 0; mx < n; ++mx, ++k) {
      double e = std::norm(hat[k]);
      total += e;
      if (std::hypot(g.wavenumber(mx), wy) > cutoff) tail += e;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

namespace detail {

/// Throws unless every spectral component of f sits strictly below half
/// the Nyquist wavenumber (so pointwise products stay alias-free).
inline void require_half_band_limited(const ComplexField& f,
                                      const char* what) {
  SpectralField hat = forward_transform(f);
  const Grid2D& g = f.grid();
  int n = g.points();
  double half = 0.5 * g.nyquist();
  double peak = 0.0;
  for (std::size_t k = 0; k < hat.size(); ++k)
    peak = std::max(peak, std::abs(hat[k]));
  std::size_t k = 0;
  for (int my = 0; my < n; ++my) {
    double wy = std::abs(g.wavenumber(my));
    for (int mx = 0; mx < n; ++mx, ++k) {
      double wx = std::abs(g.wavenumber(mx));
      if (wx < half && wy < half) continue;
      if (std::abs(hat[k]) > 1e-12 * peak)
        throw NyquistError(std::string(what) +
                           ": input not band-limited below Nyquist/2");
    }
  }
}

}  // namespace detail

/**
 * Residual of the product rule for the inverse Helmholtz operator,
 *
 *   (-Lap+1)^(-1)(F G) = F (-Lap+1)^(-1) G
 *                      + (-Lap+1)^(-1)( Lap F * (-Lap+1)^(-1) G )
 *                      + 2 (-Lap+1)^(-1)( grad F . grad (-Lap+1)^(-1) G ),
 *
 * evaluated on the grid in sup norm. Exact for band-limited inputs: both
 * fields must be band-limited below Nyquist/2 so every product above is
 * alias-free; violations raise NyquistError.
 */
inline double helmholtz_product_identity_residual(const ComplexField& F,
                                                  const ComplexField& G) {
  require_same_grid(F.grid(), G.grid(), "helmholtz_product_identity_residual");
  detail::require_half_band_limited(F, "helmholtz_product_identity_residual");
  detail::require_half_band_limited(G, "helmholtz_product_identity_residual");
  const Grid2D& g = F.grid();

  ComplexField W = inv_helmholtz(G);
  ComplexField FG(g);
  for (std::size_t k = 0; k < FG.size(); ++k) FG[k] = F[k] * G[k];
  ComplexField lhs = inv_helmholtz(FG);

  ComplexField lapF = apply_multiplier(F, laplacian_diagonal(g));
  auto gradF = gradient(F);
  auto gradW = gradient(W);

  ComplexField t2(g), t3(g);
  for (std::size_t k = 0; k < t2.size(); ++k) {
    t2[k] = lapF[k] * W[k];
    t3[k] = gradF[0][k] * gradW[0][k] + gradF[1][k] * gradW[1][k];
  }
  t2 = inv_helmholtz(t2);
  t3 = inv_helmholtz(t3);

  double res = 0.0;
  for (std::size_t k = 0; k < lhs.size(); ++k) {
    cplx r = lhs[k] - (F[k] * W[k] + t2[k] + 2.0 * t3[k]);
    res = std::max(res, std::abs(r));
  }
  return res;
}

/**
 * Frequency-localized norm comparison
 *
 *   bernstein_ratio = ||P_{<=N} f||_q / ( N^(2/p - 2/q) ||f||_p ),
 *
 * the grid surrogate of the Bernstein inequality constant (dimension 2).
 * Requires p <= q; returns 0 for identically zero f.
 */
inline double bernstein_ratio(const ComplexField& f, double N, double p,
                              double q) {
  if (p > q) throw ConfigError("bernstein_ratio requires p <= q");
  if (!(p >= 1.0) || !(q >= 1.0))
    throw ConfigError("bernstein_ratio requires p, q >= 1");
  double denom = f.lp_norm(p);
  if (denom == 0.0) return 0.0;
  double num = lp_project_low(f, N).lp_norm(q);
  double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  return num / (std::pow(N, 2.0 * (inv_p - inv_q)) * denom);
}

/**
 * Decay certificate for low-frequency projections of compactly supported
 * data: for f supported in |x| <= R_s, returns
 *
 *   max over samples of |P_{<=N} f(x)| * ((|x| - R_s) N)^c / ( N^(2/p) ||f||_p ).
 *
 * For smooth frequency bumps this stays bounded uniformly in N, x.
 * Sample points snap to the nearest grid node and must satisfy
 * |x| > 2 R_s (well outside the support) and |x| <= L/2 - R_s (away from
 * the torus seam, where periodic images would contaminate the tail).
 * Requires N * R_s > 1 and f actually supported in the declared ball
 * (tail beyond it at most 1e-12 of the peak).
 */
inline double lp_decay_check(const ComplexField& f, double support_radius,
                             double N, double p, double c,
                             const std::vector<std::array<double, 2>>& samples) {
  const Grid2D& g = f.grid();
  if (!(support_radius > 0.0)) throw ConfigError("support radius must be > 0");
  if (!(N * support_radius > 1.0))
    throw ConfigError("lp_decay_check requires N * R_s > 1");
  if (samples.empty()) throw ConfigError("lp_decay_check: no sample points");

  int n = g.points();
  double peak = f.max_abs();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      if (std::hypot(g.coord(i), g.coord(j)) <= support_radius) continue;
      if (std::abs(f.at(i, j)) > 1e-12 * peak)
        throw ConfigError("lp_decay_check: field leaks outside declared support");
    }

  ComplexField Pf = lp_project_low(f, N);
  double fp = f.lp_norm(p);
  double inv_p = std::isinf(p) ? 0.0 : 1.0 / p;
  double scale = std::pow(N, 2.0 * inv_p) * fp;

  double worst = 0.0;
  for (const auto& s : samples) {
    int i = static_cast<int>(std::lround((s[0] + 0.5 * g.length()) / g.spacing()));
    int j = static_cast<int>(std::lround((s[1] + 0.5 * g.length()) / g.spacing()));
    i = std::clamp(i, 0, n - 1);
    j = std::clamp(j, 0, n - 1);
    double r = std::hypot(g.coord(i), g.coord(j));
    if (r <= 2.0 * support_radius)
      throw ConfigError("lp_decay_check: sample inside 2 R_s");
    if (r > 0.5 * g.length() - support_radius)
      throw ConfigError("lp_decay_check: sample too close to torus seam");
    double val = std::abs(Pf.at(i, j)) * std::pow((r - support_radius) * N, c);
    worst = std::max(worst, val / scale);
  }
  return worst;
}

/// Plane wave exp(i k . x) for integer mode k; throws if unrepresentable.
inline ComplexField make_plane_wave(const Grid2D& g, int kx, int ky) {
  if (g.slot_of(kx) < 0 || g.slot_of(ky) < 0)
    throw NyquistError("plane wave mode not representable");
  ComplexField f(g);
  int n = g.points();
  double ax = 2.0 * pi * kx / g.length(), ay = 2.0 * pi * ky / g.length();
  for (int j = 0; j < n; ++j) {
    double py = ay * g.coord(j);
    for (int i = 0; i < n; ++i) {
      double ph = ax * g.coord(i) + py;
      f.at(i, j) = cplx(std::cos(ph), std::sin(ph));
    }
  }
  return f;
}

/// Isotropic Gaussian A * exp(-|x|^2 / (2 w^2)) centered at the origin.
inline ComplexField make_gaussian(const Grid2D& g, double amplitude,
                                  double width = 1.0) {
  if (!(width > 0.0)) throw ConfigError("gaussian width must be > 0");
  ComplexField f(g);
  int n = g.points();
  for (int j = 0; j < n; ++j) {
    double y = g.coord(j);
    for (int i = 0; i < n; ++i) {
      double x = g.coord(i);
      f.at(i, j) = amplitude * std::exp(-(x * x + y * y) / (2.0 * width * width));
    }
  }
  return f;
}

}  // namespace nlshom
