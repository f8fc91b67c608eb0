#pragma once

#include <random>

#include "nlshom/fft.hpp"

namespace nlshom::test {

/// Random complex field with spectral support confined to signed modes
/// |k| <= max_mode per component; hermitian = true makes it real-valued.
inline ComplexField random_band_limited(const Grid2D& g, int max_mode,
                                        std::mt19937_64& rng,
                                        bool hermitian = false) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SpectralField c(g);
  for (int ky = -max_mode; ky <= max_mode; ++ky)
    for (int kx = -max_mode; kx <= max_mode; ++kx)
      c.at_mode(kx, ky) = cplx(u(rng), u(rng));
  if (hermitian) {
    for (int ky = -max_mode; ky <= max_mode; ++ky)
      for (int kx = -max_mode; kx <= max_mode; ++kx) {
        cplx a = c.at_mode(kx, ky), b = std::conj(c.at_mode(-kx, -ky));
        c.at_mode(kx, ky) = 0.5 * (a + b);
        c.at_mode(-kx, -ky) = std::conj(0.5 * (a + b));
      }
  }
  return inverse_transform(c);
}

/// Dense random field (all slots populated), for roundtrip checks.
inline ComplexField random_dense(const Grid2D& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ComplexField f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = cplx(u(rng), u(rng));
  return f;
}

inline double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace nlshom::test
