#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "nlshom/fft.hpp"
#include "nlshom/rng.hpp"
#include "nlshom/spectral.hpp"

namespace nlshom {

/**
 * Coupling families for the oscillatory coefficient g(n x).
 *
 * Every family evaluates to a real field; hermitian symmetry of
 * coefficient data is validated up front. The mean value gbar is exact
 * per family (zero mode, sample average, law mean times the envelope
 * integral, or the weighted combination).
 */

/// Real trigonometric polynomial sum_k c_k exp(i k . y) on the 2-torus.
/// Invariants: c_{-k} = conj(c_k) and c_0 real with c_0 >= 0.
struct TrigPoly {
  std::map<std::array<int, 2>, cplx> coeffs;
};

/// g(x) = G(A x) with G a trig polynomial on the d-torus and A a d x 2
/// frequency matrix whose rows are integer-independent: k . A != 0 for
/// every nonzero integer k in the support of G.
struct QuasiPeriodic {
  std::map<std::vector<int>, cplx> coeffs;      // modes of G, keys length d
  std::vector<std::array<double, 2>> rows;      // rows of A
};

/// 2pi-periodic function known through m x m equispaced samples
/// (row-major, node (i,j) at (2 pi i/m, 2 pi j/m)); evaluation uses exact
/// trigonometric interpolation with Nyquist symmetrization.
struct PeriodicSampled {
  int m = 0;
  std::vector<double> samples;
};

/// Envelope phi for alloy couplings.
struct AlloyBump {
  enum class Kind { compact, gaussian };
  Kind kind = Kind::compact;
  double amplitude = 1.0;
  /// Support radius (compact) or standard deviation (gaussian).
  double scale = 0.5;
  /// Declared envelope bound |phi(z)| <= C (1+|z|)^(-(2+eps)).
  double decay_c = 1.0;
  double decay_eps = 1.0;

  /// phi at distance r: compact bump amplitude*exp(1 - 1/(1-(r/s)^2)),
  /// or the gaussian amplitude*exp(-r^2/(2 s^2)).
  double value(double r) const {
    if (kind == Kind::compact) {
      double t = r / scale;
      if (t >= 1.0) return 0.0;
      return amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
    }
    double t = r / scale;
    return amplitude * std::exp(-0.5 * t * t);
  }

  /// Lattice-sum truncation radius: sites beyond it contribute less than
  /// 1e-10 of the peak to any point value. Compact support is exact; the
  /// gaussian radius solves 2 pi s^2 exp(-R^2/(2 s^2)) = 1e-10.
  double cutoff() const {
    if (kind == Kind::compact) return scale;
    double a = 2.0 * pi * scale * scale * 1e10;
    return scale * std::sqrt(2.0 * std::log(std::max(a, std::exp(2.0))));
  }

  /// Plane integral of phi (adaptive Simpson on the radial profile for the
  /// compact bump, closed form for the gaussian).
  double integral() const;
};

/// Law of the iid site values X_k.
struct AlloyLaw {
  enum class Kind { rademacher, uniform };
  Kind kind = Kind::rademacher;
  double mean = 0.0;       // uniform only; must be >= 0
  double halfwidth = 1.0;  // uniform on [mean - halfwidth, mean + halfwidth]
};

/// Random alloy sum_k X_k phi(y - k) over the integer lattice, with
/// counter-based site draws: a pure function of (seed, k).
struct Alloy {
  AlloyBump bump;
  AlloyLaw law;
  std::uint64_t seed = 0;
};

struct Convex;

using CouplingSpec =
    std::variant<TrigPoly, QuasiPeriodic, PeriodicSampled, Alloy, Convex>;

/// Convex combination sum_i w_i g_i with w_i > 0 summing to one.
struct Convex {
  std::vector<double> weights;
  std::vector<CouplingSpec> parts;
};

namespace detail {

inline double simpson(double (*f)(double, const AlloyBump&),
                      const AlloyBump& b, double lo, double hi, double flo,
                      double fmid, double fhi, double tol, int depth) {
  double mid = 0.5 * (lo + hi);
  double lmid = f(0.5 * (lo + mid), b), rmid = f(0.5 * (mid + hi), b);
  double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  double left = (mid - lo) / 6.0 * (flo + 4.0 * lmid + fmid);
  double right = (hi - mid) / 6.0 * (fmid + 4.0 * rmid + fhi);
  if (depth > 40 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, b, lo, mid, flo, lmid, fmid, tol / 2, depth + 1) +
         simpson(f, b, mid, hi, fmid, rmid, fhi, tol / 2, depth + 1);
}

inline double radial_integrand(double r, const AlloyBump& b) {
  return b.value(r) * r;
}

}  // namespace detail

inline double AlloyBump::integral() const {
  if (kind == Kind::gaussian) return amplitude * 2.0 * pi * scale * scale;
  double hi = scale;
  double f0 = detail::radial_integrand(0.0, *this);
  double fm = detail::radial_integrand(0.5 * hi, *this);
  double f1 = detail::radial_integrand(hi, *this);
  return 2.0 * pi *
         detail::simpson(detail::radial_integrand, *this, 0.0, hi, f0, fm, f1,
                         1e-14, 0);
}

// ---------------------------------------------------------------------------
// validation

inline void validate(const CouplingSpec& spec);

namespace detail {

inline void validate_hermitian_pair(const cplx& c, const cplx& cm,
                                    const char* what) {
  if (std::abs(c - std::conj(cm)) > 1e-12 * (1.0 + std::abs(c)))
    throw ConfigError(std::string(what) + ": coefficients not hermitian");
}

}  // namespace detail

inline void validate(const TrigPoly& p) {
  for (const auto& [k, c] : p.coeffs) {
    std::array<int, 2> mk = {-k[0], -k[1]};
    auto it = p.coeffs.find(mk);
    if (it == p.coeffs.end())
      throw ConfigError("trig poly: missing conjugate mode");
    detail::validate_hermitian_pair(c, it->second, "trig poly");
  }
  auto z = p.coeffs.find({0, 0});
  if (z != p.coeffs.end()) {
    if (std::abs(z->second.imag()) > 1e-12 * (1.0 + std::abs(z->second)) ||
        z->second.real() < 0.0)
      throw ConfigError("trig poly: zero mode must be real and nonnegative");
  }
}

inline void validate(const QuasiPeriodic& q) {
  if (q.rows.empty()) throw ConfigError("quasi-periodic: empty matrix");
  std::size_t d = q.rows.size();
  double anorm = 0.0;
  for (const auto& r : q.rows) anorm = std::max({anorm, std::abs(r[0]), std::abs(r[1])});
  for (const auto& [k, c] : q.coeffs) {
    if (k.size() != d)
      throw ConfigError("quasi-periodic: mode arity does not match matrix");
    std::vector<int> mk(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) mk[i] = -k[i];
    auto it = q.coeffs.find(mk);
    if (it == q.coeffs.end())
      throw ConfigError("quasi-periodic: missing conjugate mode");
    detail::validate_hermitian_pair(c, it->second, "quasi-periodic");
    double f1 = 0.0, f2 = 0.0, knorm = 0.0;
    bool zero = true;
    for (std::size_t i = 0; i < d; ++i) {
      if (k[i] != 0) zero = false;
      f1 += k[i] * q.rows[i][0];
      f2 += k[i] * q.rows[i][1];
      knorm = std::max(knorm, std::abs(static_cast<double>(k[i])));
    }
    if (!zero && std::hypot(f1, f2) <= 1e-12 * knorm * anorm)
      throw ConfigError("quasi-periodic: degenerate frequency k . A = 0");
  }
}

inline void validate(const PeriodicSampled& p) {
  if (p.m < 1) throw ConfigError("periodic sampled: need m >= 1");
  if (p.samples.size() != static_cast<std::size_t>(p.m) * p.m)
    throw ConfigError("periodic sampled: sample count != m^2");
  for (double s : p.samples)
    if (!std::isfinite(s)) throw ConfigError("periodic sampled: non-finite sample");
}

inline void validate(const Alloy& a) {
  if (!(a.bump.amplitude > 0.0) || !(a.bump.scale > 0.0))
    throw ConfigError("alloy: bump amplitude and scale must be positive");
  if (!(a.bump.decay_c > 0.0) || !(a.bump.decay_eps > 0.0))
    throw ConfigError("alloy: declared envelope decay must be positive");
  if (a.law.kind == AlloyLaw::Kind::uniform) {
    if (a.law.mean < 0.0) throw ConfigError("alloy: law mean must be >= 0");
    if (!(a.law.halfwidth > 0.0))
      throw ConfigError("alloy: law halfwidth must be positive");
  }
}

inline void validate(const Convex& c) {
  if (c.parts.empty()) throw ConfigError("convex: empty combination");
  if (c.weights.size() != c.parts.size())
    throw ConfigError("convex: weights and parts differ in length");
  double s = 0.0;
  for (double w : c.weights) {
    if (!(w > 0.0)) throw ConfigError("convex: weights must be positive");
    s += w;
  }
  if (std::abs(s - 1.0) > 1e-12)
    throw ConfigError("convex: weights must sum to one");
  for (const auto& p : c.parts) validate(p);
}

inline void validate(const CouplingSpec& spec) {
  std::visit([](const auto& s) { validate(s); }, spec);
}

// ---------------------------------------------------------------------------
// mean values

inline double mean_value(const CouplingSpec& spec);

inline double mean_value(const TrigPoly& p) {
  auto it = p.coeffs.find({0, 0});
  return it == p.coeffs.end() ? 0.0 : it->second.real();
}

inline double mean_value(const QuasiPeriodic& q) {
  for (const auto& [k, c] : q.coeffs) {
    bool zero = true;
    for (int ki : k) zero = zero && ki == 0;
    if (zero) return c.real();
  }
  return 0.0;
}

inline double mean_value(const PeriodicSampled& p) {
  double s = 0.0;
  for (double v : p.samples) s += v;
  return s / p.samples.size();
}

/// Law mean times the plane integral of phi (per-unit-cell lattice mean).
inline double mean_value(const Alloy& a) {
  double mu = a.law.kind == AlloyLaw::Kind::rademacher ? 0.0 : a.law.mean;
  return mu * a.bump.integral();
}

inline double mean_value(const Convex& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.parts.size(); ++i)
    s += c.weights[i] * mean_value(c.parts[i]);
  return s;
}

inline double mean_value(const CouplingSpec& spec) {
  return std::visit([](const auto& s) { return mean_value(s); }, spec);
}

// ---------------------------------------------------------------------------
// evaluation

namespace detail {

/**
 * Oscillation guard. A term exp(i nu . x) is admitted when each component
 * satisfies |nu_c| < pi N/L strictly, or hits the Nyquist wavenumber
 * exactly with a real coefficient: such a phase-aligned cosine folds onto
 * the self-conjugate Nyquist slot and is exactly representable, anything
 * else would alias.
 */
inline void guard_frequency(const Grid2D& g, double fx, double fy, cplx c,
                            const char* what) {
  double nyq = g.nyquist();
  for (double f : {fx, fy}) {
    double a = std::abs(f);
    if (a < nyq * (1.0 - 1e-12)) continue;
    if (a > nyq * (1.0 + 1e-12))
      throw NyquistError(std::string(what) +
                         ": oscillation exceeds the grid Nyquist limit");
    if (std::abs(c.imag()) > 1e-12 * std::abs(c))
      throw NyquistError(std::string(what) +
                         ": complex-phased mode at the Nyquist limit");
  }
}

/// Exact spectral placement of integer-frequency modes: possible when all
/// scaled frequencies land on the grid's mode lattice. Nyquist-magnitude
/// frequencies fold onto the self-conjugate slot (modular wrap).
inline bool try_place_spectrally(const Grid2D& g,
                                 const std::map<std::array<int, 2>, cplx>& modes,
                                 int n, ComplexField& out) {
  double q = g.length() / (2.0 * pi);
  SpectralField c(g);
  int N = g.points();
  for (const auto& [k, v] : modes) {
    double sx = n * static_cast<double>(k[0]) * q;
    double sy = n * static_cast<double>(k[1]) * q;
    double rx = std::round(sx), ry = std::round(sy);
    if (std::abs(sx - rx) > 1e-9 || std::abs(sy - ry) > 1e-9) return false;
    if (std::abs(rx) > N / 2 || std::abs(ry) > N / 2) return false;
    long mx = ((static_cast<long>(rx) % N) + N) % N;
    long my = ((static_cast<long>(ry) % N) + N) % N;
    c.at_slot(static_cast<int>(mx), static_cast<int>(my)) += v;
  }
  out = inverse_transform(c);
  return true;
}

/// Pointwise sum of the (few) modes; exact sampling for any grid.
inline ComplexField eval_modes_pointwise(
    const Grid2D& g, const std::vector<std::pair<std::array<double, 2>, cplx>>& modes,
    int n) {
  ComplexField f(g);
  int N = g.points();
  for (const auto& [freq, c] : modes) {
    double ax = n * freq[0], ay = n * freq[1];
    for (int j = 0; j < N; ++j) {
      double py = ay * g.coord(j);
      for (int i = 0; i < N; ++i) {
        double ph = ax * g.coord(i) + py;
        f.at(i, j) += c * cplx(std::cos(ph), std::sin(ph));
      }
    }
  }
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = f[k].real();
  return f;
}

/// Trig interpolation modes of a PeriodicSampled, Nyquist symmetrized:
/// integer modes k in [-m/2, m/2]^2 with boundary weights 1/2.
inline std::map<std::array<int, 2>, cplx> interpolation_modes(
    const PeriodicSampled& p) {
  int m = p.m;
  int klo = -(m / 2), khi = (m - 1) / 2;  // raw DFT mode range
  std::map<std::array<int, 2>, cplx> raw;
  for (int ky = klo; ky <= khi; ++ky)
    for (int kx = klo; kx <= khi; ++kx) {
      cplx s = 0.0;
      for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
          double ph = -2.0 * pi * (static_cast<double>(kx) * i +
                                   static_cast<double>(ky) * j) / m;
          s += p.samples[static_cast<std::size_t>(j) * m + i] *
               cplx(std::cos(ph), std::sin(ph));
        }
      raw[{kx, ky}] = s / static_cast<double>(m * m);
    }
  // drop sampling-roundoff dust: modes this far below the peak cannot
  // contribute above float noise, but their arbitrary phase would still
  // trip the band-limit guard when n pushes them onto the grid Nyquist
  double peak = 0.0;
  for (const auto& [k, c] : raw) peak = std::max(peak, std::abs(c));
  for (auto it = raw.begin(); it != raw.end();)
    it = std::abs(it->second) <= 1e-14 * peak ? raw.erase(it) : std::next(it);
  if (m % 2 != 0) return raw;
  // split each -m/2 component into +-m/2 halves to keep interpolation real
  std::map<std::array<int, 2>, cplx> out;
  for (const auto& [k, c] : raw) {
    std::vector<std::array<int, 2>> targets = {k};
    for (int axis = 0; axis < 2; ++axis) {
      std::vector<std::array<int, 2>> next;
      for (auto t : targets) {
        if (t[axis] == klo) {
          auto t2 = t;
          t2[axis] = m / 2;
          next.push_back(t);
          next.push_back(t2);
        } else {
          next.push_back(t);
        }
      }
      targets = std::move(next);
    }
    cplx share = c / static_cast<double>(targets.size());
    for (const auto& t : targets) out[t] += share;
  }
  return out;
}

}  // namespace detail

inline ComplexField evaluate(const CouplingSpec& spec, int n, const Grid2D& g);

namespace detail {

inline ComplexField eval_integer_modes(const Grid2D& g,
                                       const std::map<std::array<int, 2>, cplx>& modes,
                                       int n, const char* what) {
  for (const auto& [k, c] : modes)
    guard_frequency(g, n * static_cast<double>(k[0]),
                    n * static_cast<double>(k[1]), c, what);
  ComplexField out(g);
  if (try_place_spectrally(g, modes, n, out)) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i].real();
    return out;
  }
  std::vector<std::pair<std::array<double, 2>, cplx>> flat;
  flat.reserve(modes.size());
  for (const auto& [k, c] : modes)
    flat.push_back({{static_cast<double>(k[0]), static_cast<double>(k[1])}, c});
  return eval_modes_pointwise(g, flat, n);
}

}  // namespace detail

inline ComplexField evaluate(const TrigPoly& p, int n, const Grid2D& g) {
  return detail::eval_integer_modes(g, p.coeffs, n, "trig poly");
}

inline ComplexField evaluate(const QuasiPeriodic& q, int n, const Grid2D& g) {
  std::vector<std::pair<std::array<double, 2>, cplx>> flat;
  for (const auto& [k, c] : q.coeffs) {
    double f1 = 0.0, f2 = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      f1 += k[i] * q.rows[i][0];
      f2 += k[i] * q.rows[i][1];
    }
    detail::guard_frequency(g, n * f1, n * f2, c, "quasi-periodic");
    flat.push_back({{f1, f2}, c});
  }
  return detail::eval_modes_pointwise(g, flat, n);
}

inline ComplexField evaluate(const PeriodicSampled& p, int n, const Grid2D& g) {
  return detail::eval_integer_modes(g, detail::interpolation_modes(p), n,
                                    "periodic sampled");
}

inline ComplexField evaluate(const Alloy& a, int n, const Grid2D& g) {
  ComplexField f(g);
  int N = g.points();
  double cut = a.bump.cutoff();
  bool rad = a.law.kind == AlloyLaw::Kind::rademacher;
  for (int j = 0; j < N; ++j) {
    double y2 = n * g.coord(j);
    long lo2 = static_cast<long>(std::ceil(y2 - cut));
    long hi2 = static_cast<long>(std::floor(y2 + cut));
    for (int i = 0; i < N; ++i) {
      double y1 = n * g.coord(i);
      long lo1 = static_cast<long>(std::ceil(y1 - cut));
      long hi1 = static_cast<long>(std::floor(y1 + cut));
      double s = 0.0;
      for (long k2 = lo2; k2 <= hi2; ++k2)
        for (long k1 = lo1; k1 <= hi1; ++k1) {
          double w = a.bump.value(std::hypot(y1 - k1, y2 - k2));
          if (w == 0.0) continue;
          std::uint64_t u = rng::draw(a.seed, rng::word(k1), rng::word(k2));
          double x = rad ? rng::rademacher(u)
                         : a.law.mean + a.law.halfwidth * (2.0 * rng::uniform01(u) - 1.0);
          s += x * w;
        }
      f.at(i, j) = s;
    }
  }
  return f;
}

inline ComplexField evaluate(const Convex& c, int n, const Grid2D& g) {
  ComplexField out(g);
  for (std::size_t i = 0; i < c.parts.size(); ++i) {
    ComplexField part = evaluate(c.parts[i], n, g);
    part *= c.weights[i];
    out += part;
  }
  return out;
}

/// Real field of samples g(n x) on the grid. Deterministic, including the
/// alloy family (counter-based site draws). Requires n >= 1 and a
/// validated spec; oscillation guards apply per family.
inline ComplexField evaluate(const CouplingSpec& spec, int n, const Grid2D& g) {
  if (n < 1) throw ConfigError("coupling scale n must be a positive integer");
  validate(spec);
  return std::visit([&](const auto& s) { return evaluate(s, n, g); }, spec);
}

// ---------------------------------------------------------------------------
// combination and sampling helpers

/// Convex combination of validated specs; weights must be positive and
/// sum to one. mean_value distributes exactly by construction.
inline CouplingSpec convex_combine(const std::vector<double>& weights,
                                   const std::vector<CouplingSpec>& parts) {
  Convex c{weights, parts};
  validate(c);
  return c;
}

/// Site draws X_k for k in the inclusive box [lo, hi]^2, row-major in k2.
/// Pure function of (alloy seed, k); used for law diagnostics.
inline std::vector<double> sample_alloy(const Alloy& a, std::array<long, 2> lo,
                                        std::array<long, 2> hi) {
  if (lo[0] > hi[0] || lo[1] > hi[1])
    throw ConfigError("sample_alloy: empty box");
  bool rad = a.law.kind == AlloyLaw::Kind::rademacher;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(hi[0] - lo[0] + 1) *
              static_cast<std::size_t>(hi[1] - lo[1] + 1));
  for (long k2 = lo[1]; k2 <= hi[1]; ++k2)
    for (long k1 = lo[0]; k1 <= hi[0]; ++k1) {
      std::uint64_t u = rng::draw(a.seed, rng::word(k1), rng::word(k2));
      out.push_back(rad ? rng::rademacher(u)
                        : a.law.mean +
                              a.law.halfwidth * (2.0 * rng::uniform01(u) - 1.0));
    }
  return out;
}

}  // namespace nlshom
