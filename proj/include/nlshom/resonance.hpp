#pragma once

#include <thread>

#include "nlshom/coupling.hpp"

namespace nlshom {

/**
 * Non-resonance diagnostics: size of (-Lap+1)^(-1)(g(n.) - gbar) and
 * friends, the quantities whose decay in n drives homogenization.
 */

struct ResonanceSup {
  double sup;       // max |h_n| over the ball |x| <= R
  double grad_sup;  // max |grad h_n| over the same ball
};

/// h_n = (-Lap+1)^(-1)(g(n x) - gbar); sup norms restricted to |x| <= R.
/// R defaults to L/4 at the call sites; requires 0 < R <= L/2.
inline ResonanceSup resonance_sup_norm(const CouplingSpec& spec, int n,
                                       double R, const Grid2D& g) {
  if (!(R > 0.0) || R > 0.5 * g.length())
    throw ConfigError("resonance ball radius must lie in (0, L/2]");
  ComplexField dev = evaluate(spec, n, g);
  double gbar = mean_value(spec);
  for (std::size_t k = 0; k < dev.size(); ++k) dev[k] -= gbar;
  ComplexField h = inv_helmholtz(dev);
  auto gh = gradient(h);

  double sup = 0.0, gsup = 0.0;
  int N = g.points();
  for (int j = 0; j < N; ++j) {
    double y = g.coord(j);
    for (int i = 0; i < N; ++i) {
      if (std::hypot(g.coord(i), y) > R) continue;
      sup = std::max(sup, std::abs(h.at(i, j)));
      gsup = std::max(gsup, std::hypot(gh[0].at(i, j).real(),
                                       gh[1].at(i, j).real()));
    }
  }
  return {sup, gsup};
}

/**
 * Uniform resolvent bound on the raw coupling (no mean subtraction):
 * returns max over n of (sup |h_n| + sup |grad h_n|) / sup |g(n.)| with
 * h_n = (-Lap+1)^(-1) g(n.), sups over the whole torus. Stays O(1) in n
 * for bounded couplings.
 */
inline double uniform_bound_check(const CouplingSpec& spec,
                                  const std::vector<int>& ns,
                                  const Grid2D& g) {
  if (ns.empty()) throw ConfigError("uniform_bound_check: empty scale list");
  double worst = 0.0;
  for (int n : ns) {
    ComplexField gn = evaluate(spec, n, g);
    double gsup_n = gn.max_abs();
    if (gsup_n == 0.0) throw ConfigError("uniform_bound_check: zero coupling");
    ComplexField h = inv_helmholtz(gn);
    auto gh = gradient(h);
    double s = 0.0, gs = 0.0;
    for (std::size_t k = 0; k < h.size(); ++k) {
      s = std::max(s, std::abs(h[k]));
      gs = std::max(gs, std::hypot(gh[0][k].real(), gh[1][k].real()));
    }
    worst = std::max(worst, (s + gs) / gsup_n);
  }
  return worst;
}

struct DecayFit {
  double slope;
  double intercept;
  double residual;  // max |log v - (intercept + slope log n)|
};

/**
 * Ordinary least squares on (log n, log value). Pairs with n == 1 are
 * dropped by default (homogenization asymptotics start at n >= 2; n = 1
 * only anchors the constant). Values must be positive; at least two
 * points must survive.
 */
inline DecayFit decay_fit(const std::vector<double>& ns,
                          const std::vector<double>& values,
                          bool ignore_n1 = true) {
  if (ns.size() != values.size())
    throw ConfigError("decay_fit: length mismatch");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ignore_n1 && ns[i] == 1.0) continue;
    if (!(ns[i] > 0.0))
      throw ConfigError("decay_fit: scales must be positive");
    if (!(values[i] > 0.0))
      throw ConfigError("decay_fit: value at index " + std::to_string(i) +
                        " is not positive, cannot take logs");
    xs.push_back(std::log(ns[i]));
    ys.push_back(std::log(values[i]));
  }
  if (xs.size() < 2)
    throw ConfigError("decay_fit: need at least two usable points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw ConfigError("decay_fit: all scales equal");
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residual = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    fit.residual = std::max(
        fit.residual, std::abs(ys[i] - (fit.intercept + fit.slope * xs[i])));
  return fit;
}

struct MomentEstimate {
  double estimate;  // mean of Z^4 over trials
  double stderr_;   // sample standard error of that mean
  int trials;
};

/**
 * Monte-Carlo fourth moment of the filtered resolvent point value
 *
 *   Z = [ (-Lap+1)^(-1) P_{<=N} g_alloy(n .) ](x0),
 *
 * over independent alloy realizations (trial t reseeds the sites with a
 * counter draw on (seed, t)). x0 must be a lattice corner m/n that lies
 * on the grid. Trials run on `threads` workers into per-trial slots and
 * are reduced in trial order, so the result is bit-identical for any
 * thread count. Requires trials >= 100.
 */
inline MomentEstimate alloy_moment_estimate(const Alloy& alloy, int n,
                                            std::array<double, 2> x0,
                                            int trials, double cutoff,
                                            const Grid2D& g, int threads = 1) {
  if (trials < 100)
    throw ConfigError("alloy_moment_estimate: need at least 100 trials");
  if (n < 1) throw ConfigError("alloy_moment_estimate: n must be positive");
  validate(alloy);

  int idx[2];
  for (int a = 0; a < 2; ++a) {
    double m = x0[a] * n;
    if (std::abs(m - std::round(m)) > 1e-9)
      throw ConfigError("alloy_moment_estimate: x0 is not a lattice corner m/n");
    double s = (x0[a] + 0.5 * g.length()) / g.spacing();
    if (std::abs(s - std::round(s)) > 1e-9)
      throw ConfigError("alloy_moment_estimate: x0 is not a grid node");
    idx[a] = static_cast<int>(std::lround(s));
  }
  std::size_t point = static_cast<std::size_t>(idx[1]) * g.points() + idx[0];

  SpectralDiagonal filt = SpectralDiagonal::from_symbol(
      g, [cutoff](double wx, double wy) {
        return lp_bump(std::hypot(wx, wy) / cutoff) /
               (wx * wx + wy * wy + 1.0);
      });

  std::vector<double> z4(trials);
  auto work = [&](int t0, int stride) {
    for (int t = t0; t < trials; t += stride) {
      Alloy trial = alloy;
      trial.seed = rng::draw(alloy.seed, 0x7261696cull, static_cast<std::uint64_t>(t));
      ComplexField gn = evaluate(trial, n, g);
      ComplexField w = apply_multiplier(gn, filt);
      double z = w[point].real();
      z4[t] = z * z * z * z;
    }
  };
  int k = std::max(1, threads);
  if (k == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(k);
    for (int t = 0; t < k; ++t) pool.emplace_back(work, t, k);
    for (auto& th : pool) th.join();
  }

  double mean = 0.0;
  for (double v : z4) mean += v;
  mean /= trials;
  double var = 0.0;
  for (double v : z4) var += (v - mean) * (v - mean);
  var /= (trials - 1);
  return {mean, std::sqrt(var / trials), trials};
}

/// Reference fourth-moment ceiling 4 n^-4 |int phi|^4 (int |K|^2)^2 for
/// unit-variance mean-zero site laws; K is the kernel of
/// (-Lap+1)^(-1) P_{<=cutoff}, and int |K|^2 = sum_xi sigma(xi)^2 / L^2
/// by the (unitary-convention) Parseval identity on the grid.
inline double alloy_fourth_moment_bound(const AlloyBump& bump, int n,
                                        double cutoff, const Grid2D& g) {
  double s = 0.0;
  int N = g.points();
  for (int my = 0; my < N; ++my) {
    double wy = g.wavenumber(my);
    for (int mx = 0; mx < N; ++mx) {
      double wx = g.wavenumber(mx);
      double v = lp_bump(std::hypot(wx, wy) / cutoff) /
                 (wx * wx + wy * wy + 1.0);
      s += v * v;
    }
  }
  double k2 = s / (g.length() * g.length());
  double phi = bump.integral();
  double n2 = static_cast<double>(n) * n;
  return 4.0 / (n2 * n2) * phi * phi * phi * phi * k2 * k2;
}

}  // namespace nlshom
