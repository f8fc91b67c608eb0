#pragma once

#include "nlshom/solver.hpp"

namespace nlshom {

/**
 * Mixed space-time norms L^q_t L^r_x on stored trajectories: spatial
 * Riemann L^r per stored instant, then a temporal composite trapezoid in
 * the q-th power. Exponent pairs follow the 2D admissibility line
 * 1/q + 1/r = 1/2 with the forbidden endpoint (2, infinity) excluded.
 */
struct AdmissiblePair {
  double q, r;
  AdmissiblePair(double q_, double r_) : q(q_), r(r_) {
    if (!(q >= 2.0) || !(r >= 2.0))
      throw ConfigError("admissible pair: exponents must be >= 2");
    double lhs = (std::isinf(q) ? 0.0 : 1.0 / q) +
                 (std::isinf(r) ? 0.0 : 1.0 / r);
    if (std::abs(lhs - 0.5) > 1e-12)
      throw ConfigError("admissible pair: 1/q + 1/r must equal 1/2");
    if (q == 2.0)
      throw ConfigError("admissible pair: the endpoint (2, infinity) is excluded");
  }
};

/// The fixed evaluation set for the Strichartz composite norm.
inline const std::vector<AdmissiblePair>& strichartz_pairs() {
  static const std::vector<AdmissiblePair> pairs = [] {
    double inf = std::numeric_limits<double>::infinity();
    std::vector<AdmissiblePair> p;
    p.emplace_back(inf, 2.0);
    p.emplace_back(8.0, 8.0 / 3.0);
    p.emplace_back(6.0, 3.0);
    p.emplace_back(4.0, 4.0);
    p.emplace_back(3.0, 6.0);
    p.emplace_back(8.0 / 3.0, 8.0);
    return p;
  }();
  return pairs;
}

namespace detail {

inline void require_uniform_times(const std::vector<double>& t,
                                  const char* what) {
  if (t.size() < 2)
    throw ConfigError(std::string(what) +
                      ": need at least two stored instants");
  double tau = t[1] - t[0];
  if (!(tau > 0.0))
    throw ConfigError(std::string(what) + ": times must increase");
  for (std::size_t m = 1; m < t.size(); ++m)
    if (std::abs(t[m] - t[m - 1] - tau) > 1e-9 * std::max(1.0, tau))
      throw ConfigError(std::string(what) + ": nonuniform time spacing");
}

/// Temporal composite trapezoid of z^q on uniformly spaced samples;
/// q = infinity gives max z.
inline double temporal_norm(const std::vector<double>& z, double tau,
                            double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : z) m = std::max(m, v);
    return m;
  }
  double s = 0.0;
  for (std::size_t m = 0; m < z.size(); ++m) {
    double w = (m == 0 || m + 1 == z.size()) ? 0.5 : 1.0;
    s += w * std::pow(z[m], q);
  }
  return std::pow(tau * s, 1.0 / q);
}

}  // namespace detail

/// || u ||_{L^q_t L^r_x} over the stored span of the trajectory.
inline double mixed_norm(const Trajectory& traj, const AdmissiblePair& pair) {
  detail::require_uniform_times(traj.times, "mixed_norm");
  std::vector<double> z(traj.states.size());
  for (std::size_t m = 0; m < traj.states.size(); ++m)
    z[m] = traj.states[m].lp_norm(pair.r);
  return detail::temporal_norm(z, traj.times[1] - traj.times[0], pair.q);
}

/// Max of the mixed norm over the fixed admissible pair set.
inline double strichartz_norm(const Trajectory& traj) {
  double m = 0.0;
  for (const auto& p : strichartz_pairs()) m = std::max(m, mixed_norm(traj, p));
  return m;
}

/// || a - b ||_{L^4_{t,x}} for trajectories on one grid and time lattice.
inline double spacetime_l4_diff(const Trajectory& a, const Trajectory& b) {
  detail::require_uniform_times(a.times, "spacetime_l4_diff");
  if (a.times.size() != b.times.size())
    throw ConfigError("spacetime_l4_diff: different numbers of instants");
  for (std::size_t m = 0; m < a.times.size(); ++m)
    if (std::abs(a.times[m] - b.times[m]) > 1e-9)
      throw ConfigError("spacetime_l4_diff: time lattices differ");
  require_same_grid(a.states[0].grid(), b.states[0].grid(),
                    "spacetime_l4_diff");
  std::vector<double> z(a.states.size());
  for (std::size_t m = 0; m < a.states.size(); ++m) {
    double s4 = 0.0;
    for (std::size_t k = 0; k < a.states[m].size(); ++k)
      s4 += std::pow(std::norm(a.states[m][k] - b.states[m][k]), 2.0);
    z[m] = std::pow(a.states[0].grid().cell_area() * s4, 0.25);
  }
  return detail::temporal_norm(z, a.times[1] - a.times[0], 4.0);
}

struct DuhamelError {
  double value;        // L^4_{t,x} of the accumulated defect trajectory
  double coarse_value; // same on every other stored instant (spacing check)
  double rel_change;   // |value - coarse_value| / value
};

/**
 * Accumulated Duhamel defect of replacing g(n x) by its mean along a
 * homogenized trajectory. With dev = g(n .) - gbar and
 * f_m = dev |u_m|^2 u_m on the stored instants (spacing tau),
 *
 *   w_0 = 0,  w_{m+1} = e^{i tau Lap} ( w_m + (tau/2) f_m ) + (tau/2) f_{m+1},
 *
 * the panelwise trapezoid of the Duhamel integral. Returns the
 * L^4_{t,x} norm of (w_m) plus a resolution diagnostic: the same value
 * rebuilt from every other instant. The input must be a gbar-run:
 * its provenance has to carry a constant coupling equal to mean_value
 * (spec); anything else is a provenance error. The defect is exactly
 * linear in dev: scaling the deviation scales the value.
 */
inline DuhamelError duhamel_error(const CouplingSpec& spec, int n,
                                  const Trajectory& u_traj) {
  detail::require_uniform_times(u_traj.times, "duhamel_error");
  double gbar = mean_value(spec);
  if (!u_traj.provenance.constant_coupling.has_value())
    throw ConfigError("duhamel_error: trajectory was not a constant-coupling run");
  if (std::abs(*u_traj.provenance.constant_coupling - gbar) >
      1e-12 * (1.0 + std::abs(gbar)))
    throw ConfigError("duhamel_error: trajectory coupling differs from the "
                      "spec mean");

  const Grid2D& g = u_traj.states[0].grid();
  ComplexField dev = evaluate(spec, n, g);
  for (std::size_t k = 0; k < dev.size(); ++k) dev[k] -= gbar;

  auto cubic = [&](const ComplexField& u) {
    ComplexField f(g);
    for (std::size_t k = 0; k < f.size(); ++k)
      f[k] = dev[k].real() * std::norm(u[k]) * u[k];
    return f;
  };

  auto defect_samples = [&](std::size_t stride) {
    double tau = (u_traj.times[1] - u_traj.times[0]) * stride;
    SpectralDiagonal prop = free_propagator_diagonal(g, tau);
    std::vector<double> z;
    ComplexField w(g);
    z.push_back(0.0);
    ComplexField f_prev = cubic(u_traj.states[0]);
    for (std::size_t m = stride; m < u_traj.states.size(); m += stride) {
      ComplexField f_next = cubic(u_traj.states[m]);
      for (std::size_t k = 0; k < w.size(); ++k)
        w[k] += 0.5 * tau * f_prev[k];
      w = apply_multiplier(w, prop);
      for (std::size_t k = 0; k < w.size(); ++k)
        w[k] += 0.5 * tau * f_next[k];
      z.push_back(w.lp_norm(4.0));
      f_prev = std::move(f_next);
    }
    return std::pair<std::vector<double>, double>(std::move(z), tau);
  };

  auto [z_fine, tau_fine] = defect_samples(1);
  DuhamelError out;
  out.value = detail::temporal_norm(z_fine, tau_fine, 4.0);
  if (u_traj.states.size() >= 5) {
    auto [z_coarse, tau_coarse] = defect_samples(2);
    out.coarse_value = detail::temporal_norm(z_coarse, tau_coarse, 4.0);
    out.rel_change = out.value > 0.0
                         ? std::abs(out.value - out.coarse_value) / out.value
                         : 0.0;
  } else {
    out.coarse_value = out.value;
    out.rel_change = 0.0;
  }
  return out;
}

}  // namespace nlshom
