#pragma once

#include <optional>

#include "nlshom/coupling.hpp"
#include "nlshom/spectral.hpp"

namespace nlshom {

/**
 * Pseudospectral Strang splitting for i u_t + Lap u = g(x) |u|^2 u.
 *
 * One step of size dt is
 *
 *   u <- exp(i (dt/2) Lap) o N_dt o exp(i (dt/2) Lap) u,
 *
 * where N_dt is the exact pointwise flow of i w_t = g |w|^2 w, namely
 * w <- w exp(-i g |w|^2 dt) (|w| is conserved nodewise, so the substep is
 * exact, not an approximation). No dealiasing by default; resolution loss
 * is watched through the spectral tail instead of being masked.
 */

struct SimConfig {
  Grid2D grid;
  double dt;
  double T;
  int store_every;
  ComplexField g_field;
  bool dealias = false;

  SimConfig(const Grid2D& grid_, double dt_, double T_, int store_every_,
            ComplexField g_field_, bool dealias_ = false)
      : grid(grid_), dt(dt_), T(T_), store_every(store_every_),
        g_field(std::move(g_field_)), dealias(dealias_) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(T >= dt)) throw ConfigError("T must be at least dt");
    double ratio = T / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio))
      throw ConfigError("T/dt must be an integer (within 1e-9)");
    if (store_every < 1) throw ConfigError("store_every must be >= 1");
    if (steps() % store_every != 0)
      throw ConfigError("step count must be divisible by store_every");
    require_same_grid(grid, g_field.grid(), "SimConfig");
    if (g_field.max_abs_imag() > 1e-12 * std::max(1.0, g_field.max_abs()))
      throw ConfigError("coupling field must be real");
  }

  long steps() const { return std::lround(T / dt); }

  /// Constant coupling value if g_field is constant, for provenance checks.
  std::optional<double> constant_coupling() const {
    double lo = g_field[0].real(), hi = lo;
    for (std::size_t k = 0; k < g_field.size(); ++k) {
      lo = std::min(lo, g_field[k].real());
      hi = std::max(hi, g_field[k].real());
    }
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi)))
      return 0.5 * (lo + hi);
    return std::nullopt;
  }
};

/// Stored states of a run: times[m] carries states[m]; spacing is uniform
/// (dt * store_every). Provenance records what produced the run.
struct Trajectory {
  struct Provenance {
    double dt = 0.0;
    int store_every = 1;
    std::optional<double> constant_coupling;
  };
  std::vector<double> times;
  std::vector<ComplexField> states;
  Provenance provenance;
  double mass_drift = 0.0;  // max relative |mass - mass0| over stored states
};

/// Single Strang step; exact for plane-wave data with constant coupling.
inline ComplexField strang_step(const ComplexField& u, double dt,
                                const ComplexField& g_field) {
  require_same_grid(u.grid(), g_field.grid(), "strang_step");
  SpectralDiagonal half = free_propagator_diagonal(u.grid(), 0.5 * dt);
  ComplexField w = apply_multiplier(u, half);
  for (std::size_t k = 0; k < w.size(); ++k) {
    double phase = -g_field[k].real() * std::norm(w[k]) * dt;
    w[k] *= cplx(std::cos(phase), std::sin(phase));
  }
  return apply_multiplier(w, half);
}

namespace detail {

/// 2/3-rule projector for optional dealiasing.
inline SpectralDiagonal dealias_diagonal(const Grid2D& g) {
  double cut = 2.0 / 3.0 * g.nyquist();
  return SpectralDiagonal::from_symbol(g, [cut](double wx, double wy) {
    return (std::abs(wx) <= cut && std::abs(wy) <= cut) ? 1.0 : 0.0;
  });
}

}  // namespace detail

/**
 * Evolve u0 under the config, storing every store_every-th state
 * (endpoints included). Numerical breakdown (non-finite values) raises
 * SolverFailure naming the step; the relative mass drift across stored
 * states is recorded on the trajectory.
 */
inline Trajectory evolve(const ComplexField& u0, const SimConfig& cfg) {
  require_same_grid(u0.grid(), cfg.grid, "evolve");
  SpectralDiagonal half = free_propagator_diagonal(cfg.grid, 0.5 * cfg.dt);
  SpectralDiagonal dealias = cfg.dealias ? detail::dealias_diagonal(cfg.grid)
                                         : SpectralDiagonal(cfg.grid);

  Trajectory traj;
  traj.provenance = {cfg.dt, cfg.store_every, cfg.constant_coupling()};
  long steps = cfg.steps();
  traj.times.reserve(steps / cfg.store_every + 1);
  traj.states.reserve(steps / cfg.store_every + 1);
  traj.times.push_back(0.0);
  traj.states.push_back(u0);

  double mass0 = u0.mass();
  if (mass0 == 0.0) mass0 = 1.0;
  ComplexField u = u0;
  for (long s = 1; s <= steps; ++s) {
    ComplexField w = apply_multiplier(u, half);
    for (std::size_t k = 0; k < w.size(); ++k) {
      double phase = -cfg.g_field[k].real() * std::norm(w[k]) * cfg.dt;
      w[k] *= cplx(std::cos(phase), std::sin(phase));
    }
    if (cfg.dealias) w = apply_multiplier(w, dealias);
    u = apply_multiplier(w, half);
    if (!u.finite())
      throw SolverFailure(s, "non-finite state at step " + std::to_string(s));
    if (s % cfg.store_every == 0) {
      traj.times.push_back(s * cfg.dt);
      traj.states.push_back(u);
      traj.mass_drift = std::max(traj.mass_drift,
                                 std::abs(u.mass() - u0.mass()) / mass0);
    }
  }
  return traj;
}

/**
 * Discrete scaling symmetry defect. The run of v (coupling g, grid G,
 * times dt, T) and the run of u0'(x) = n^(1-alpha/2) v0(n x) on the
 * companion grid G' = (L/n, same point count) with coupling
 * n^alpha g(n x) and times dt/n^2, T/n^2 are conjugate: node values and
 * multiplier symbols coincide slot for slot, so the rescaled trajectories
 * agree to accumulated roundoff. Returns
 *
 *   max over stored m of || u_m - n^(1-alpha/2) v_m ||_L2(G') / ||u_0||_L2(G').
 */
inline double scaling_symmetry_check(const ComplexField& v0,
                                     const CouplingSpec& spec, int n,
                                     double alpha, double dt, double T,
                                     int store_every) {
  const Grid2D& G = v0.grid();
  if (n < 1) throw ConfigError("scaling_symmetry_check: n must be >= 1");

  SimConfig cfg_v(G, dt, T, store_every, evaluate(spec, 1, G));
  Trajectory v = evolve(v0, cfg_v);

  Grid2D Gp(G.points(), G.length() / n);
  double amp = std::pow(static_cast<double>(n), 1.0 - 0.5 * alpha);
  ComplexField u0(Gp);
  for (std::size_t k = 0; k < u0.size(); ++k) u0[k] = amp * v0[k];
  ComplexField gp = evaluate(spec, n, Gp);
  gp *= std::pow(static_cast<double>(n), alpha);
  double n2 = static_cast<double>(n) * n;
  SimConfig cfg_u(Gp, dt / n2, T / n2, store_every, std::move(gp));
  Trajectory u = evolve(u0, cfg_u);

  double u0n = u0.l2_norm();
  if (u0n == 0.0) throw ConfigError("scaling_symmetry_check: zero data");
  double worst = 0.0;
  for (std::size_t m = 0; m < u.states.size(); ++m) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < u0.size(); ++k)
      d2 += std::norm(u.states[m][k] - amp * v.states[m][k]);
    worst = std::max(worst, std::sqrt(Gp.cell_area() * d2) / u0n);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// blow-up probe

struct GrowthRow {
  double t;
  double sup;      // max |u|
  double kinetic;  // || grad u ||_L2
  double mass;
};

struct GrowthReport {
  enum class Stop { horizon, threshold, resolution };
  std::vector<GrowthRow> rows;  // one per step, including t = 0
  Stop stop = Stop::horizon;
  double stop_time = 0.0;
  long steps = 0;
};

inline const char* to_string(GrowthReport::Stop s) {
  switch (s) {
    case GrowthReport::Stop::horizon: return "horizon";
    case GrowthReport::Stop::threshold: return "threshold";
    default: return "resolution";
  }
}

/**
 * March a (possibly focusing) run and record per-step growth indicators,
 * halting at the time horizon, at sup |u| >= sup_threshold, or when more
 * than 1% of the spectral mass sits beyond half the Nyquist wavenumber
 * (the resolution limit: beyond it the grid no longer represents the
 * collapse). Works on a raw coupling field so sign-indefinite and
 * focusing couplings can be probed directly.
 */
inline GrowthReport blowup_probe_field(const ComplexField& u0,
                                       const ComplexField& g_field, double dt,
                                       double horizon, double sup_threshold) {
  require_same_grid(u0.grid(), g_field.grid(), "blowup_probe");
  if (!(dt > 0.0) || !(horizon > 0.0) || !(sup_threshold > 0.0))
    throw ConfigError("blowup_probe: dt, horizon, threshold must be positive");
  const Grid2D& g = u0.grid();
  SpectralDiagonal half = free_propagator_diagonal(g, 0.5 * dt);
  double half_nyq = 0.5 * g.nyquist();

  GrowthReport rep;
  auto record = [&](const ComplexField& u, double t) {
    SpectralField hat = forward_transform(u);
    double kin = 0.0, tail = 0.0, total = 0.0;
    int N = g.points();
    std::size_t k = 0;
    for (int my = 0; my < N; ++my) {
      double wy = g.wavenumber(my);
      for (int mx = 0; mx < N; ++mx, ++k) {
        double wx = g.wavenumber(mx);
        double e = std::norm(hat[k]);
        double w2 = wx * wx + wy * wy;
        kin += w2 * e;
        total += e;
        if (std::sqrt(w2) > half_nyq) tail += e;
      }
    }
    double L2 = g.length() * g.length();
    rep.rows.push_back({t, u.max_abs(), std::sqrt(L2 * kin), u.mass()});
    return total > 0.0 ? tail / total : 0.0;
  };

  ComplexField u = u0;
  double tail = record(u, 0.0);
  if (rep.rows.back().sup >= sup_threshold) {
    rep.stop = GrowthReport::Stop::threshold;
    return rep;
  }
  if (tail > 0.01) {
    rep.stop = GrowthReport::Stop::resolution;
    return rep;
  }

  long max_steps = std::lround(std::ceil(horizon / dt - 1e-12));
  for (long s = 1; s <= max_steps; ++s) {
    ComplexField w = apply_multiplier(u, half);
    for (std::size_t k = 0; k < w.size(); ++k) {
      double phase = -g_field[k].real() * std::norm(w[k]) * dt;
      w[k] *= cplx(std::cos(phase), std::sin(phase));
    }
    u = apply_multiplier(w, half);
    if (!u.finite())
      throw SolverFailure(s, "non-finite state at step " + std::to_string(s));
    double t = s * dt;
    tail = record(u, t);
    rep.steps = s;
    rep.stop_time = t;
    if (rep.rows.back().sup >= sup_threshold) {
      rep.stop = GrowthReport::Stop::threshold;
      return rep;
    }
    if (tail > 0.01) {
      rep.stop = GrowthReport::Stop::resolution;
      return rep;
    }
  }
  rep.stop = GrowthReport::Stop::horizon;
  return rep;
}

/// Probe with the rescaled coupling n^alpha g(n x) built from a spec.
inline GrowthReport blowup_probe(const CouplingSpec& spec, double alpha, int n,
                                 const ComplexField& u0, double dt,
                                 double horizon, double sup_threshold) {
  ComplexField gf = evaluate(spec, n, u0.grid());
  gf *= std::pow(static_cast<double>(n), alpha);
  return blowup_probe_field(u0, gf, dt, horizon, sup_threshold);
}

}  // namespace nlshom
