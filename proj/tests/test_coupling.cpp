#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cstring>

#include "nlshom/coupling.hpp"
#include "test_helpers.hpp"

using namespace nlshom;

namespace {

TrigPoly one_plus_cos_x1() {
  TrigPoly p;
  p.coeffs[{0, 0}] = 1.0;
  p.coeffs[{1, 0}] = 0.5;
  p.coeffs[{-1, 0}] = 0.5;
  return p;
}

}  // namespace

TEST_CASE("counter rng: purity, law statistics, avalanche", "[rng]") {
  CHECK(rng::draw(1, 2, 3) == rng::draw(1, 2, 3));
  CHECK(rng::draw(1, 2, 3) != rng::draw(1, 3, 2));
  CHECK(rng::draw(1, 2, 3) != rng::draw(2, 2, 3));

  const int nsamp = 1'000'000;
  double mean = 0.0, var = 0.0, rmean = 0.0;
  for (int i = 0; i < nsamp; ++i) {
    double u = rng::uniform01(rng::draw(42, i));
    mean += u;
    var += (u - 0.5) * (u - 0.5);
    rmean += rng::rademacher(rng::draw(43, i));
  }
  mean /= nsamp;
  var /= nsamp;
  rmean /= nsamp;
  CHECK(std::abs(mean - 0.5) < 3.0 * std::sqrt(1.0 / 12.0) / 1000.0);
  CHECK(var == Catch::Approx(1.0 / 12.0).epsilon(0.01));
  CHECK(std::abs(rmean) < 0.003);

  // neighboring lattice sites decorrelate
  double corr = 0.0;
  for (int i = 0; i < nsamp; ++i)
    corr += rng::rademacher(rng::draw(7, i, 0)) *
            rng::rademacher(rng::draw(7, i + 1, 0));
  CHECK(std::abs(corr / nsamp) < 0.004);

  // single-bit key changes flip about half of the output bits
  double flips = 0.0;
  for (int i = 0; i < 4096; ++i)
    flips += std::popcount(rng::draw(9, i) ^ rng::draw(9, i ^ 1));
  flips /= 4096;
  CHECK(flips > 24.0);
  CHECK(flips < 40.0);
}

TEST_CASE("coupling validation rejects malformed specs", "[coupling]") {
  TrigPoly broken;
  broken.coeffs[{1, 0}] = 0.5;  // no conjugate partner
  CHECK_THROWS_AS(validate(CouplingSpec(broken)), ConfigError);

  TrigPoly skew;
  skew.coeffs[{1, 0}] = cplx(0.5, 0.1);
  skew.coeffs[{-1, 0}] = cplx(0.5, 0.1);  // should be the conjugate
  CHECK_THROWS_AS(validate(CouplingSpec(skew)), ConfigError);

  TrigPoly negmean;
  negmean.coeffs[{0, 0}] = -1.0;
  CHECK_THROWS_AS(validate(CouplingSpec(negmean)), ConfigError);

  QuasiPeriodic degenerate;
  degenerate.rows = {{1.0, 0.0}, {2.0, 0.0}};  // rows rationally dependent
  degenerate.coeffs[{2, -1}] = 0.5;            // k . A = 0
  degenerate.coeffs[{-2, 1}] = 0.5;
  CHECK_THROWS_AS(validate(CouplingSpec(degenerate)), ConfigError);

  PeriodicSampled short_data;
  short_data.m = 4;
  short_data.samples.assign(15, 1.0);
  CHECK_THROWS_AS(validate(CouplingSpec(short_data)), ConfigError);

  Alloy bad_law;
  bad_law.law.kind = AlloyLaw::Kind::uniform;
  bad_law.law.mean = -0.5;
  CHECK_THROWS_AS(validate(CouplingSpec(bad_law)), ConfigError);

  Convex lopsided;
  lopsided.weights = {0.6, 0.6};
  lopsided.parts = {CouplingSpec(one_plus_cos_x1()),
                    CouplingSpec(one_plus_cos_x1())};
  CHECK_THROWS_AS(validate(CouplingSpec(lopsided)), ConfigError);
}

TEST_CASE("trig poly evaluation is exact and respects the Nyquist guard",
          "[coupling]") {
  Grid2D g(64, 16.0 * pi);
  CouplingSpec spec = one_plus_cos_x1();

  ComplexField f = evaluate(spec, 2, g);
  double worst = 0.0;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i)
      worst = std::max(worst,
                       std::abs(f.at(i, j) - (1.0 + std::cos(2.0 * g.coord(i)))));
  CHECK(worst < 1e-12);
  CHECK(f.max_abs_imag() == 0.0);
  CHECK(mean_value(spec) == 1.0);

  CHECK_THROWS_AS(evaluate(spec, 0, g), ConfigError);

  // Nyquist wavenumber here is 4: a scaled cosine may touch it exactly,
  // one step beyond aliases
  CHECK_NOTHROW(evaluate(spec, 4, g));
  CHECK_THROWS_AS(evaluate(spec, 5, g), NyquistError);

  // sin(x1) has imaginary coefficients: at the Nyquist limit its samples
  // would vanish identically, so the guard rejects it
  TrigPoly sine;
  sine.coeffs[{1, 0}] = cplx(0.0, -0.5);
  sine.coeffs[{-1, 0}] = cplx(0.0, 0.5);
  CHECK_NOTHROW(evaluate(CouplingSpec(sine), 3, g));
  CHECK_THROWS_AS(evaluate(CouplingSpec(sine), 4, g), NyquistError);

  // cosine at the Nyquist limit: exact checkerboard samples
  ComplexField nyq = evaluate(spec, 4, g);
  worst = 0.0;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i)
      worst = std::max(worst,
                       std::abs(nyq.at(i, j) - (1.0 + std::cos(4.0 * g.coord(i)))));
  CHECK(worst < 1e-12);
}

TEST_CASE("scaled samples rearrange when the phase lattice is preserved",
          "[coupling]") {
  // L/(2pi) = 8, N = 128: the n = 1 phase lattice has N/gcd(8,128) = 16
  // distinct phases; n = 3 (coprime to 16) permutes them, so the value
  // multisets match exactly.
  Grid2D g(128, 16.0 * pi);
  TrigPoly p = one_plus_cos_x1();
  p.coeffs[{0, 1}] = cplx(0.2, 0.1);
  p.coeffs[{0, -1}] = cplx(0.2, -0.1);
  CouplingSpec spec = p;

  ComplexField a = evaluate(spec, 1, g);
  ComplexField b = evaluate(spec, 3, g);
  std::vector<double> va(a.size()), vb(b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    va[k] = a[k].real();
    vb[k] = b[k].real();
  }
  std::sort(va.begin(), va.end());
  std::sort(vb.begin(), vb.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < va.size(); ++k)
    worst = std::max(worst, std::abs(va[k] - vb[k]));
  CHECK(worst < 1e-12);

  // sup norms bounded by the n = 1 sup for every admissible n
  double sup1 = a.max_abs();
  for (int n : {2, 3, 4})
    CHECK(evaluate(spec, n, g).max_abs() <= sup1 * (1.0 + 1e-12));
}

TEST_CASE("quasi-periodic evaluation matches the lifted formula",
          "[coupling]") {
  Grid2D g(64, 16.0 * pi);
  QuasiPeriodic q;
  q.rows = {{1.0, 0.0}, {std::sqrt(2.0), std::sqrt(3.0)}};
  q.coeffs[{1, 0}] = 0.5;
  q.coeffs[{-1, 0}] = 0.5;
  q.coeffs[{0, 1}] = cplx(0.25, 0.25);
  q.coeffs[{0, -1}] = cplx(0.25, -0.25);
  CouplingSpec spec = q;
  validate(spec);
  CHECK(mean_value(spec) == 0.0);

  ComplexField f = evaluate(spec, 2, g);
  double worst = 0.0;
  for (int j = 0; j < 64; ++j)
    for (int i = 0; i < 64; ++i) {
      double y1 = 2.0 * g.coord(i);
      double y2 = 2.0 * (std::sqrt(2.0) * g.coord(i) + std::sqrt(3.0) * g.coord(j));
      double expect = std::cos(y1) + 0.5 * std::cos(y2) - 0.5 * std::sin(y2);
      worst = std::max(worst, std::abs(f.at(i, j) - expect));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("sampled couplings interpolate their generators exactly",
          "[coupling]") {
  // interpolation modes reach |k| = m/2, so scaled frequencies reach
  // n*m/2 = 8 or 9 here; Nyquist is 16 on this grid
  Grid2D gfine(256, 16.0 * pi);

  auto gen = [](double y1, double y2) {
    return 1.0 + std::cos(y1) + 0.5 * std::sin(2.0 * y2);
  };
  for (int m : {8, 9}) {
    PeriodicSampled p;
    p.m = m;
    p.samples.resize(static_cast<std::size_t>(m) * m);
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        p.samples[static_cast<std::size_t>(j) * m + i] =
            gen(2.0 * pi * i / m, 2.0 * pi * j / m);
    CouplingSpec spec = p;
    CHECK(mean_value(spec) == Catch::Approx(1.0).margin(1e-12));

    ComplexField f = evaluate(spec, 2, gfine);
    double worst = 0.0;
    for (int j = 0; j < 256; ++j)
      for (int i = 0; i < 256; ++i)
        worst = std::max(
            worst,
            std::abs(f.at(i, j) - gen(2.0 * gfine.coord(i), 2.0 * gfine.coord(j))));
    CHECK(worst < 1e-11);
  }
  Grid2D g(64, 16.0 * pi);

  // even m with content at the sample Nyquist mode: symmetrized
  // interpolation stays real and hits the samples
  PeriodicSampled nyq;
  nyq.m = 4;
  nyq.samples.resize(16);
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i)
      nyq.samples[static_cast<std::size_t>(j) * 4 + i] =
          std::cos(2.0 * (2.0 * pi * i / 4));
  ComplexField f = evaluate(CouplingSpec(nyq), 1, g);
  CHECK(f.max_abs_imag() < 1e-13);
  double worst = 0.0;
  for (int i = 0; i < 64; ++i)  // symmetrization recovers cos(2 y1) exactly
    worst = std::max(worst, std::abs(f.at(i, 0) - std::cos(2.0 * (g.coord(i)))));
  CHECK(worst < 1e-12);
}

TEST_CASE("alloy evaluation: determinism, locality, law statistics",
          "[coupling]") {
  Grid2D g(64, 8.0);
  Alloy a;
  a.seed = 2026;

  ComplexField f1 = evaluate(CouplingSpec(a), 2, g);
  ComplexField f2 = evaluate(CouplingSpec(a), 2, g);
  CHECK(std::memcmp(f1.data(), f2.data(), f1.size() * sizeof(cplx)) == 0);
  CHECK(f1.max_abs_imag() == 0.0);

  Alloy b = a;
  b.seed = 2027;
  ComplexField f3 = evaluate(CouplingSpec(b), 2, g);
  CHECK(test::max_abs_diff(f1, f3) > 0.1);  // seed matters

  // manual reconstruction at a few nodes
  for (auto [i, j] : {std::pair{5, 9}, {31, 57}, {60, 2}}) {
    double y1 = 2.0 * g.coord(i), y2 = 2.0 * g.coord(j);
    double s = 0.0;
    for (long k2 = static_cast<long>(std::ceil(y2 - 0.5));
         k2 <= static_cast<long>(std::floor(y2 + 0.5)); ++k2)
      for (long k1 = static_cast<long>(std::ceil(y1 - 0.5));
           k1 <= static_cast<long>(std::floor(y1 + 0.5)); ++k1)
        s += rng::rademacher(rng::draw(a.seed, rng::word(k1), rng::word(k2))) *
             a.bump.value(std::hypot(y1 - k1, y2 - k2));
    CHECK(f1.at(i, j).real() == Catch::Approx(s).margin(1e-15));
  }

  // empirical site mean over 10^6 draws: within 3 sigma / 1000
  std::vector<double> draws = sample_alloy(a, {0, 0}, {999, 999});
  double mean = 0.0;
  for (double v : draws) mean += v;
  mean /= draws.size();
  CHECK(std::abs(mean) < 0.003);

  Alloy u = a;
  u.law = {AlloyLaw::Kind::uniform, 0.3, 0.2};
  std::vector<double> ud = sample_alloy(u, {0, 0}, {999, 999});
  double umean = 0.0, ulo = 1e300, uhi = -1e300;
  for (double v : ud) {
    umean += v;
    ulo = std::min(ulo, v);
    uhi = std::max(uhi, v);
  }
  umean /= ud.size();
  CHECK(std::abs(umean - 0.3) < 0.003 * 0.2);
  CHECK(ulo >= 0.1);
  CHECK(uhi <= 0.5);

  CHECK(mean_value(CouplingSpec(a)) == 0.0);
  CHECK(mean_value(CouplingSpec(u)) ==
        Catch::Approx(0.3 * a.bump.integral()).epsilon(1e-12));
}

TEST_CASE("bump envelope integrals agree with dense quadrature", "[coupling]") {
  AlloyBump b;  // compact, radius 1/2, amplitude 1
  double h = 1.0 / 4000.0, riemann = 0.0;
  for (int j = -2000; j <= 2000; ++j)
    for (int i = -2000; i <= 2000; ++i)
      riemann += b.value(std::hypot(i * h, j * h)) * h * h;
  CHECK(b.integral() == Catch::Approx(riemann).epsilon(1e-6));

  AlloyBump gs;
  gs.kind = AlloyBump::Kind::gaussian;
  gs.amplitude = 2.0;
  gs.scale = 0.7;
  CHECK(gs.integral() == Catch::Approx(2.0 * 2.0 * pi * 0.49).epsilon(1e-12));
  CHECK(gs.cutoff() > 3.0 * gs.scale);
  // truncation keeps the neglected tail integral below 1e-10 of the peak:
  // int_R^inf 2 pi r phi(r) dr / amplitude = 2 pi s^2 exp(-R^2/(2 s^2))
  double tail = 2.0 * pi * gs.scale * gs.scale * gs.value(gs.cutoff()) /
                gs.amplitude;
  CHECK(tail <= 1.0001e-10);
}

TEST_CASE("convex combinations: linearity of fields and means", "[coupling]") {
  Grid2D g(64, 8.0);
  CouplingSpec cosine = one_plus_cos_x1();
  Alloy a;
  a.seed = 5;
  CouplingSpec mix = convex_combine({0.25, 0.75}, {cosine, CouplingSpec(a)});

  CHECK(mean_value(mix) == Catch::Approx(0.25).margin(1e-15));

  ComplexField f = evaluate(mix, 2, g);
  ComplexField fc = evaluate(cosine, 2, g);
  ComplexField fa = evaluate(CouplingSpec(a), 2, g);
  double worst = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    worst = std::max(worst,
                     std::abs(f[k] - (0.25 * fc[k] + 0.75 * fa[k])));
  CHECK(worst < 1e-12);

  // nested combinations distribute too
  CouplingSpec nested = convex_combine({0.5, 0.5}, {mix, cosine});
  CHECK(mean_value(nested) == Catch::Approx(0.5 * 0.25 + 0.5).margin(1e-12));
}
