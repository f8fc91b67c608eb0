#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <sstream>

#include "nlshom/io.hpp"
#include "test_helpers.hpp"

using namespace nlshom;

TEST_CASE("field files round-trip bit for bit", "[io]") {
  Grid2D g(32, 8.0 * pi);
  ComplexField f = make_gaussian(g, 1.25, 0.8);
  f[7] = cplx(-0.0, 1e-308);  // signed zero and a subnormal survive

  std::stringstream buf(std::ios::in | std::ios::out | std::ios::binary);
  write_field(buf, f, "probe", 0.625);
  NamedField back = read_field(buf, "buffer");

  CHECK(back.name == "probe");
  CHECK(back.time == 0.625);
  REQUIRE(back.field.grid() == g);
  CHECK(std::memcmp(back.field.data(), f.data(), f.size() * sizeof(cplx)) == 0);
}

TEST_CASE("malformed field files are rejected", "[io]") {
  Grid2D g(8, 2.0 * pi);
  ComplexField f(g);

  SECTION("truncated payload") {
    std::stringstream buf;
    write_field(buf, f, "x", 0.0);
    std::string s = buf.str();
    std::stringstream cut(s.substr(0, s.size() - 8));
    CHECK_THROWS_AS(read_field(cut, "cut"), Error);
  }
  SECTION("trailing bytes") {
    std::stringstream buf;
    write_field(buf, f, "x", 0.0);
    buf << "extra";
    CHECK_THROWS_AS(read_field(buf, "pad"), Error);
  }
  SECTION("header that is not JSON") {
    std::stringstream buf("not json\n");
    CHECK_THROWS_AS(read_field(buf, "hdr"), Error);
  }
  SECTION("header with an unknown key") {
    std::stringstream buf(
        "{\"grid\":{\"N_g\":8,\"L\":6.0},\"name\":\"x\",\"time\":0.0,"
        "\"color\":1}\n");
    CHECK_THROWS_AS(read_field(buf, "hdr"), ConfigError);
  }
}

namespace {

// structural equality via evaluation where the family allows it
void check_same_field(const CouplingSpec& a, const CouplingSpec& b, int n,
                      const Grid2D& g) {
  ComplexField fa = evaluate(a, n, g);
  ComplexField fb = evaluate(b, n, g);
  fa -= fb;
  CHECK(fa.max_abs() == 0.0);
}

}  // namespace

TEST_CASE("coupling specs round-trip through tagged JSON", "[io]") {
  Grid2D g(64, 16.0 * pi);

  SECTION("trig polynomial") {
    TrigPoly p;
    p.coeffs[{0, 0}] = 0.75;
    p.coeffs[{1, 2}] = cplx(0.25, -0.125);
    p.coeffs[{-1, -2}] = cplx(0.25, 0.125);
    CouplingSpec spec = p;
    CouplingSpec back = coupling_from_json(coupling_to_json(spec));
    validate(back);
    check_same_field(spec, back, 1, g);
  }

  SECTION("quasi-periodic") {
    QuasiPeriodic q;
    q.rows = {{1.0, 0.0}, {std::sqrt(2.0), std::sqrt(3.0)}};
    q.coeffs[{1, 0}] = cplx(0.5, 0.0);
    q.coeffs[{-1, 0}] = cplx(0.5, 0.0);
    q.coeffs[{0, 1}] = cplx(0.25, 0.25);
    q.coeffs[{0, -1}] = cplx(0.25, -0.25);
    CouplingSpec spec = q;
    CouplingSpec back = coupling_from_json(coupling_to_json(spec));
    validate(back);
    check_same_field(spec, back, 1, g);
  }

  SECTION("sampled torus profile") {
    PeriodicSampled s;
    s.m = 4;
    s.samples = {0.0, 0.5, 1.0, 0.5, 0.25, 0.0, 0.25, 0.5,
                 1.0, 0.5, 0.0, 0.25, 0.5, 1.0, 0.5, 0.0};
    CouplingSpec spec = s;
    CouplingSpec back = coupling_from_json(coupling_to_json(spec));
    validate(back);
    check_same_field(spec, back, 1, g);
  }

  SECTION("alloy with every knob set") {
    Alloy a;
    a.bump = {AlloyBump::Kind::gaussian, 0.7, 0.4, 1.0, 1.0};
    a.law = {AlloyLaw::Kind::uniform, 0.3, 0.2};
    a.seed = 99;
    CouplingSpec spec = a;
    const Alloy& back =
        std::get<Alloy>(coupling_from_json(coupling_to_json(spec)));
    CHECK(back.bump.kind == AlloyBump::Kind::gaussian);
    CHECK(back.bump.amplitude == 0.7);
    CHECK(back.bump.scale == 0.4);
    CHECK(back.law.kind == AlloyLaw::Kind::uniform);
    CHECK(back.law.mean == 0.3);
    CHECK(back.law.halfwidth == 0.2);
    CHECK(back.seed == 99);
    check_same_field(spec, CouplingSpec(back), 2, Grid2D(32, 8.0));
  }

  SECTION("nested convex combination") {
    TrigPoly p;
    p.coeffs[{0, 0}] = 1.0;
    TrigPoly q;
    q.coeffs[{0, 0}] = 0.5;
    q.coeffs[{2, 0}] = 0.25;
    q.coeffs[{-2, 0}] = 0.25;
    CouplingSpec inner = convex_combine({0.5, 0.5}, {p, q});
    CouplingSpec spec = convex_combine({0.25, 0.75}, {inner, CouplingSpec(p)});
    CouplingSpec back = coupling_from_json(coupling_to_json(spec));
    validate(back);
    CHECK(mean_value(back) == Catch::Approx(mean_value(spec)).epsilon(1e-15));
    check_same_field(spec, back, 1, g);
  }
}

TEST_CASE("coupling JSON rejects malformed input", "[io]") {
  auto parse = [](const char* text) {
    return coupling_from_json(nlohmann::json::parse(text));
  };
  CHECK_THROWS_AS(parse(R"({"family":"fourier"})"), ConfigError);
  CHECK_THROWS_AS(parse(R"({"family":"trig_poly","modes":[],"extra":1})"),
                  ConfigError);
  CHECK_THROWS_AS(
      parse(R"({"family":"trig_poly","modes":[{"k":[1],"c":[1,0]}]})"),
      ConfigError);
  CHECK_THROWS_AS(
      parse(R"({"family":"trig_poly","modes":[{"k":[1,0],"c":[1]}]})"),
      ConfigError);
  CHECK_THROWS_AS(parse(R"({"family":"alloy","bump":{"kind":"box"},
                            "law":{"kind":"rademacher"},"seed":1})"),
                  ConfigError);
  CHECK_THROWS_AS(parse(R"({"family":"alloy","bump":{"kind":"compact"},
                            "law":{"kind":"coin"},"seed":1})"),
                  ConfigError);
  CHECK_THROWS_AS(parse(R"({"family":"convex","weights":[1.0]})"),
                  ConfigError);
}

TEST_CASE("torus samples ingest from CSV", "[io]") {
  std::stringstream csv(
      "0.0, 0.5, 1.0, 0.5\n"
      "0.25,0.0, 0.25,0.5\n"
      "1.0, 0.5, 0.0, 0.25\n"
      "0.5, 1.0, 0.5, 0.0\n");
  PeriodicSampled s = read_sampled_coupling_csv(csv, "inline");
  REQUIRE(s.m == 4);
  REQUIRE(s.samples.size() == 16);
  CHECK(s.samples[1] == 0.5);
  CHECK(s.samples[4] == 0.25);  // second row lands after the first
  CHECK_NOTHROW(validate(CouplingSpec(s)));

  std::stringstream ragged("1,2,3\n4,5\n6,7,8\n");
  CHECK_THROWS_AS(read_sampled_coupling_csv(ragged, "ragged"), ConfigError);

  std::stringstream junk("1,2\nx,4\n");
  CHECK_THROWS_AS(read_sampled_coupling_csv(junk, "junk"), ConfigError);

  std::stringstream empty("");
  CHECK_THROWS_AS(read_sampled_coupling_csv(empty, "empty"), ConfigError);
}
