#pragma once

// Persistence layer.
//
// Field files carry a one-line JSON header
//   {"grid":{"N_g":..,"L":..},"name":..,"time":..}
// followed by raw little-endian float64 payload, interleaved (re, im),
// in storage order (x2-major rows, x1 scanning fastest). The payload is
// bit-exact; the header round-trips doubles through shortest-form JSON.
//
// Coupling specifications serialize as tagged JSON objects ("family"
// selects the variant). Unknown keys are rejected everywhere: a typo in
// an experiment config must fail loudly, not silently change the run.

#include <bit>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlshom/coupling.hpp"
#include "nlshom/errors.hpp"
#include "nlshom/field.hpp"

namespace nlshom {

static_assert(std::endian::native == std::endian::little,
              "field files are little-endian; big-endian hosts need swaps");
static_assert(sizeof(cplx) == 2 * sizeof(double));

struct NamedField {
  ComplexField field;
  std::string name;
  double time = 0.0;
};

namespace detail {

inline void expect_keys(const nlohmann::json& j,
                        std::initializer_list<const char*> keys,
                        const std::string& where) {
  if (!j.is_object())
    throw ConfigError(where + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
  }
}

template <class T>
T need(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key))
    throw ConfigError(where + ": missing key \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": bad value for \"" + key + "\": " + e.what());
  }
}

template <class T>
T maybe(const nlohmann::json& j, const char* key, T fallback,
        const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": bad value for \"" + key + "\": " + e.what());
  }
}

inline cplx coeff_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(where + ": coefficient must be [re, im]");
  return cplx(j[0].get<double>(), j[1].get<double>());
}

inline nlohmann::json coeff_to_json(cplx c) {
  return nlohmann::json::array({c.real(), c.imag()});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// binary field files

inline void write_field(std::ostream& out, const ComplexField& f,
                        const std::string& name, double time) {
  nlohmann::json header = {
      {"grid", {{"N_g", f.grid().points()}, {"L", f.grid().length()}}},
      {"name", name},
      {"time", time}};
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(cplx)));
  if (!out) throw Error("field write failed for \"" + name + "\"");
}

inline void write_field(const std::string& path, const ComplexField& f,
                        const std::string& name, double time) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  write_field(out, f, name, time);
}

inline NamedField read_field(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line))
    throw Error(origin + ": missing field header line");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(origin + ": bad field header: " + e.what());
  }
  detail::expect_keys(header, {"grid", "name", "time"}, origin + " header");
  const auto& gj = header.at("grid");
  detail::expect_keys(gj, {"N_g", "L"}, origin + " header grid");
  Grid2D grid(detail::need<int>(gj, "N_g", origin),
              detail::need<double>(gj, "L", origin));

  NamedField nf{ComplexField(grid), detail::need<std::string>(header, "name", origin),
                detail::need<double>(header, "time", origin)};
  auto bytes = static_cast<std::streamsize>(nf.field.size() * sizeof(cplx));
  in.read(reinterpret_cast<char*>(nf.field.data()), bytes);
  if (in.gcount() != bytes)
    throw Error(origin + ": truncated field payload");
  if (in.peek() != std::istream::traits_type::eof())
    throw Error(origin + ": trailing bytes after field payload");
  return nf;
}

inline NamedField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return read_field(in, path);
}

// ---------------------------------------------------------------------------
// coupling specifications as tagged JSON

nlohmann::json coupling_to_json(const CouplingSpec& spec);
CouplingSpec coupling_from_json(const nlohmann::json& j);

namespace detail {

inline nlohmann::json bump_to_json(const AlloyBump& b) {
  return {{"kind", b.kind == AlloyBump::Kind::compact ? "compact" : "gaussian"},
          {"amplitude", b.amplitude},
          {"scale", b.scale},
          {"decay_c", b.decay_c},
          {"decay_eps", b.decay_eps}};
}

inline AlloyBump bump_from_json(const nlohmann::json& j) {
  expect_keys(j, {"kind", "amplitude", "scale", "decay_c", "decay_eps"},
              "alloy bump");
  AlloyBump b;
  std::string kind = need<std::string>(j, "kind", "alloy bump");
  if (kind == "compact")
    b.kind = AlloyBump::Kind::compact;
  else if (kind == "gaussian")
    b.kind = AlloyBump::Kind::gaussian;
  else
    throw ConfigError("alloy bump kind must be compact or gaussian");
  b.amplitude = maybe(j, "amplitude", b.amplitude, "alloy bump");
  b.scale = maybe(j, "scale", b.scale, "alloy bump");
  b.decay_c = maybe(j, "decay_c", b.decay_c, "alloy bump");
  b.decay_eps = maybe(j, "decay_eps", b.decay_eps, "alloy bump");
  return b;
}

inline nlohmann::json law_to_json(const AlloyLaw& l) {
  return {
      {"kind", l.kind == AlloyLaw::Kind::rademacher ? "rademacher" : "uniform"},
      {"mean", l.mean},
      {"halfwidth", l.halfwidth}};
}

inline AlloyLaw law_from_json(const nlohmann::json& j) {
  expect_keys(j, {"kind", "mean", "halfwidth"}, "alloy law");
  AlloyLaw l;
  std::string kind = need<std::string>(j, "kind", "alloy law");
  if (kind == "rademacher")
    l.kind = AlloyLaw::Kind::rademacher;
  else if (kind == "uniform")
    l.kind = AlloyLaw::Kind::uniform;
  else
    throw ConfigError("alloy law kind must be rademacher or uniform");
  l.mean = maybe(j, "mean", l.mean, "alloy law");
  l.halfwidth = maybe(j, "halfwidth", l.halfwidth, "alloy law");
  return l;
}

}  // namespace detail

inline nlohmann::json coupling_to_json(const CouplingSpec& spec) {
  using nlohmann::json;
  return std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, TrigPoly>) {
          json modes = json::array();
          for (const auto& [k, c] : s.coeffs)
            modes.push_back(
                {{"k", {k[0], k[1]}}, {"c", detail::coeff_to_json(c)}});
          return {{"family", "trig_poly"}, {"modes", modes}};
        } else if constexpr (std::is_same_v<S, QuasiPeriodic>) {
          json rows = json::array();
          for (const auto& r : s.rows) rows.push_back({r[0], r[1]});
          json modes = json::array();
          for (const auto& [m, c] : s.coeffs)
            modes.push_back({{"m", m}, {"c", detail::coeff_to_json(c)}});
          return {{"family", "quasi_periodic"}, {"rows", rows},
                  {"modes", modes}};
        } else if constexpr (std::is_same_v<S, PeriodicSampled>) {
          return {{"family", "periodic_sampled"},
                  {"m", s.m},
                  {"samples", s.samples}};
        } else if constexpr (std::is_same_v<S, Alloy>) {
          return {{"family", "alloy"},
                  {"bump", detail::bump_to_json(s.bump)},
                  {"law", detail::law_to_json(s.law)},
                  {"seed", s.seed}};
        } else {
          static_assert(std::is_same_v<S, Convex>);
          json parts = json::array();
          for (const auto& p : s.parts) parts.push_back(coupling_to_json(p));
          return {{"family", "convex"}, {"weights", s.weights},
                  {"parts", parts}};
        }
      },
      spec);
}

inline CouplingSpec coupling_from_json(const nlohmann::json& j) {
  std::string family = detail::need<std::string>(j, "family", "coupling");
  const std::string where = "coupling family " + family;

  if (family == "trig_poly") {
    detail::expect_keys(j, {"family", "modes"}, where);
    TrigPoly p;
    for (const auto& mj : detail::need<nlohmann::json>(j, "modes", where)) {
      detail::expect_keys(mj, {"k", "c"}, where + " mode");
      auto k = detail::need<std::vector<int>>(mj, "k", where);
      if (k.size() != 2) throw ConfigError(where + ": mode k must have 2 ints");
      p.coeffs[{k[0], k[1]}] = detail::coeff_from_json(mj.at("c"), where);
    }
    return p;
  }
  if (family == "quasi_periodic") {
    detail::expect_keys(j, {"family", "rows", "modes"}, where);
    QuasiPeriodic q;
    for (const auto& rj :
         detail::need<std::vector<std::vector<double>>>(j, "rows", where)) {
      if (rj.size() != 2)
        throw ConfigError(where + ": each row must have 2 components");
      q.rows.push_back({rj[0], rj[1]});
    }
    for (const auto& mj : detail::need<nlohmann::json>(j, "modes", where)) {
      detail::expect_keys(mj, {"m", "c"}, where + " mode");
      q.coeffs[detail::need<std::vector<int>>(mj, "m", where)] =
          detail::coeff_from_json(mj.at("c"), where);
    }
    return q;
  }
  if (family == "periodic_sampled") {
    detail::expect_keys(j, {"family", "m", "samples"}, where);
    PeriodicSampled s;
    s.m = detail::need<int>(j, "m", where);
    s.samples = detail::need<std::vector<double>>(j, "samples", where);
    return s;
  }
  if (family == "alloy") {
    detail::expect_keys(j, {"family", "bump", "law", "seed"}, where);
    Alloy a;
    a.bump = detail::bump_from_json(
        detail::need<nlohmann::json>(j, "bump", where));
    a.law = detail::law_from_json(detail::need<nlohmann::json>(j, "law", where));
    a.seed = detail::need<std::uint64_t>(j, "seed", where);
    return a;
  }
  if (family == "convex") {
    detail::expect_keys(j, {"family", "weights", "parts"}, where);
    Convex c;
    c.weights = detail::need<std::vector<double>>(j, "weights", where);
    for (const auto& pj : detail::need<nlohmann::json>(j, "parts", where))
      c.parts.push_back(coupling_from_json(pj));
    return c;
  }
  throw ConfigError("unknown coupling family \"" + family + "\"");
}

// ---------------------------------------------------------------------------
// CSV ingestion of torus samples: m lines of m comma-separated values,
// line j holding the samples along x1 at the j-th x2 node.

inline PeriodicSampled read_sampled_coupling_csv(std::istream& in,
                                                 const std::string& origin) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(cell, &used);
        while (used < cell.size() &&
               std::isspace(static_cast<unsigned char>(cell[used])))
          ++used;
        if (used != cell.size()) throw std::invalid_argument(cell);
        row.push_back(v);
      } catch (const std::exception&) {
        throw ConfigError(origin + ": bad CSV cell \"" + cell + "\"");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(origin + ": empty sample CSV");
  const std::size_t m = rows.size();
  PeriodicSampled s;
  s.m = static_cast<int>(m);
  for (const auto& row : rows) {
    if (row.size() != m)
      throw ConfigError(origin + ": sample CSV must be square (" +
                        std::to_string(m) + " rows of " + std::to_string(m) +
                        " values)");
    s.samples.insert(s.samples.end(), row.begin(), row.end());
  }
  return s;
}

inline PeriodicSampled read_sampled_coupling_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return read_sampled_coupling_csv(in, path);
}

}  // namespace nlshom
