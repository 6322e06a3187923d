#pragma once

// JSON and CSV encodings used by the command-line tool and test fixtures.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "json.hpp"

#include "bellbound/bell.hpp"
#include "bellbound/npa.hpp"
#include "bellbound/sdp.hpp"
#include "bellbound/states.hpp"

namespace bellbound::io {

using nlohmann::json;

class FormatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kMachineDigits = 12;
inline constexpr int kHumanDecimals = 6;

/// %.<digits>g rendering.
inline std::string sig(double v, int digits = kMachineDigits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// Fixed-point rendering for human-readable reports.
inline std::string fixed(double v, int decimals = kHumanDecimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s = buf;
  // "-0.000000" reads as a sign error; print it without the sign.
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

/// v rounded to `digits` significant digits, so that JSON dumps stay short
/// and stable across platforms.
inline double round_sig(double v, int digits = kMachineDigits) {
  if (!std::isfinite(v) || v == 0.0) return v;
  return std::stod(sig(v, digits));
}

// ---------------------------------------------------------------------------
// States: 4x4 row-major arrays of [re, im] pairs.

/// Inputs this close to unit norm or unit trace are rescaled on read.
inline constexpr double kReadUnitTolerance = 1e-9;

inline json state_to_json(const TwoQubitState& st) {
  json rows = json::array();
  for (std::size_t i = 0; i < 4; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < 4; ++j) row.push_back({round_sig(st.rho()(i, j).real()), round_sig(st.rho()(i, j).imag())});
    rows.push_back(std::move(row));
  }
  return rows;
}

inline TwoQubitState state_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("state must be a 4x4 array");
  ComplexMatrix rho(4, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != 4) throw FormatError("state must be a 4x4 array");
    for (std::size_t c = 0; c < 4; ++c) {
      const json& e = row[c];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw FormatError("state entries must be [re, im] pairs");
      rho(r, c) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  // Twelve-digit entries leave the trace off by a few 1e-12; rescale that
  // away but let anything larger reach the validator.
  const double tr = rho.trace().real();
  if (std::abs(tr - 1.0) <= kReadUnitTolerance) rho = rho * cplx(1.0 / tr);
  return TwoQubitState::from_density(std::move(rho));
}

// ---------------------------------------------------------------------------
// Strategies: {"alice": [[x, y, z], ...], "bob": [...]}.

inline json vectors_to_json(const std::vector<Vec3>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back({round_sig(v[0]), round_sig(v[1]), round_sig(v[2])});
  return out;
}

// Printed vectors carry 12 digits, so their norms are off by up to about
// 1e-12. Vectors this close to unit length are renormalized on input.
inline std::vector<Vec3> vectors_from_json(const json& j) {
  if (!j.is_array()) throw FormatError("expected a list of 3-vectors");
  std::vector<Vec3> out;
  for (const auto& v : j) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
      throw FormatError("expected a list of 3-vectors");
    Vec3 u{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
    const double n = norm(u);
    if (std::abs(n - 1.0) > kReadUnitTolerance) throw FormatError("measurement vector is not unit");
    out.push_back(scaled(u, 1.0 / n));
  }
  return out;
}

inline json strategy_to_json(const MeasurementStrategy& s) {
  return {{"alice", vectors_to_json(s.alice)}, {"bob", vectors_to_json(s.bob)}};
}

inline MeasurementStrategy strategy_from_json(const json& j) {
  if (!j.is_object() || !j.contains("alice") || !j.contains("bob"))
    throw FormatError("strategy needs 'alice' and 'bob' lists");
  MeasurementStrategy s{vectors_from_json(j.at("alice")), vectors_from_json(j.at("bob"))};
  s.validate();
  return s;
}

inline json tightness_to_json(const TightnessReport& r) {
  return {{"proportionality_ok", r.proportionality_ok}, {"gram_sum", round_sig(r.gram_sum)},
          {"gram_sum_ok", r.gram_sum_ok},               {"alice_aligned", r.alice_aligned},
          {"bound_gap", round_sig(r.bound_gap)},        {"all_ok", r.all_ok()}};
}

// ---------------------------------------------------------------------------
// Behaviors: one row per (x, y, a, b), zero-based labels.

inline void write_behavior_csv(std::ostream& os, const Behavior& b) {
  os << "x,y,a,b,p\n";
  for (std::size_t x = 0; x < b.alice_settings; ++x)
    for (std::size_t y = 0; y < b.bob_settings; ++y)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t o = 0; o < 2; ++o) os << x << ',' << y << ',' << a << ',' << o << ',' << sig(b(a, o, x, y)) << '\n';
}

// ---------------------------------------------------------------------------
// SDP problems: {"n", "C", "constraints": [{"A", "b"}], "sense"}.

inline json matrix_to_json(const RealMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline RealMatrix matrix_from_json(const json& j, std::size_t n) {
  if (!j.is_array() || j.size() != n) throw FormatError("matrix must be n x n");
  RealMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != n) throw FormatError("matrix must be n x n");
    for (std::size_t k = 0; k < n; ++k) m(i, k) = j[i][k].get<double>();
  }
  return m;
}

inline json sdp_to_json(const SdpProblem& p) {
  json cons = json::array();
  for (const auto& c : p.constraints) cons.push_back({{"A", matrix_to_json(c.a)}, {"b", c.b}});
  return {{"n", p.n},
          {"C", matrix_to_json(p.c)},
          {"constraints", std::move(cons)},
          {"sense", p.sense == Sense::Maximize ? "max" : "min"}};
}

inline SdpProblem sdp_from_json(const json& j) {
  try {
    SdpProblem p;
    p.n = j.at("n").get<std::size_t>();
    p.c = matrix_from_json(j.at("C"), p.n);
    for (const auto& c : j.at("constraints")) p.constraints.push_back({matrix_from_json(c.at("A"), p.n), c.at("b").get<double>()});
    const std::string sense = j.value("sense", "min");
    if (sense == "max" || sense == "maximize")
      p.sense = Sense::Maximize;
    else if (sense == "min" || sense == "minimize")
      p.sense = Sense::Minimize;
    else
      throw FormatError("sense must be 'min' or 'max'");
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed SDP problem: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Min-entropy curves.

inline constexpr const char* kCurveHeader = "param,bell_value,guessing_probability,min_entropy_bits";

/// One CSV row. The probability is rounded to the printed precision first and
/// the entropy is recomputed from that rounded value and printed at full
/// precision. A reader recomputing -log2 from the file then agrees with the
/// entropy column to the last bit.
inline std::string curve_row(const RandomnessPoint& p) {
  const double prob = round_sig(p.guessing_probability);
  const double h = prob >= 1.0 ? 0.0 : min_entropy_bits(prob);
  return sig(p.param) + ',' + sig(p.bell_value) + ',' + sig(prob) + ',' + sig(h, 17);
}

}  // namespace bellbound::io
