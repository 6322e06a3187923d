#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "bellbound/io.hpp"
#include "bellbound/states.hpp"

using namespace bellbound;

namespace {

constexpr double kPi = std::numbers::pi;

void expect_valid(const TwoQubitState& st) {
  EXPECT_LE(hermiticity_error(st.rho()), 1e-12);
  EXPECT_NEAR(st.rho().trace().real(), 1.0, 1e-12);
  EXPECT_NEAR(st.rho().trace().imag(), 0.0, 1e-12);
  EXPECT_GE(min_eigenvalue(st.rho()), -1e-10);
}

// Elementwise oracle for t_ij, written out independently of correlation_data.
double trace_oracle(const TwoQubitState& st, std::size_t i, std::size_t j) {
  const ComplexMatrix op = kron(pauli::sigma(i), pauli::sigma(j));
  cplx s = 0.0;
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) s += op(r, c) * st.rho()(c, r);
  return s.real();
}

std::array<cplx, 4> random_pure(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::array<cplx, 4> v;
  double n = 0.0;
  for (auto& c : v) {
    c = cplx(g(rng), g(rng));
    n += std::norm(c);
  }
  for (auto& c : v) c /= std::sqrt(n);
  return v;
}

}  // namespace

TEST(PureState, MaximallyEntangledEndpoint) {
  const double h = 1.0 / std::numbers::sqrt2;
  const std::array<cplx, 4> phi{h, 0.0, 0.0, h};
  EXPECT_LT(max_abs_diff(pure_state(kPi / 4).rho(), projector(phi)), 1e-15);
}

TEST(PureState, ProductEndpoint) {
  ComplexMatrix expect(4, 4);
  expect(0, 0) = 1.0;
  EXPECT_EQ(pure_state(0.0).rho(), expect);
}

TEST(PureState, PiOverEightCorrelationsBySignedTrace) {
  const auto st = pure_state(kPi / 8);
  const auto cd = correlation_data(st);
  const double s = std::numbers::sqrt2 / 2;
  const RealMatrix3 expect = RealMatrix3::diag(s, -s, 1.0);
  EXPECT_LT(max_abs_diff(cd.t, expect), 1e-12);
}

TEST(PureState, UnitPurityOnGrid) {
  for (int i = 0; i <= 20; ++i) {
    const auto st = pure_state(kPi / 4 * i / 20.0);
    expect_valid(st);
    EXPECT_NEAR(st.purity(), 1.0, 1e-12);
  }
}

TEST(PureState, RejectsOutOfRange) {
  EXPECT_THROW(pure_state(-0.01), OutOfRange);
  EXPECT_THROW(pure_state(kPi / 4 + 1e-6), OutOfRange);
  EXPECT_THROW(pure_state(std::nan("")), OutOfRange);
}

TEST(WernerState, FullVisibilityIsPureMaximallyEntangled) {
  EXPECT_LT(max_abs_diff(werner_state(1.0).rho(), pure_state(kPi / 4).rho()), 1e-15);
}

TEST(WernerState, ZeroVisibilityIsMaximallyMixed) {
  const auto st = werner_state(0.0);
  EXPECT_LT(max_abs_diff(st.rho(), ComplexMatrix::identity(4) * cplx(0.25)), 1e-15);
  const auto cd = correlation_data(st);
  EXPECT_LT(max_abs_diff(cd.t, RealMatrix3{}), 1e-15);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(cd.r[i], 0.0);
    EXPECT_EQ(cd.s[i], 0.0);
  }
}

TEST(WernerState, Spectrum) {
  for (double p : {0.0, 0.3, 0.7, 1.0}) {
    const auto ev = hermitian_eig(werner_state(p).rho()).values;
    EXPECT_NEAR(ev[0], (1 - p) / 4, 1e-12);
    EXPECT_NEAR(ev[2], (1 - p) / 4, 1e-12);
    EXPECT_NEAR(ev[3], (1 + 3 * p) / 4, 1e-12);
  }
}

TEST(WernerState, SingularValuesEqualVisibility) {
  for (int i = 0; i <= 10; ++i) {
    const double p = i / 10.0;
    const auto sv = svd3(correlation_data(werner_state(p)).t).singular_values;
    for (double v : sv) EXPECT_NEAR(v, p, 1e-12) << p;
  }
}

TEST(WernerState, SignedCorrelationsAtSevenTenths) {
  const auto cd = correlation_data(werner_state(0.7));
  EXPECT_LT(max_abs_diff(cd.t, RealMatrix3::diag(0.7, -0.7, 0.7)), 1e-12);
}

TEST(WernerState, RejectsOutOfRange) {
  EXPECT_THROW(werner_state(-0.1), OutOfRange);
  EXPECT_THROW(werner_state(1.0001), OutOfRange);
}

TEST(Singlet, CorrelationMatrixIsMinusIdentity) {
  const auto st = singlet();
  expect_valid(st);
  EXPECT_NEAR(st.purity(), 1.0, 1e-12);
  const auto cd = correlation_data(st);
  EXPECT_LT(max_abs_diff(cd.t, RealMatrix3::diag(-1, -1, -1)), 1e-12);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(cd.r[i], 0.0, 1e-15);
    EXPECT_NEAR(cd.s[i], 0.0, 1e-15);
  }
}

TEST(TwoQubitState, RejectsInvalidDensities) {
  ComplexMatrix bad_trace = ComplexMatrix::identity(4) * cplx(0.3);
  EXPECT_THROW(TwoQubitState::from_density(bad_trace), InvalidState);
  ComplexMatrix non_herm = ComplexMatrix::identity(4) * cplx(0.25);
  non_herm(0, 1) = 0.1;
  EXPECT_THROW(TwoQubitState::from_density(non_herm), InvalidState);
  ComplexMatrix negative(4, 4);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  EXPECT_THROW(TwoQubitState::from_density(negative), InvalidState);
  EXPECT_THROW(TwoQubitState::from_density(ComplexMatrix::identity(3)), InvalidState);
}

TEST(CorrelationData, MatchesTraceOracleOnRandomStates) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto psi = random_pure(rng);
    const auto st = noisy_pure_state(psi, u(rng));
    const auto cd = correlation_data(st);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_NEAR(cd.t(i, j), trace_oracle(st, i, j), 1e-12);
        EXPECT_LE(std::abs(cd.t(i, j)), 1.0 + 1e-10);
      }
      EXPECT_LE(std::abs(cd.r[i]), 1.0 + 1e-10);
      EXPECT_LE(std::abs(cd.s[i]), 1.0 + 1e-10);
    }
  }
}

TEST(CorrelationData, RoundTripOverSeededFamilyGrid) {
  // 200 seeded draws split across both families.
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> theta(0.0, kPi / 4), vis(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const auto st = i % 2 == 0 ? pure_state(theta(rng)) : werner_state(vis(rng));
    expect_valid(st);
    EXPECT_LE(max_abs_diff(reconstruct_density(correlation_data(st)), st.rho()), 1e-12);
  }
}

TEST(CorrelationData, RoundTripOnGeneralMixedStates) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const auto st = noisy_pure_state(random_pure(rng), u(rng));
    EXPECT_LE(max_abs_diff(reconstruct_density(correlation_data(st)), st.rho()), 1e-12);
  }
}

TEST(StateJson, RoundTripPreservesDensity) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 20; ++i) {
    const auto st = noisy_pure_state(random_pure(rng), 0.9);
    const auto back = io::state_from_json(io::json::parse(io::state_to_json(st).dump()));
    EXPECT_LE(max_abs_diff(back.rho(), st.rho()), 1e-11);
  }
}

TEST(StateJson, LayoutIsRowsOfComplexPairs) {
  const auto j = io::state_to_json(singlet());
  ASSERT_EQ(j.size(), 4u);
  ASSERT_EQ(j[1].size(), 4u);
  EXPECT_DOUBLE_EQ(j[1][1][0].get<double>(), 0.5);
  EXPECT_DOUBLE_EQ(j[1][2][0].get<double>(), -0.5);
  EXPECT_DOUBLE_EQ(j[1][2][1].get<double>(), 0.0);
}

TEST(StateJson, RejectsMalformedInput) {
  EXPECT_THROW(io::state_from_json(io::json::parse("[[1,0],[0,1]]")), io::FormatError);
  auto j = io::state_to_json(werner_state(0.5));
  j[0][0] = io::json::array({2.0, 0.0});
  EXPECT_THROW(io::state_from_json(j), InvalidState);
}

TEST(StateJson, TwelveDigitEntriesStillValidate) {
  // Rounded entries leave the trace a few 1e-12 off unity; reading must
  // absorb that rather than reject the file.
  std::mt19937_64 rng(77);
  for (int i = 0; i < 200; ++i) {
    const auto st = TwoQubitState::from_density(projector(random_pure(rng)));
    const auto back = io::state_from_json(io::json::parse(io::state_to_json(st).dump()));
    EXPECT_LE(max_abs_diff(back.rho(), st.rho()), 1e-11);
  }
  auto j = io::state_to_json(werner_state(0.5));
  j[0][0][0] = j[0][0][0].get<double>() + 1e-6;
  EXPECT_THROW(io::state_from_json(j), InvalidState);
}
