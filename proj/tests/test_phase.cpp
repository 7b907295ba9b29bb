#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sben/phase.hpp"

using namespace sben;

namespace {
Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

PhaseVector random_phase(std::mt19937& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Vector x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = g(rng);
    y[i] = g(rng);
  }
  return PhaseVector(x, y);
}
}  // namespace

TEST_CASE("pairing: frozen arithmetic value") {
  const PhaseVector z(vec2(1, 2), vec2(3, 4));
  const PhaseVector z2(vec2(5, 6), vec2(7, 8));
  CHECK(pairing(z, z2) == doctest::Approx(70.0).epsilon(1e-15));
}

TEST_CASE("omega: frozen n=1 value and antisymmetry") {
  const PhaseVector a(Vector::Constant(1, 1.0), Vector::Constant(1, 0.0));
  const PhaseVector b(Vector::Constant(1, 0.0), Vector::Constant(1, 1.0));
  CHECK(omega(a, b) == doctest::Approx(1.0).epsilon(1e-15));

  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const PhaseVector u = random_phase(rng, 3), v = random_phase(rng, 3);
    CHECK(omega(u, v) == doctest::Approx(-omega(v, u)).epsilon(1e-12));
    CHECK(std::abs(omega(u, u)) <= 1e-12 * (1 + u.norm() * u.norm()));
  }
}

TEST_CASE("J identities: J^2 = -I, omega(z,z') = <<Jz,z'>>, Jinv = -J") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const PhaseVector z = random_phase(rng, 4), z2 = random_phase(rng, 4);
    CHECK((jmap(jmap(z)) + z).norm() <= 1e-12 * (1 + z.norm()));
    CHECK((jinv(jmap(z)) - z).norm() <= 1e-12 * (1 + z.norm()));
    CHECK((jmap(z) + jinv(z)).norm() <= 1e-12 * (1 + z.norm()));
    CHECK(omega(z, z2) == doctest::Approx(pairing(jmap(z), z2)).epsilon(1e-12));
  }
}

TEST_CASE("symplectic gradients of the coordinate observables") {
  const Observable q{[](double, const PhaseVector& z) { return z.x()[0]; },
                     [](double, const PhaseVector&) {
                       return PhaseVector(Vector::Constant(1, 1.0), Vector::Zero(1));
                     }};
  const Observable p{[](double, const PhaseVector& z) { return z.y()[0]; },
                     [](double, const PhaseVector&) {
                       return PhaseVector(Vector::Zero(1), Vector::Constant(1, 1.0));
                     }};
  const PhaseVector z = PhaseVector::zero(1);
  const PhaseVector xq = symplectic_gradient(q, 0.0, z);
  const PhaseVector xp = symplectic_gradient(p, 0.0, z);
  // [DERIVED in-spec]: Xq = (0,-1), Xp = (1,0).
  CHECK(xq.x()[0] == doctest::Approx(0.0));
  CHECK(xq.y()[0] == doctest::Approx(-1.0));
  CHECK(xp.x()[0] == doctest::Approx(1.0));
  CHECK(xp.y()[0] == doctest::Approx(0.0));
  CHECK(poisson_bracket(q, p, 0.0, z) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("symplectic gradient duality omega(XF, w) = <<DF, w>>") {
  std::mt19937 rng(3);
  const Observable f{[](double, const PhaseVector& z) {
                       return 0.5 * z.x().squaredNorm() + z.x().dot(z.y());
                     },
                     [](double, const PhaseVector& z) {
                       return PhaseVector(z.x() + z.y(), z.x());
                     }};
  for (int trial = 0; trial < 50; ++trial) {
    const PhaseVector z = random_phase(rng, 3), w = random_phase(rng, 3);
    const PhaseVector xf = symplectic_gradient(f, 0.0, z);
    CHECK(omega(xf, w) ==
          doctest::Approx(pairing(f.gradient(0.0, z), w)).epsilon(1e-11));
  }
}

TEST_CASE("flat round-trip and invalid construction") {
  const PhaseVector z(vec2(1, 2), vec2(3, 4));
  const PhaseVector r = PhaseVector::from_flat(z.flat());
  CHECK((r - z).norm() == doctest::Approx(0.0));

  CHECK_THROWS_AS(PhaseVector(Vector::Zero(2), Vector::Zero(3)), std::invalid_argument);
  Vector bad = Vector::Zero(2);
  bad[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(PhaseVector(bad, Vector::Zero(2)), std::invalid_argument);
  CHECK_THROWS_AS(PhaseVector::from_flat(Vector::Zero(3)), std::invalid_argument);
  CHECK_THROWS_AS(pairing(PhaseVector::zero(1), PhaseVector::zero(2)),
                  std::invalid_argument);
}
