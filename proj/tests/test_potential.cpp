#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sben/potential.hpp"

using namespace sben;

namespace {
Vector scalar(double v) { return Vector::Constant(1, v); }

Vector random_vec(std::mt19937& rng, Eigen::Index d, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = g(rng);
  return v;
}

// A representative zoo of every family, all on dimension 2.
std::vector<Potential> family_zoo() {
  Matrix a(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;  // SPD
  Matrix sing(2, 2);
  sing << 1.0, 0.0, 0.0, 0.0;  // rank 1
  std::vector<Potential::Part> parts;
  parts.push_back({Potential::scaled_norm(0.7, 1), {0}});
  return {
      Potential::zero(2),
      Potential::quadratic(a),
      Potential::quadratic(sing, /*restricted=*/true),
      Potential::scaled_norm(1.3, 2),
      Potential::indicator_ball(0.8, 2),
      Potential::indicator_box(-1.5, 1.5, 2),
      Potential::support_box(Vector::Constant(2, -2.0), Vector::Constant(2, 1.0)),
      Potential::indicator_point(Vector::Constant(2, 0.4)),
      Potential::linear(Vector::Constant(2, -0.6)),
      Potential::separable_sum(std::move(parts), 2),
  };
}
}  // namespace

TEST_CASE("frozen conjugate values") {
  // Quadratic (a/2) v^2: conjugate w^2/(2a). a=2, w=4 -> 4.
  const Potential q = Potential::quadratic_scalar(2.0, 1);
  CHECK(q.conjugate(scalar(4.0)).value() == doctest::Approx(4.0).epsilon(1e-14));
  // Indicator of [-1.5, 1.5] conjugates to the support c|w|: w=2 -> 3.
  const Potential box = Potential::indicator_box(-1.5, 1.5, 1);
  CHECK(box.conjugate(scalar(2.0)).value() == doctest::Approx(3.0).epsilon(1e-14));
  // ScaledNorm conjugates to the ball indicator.
  const Potential nrm = Potential::scaled_norm(1.0, 1);
  CHECK(nrm.conjugate(scalar(0.5)).value() == doctest::Approx(0.0));
  CHECK(nrm.conjugate(scalar(1.5)).is_infinite());
  // Zero conjugates to the point mass at the origin.
  const Potential zero = Potential::zero(1);
  CHECK(zero.conjugate(scalar(0.0)).value() == doctest::Approx(0.0));
  CHECK(zero.conjugate(scalar(0.1)).is_infinite());
}

TEST_CASE("frozen prox values") {
  // Soft threshold: c=1, lambda=1, w=3 -> 2.
  const Potential nrm = Potential::scaled_norm(1.0, 1);
  CHECK(nrm.prox(scalar(3.0), 1.0)[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(nrm.prox(scalar(-0.5), 1.0)[0] == doctest::Approx(0.0));
  // Box indicator prox clamps.
  const Potential box = Potential::indicator_box(-1.0, 1.0, 1);
  CHECK(box.prox(scalar(2.5), 0.3)[0] == doctest::Approx(1.0));
  CHECK(box.prox(scalar(0.2), 0.3)[0] == doctest::Approx(0.2));
  // Quadratic prox: (1 + lambda a)^{-1} w.
  const Potential q = Potential::quadratic_scalar(2.0, 1);
  CHECK(q.prox(scalar(3.0), 0.5)[0] == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("prox optimality and Moreau decomposition across the zoo") {
  std::mt19937 rng(19);
  std::uniform_real_distribution<double> lam(0.2, 3.0);
  for (const Potential& p : family_zoo()) {
    const Potential conj = p.conjugate_potential();
    for (int trial = 0; trial < 40; ++trial) {
      const Vector w = random_vec(rng, 2, 2.0);
      const double lambda = lam(rng);
      const Vector v = p.prox(w, lambda);
      // prox output is feasible (phi finite) and no worse than w itself.
      const ExtReal fv = p.evaluate(v);
      REQUIRE(fv.is_finite());
      const ExtReal obj_v = fv + (v - w).squaredNorm() / (2 * lambda);
      const ExtReal obj_w = p.evaluate(w) + 0.0;
      CHECK(obj_v.value() <= obj_w.as_double() + 1e-10);
      // Moreau: prox_{lambda phi}(w) + lambda prox_{phi*/lambda}(w/lambda) = w.
      const Vector u = conj.prox(w / lambda, 1.0 / lambda);
      CHECK((v + lambda * u - w).norm() <= 1e-9 * (1 + w.norm()));
    }
  }
}

TEST_CASE("biconjugation returns the original family values") {
  std::mt19937 rng(23);
  for (const Potential& p : family_zoo()) {
    const Potential bi = p.conjugate_potential().conjugate_potential();
    for (int trial = 0; trial < 60; ++trial) {
      const Vector v = random_vec(rng, 2, 2.0);
      const ExtReal a = p.evaluate(v), b = bi.evaluate(v);
      if (a.is_infinite() || b.is_infinite()) {
        // Allow boundary tolerance disagreements only very close to the
        // domain boundary; generic random points must agree exactly.
        CHECK(a.is_infinite() == b.is_infinite());
      } else {
        CHECK(a.value() == doctest::Approx(b.value()).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("Fenchel-Young inequality on random samples") {
  std::mt19937 rng(29);
  for (const Potential& p : family_zoo()) {
    for (int trial = 0; trial < 100; ++trial) {
      const Vector v = random_vec(rng, 2, 2.0), w = random_vec(rng, 2, 2.0);
      const ExtReal lhs = p.evaluate(v) + p.conjugate(w);
      if (lhs.is_finite())
        CHECK(lhs.value() + 1e-10 * (1 + std::abs(lhs.value())) >= v.dot(w));
    }
  }
}

TEST_CASE("subdifferential membership via Fenchel equality") {
  // Potentials on phase rates live on the flat (x;y) space of dim 2n.
  const Potential nrm = Potential::scaled_norm(0.9, 2);
  const PhaseVector origin = PhaseVector::zero(1);
  auto g = [](double x, double y) {
    return PhaseVector(Vector::Constant(1, x), Vector::Constant(1, y));
  };
  // At v=0 the subdifferential of c|v| is the c-ball.
  CHECK(subdiff_contains(nrm, origin, g(0.5, 0.5), 1e-10));
  CHECK(subdiff_contains(nrm, origin, g(0.9, 0.0), 1e-10));
  CHECK_FALSE(subdiff_contains(nrm, origin, g(1.0, 0.0), 1e-10));

  // Quadratic (1/2)|z|^2 at z=(1,0): z2 is a symplectic subgradient iff
  // J z2 = grad phi(z) = (1,0); with J(x,y) = (-y,x) that inverts to
  // z2 = -J(1,0) = (0,-1).
  const Potential quad = Potential::quadratic_scalar(1.0, 2);
  const PhaseVector z = g(1.0, 0.0);
  CHECK(symp_subdiff_contains(quad, z, g(0.0, -1.0), 1e-10));
  CHECK_FALSE(symp_subdiff_contains(quad, z, g(0.0, 1.0), 1e-10));
  CHECK_FALSE(symp_subdiff_contains(quad, z, g(1.0, 0.0), 1e-10));
  CHECK_FALSE(symp_subdiff_contains(quad, z, g(0.0, -1.2), 1e-10));
}

TEST_CASE("symplectic polar of a y-block norm") {
  // phi(x,y) = c|y| on n=1. The polar phi^{*w}(x',y') = phi^*(-y', x')
  // is +inf unless |x'| <= c and y' = 0.
  const double c = 1.1;
  const Potential p = Potential::on_y_block(Potential::scaled_norm(c, 1), 1);
  auto z = [](double x, double y) {
    return PhaseVector(Vector::Constant(1, x), Vector::Constant(1, y));
  };
  CHECK(symplectic_polar(p, z(0.5, 0.0)).value() == doctest::Approx(0.0));
  CHECK(symplectic_polar(p, z(c, 0.0)).value() == doctest::Approx(0.0));
  CHECK(symplectic_polar(p, z(1.2, 0.0)).is_infinite());
  CHECK(symplectic_polar(p, z(0.0, 0.3)).is_infinite());
}

TEST_CASE("ben_gap: nonnegative, zero on constructed subgradient pairs") {
  std::mt19937 rng(31);
  const Potential p = Potential::quadratic_scalar(0.8, 4);  // n = 2
  for (int trial = 0; trial < 200; ++trial) {
    const PhaseVector zdot = PhaseVector::from_flat(random_vec(rng, 4));
    const PhaseVector zi = PhaseVector::from_flat(random_vec(rng, 4));
    const ExtReal gap = ben_gap(p, zdot, zi);
    const double scale = 1 + zdot.norm() * zdot.norm() + zi.norm() * zi.norm();
    CHECK(-1e-12 * scale <= gap);
    // Equality pair: zi with J zi = grad phi(zdot) = a zdot.
    const PhaseVector equality = jinv(0.8 * zdot);
    const ExtReal zero_gap = ben_gap(p, zdot, equality);
    CHECK(zero_gap.value() <= 1e-10 * scale);
  }
}

TEST_CASE("dependence and hard coordinates") {
  std::vector<Potential::Part> parts;
  parts.push_back({Potential::indicator_box(-1.0, 1.0, 1), {1}});
  parts.push_back({Potential::quadratic_scalar(2.0, 1), {3}});
  const Potential p = Potential::separable_sum(std::move(parts), 4);
  const auto dep = p.dependence_coords();
  const auto hard = p.hard_coords();
  CHECK(dep == std::vector<bool>{false, true, false, true});
  CHECK(hard == std::vector<bool>{false, true, false, false});
  CHECK(Potential::zero(4).dependence_coords() ==
        std::vector<bool>(4, false));
}

TEST_CASE("congruence transform of a quadratic under rotation") {
  Matrix rot(2, 2);
  const double th = 0.3;
  rot << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
  Matrix a(2, 2);
  a << 2.0, 0.0, 0.0, 0.5;
  const Potential p = Potential::quadratic(a);
  const Potential q = p.congruence_transform(rot);
  std::mt19937 rng(37);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector v = random_vec(rng, 2);
    CHECK(q.evaluate(Vector(rot * v)).value() ==
          doctest::Approx(p.evaluate(v).value()).epsilon(1e-11));
  }
}

TEST_CASE("invalid constructions throw") {
  // quadratic symmetrizes its input, so an antisymmetric perturbation is
  // absorbed rather than rejected.
  Matrix asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK(Potential::quadratic(asym).evaluate(Vector::Ones(2)).value() ==
        doctest::Approx(1.0));
  Matrix neg(1, 1);
  neg << -1.0;
  CHECK_THROWS_AS(Potential::quadratic(neg), std::invalid_argument);
  CHECK_THROWS_AS(Potential::scaled_norm(-1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(Potential::indicator_box(1.0, -1.0, 2), std::invalid_argument);
  std::vector<Potential::Part> overlap;
  overlap.push_back({Potential::zero(1), {0}});
  overlap.push_back({Potential::scaled_norm(1.0, 1), {0}});
  CHECK_THROWS_AS(Potential::separable_sum(std::move(overlap), 2),
                  std::invalid_argument);
}
