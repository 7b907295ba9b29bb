#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sben/models.hpp"
#include "sben/verify.hpp"

using namespace sben;

namespace {
ModelSpec elastoplastic(double sy = 0.3) {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::ElastoplasticOscillator;
  spec.mass = 1.0;
  spec.stiffness = 1.0;
  spec.yield_stress = sy;
  spec.load = LoadCurve::sinusoidal(1.0, 1.0);
  return spec;
}

ModelSpec quasistatic_ramp(double v, double t_hold = -1.0) {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::QuasiStaticBar;
  spec.stiffness = 1.0;
  spec.yield_stress = 0.5;
  spec.length = 1.0;
  spec.elements = 1;
  if (t_hold > 0)
    spec.displacement = LoadCurve::piecewise_linear({0.0, t_hold, 2 * t_hold},
                                                    {0.0, v * t_hold, v * t_hold});
  else
    spec.displacement = LoadCurve::piecewise_linear({0.0, 100.0}, {0.0, 100.0 * v});
  return spec;
}
}  // namespace

TEST_CASE("spec validation names the offending field") {
  ModelSpec spec;
  spec.mass = -1.0;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("mass"),
                       std::invalid_argument);
  spec = ModelSpec{};
  spec.dof = 3;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("dof"),
                       std::invalid_argument);
  spec = ModelSpec{};
  spec.kind = ModelSpec::Kind::BarChain;
  spec.elements = 0;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("elements"),
                       std::invalid_argument);
  spec = ModelSpec{};
  spec.initial_position = Vector::Zero(2);  // dof = 1 -> mismatch
  CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
}

TEST_CASE("state layouts and element stresses") {
  // Elastoplastic oscillator: x = (u, e), sigma = E (u - e).
  ModelSpec ep = elastoplastic();
  Vector x(2), y(2);
  x << 0.7, 0.2;
  y << 0.0, 0.0;
  const Vector sig = element_stresses(ep, 0.0, PhaseVector(x, y));
  REQUIRE(sig.size() == 1);
  CHECK(sig[0] == doctest::Approx(0.5));

  // Bar chain: sigma_e = (E/h)(du_e - e_e) with h = L / n_e.
  ModelSpec bar;
  bar.kind = ModelSpec::Kind::BarChain;
  bar.stiffness = 2.0;
  bar.length = 1.0;
  bar.elements = 2;  // h = 0.5
  Vector xb(4), yb(4);
  xb << 0.1, 0.3, 0.02, 0.0;  // u_1, u_2, e_1, e_2
  yb.setZero();
  const Vector sb = element_stresses(bar, 0.0, PhaseVector(xb, yb));
  REQUIRE(sb.size() == 2);
  CHECK(sb[0] == doctest::Approx(2.0 / 0.5 * (0.1 - 0.02)));
  CHECK(sb[1] == doctest::Approx(2.0 / 0.5 * (0.2 - 0.0)));

  // Built potentials constrain the expected coordinates.
  const BuiltModel bm = build(ep);
  const auto hard = bm.potential.hard_coords();
  CHECK(hard == std::vector<bool>{false, false, false, true});
}

TEST_CASE("elastoplastic oscillator matches the return-mapping oracle") {
  const ModelSpec spec = elastoplastic();
  const BuiltModel bm = build(spec);
  double prev_err = 0.0;
  std::vector<double> errs;
  for (size_t steps : {200, 400, 800}) {
    const TimeGrid grid = TimeGrid::uniform(0.0, 4.0, steps);
    const auto [traj, rep] =
        incremental_solve(bm.hamiltonian, bm.potential, bm.initial_state, grid);
    REQUIRE(rep.converged);
    const Trajectory oracle = return_mapping_oracle(spec, grid);
    double err = 0.0;
    for (size_t k = 0; k <= steps; ++k)
      err = std::max(err, (traj.state(k) - oracle.state(k)).norm());
    errs.push_back(err);
  }
  // Sup-norm error O(dt): order >= 0.9 under halving.
  const double order1 = std::log2(errs[0] / errs[1]);
  const double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 >= 0.9);
  CHECK(order2 >= 0.9);
  (void)prev_err;
}

TEST_CASE("yield admissibility at BEN solutions") {
  const ModelSpec spec = elastoplastic(0.3);
  const BuiltModel bm = build(spec);
  const TimeGrid grid = TimeGrid::uniform(0.0, 6.0, 600);
  const auto [traj, rep] =
      incremental_solve(bm.hamiltonian, bm.potential, bm.initial_state, grid);
  for (size_t k = 0; k <= traj.steps(); ++k) {
    const double sigma = element_stresses(spec, grid.t(k), traj.state(k))[0];
    CHECK(std::abs(sigma) <= 0.3 * (1 + 1e-9));
  }
}

TEST_CASE("constraint defects O(dt), decreasing under halving") {
  const ModelSpec spec = elastoplastic();
  const BuiltModel bm = build(spec);
  std::vector<double> worst;
  for (size_t steps : {200, 400, 800}) {
    const TimeGrid grid = TimeGrid::uniform(0.0, 4.0, steps);
    const auto [traj, rep] =
        incremental_solve(bm.hamiltonian, bm.potential, bm.initial_state, grid);
    const ConstraintDefects d = plasticity_constraints_defect(spec, traj);
    double w = 0.0;
    for (double v : d.momentum) w = std::max(w, v);
    for (double v : d.balance) w = std::max(w, v);
    for (double v : d.stress_rate) w = std::max(w, v);
    worst.push_back(w);
  }
  const double dt0 = 4.0 / 200;
  CHECK(worst[0] <= 10.0 * dt0);  // C measured well below 10 here
  CHECK(worst[1] < worst[0]);
  CHECK(worst[2] < worst[1]);
}

TEST_CASE("quasi-static bar: ramp to yield plateau, then elastic unloading") {
  // u-bar(t) = v t: sigma = min(E v t / L, sigma_y).
  const double v = 0.25;
  {
    const ModelSpec spec = quasistatic_ramp(v);
    const TimeGrid grid = TimeGrid::uniform(0.0, 4.0, 200);
    const QuasiStaticResult res = quasistatic_ben_solve(spec, grid);
    REQUIRE(res.sigma.size() == grid.size());
    for (size_t k = 0; k < res.sigma.size(); ++k) {
      const double exact = std::min(v * grid.t(k), 0.5);
      CHECK(std::abs(res.sigma[k] - exact) <= 5e-3);
      CHECK(std::abs(res.sigma[k]) <= 0.5 * (1 + 1e-9));
    }
    CHECK(res.certificate >= -1e-9);
  }
  // Ramp to 2 sigma_y worth of strain, then hold: plateau at sigma_y and a
  // residual plastic strain eps_I = max strain - sigma_y / E.
  {
    const ModelSpec spec = quasistatic_ramp(v, /*t_hold=*/4.0);
    const TimeGrid grid = TimeGrid::uniform(0.0, 8.0, 400);
    const QuasiStaticResult res = quasistatic_ben_solve(spec, grid);
    CHECK(std::abs(res.sigma.back() - 0.5) <= 5e-3);
    // Cross-check against the incremental-statics oracle states.
    const Trajectory oracle = return_mapping_oracle(spec, grid);
    double err = 0.0;
    for (size_t k = 0; k <= grid.steps(); ++k) {
      const double sig_oracle = element_stresses(spec, grid.t(k), oracle.state(k))[0];
      err = std::max(err, std::abs(res.sigma[k] - sig_oracle));
    }
    CHECK(err <= 5e-3);
  }
}

TEST_CASE("quasi-static objective: minimality under perturbation") {
  const ModelSpec spec = quasistatic_ramp(0.25);
  const TimeGrid grid = TimeGrid::uniform(0.0, 4.0, 50);
  const QuasiStaticResult res = quasistatic_ben_solve(spec, grid);
  const ExtReal base = quasistatic_objective(spec, grid, res.sigma);
  REQUIRE(base.is_finite());
  CHECK(std::abs(base.value() - res.objective) <= 1e-9 * (1 + std::abs(res.objective)));
  CHECK(base.value() >= res.lower_bound - 1e-9);

  std::mt19937 rng(41);
  std::normal_distribution<double> g(0.0, 0.02);
  int raised = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> sigma = res.sigma;
    for (size_t k = 1; k < sigma.size(); ++k) sigma[k] += g(rng);
    const ExtReal pert = quasistatic_objective(spec, grid, sigma);
    if (base.value() <= pert.as_double() + 1e-12) ++raised;
  }
  CHECK(raised == 100);
}

TEST_CASE("mixed objective: finite at oracle states, infinite past yield") {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::BarChain;
  spec.stiffness = 1.0;
  spec.density = 1.0;
  spec.yield_stress = 0.5;
  spec.elements = 2;
  spec.load = LoadCurve::sinusoidal(0.4, 1.0);
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 10);

  const BuiltModel bm = build(spec);
  const auto [traj, rep] =
      incremental_solve(bm.hamiltonian, bm.potential, bm.initial_state, grid);
  std::vector<Vector> u, sigma;
  for (size_t k = 0; k <= grid.steps(); ++k) {
    u.push_back(traj.state(k).x().head(2));
    sigma.push_back(element_stresses(spec, grid.t(k), traj.state(k)));
  }
  CHECK(mixed_ben_objective(spec, grid, u, sigma).is_finite());

  sigma.back()[0] = 0.6;  // above sigma_y
  CHECK(mixed_ben_objective(spec, grid, u, sigma).is_infinite());
}

TEST_CASE("hysteresis loop area equals total dissipation (cyclic load)") {
  const ModelSpec spec = elastoplastic(0.3);
  const BuiltModel bm = build(spec);
  const TimeGrid grid = TimeGrid::uniform(0.0, 4 * M_PI, 2000);
  const auto [traj, rep] =
      incremental_solve(bm.hamiltonian, bm.potential, bm.initial_state, grid);
  REQUIRE(rep.converged);

  double dissipated = 0.0;
  for (size_t k = 1; k <= traj.steps(); ++k)
    dissipated += grid.dt(k) * rep.dissipation_rate[k - 1].value();

  // Loop area in the (e, sigma) plane: integral of sigma de.
  double area = 0.0;
  for (size_t k = 1; k <= traj.steps(); ++k) {
    const double s0 = element_stresses(spec, grid.t(k - 1), traj.state(k - 1))[0];
    const double s1 = element_stresses(spec, grid.t(k), traj.state(k))[0];
    const double de = traj.state(k).x()[1] - traj.state(k - 1).x()[1];
    area += 0.5 * (s0 + s1) * de;
  }
  REQUIRE(dissipated > 0.1);  // the load cycle does drive plastic flow
  CHECK(std::abs(area - dissipated) <= 0.02 * dissipated);
}

TEST_CASE("angular momentum Poisson-commutes with the isotropic Hamiltonian") {
  ModelSpec spec;
  spec.kind = ModelSpec::Kind::HarmonicOscillator;
  spec.dof = 2;
  const BuiltModel bm = build(spec);
  const Observable L = angular_momentum_observable();
  std::mt19937 rng(47);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    Vector x(2), y(2);
    x << g(rng), g(rng);
    y << g(rng), g(rng);
    const PhaseVector z(x, y);
    CHECK(std::abs(poisson_bracket(L, bm.hamiltonian.as_observable(), 0.0, z)) <=
          1e-12 * (1 + z.norm() * z.norm()));
  }
}

TEST_CASE("quasi-static solve rejects initial data past yield") {
  ModelSpec spec = quasistatic_ramp(0.25);
  spec.displacement = LoadCurve::piecewise_linear({0.0, 1.0}, {2.0, 2.0});
  const TimeGrid grid = TimeGrid::uniform(0.0, 1.0, 10);
  CHECK_THROWS(quasistatic_ben_solve(spec, grid));
  CHECK_THROWS(build(spec));  // no finite-dimensional Hamiltonian either
}
