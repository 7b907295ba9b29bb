#include "sben/verify.hpp"

#include <cmath>
#include <stdexcept>

namespace sben {

double brute_force_conjugate(const Potential& p, const Vector& w,
                             const GridOracle& oracle, Vector* argmax) {
  const Eigen::Index d = p.dim();
  if (oracle.lo.size() != d || oracle.hi.size() != d || w.size() != d)
    throw std::invalid_argument("brute_force_conjugate: dimension mismatch");
  if (oracle.points_per_axis < 2 || oracle.points_per_axis > 401)
    throw std::invalid_argument("brute_force_conjugate: 2 <= points_per_axis <= 401");
  double total = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) total *= oracle.points_per_axis;
  if (total > 5e6)
    throw std::invalid_argument("brute_force_conjugate: grid too large");

  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> idx(static_cast<size_t>(d), 0);
  Vector v(d);
  while (true) {
    for (Eigen::Index i = 0; i < d; ++i)
      v[i] = oracle.lo[i] + (oracle.hi[i] - oracle.lo[i]) *
                                idx[static_cast<size_t>(i)] /
                                (oracle.points_per_axis - 1);
    const ExtReal val = p.evaluate(v);
    if (val.is_finite() && w.dot(v) - val.value() > best) {
      best = w.dot(v) - val.value();
      if (argmax) *argmax = v;
    }
    // odometer increment
    Eigen::Index i = 0;
    for (; i < d; ++i) {
      if (++idx[static_cast<size_t>(i)] < oracle.points_per_axis) break;
      idx[static_cast<size_t>(i)] = 0;
    }
    if (i == d) break;
  }
  return best;
}

// ---- return-mapping reference integrator ----------------------------

namespace {

Trajectory oracle_maxwell(const ModelSpec& spec, const TimeGrid& grid) {
  const double e_mod = spec.stiffness, eta = spec.viscosity, ell = spec.length;
  double eps_i = spec.initial_position.size() ? spec.initial_position[0] : 0.0;
  double pi = spec.initial_momentum.size() ? spec.initial_momentum[0] : 0.0;
  std::vector<PhaseVector> states;
  auto push = [&] {
    Vector x(1), y(1);
    x[0] = eps_i;
    y[0] = pi;
    states.emplace_back(x, y);
  };
  push();
  for (size_t k = 1; k < grid.size(); ++k) {
    const double dt = grid.dt(k);
    const double eps_bar = spec.displacement.value(grid.t(k)) / ell;
    // implicit Euler on eps_I-dot = sigma / eta, sigma = E (eps_bar - eps_I)
    eps_i = (eps_i + dt * e_mod * eps_bar / eta) / (1.0 + dt * e_mod / eta);
    pi += dt * e_mod * (eps_bar - eps_i);
    push();
  }
  return Trajectory(grid, std::move(states));
}

Trajectory oracle_elastoplastic(const ModelSpec& spec, const TimeGrid& grid) {
  const double m = spec.mass, e_mod = spec.stiffness, sy = spec.yield_stress;
  Vector x0 = spec.initial_position.size() ? spec.initial_position : Vector::Zero(2);
  Vector y0 = spec.initial_momentum.size() ? spec.initial_momentum : Vector::Zero(2);
  double u = x0[0], e = x0[1], p = y0[0], pi = y0[1];
  std::vector<PhaseVector> states;
  auto push = [&] {
    Vector x(2), y(2);
    x << u, e;
    y << p, pi;
    states.emplace_back(x, y);
  };
  push();
  for (size_t k = 1; k < grid.size(); ++k) {
    const double dt = grid.dt(k);
    const double f = spec.load.value(grid.t(k));
    auto mapped_stress = [&](double u_new) {
      return std::clamp(e_mod * (u_new - e), -sy, sy);
    };
    // implicit Euler: u = u_old + dt p/m, p = p_old + dt (f - sigma(u));
    // g is strictly increasing in u, solved by bisection
    auto g = [&](double u_new) {
      return u_new - u - (dt / m) * (p + dt * (f - mapped_stress(u_new)));
    };
    double lo = u, hi = u;
    const double span = (dt / m) * (std::abs(p) + dt * (std::abs(f) + sy)) + dt;
    lo -= span;
    hi += span;
    while (g(lo) > 0) lo -= span;
    while (g(hi) < 0) hi += span;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) <= 0 ? lo : hi) = mid;
      if (hi - lo < 1e-15 * (1.0 + std::abs(mid))) break;
    }
    u = 0.5 * (lo + hi);
    const double sigma = mapped_stress(u);
    p += dt * (f - sigma);
    e = u - sigma / e_mod;  // plastic corrector leaves sigma = E (u - e)
    pi += dt * sigma;
    push();
  }
  return Trajectory(grid, std::move(states));
}

Trajectory oracle_bar_chain(const ModelSpec& spec, const TimeGrid& grid) {
  const int ne = spec.elements;
  const double e_mod = spec.stiffness, sy = spec.yield_stress;
  const double h = spec.length / ne;
  Vector masses = Vector::Constant(ne, spec.density * h);
  masses[ne - 1] *= 0.5;
  Vector x = spec.initial_position.size() ? spec.initial_position
                                          : Vector::Zero(2 * ne);
  Vector y = spec.initial_momentum.size() ? spec.initial_momentum
                                          : Vector::Zero(2 * ne);
  Vector u = x.head(ne), e = x.tail(ne), p = y.head(ne), pi = y.tail(ne);

  std::vector<PhaseVector> states;
  auto push = [&] {
    Vector xx(2 * ne), yy(2 * ne);
    xx << u, e;
    yy << p, pi;
    states.emplace_back(xx, yy);
  };
  push();

  auto mapped_stresses = [&](const Vector& u_new) {
    Vector s(ne);
    for (int j = 0; j < ne; ++j) {
      const double du = u_new[j] - (j > 0 ? u_new[j - 1] : 0.0);
      s[j] = std::clamp((e_mod / h) * (du - e[j]), -sy, sy);
    }
    return s;
  };
  auto forces = [&](const Vector& s, double f) {
    Vector out(ne);
    for (int i = 0; i < ne; ++i) {
      out[i] = (i + 1 < ne ? s[i + 1] : 0.0) - s[i];
      if (i == ne - 1) out[i] += f;
    }
    return out;
  };

  for (size_t k = 1; k < grid.size(); ++k) {
    const double dt = grid.dt(k);
    const double f = spec.load.value(grid.t(k));
    auto residual = [&](const Vector& u_new) -> Vector {
      const Vector s = mapped_stresses(u_new);
      const Vector fr = forces(s, f);
      return u_new - u -
             dt * (p + dt * fr).cwiseQuotient(masses);
    };
    Vector un = u + dt * p.cwiseQuotient(masses);
    for (int it = 0; it < 200; ++it) {
      const Vector r = residual(un);
      if (r.norm() <= 1e-13 * (1.0 + un.norm())) break;
      Matrix jac(ne, ne);
      for (int j = 0; j < ne; ++j) {
        const double step = 1e-7 * (1.0 + std::abs(un[j]));
        Vector pert = un;
        pert[j] += step;
        jac.col(j) = (residual(pert) - r) / step;
      }
      Vector delta = jac.fullPivLu().solve(-r);
      double alpha = 1.0;
      for (int ls = 0; ls < 40; ++ls) {
        if (residual(un + alpha * delta).norm() < r.norm()) break;
        alpha *= 0.5;
      }
      un += alpha * delta;
    }
    u = un;
    const Vector s = mapped_stresses(u);
    p += dt * forces(s, f);
    for (int j = 0; j < ne; ++j) {
      const double du = u[j] - (j > 0 ? u[j - 1] : 0.0);
      e[j] = du - h * s[j] / e_mod;  // corrector keeps sigma on the yield set
      pi[j] += dt * s[j];
    }
    push();
  }
  return Trajectory(grid, std::move(states));
}

Trajectory oracle_quasistatic(const ModelSpec& spec, const TimeGrid& grid) {
  const int ne = spec.elements;
  const double e_mod = spec.stiffness, sy = spec.yield_stress;
  const double h = spec.length / ne;
  double eps_i = 0.0, pi = 0.0;
  std::vector<PhaseVector> states;
  auto push = [&](double eps_bar) {
    Vector xx(2 * ne), yy = Vector::Zero(2 * ne);
    for (int i = 0; i < ne; ++i) {
      xx[i] = (i + 1) * h * eps_bar;  // uniform strain
      xx[ne + i] = h * eps_i;
      yy[ne + i] = pi;
    }
    states.emplace_back(xx, yy);
  };
  push(spec.displacement.value(grid.t(0)) / spec.length);
  for (size_t k = 1; k < grid.size(); ++k) {
    const double eps_bar = spec.displacement.value(grid.t(k)) / spec.length;
    double sigma = std::clamp(e_mod * (eps_bar - eps_i), -sy, sy);
    eps_i = eps_bar - sigma / e_mod;
    pi += grid.dt(k) * sigma;
    push(eps_bar);
  }
  return Trajectory(grid, std::move(states));
}

}  // namespace

Trajectory return_mapping_oracle(const ModelSpec& spec, const TimeGrid& grid) {
  switch (spec.kind) {
    case ModelSpec::Kind::MaxwellElement:
      return oracle_maxwell(spec, grid);
    case ModelSpec::Kind::ElastoplasticOscillator:
      return oracle_elastoplastic(spec, grid);
    case ModelSpec::Kind::BarChain:
      return oracle_bar_chain(spec, grid);
    case ModelSpec::Kind::QuasiStaticBar:
      return oracle_quasistatic(spec, grid);
    default:
      throw std::invalid_argument(
          "return_mapping_oracle: supported kinds are MaxwellElement, "
          "ElastoplasticOscillator, BarChain, QuasiStaticBar");
  }
}

// ---- gradient checks -------------------------------------------------

double fd_gradient_check(const Observable& f,
                         const std::vector<std::pair<double, PhaseVector>>& samples) {
  double worst = 0.0;
  for (const auto& [t, z] : samples) {
    const Vector zf = z.flat();
    const Vector analytic = f.gradient(t, z).flat();
    Vector fd(zf.size());
    for (Eigen::Index j = 0; j < zf.size(); ++j) {
      const double step = 1e-6 * (1.0 + std::abs(zf[j]));
      Vector hi = zf, lo = zf;
      hi[j] += step;
      lo[j] -= step;
      fd[j] = (f.evaluate(t, PhaseVector::from_flat(hi)) -
               f.evaluate(t, PhaseVector::from_flat(lo))) /
              (2.0 * step);
    }
    worst = std::max(worst, (fd - analytic).norm() / (1.0 + analytic.norm()));
  }
  return worst;
}

double fd_gradient_check(const HamiltonianModel& h,
                         const std::vector<std::pair<double, PhaseVector>>& samples) {
  return fd_gradient_check(h.as_observable(), samples);
}

// ---- symplectomorphism invariance -----------------------------------

InvarianceReport invariance_harness(const HamiltonianModel& h, const Potential& p,
                                    const PhaseVector& z0, const TimeGrid& grid,
                                    double theta, const SolverOptions& opts) {
  const Matrix psi = symplectic_rotation(theta, z0.dim());
  const HamiltonianModel ht = transform_model(h, psi);
  const Potential pt = p.congruence_transform(psi);
  const PhaseVector z0t = PhaseVector::from_flat(psi * z0.flat());

  const auto [base, base_rep] = incremental_solve(h, p, z0, grid, opts);
  const auto [rot, rot_rep] = incremental_solve(ht, pt, z0t, grid, opts);
  (void)rot_rep;

  InvarianceReport rep;
  rep.tol = 10.0 * base_rep.step_tol;
  for (size_t k = 0; k < grid.size(); ++k) {
    const Vector mapped = psi * base.state(k).flat();
    rep.max_deviation =
        std::max(rep.max_deviation, (mapped - rot.state(k).flat()).norm());
  }
  rep.pass = rep.max_deviation <= rep.tol;
  return rep;
}

}  // namespace sben
