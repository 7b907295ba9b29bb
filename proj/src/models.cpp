#include "sben/models.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sben {

namespace {

void require(bool cond, const std::string& field, const std::string& why) {
  if (!cond) throw std::invalid_argument("ModelSpec: " + field + " " + why);
}

bool is_plastic(ModelSpec::Kind k) {
  return k == ModelSpec::Kind::ElastoplasticOscillator ||
         k == ModelSpec::Kind::BarChain || k == ModelSpec::Kind::QuasiStaticBar;
}

Vector default_or(const Vector& given, Eigen::Index n, const Vector& fallback,
                  const std::string& field) {
  if (given.size() == 0) return fallback;
  if (given.size() != n)
    throw std::invalid_argument("ModelSpec: " + field + " must have dimension " +
                                std::to_string(n));
  return given;
}

/// Lumped nodal masses of the clamped bar: interior nodes carry a full
/// element mass rho h, the free end half of one.
Vector bar_masses(const ModelSpec& spec) {
  const int ne = spec.elements;
  const double h = spec.length / ne;
  Vector m = Vector::Constant(ne, spec.density * h);
  m[ne - 1] = 0.5 * spec.density * h;
  return m;
}

}  // namespace

void ModelSpec::validate() const {
  require(mass > 0, "mass", "must be positive");
  require(stiffness > 0, "stiffness", "must be positive");
  require(density > 0, "density", "must be positive");
  require(length > 0, "length", "must be positive");
  require(elements >= 1, "elements", "must be >= 1");
  require(dof == 1 || dof == 2, "dof", "must be 1 or 2");
  if (kind == Kind::MaxwellElement)
    require(viscosity > 0, "viscosity", "must be positive");
  if (is_plastic(kind))
    require(yield_stress > 0, "yield_stress", "must be positive");
  Eigen::Index n = 0;
  switch (kind) {
    case Kind::HarmonicOscillator: n = dof; break;
    case Kind::MaxwellElement: n = 1; break;
    case Kind::ElastoplasticOscillator: n = 2; break;
    case Kind::BarChain:
    case Kind::QuasiStaticBar: n = 2 * elements; break;
  }
  require(initial_position.size() == 0 || initial_position.size() == n,
          "initial_position", "wrong dimension for this model kind");
  require(initial_momentum.size() == 0 || initial_momentum.size() == n,
          "initial_momentum", "wrong dimension for this model kind");
}

BuiltModel build(const ModelSpec& spec) {
  spec.validate();
  BuiltModel out{HamiltonianModel{}, Potential::zero(2), PhaseVector::zero(1)};

  switch (spec.kind) {
    case ModelSpec::Kind::HarmonicOscillator: {
      const Eigen::Index n = spec.dof;
      const double m = spec.mass, k = spec.stiffness;
      const LoadCurve f = spec.load;
      out.hamiltonian.dimension = n;
      out.hamiltonian.evaluate = [m, k, f](double t, const PhaseVector& z) {
        return z.y().squaredNorm() / (2.0 * m) + 0.5 * k * z.x().squaredNorm() -
               f.value(t) * z.x()[0];
      };
      out.hamiltonian.gradient = [m, k, f](double t, const PhaseVector& z) {
        Vector dx = k * z.x();
        dx[0] -= f.value(t);
        return PhaseVector(dx, z.y() / m);
      };
      out.hamiltonian.time_derivative = [f](double t, const PhaseVector& z) {
        return -f.derivative(t) * z.x()[0];
      };
      out.hamiltonian.metadata = {{"mass", m}, {"stiffness", k}};
      out.potential = Potential::zero(2 * n);
      Vector q = Vector::Zero(n);
      q[0] = 1.0;
      out.initial_state =
          PhaseVector(default_or(spec.initial_position, n, q, "initial_position"),
                      default_or(spec.initial_momentum, n, Vector::Zero(n),
                                 "initial_momentum"));
      break;
    }

    case ModelSpec::Kind::MaxwellElement: {
      const double e_mod = spec.stiffness, ell = spec.length;
      const LoadCurve ubar = spec.displacement;  // imposed end displacement
      out.hamiltonian.dimension = 1;
      auto sigma = [e_mod, ell, ubar](double t, const PhaseVector& z) {
        return e_mod * (ubar.value(t) / ell - z.x()[0]);
      };
      out.hamiltonian.evaluate = [e_mod, sigma](double t, const PhaseVector& z) {
        const double s = sigma(t, z);
        return s * s / (2.0 * e_mod);
      };
      out.hamiltonian.gradient = [sigma](double t, const PhaseVector& z) {
        Vector dx(1), dy(1);
        dx[0] = -sigma(t, z);
        dy[0] = 0.0;
        return PhaseVector(dx, dy);
      };
      out.hamiltonian.time_derivative = [ell, ubar, sigma](double t,
                                                           const PhaseVector& z) {
        return sigma(t, z) * ubar.derivative(t) / ell;
      };
      out.hamiltonian.metadata = {{"stiffness", e_mod},
                                  {"viscosity", spec.viscosity},
                                  {"relaxation_time", spec.viscosity / e_mod}};
      Matrix a = Matrix::Zero(2, 2);
      a(1, 1) = 1.0 / spec.viscosity;  // phi = pi-dot^2 / (2 eta)
      out.potential = Potential::quadratic(a);
      out.initial_state = PhaseVector(
          default_or(spec.initial_position, 1, Vector::Zero(1), "initial_position"),
          default_or(spec.initial_momentum, 1, Vector::Zero(1), "initial_momentum"));
      break;
    }

    case ModelSpec::Kind::ElastoplasticOscillator: {
      const double m = spec.mass, e_mod = spec.stiffness;
      const LoadCurve f = spec.load;
      out.hamiltonian.dimension = 2;  // x = (u, e), y = (p, pi)
      out.hamiltonian.evaluate = [m, e_mod, f](double t, const PhaseVector& z) {
        const double el = z.x()[0] - z.x()[1];
        return z.y()[0] * z.y()[0] / (2.0 * m) + 0.5 * e_mod * el * el -
               f.value(t) * z.x()[0];
      };
      out.hamiltonian.gradient = [m, e_mod, f](double t, const PhaseVector& z) {
        const double s = e_mod * (z.x()[0] - z.x()[1]);
        Vector dx(2), dy(2);
        dx << s - f.value(t), -s;
        dy << z.y()[0] / m, 0.0;
        return PhaseVector(dx, dy);
      };
      out.hamiltonian.time_derivative = [f](double t, const PhaseVector& z) {
        return -f.derivative(t) * z.x()[0];
      };
      out.hamiltonian.metadata = {{"mass", m},
                                  {"stiffness", e_mod},
                                  {"yield_stress", spec.yield_stress}};
      // phi(zdot) = indicator of |pi-dot| <= sigma_y; flat coordinate 3
      out.potential = Potential::separable_sum(
          {{Potential::indicator_box(-spec.yield_stress, spec.yield_stress, 1), {3}}},
          4);
      out.initial_state = PhaseVector(
          default_or(spec.initial_position, 2, Vector::Zero(2), "initial_position"),
          default_or(spec.initial_momentum, 2, Vector::Zero(2), "initial_momentum"));
      break;
    }

    case ModelSpec::Kind::BarChain: {
      const int ne = spec.elements;
      const Eigen::Index n = 2 * ne;  // x = (u, e), y = (p, pi)
      const double e_mod = spec.stiffness;
      const double h = spec.length / ne;
      const Vector masses = bar_masses(spec);
      const LoadCurve f = spec.load;
      // element stress from the state: sigma_e = (E/h)(du_e - e_e)
      auto stresses = [ne, e_mod, h](const PhaseVector& z) {
        Vector s(ne);
        for (int e = 0; e < ne; ++e) {
          const double du = z.x()[e] - (e > 0 ? z.x()[e - 1] : 0.0);
          s[e] = (e_mod / h) * (du - z.x()[ne + e]);
        }
        return s;
      };
      out.hamiltonian.dimension = n;
      out.hamiltonian.evaluate = [ne, e_mod, h, masses, f, stresses](
                                     double t, const PhaseVector& z) {
        double val = 0.0;
        const Vector s = stresses(z);
        for (int e = 0; e < ne; ++e) {
          val += z.y()[e] * z.y()[e] / (2.0 * masses[e]);
          val += 0.5 * (h / e_mod) * s[e] * s[e];  // (E/2h)(du - e)^2
        }
        return val - f.value(t) * z.x()[ne - 1];
      };
      out.hamiltonian.gradient = [ne, masses, f, stresses](double t,
                                                           const PhaseVector& z) {
        const Vector s = stresses(z);
        Vector dx = Vector::Zero(2 * ne), dy = Vector::Zero(2 * ne);
        for (int i = 0; i < ne; ++i) {
          dx[i] = s[i] - (i + 1 < ne ? s[i + 1] : 0.0);
          dx[ne + i] = -s[i];
          dy[i] = z.y()[i] / masses[i];
        }
        dx[ne - 1] -= f.value(t);
        return PhaseVector(dx, dy);
      };
      out.hamiltonian.time_derivative = [ne, f](double t, const PhaseVector& z) {
        return -f.derivative(t) * z.x()[ne - 1];
      };
      out.hamiltonian.metadata = {{"stiffness", e_mod},
                                  {"yield_stress", spec.yield_stress},
                                  {"element_length", h},
                                  {"elements", static_cast<double>(ne)}};
      // indicator |pi-dot_e| <= sigma_y on flat coordinates 3 ne .. 4 ne - 1
      out.potential = Potential::separable_sum(
          {{Potential::indicator_box(-spec.yield_stress, spec.yield_stress, ne),
            [&] {
              std::vector<Eigen::Index> c;
              for (int e = 0; e < ne; ++e) c.push_back(3 * ne + e);
              return c;
            }()}},
          4 * ne);
      out.initial_state = PhaseVector(
          default_or(spec.initial_position, n, Vector::Zero(n), "initial_position"),
          default_or(spec.initial_momentum, n, Vector::Zero(n), "initial_momentum"));
      break;
    }

    case ModelSpec::Kind::QuasiStaticBar:
      throw std::invalid_argument(
          "build: QuasiStaticBar has no dynamic Hamiltonian; use "
          "quasistatic_ben_solve");
  }
  return out;
}

Vector element_stresses(const ModelSpec& spec, double t, const PhaseVector& z) {
  switch (spec.kind) {
    case ModelSpec::Kind::HarmonicOscillator:
      return spec.stiffness * z.x();
    case ModelSpec::Kind::MaxwellElement: {
      Vector s(1);
      s[0] = spec.stiffness * (spec.displacement.value(t) / spec.length - z.x()[0]);
      return s;
    }
    case ModelSpec::Kind::ElastoplasticOscillator: {
      Vector s(1);
      s[0] = spec.stiffness * (z.x()[0] - z.x()[1]);
      return s;
    }
    case ModelSpec::Kind::BarChain:
    case ModelSpec::Kind::QuasiStaticBar: {
      // QuasiStaticBar oracle states share the BarChain layout.
      const int ne = spec.elements;
      const double h = spec.length / ne;
      Vector s(ne);
      for (int e = 0; e < ne; ++e) {
        const double du = z.x()[e] - (e > 0 ? z.x()[e - 1] : 0.0);
        s[e] = (spec.stiffness / h) * (du - z.x()[ne + e]);
      }
      return s;
    }
  }
  return Vector();
}

ConstraintDefects plasticity_constraints_defect(const ModelSpec& spec,
                                                const Trajectory& traj) {
  ConstraintDefects out;
  if (spec.kind == ModelSpec::Kind::ElastoplasticOscillator) {
    for (size_t k = 1; k <= traj.steps(); ++k) {
      const double t = traj.grid().t(k);
      const PhaseVector& z = traj.state(k);
      const PhaseVector v = traj.rate(k);
      const double sigma = element_stresses(spec, t, z)[0];
      out.momentum.push_back(std::abs(z.y()[0] - spec.mass * v.x()[0]));
      out.balance.push_back(std::abs(v.y()[0] - (spec.load.value(t) - sigma)));
      out.stress_rate.push_back(std::abs(v.y()[1] - sigma));
    }
    return out;
  }
  if (spec.kind == ModelSpec::Kind::BarChain) {
    const int ne = spec.elements;
    const Vector masses = bar_masses(spec);
    for (size_t k = 1; k <= traj.steps(); ++k) {
      const double t = traj.grid().t(k);
      const PhaseVector& z = traj.state(k);
      const PhaseVector v = traj.rate(k);
      const Vector sigma = element_stresses(spec, t, z);
      double dm = 0.0, db = 0.0, ds = 0.0;
      for (int i = 0; i < ne; ++i) {
        dm = std::max(dm, std::abs(z.y()[i] - masses[i] * v.x()[i]));
        double force = (i + 1 < ne ? sigma[i + 1] : 0.0) - sigma[i];
        if (i == ne - 1) force += spec.load.value(t);
        db = std::max(db, std::abs(v.y()[i] - force));
        ds = std::max(ds, std::abs(v.y()[ne + i] - sigma[i]));
      }
      out.momentum.push_back(dm);
      out.balance.push_back(db);
      out.stress_rate.push_back(ds);
    }
    return out;
  }
  throw std::invalid_argument(
      "plasticity_constraints_defect: model kind carries no plasticity constraints");
}

Observable angular_momentum_observable() {
  Observable f;
  f.evaluate = [](double, const PhaseVector& z) {
    if (z.dim() != 2)
      throw std::invalid_argument("angular_momentum_observable: needs n = 2");
    return z.x()[0] * z.y()[1] - z.x()[1] * z.y()[0];
  };
  f.gradient = [](double, const PhaseVector& z) {
    if (z.dim() != 2)
      throw std::invalid_argument("angular_momentum_observable: needs n = 2");
    Vector dx(2), dy(2);
    dx << z.y()[1], -z.y()[0];
    dy << -z.x()[1], z.x()[0];
    return PhaseVector(dx, dy);
  };
  return f;
}

// ---- quasi-static bar ------------------------------------------------

ExtReal quasistatic_objective(const ModelSpec& spec, const TimeGrid& grid,
                              const std::vector<double>& sigma) {
  if (sigma.size() != grid.size())
    throw std::invalid_argument("quasistatic_objective: sigma.size must equal grid size");
  const double e_mod = spec.stiffness, ell = spec.length, sy = spec.yield_stress;
  for (double s : sigma)
    if (std::abs(s) > sy * (1.0 + 1e-9)) return ExtReal::infinity();
  double val = 0.0;
  for (size_t k = 1; k < grid.size(); ++k) {
    const double deps = (spec.displacement.value(grid.t(k)) -
                         spec.displacement.value(grid.t(k - 1))) /
                        ell;
    const double dsig = sigma[k] - sigma[k - 1];
    val += ell * sy * std::abs(deps - dsig / e_mod) - ell * sigma[k] * deps;
  }
  val += 0.5 * (ell / e_mod) * sigma.back() * sigma.back();
  return ExtReal(val);
}

QuasiStaticResult quasistatic_ben_solve(const ModelSpec& spec, const TimeGrid& grid,
                                        const QuasiStaticOptions& opts) {
  if (spec.kind != ModelSpec::Kind::QuasiStaticBar)
    throw std::invalid_argument("quasistatic_ben_solve: spec.kind must be QuasiStaticBar");
  spec.validate();
  const double e_mod = spec.stiffness, ell = spec.length, sy = spec.yield_stress;
  const Eigen::Index n_steps = static_cast<Eigen::Index>(grid.steps());

  const double sigma0 = e_mod * spec.displacement.value(grid.t(0)) / ell;
  if (std::abs(sigma0) > sy * (1.0 + 1e-12))
    throw std::invalid_argument(
        "quasistatic_ben_solve: initial elastic stress violates the yield limit "
        "(infeasible static admissibility)");

  Vector deps(n_steps);
  for (Eigen::Index k = 0; k < n_steps; ++k)
    deps[k] = (spec.displacement.value(grid.t(k + 1)) -
               spec.displacement.value(grid.t(k))) /
              ell;

  // ADMM on: min c^T s + (1/2) s^T Q s + box(w1) + L sigma_y |w2|_1
  //          w1 = s,  w2 = deps - D s / E + sigma0 e_1 / E
  double rho = opts.admm_rho * ell * std::max(1.0, e_mod);
  Vector c = -ell * deps;
  Matrix quad = Matrix::Zero(n_steps, n_steps);
  quad(n_steps - 1, n_steps - 1) = ell / e_mod;

  // D s = first differences; M^T M = I + D^T D / E^2
  Matrix d_mat = Matrix::Identity(n_steps, n_steps);
  for (Eigen::Index k = 1; k < n_steps; ++k) d_mat(k, k - 1) = -1.0;
  Vector q2 = deps;
  q2[0] += sigma0 / e_mod;

  const Matrix mtm = Matrix::Identity(n_steps, n_steps) +
                     d_mat.transpose() * d_mat / (e_mod * e_mod);
  Eigen::LDLT<Matrix> factor(quad + rho * mtm);

  // Warm start from the incremental projection predictor (elastic step
  // clamped to the yield box); ADMM then mostly polishes.
  Vector s(n_steps);
  {
    double prev = sigma0;
    for (Eigen::Index k = 0; k < n_steps; ++k) {
      prev = std::clamp(prev + e_mod * deps[k], -sy, sy);
      s[k] = prev;
    }
  }
  Vector w1 = s, w2 = q2 - d_mat * s / e_mod;
  Vector u1 = Vector::Zero(n_steps), u2 = Vector::Zero(n_steps);
  const double scale = 1.0 + sy + std::abs(sigma0);
  double soft = ell * sy / rho;

  int iters = 0;
  for (; iters < opts.max_iter; ++iters) {
    // s-update: quadratic solve against the current split variables
    const Vector rhs = -c + rho * (w1 - u1) +
                       (rho / e_mod) * d_mat.transpose() * (q2 - w2 + u2);
    s = factor.solve(rhs);

    const Vector m2 = q2 - d_mat * s / e_mod;
    const Vector w1_old = w1, w2_old = w2;
    // Over-relaxation (alpha = 1.7) speeds up the tail convergence on
    // fine grids.
    const double alpha = 1.7;
    const Vector s_rel = alpha * s + (1.0 - alpha) * w1_old;
    const Vector m2_rel = alpha * m2 + (1.0 - alpha) * w2_old;
    w1 = (s_rel + u1).cwiseMax(-sy).cwiseMin(sy);
    const Vector v2 = m2_rel + u2;
    for (Eigen::Index k = 0; k < n_steps; ++k)
      w2[k] = std::copysign(std::max(std::abs(v2[k]) - soft, 0.0), v2[k]);
    u1 += s_rel - w1;
    u2 += m2_rel - w2;

    const double primal = std::max((s - w1).lpNorm<Eigen::Infinity>(),
                                   (m2 - w2).lpNorm<Eigen::Infinity>());
    const double dual = rho * std::max((w1 - w1_old).lpNorm<Eigen::Infinity>(),
                                       (w2 - w2_old).lpNorm<Eigen::Infinity>());
    if (primal <= opts.tol * scale && dual <= opts.tol * scale * rho) break;

    // Residual balancing: keep primal and dual progress comparable, which
    // is what actually limits TV-like splittings on fine grids.
    if (iters % 50 == 49) {
      if (primal > 10.0 * dual / rho) {
        rho *= 2.0;
        u1 *= 0.5;
        u2 *= 0.5;
        factor.compute(quad + rho * mtm);
        soft = ell * sy / rho;
      } else if (dual / rho > 10.0 * primal) {
        rho *= 0.5;
        u1 *= 2.0;
        u2 *= 2.0;
        factor.compute(quad + rho * mtm);
        soft = ell * sy / rho;
      }
    }
  }

  QuasiStaticResult res;
  res.iterations = iters;
  res.sigma.resize(static_cast<size_t>(n_steps) + 1);
  res.sigma[0] = sigma0;
  for (Eigen::Index k = 0; k < n_steps; ++k)
    res.sigma[static_cast<size_t>(k) + 1] = std::clamp(s[k], -sy, sy);
  const ExtReal obj = quasistatic_objective(spec, grid, res.sigma);
  res.objective = obj.value();  // clamped history, always finite
  // Discrete lower bound: summation by parts of -sigma dsigma/E gives
  // (L/2E)(sigma_0^2 - sum dsigma^2); the dsigma^2 correction vanishes
  // with the step size.
  double dsig2 = 0.0;
  for (size_t k = 1; k < res.sigma.size(); ++k) {
    const double d = res.sigma[k] - res.sigma[k - 1];
    dsig2 += d * d;
  }
  res.lower_bound = 0.5 * (ell / e_mod) * (sigma0 * sigma0 - dsig2);
  res.certificate = res.objective - res.lower_bound;
  return res;
}

ExtReal mixed_ben_objective(const ModelSpec& spec, const TimeGrid& grid,
                            const std::vector<Vector>& u,
                            const std::vector<Vector>& sigma) {
  if (u.size() != grid.size() || sigma.size() != grid.size())
    throw std::invalid_argument("mixed_ben_objective: histories must match grid size");
  const int ne = spec.elements;
  const double e_mod = spec.stiffness, sy = spec.yield_stress;
  const double h = spec.length / ne;
  for (const Vector& sk : sigma) {
    if (sk.size() != ne)
      throw std::invalid_argument("mixed_ben_objective: sigma entries must have n_e components");
    for (int e = 0; e < ne; ++e)
      if (std::abs(sk[e]) > sy * (1.0 + 1e-9)) return ExtReal::infinity();
  }
  auto strain = [&](size_t k, int e) {
    const double du = u[k][e] - (e > 0 ? u[k][e - 1] : 0.0);
    return du / h;
  };
  double val = 0.0;
  for (size_t k = 1; k < grid.size(); ++k) {
    if (u[k].size() != ne)
      throw std::invalid_argument("mixed_ben_objective: u entries must have n_e components");
    for (int e = 0; e < ne; ++e) {
      const double de = strain(k, e) - strain(k - 1, e);
      const double ds = sigma[k][e] - sigma[k - 1][e];
      val += h * sy * std::abs(de - ds / e_mod);
    }
    val -= spec.load.value(grid.t(k)) * (u[k][ne - 1] - u[k - 1][ne - 1]);
  }
  for (int e = 0; e < ne; ++e)
    val += 0.5 * (h / e_mod) * sigma.back()[e] * sigma.back()[e];
  return ExtReal(val);
}

}  // namespace sben
