#include "sben/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sben/errors.hpp"

namespace sben {

// ---- LoadCurve ------------------------------------------------------

LoadCurve LoadCurve::constant(double value) {
  LoadCurve c;
  c.kind_ = Kind::Constant;
  c.a_ = value;
  return c;
}

LoadCurve LoadCurve::piecewise_linear(std::vector<double> times,
                                      std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("LoadCurve: need >= 2 matching breakpoints");
  for (size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw std::invalid_argument("LoadCurve: breakpoints must be strictly increasing");
  LoadCurve c;
  c.kind_ = Kind::PiecewiseLinear;
  c.times_ = std::move(times);
  c.values_ = std::move(values);
  return c;
}

LoadCurve LoadCurve::sinusoidal(double amplitude, double angular_frequency,
                                double phase, double offset) {
  LoadCurve c;
  c.kind_ = Kind::Sinusoidal;
  c.a_ = amplitude;
  c.b_ = angular_frequency;
  c.c_ = phase;
  c.d_ = offset;
  return c;
}

double LoadCurve::value(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return a_;
    case Kind::Sinusoidal:
      return a_ * std::sin(b_ * t + c_) + d_;
    case Kind::PiecewiseLinear: {
      if (t <= times_.front()) return values_.front();
      if (t >= times_.back()) return values_.back();
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      size_t i = static_cast<size_t>(it - times_.begin());
      double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
      return (1.0 - w) * values_[i - 1] + w * values_[i];
    }
  }
  return 0.0;
}

double LoadCurve::derivative(double t) const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::Sinusoidal:
      return a_ * b_ * std::cos(b_ * t + c_);
    case Kind::PiecewiseLinear: {
      if (t <= times_.front() || t >= times_.back()) return 0.0;
      auto it = std::upper_bound(times_.begin(), times_.end(), t);
      size_t i = static_cast<size_t>(it - times_.begin());
      return (values_[i] - values_[i - 1]) / (times_[i] - times_[i - 1]);
    }
  }
  return 0.0;
}

// ---- Hamiltonian operations ----------------------------------------

PhaseVector symp_grad_H(const HamiltonianModel& h, double t, const PhaseVector& z) {
  return jinv(h.gradient(t, z));  // -J DH
}

std::pair<PhaseVector, PhaseVector> decompose_rate(const HamiltonianModel& h,
                                                   double t, const PhaseVector& z,
                                                   const PhaseVector& zdot) {
  PhaseVector zr = symp_grad_H(h, t, z);
  return {zr, zdot - zr};
}

double dH_along(const HamiltonianModel& h, double t, const PhaseVector& z,
                const PhaseVector& zdot) {
  return h.time_derivative(t, z) + omega(symp_grad_H(h, t, z), zdot);
}

Trajectory conservative_flow(const HamiltonianModel& h, const PhaseVector& z0,
                             const TimeGrid& grid) {
  const Eigen::Index m = 2 * z0.dim();
  std::vector<PhaseVector> states;
  states.reserve(grid.size());
  states.push_back(z0);

  for (size_t k = 1; k < grid.size(); ++k) {
    const double dt = grid.dt(k);
    const double tm = 0.5 * (grid.t(k) + grid.t(k - 1));
    const Vector prev = states.back().flat();

    // residual of the implicit midpoint step
    auto residual = [&](const Vector& cur) -> Vector {
      PhaseVector mid = PhaseVector::from_flat(0.5 * (prev + cur));
      return cur - prev - dt * symp_grad_H(h, tm, mid).flat();
    };

    Vector cur = prev + dt * symp_grad_H(h, grid.t(k - 1), states.back()).flat();
    bool done = false;
    for (int it = 0; it < 50; ++it) {
      Vector r = residual(cur);
      const double scale = 1.0 + cur.norm();
      if (r.norm() <= 1e-12 * scale) {
        done = true;
        break;
      }
      // finite-difference Jacobian of the residual
      Matrix jac(m, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        const double step = 1e-7 * (1.0 + std::abs(cur[j]));
        Vector pert = cur;
        pert[j] += step;
        jac.col(j) = (residual(pert) - r) / step;
      }
      Vector delta = jac.partialPivLu().solve(-r);
      if (!delta.allFinite())
        throw SolveError(k, r.norm(), "conservative_flow: singular Newton system");
      cur += delta;
    }
    if (!done)
      throw SolveError(k, residual(cur).norm(),
                       "conservative_flow: Newton did not converge");
    states.push_back(PhaseVector::from_flat(cur));
  }
  return Trajectory(grid, std::move(states));
}

HamiltonianModel transform_model(const HamiltonianModel& h, const Matrix& psi) {
  if (psi.rows() != 2 * h.dimension || psi.cols() != 2 * h.dimension)
    throw std::invalid_argument("transform_model: Psi must be 2n x 2n");
  Matrix psi_inv = psi.inverse();
  HamiltonianModel out;
  out.dimension = h.dimension;
  out.metadata = h.metadata;
  out.evaluate = [h, psi_inv](double t, const PhaseVector& z) {
    return h.evaluate(t, PhaseVector::from_flat(psi_inv * z.flat()));
  };
  out.gradient = [h, psi_inv](double t, const PhaseVector& z) {
    PhaseVector g = h.gradient(t, PhaseVector::from_flat(psi_inv * z.flat()));
    return PhaseVector::from_flat(psi_inv.transpose() * g.flat());
  };
  out.time_derivative = [h, psi_inv](double t, const PhaseVector& z) {
    return h.time_derivative(t, PhaseVector::from_flat(psi_inv * z.flat()));
  };
  return out;
}

Matrix symplectic_rotation(double theta, Eigen::Index n) {
  Matrix psi = Matrix::Zero(2 * n, 2 * n);
  const double c = std::cos(theta), s = std::sin(theta);
  for (Eigen::Index i = 0; i < n; ++i) {
    psi(i, i) = c;
    psi(i, n + i) = s;
    psi(n + i, i) = -s;
    psi(n + i, n + i) = c;
  }
  return psi;
}

}  // namespace sben
