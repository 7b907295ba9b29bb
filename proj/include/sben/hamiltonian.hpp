#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sben/grid.hpp"
#include "sben/phase.hpp"

namespace sben {

/// Time-dependent scalar load with analytic time derivative, so that
/// dH/dt is exact (the action integral needs it free of differentiation
/// noise).
class LoadCurve {
public:
  static LoadCurve constant(double value);
  /// Piecewise linear through (t_i, v_i); clamps to end values outside
  /// the table. Breakpoints must be strictly increasing.
  static LoadCurve piecewise_linear(std::vector<double> times, std::vector<double> values);
  /// amplitude * sin(angular_frequency * t + phase) + offset
  static LoadCurve sinusoidal(double amplitude, double angular_frequency,
                              double phase = 0.0, double offset = 0.0);

  double value(double t) const;
  double derivative(double t) const;

private:
  enum class Kind { Constant, PiecewiseLinear, Sinusoidal };
  Kind kind_ = Kind::Constant;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;
  std::vector<double> times_, values_;
};

/// Hamiltonian H(t,z) with analytic gradient DH and exact partial time
/// derivative, plus model metadata (mass, stiffness, ...).
struct HamiltonianModel {
  Eigen::Index dimension = 0;  // n; the phase space is 2n-dimensional
  std::function<double(double, const PhaseVector&)> evaluate;
  std::function<PhaseVector(double, const PhaseVector&)> gradient;
  std::function<double(double, const PhaseVector&)> time_derivative =
      [](double, const PhaseVector&) { return 0.0; };
  std::map<std::string, double> metadata;

  Observable as_observable() const {
    return Observable{evaluate, gradient, time_derivative};
  }
};

/// XH(t,z) = -J DH(t,z).
PhaseVector symp_grad_H(const HamiltonianModel& h, double t, const PhaseVector& z);

/// Split a rate into (zdot_R, zdot_I) with zdot_R = XH(t,z).
std::pair<PhaseVector, PhaseVector> decompose_rate(const HamiltonianModel& h,
                                                   double t, const PhaseVector& z,
                                                   const PhaseVector& zdot);

/// d/dt H(t,z(t)) = dH/dt + omega(XH, zdot) along a curve with rate zdot.
double dH_along(const HamiltonianModel& h, double t, const PhaseVector& z,
                const PhaseVector& zdot);

/// Pure-Hamiltonian reference integrator: implicit midpoint rule,
/// Newton-solved to 1e-12 (at most 50 iterations per step). Symplectic
/// and second order.
Trajectory conservative_flow(const HamiltonianModel& h, const PhaseVector& z0,
                             const TimeGrid& grid);

/// Apply a linear phase-space map to a model: H'(t,z) = H(t, Psi^{-1} z).
HamiltonianModel transform_model(const HamiltonianModel& h, const Matrix& psi);

/// Blockwise symplectic rotation (q,p) -> (q cos + p sin, -q sin + p cos)
/// as a 2n x 2n matrix.
Matrix symplectic_rotation(double theta, Eigen::Index n);

}  // namespace sben
