#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "sben/extreal.hpp"
#include "sben/grid.hpp"
#include "sben/hamiltonian.hpp"
#include "sben/potential.hpp"

namespace sben {

struct SolverOptions {
  /// Per-step gap tolerance, relative to 1 + |H(0,z0)|.
  double step_tol_rel = 1e-8;
  /// Action certificate tolerance, relative to 1 + |H(0,z0)|.
  double certificate_tol_rel = 1e-6;
  /// Iteration budget per time step (Newton + damped fallback combined).
  int max_iter = 500;
  /// Sweep budget for the global minimizer.
  int max_sweeps = 200;
  /// Relative per-sweep decrease below which the global minimizer stops.
  double sweep_tol_rel = 1e-10;
  /// Prox scaling in the step residual reformulation.
  double prox_lambda = 1.0;
};

/// Residuals of a discrete evolution against the BEN optimality
/// conditions, under the solver's evaluation convention.
struct BenReport {
  std::vector<ExtReal> step_gap;          // k = 1..N
  std::vector<ExtReal> dissipation_rate;  // phi(zdot) + phi^{*w}(zdot_I), k = 1..N
  ExtReal action;                         // discrete Pi
  double hamiltonian_initial = 0.0;       // H(0, z0)
  double step_tol = 0.0;
  double certificate_tol = 0.0;
  bool converged = false;  // every finite step gap <= step_tol
  bool certified = false;  // converged and Pi - H(0,z0) <= certificate_tol
  ExtReal certificate_gap;  // Pi - H(0,z0)
  int sweeps_used = 0;      // global solver only

  double max_step_gap() const {
    double m = 0.0;
    for (const ExtReal& g : step_gap)
      m = std::max(m, g.is_finite() ? g.value() : std::numeric_limits<double>::infinity());
    return m;
  }
};

/// Hamiltonian vector field evaluated per the solver convention for step
/// k of a trajectory: at the midpoint state with time-trapezoid gradient
/// averaging on smooth coordinates (this makes the discrete energy
/// telescoping exact for quadratic H with linearly entering loads), and
/// at the right endpoint on coordinates carrying indicator constraints
/// (so that the constraints bind on grid states).
PhaseVector blended_field(const HamiltonianModel& h, const Potential& p,
                          const Trajectory& traj, size_t k);
PhaseVector blended_field(const HamiltonianModel& h, const std::vector<bool>& hard,
                          double t_prev, double t_end, const PhaseVector& z_mid,
                          const PhaseVector& z_end);

/// Per-step quadrature of the explicit-time work integral of H over
/// step k: H(t_k, z_mid) - H(t_{k-1}, z_mid), i.e. the dH/dt integral
/// at the frozen midpoint state (exact in t).
double time_work(const HamiltonianModel& h, const Trajectory& traj, size_t k);

/// Pointwise BEN residual phi(zdot) + phi^{*w}(zdot - XH) - omega(zdot_I, zdot)
/// at (t, z). Zero (up to tol) exactly when zdot - XH(t,z) lies in the
/// symplectic subdifferential of phi at zdot.
ExtReal step_residual(const HamiltonianModel& h, const Potential& p, double t,
                      const PhaseVector& z, const PhaseVector& zdot);

/// Discrete action Pi = sum_k dt [phi + phi^{*w} - dH/dt] + H(T, z_N),
/// with rates as backward differences and the blended field convention.
ExtReal action_value(const HamiltonianModel& h, const Potential& p,
                     const Trajectory& traj);

/// Residual report for an arbitrary trajectory.
BenReport make_report(const HamiltonianModel& h, const Potential& p,
                      const Trajectory& traj, const SolverOptions& opts = {});

/// Step-by-step solver for the discrete differential inclusion
/// zdot - XH in symp-subdiff phi(zdot). Each step solves the
/// prox-reformulated residual by semismooth Newton with a damped
/// fixed-point fallback; the BEN gap is the convergence certificate.
std::pair<Trajectory, BenReport> incremental_solve(const HamiltonianModel& h,
                                                   const Potential& p,
                                                   const PhaseVector& z0,
                                                   const TimeGrid& grid,
                                                   const SolverOptions& opts = {});

/// Space-time minimizer of the discrete action over all states with z_0
/// fixed. Works in the reduced coordinates d_k spanning the effective
/// domain of phi^{*w} (all other directions are pinned by the indicator
/// part of the polar), sweeping proximal-gradient updates over the
/// steps. Budget exhaustion is reported through the certificate flags,
/// not an exception.
std::pair<Trajectory, BenReport> global_solve(const HamiltonianModel& h,
                                              const Potential& p,
                                              const PhaseVector& z0,
                                              const TimeGrid& grid,
                                              const SolverOptions& opts = {},
                                              const std::optional<Trajectory>& init =
                                                  std::nullopt);

// ---- balance and inequality diagnostics -----------------------------

/// Dissipation balance defect at every node tau = t_k:
/// int_0^tau [phi + phi^{*w}] dt - { H(0,z0) - H(tau,z(tau)) + int_0^tau dH/dt }.
std::vector<ExtReal> energy_balance(const HamiltonianModel& h, const Potential& p,
                                    const Trajectory& traj);

/// Per-step defect of phi(zdot_I) >= d/dt H - dH/dt + phi(zdot).
/// +inf when phi(zdot_I) is infinite (vacuously satisfied).
std::vector<ExtReal> dissipation_inequality(const HamiltonianModel& h,
                                            const Potential& p,
                                            const Trajectory& traj);

/// Per-step defect of the variational inequality
/// phi(zdot - Xf) >= d/dt f - df/dt + omega(XH, Xf) + phi(zdot).
std::vector<ExtReal> variational_inequality_check(const HamiltonianModel& h,
                                                  const Potential& p,
                                                  const Trajectory& traj,
                                                  const Observable& f);

/// Per-step defect of phi(zdot - Xf) >= omega(Xf, zdot) + phi(zdot) for
/// an integral of motion f; throws when |{f,H}| exceeds 1e-9 along the
/// trajectory.
std::vector<ExtReal> integral_of_motion_check(const HamiltonianModel& h,
                                              const Potential& p,
                                              const Trajectory& traj,
                                              const Observable& f);

/// Scalar defect of the time-integrated inequality
/// int [phi(zdot - Xf) - phi(zdot)] dt
///   - { f(T,z(T)) - f(0,z(0)) + int [{H,f} - df/dt] dt }.
ExtReal time_integrated_inequality(const HamiltonianModel& h, const Potential& p,
                                   const Trajectory& traj, const Observable& f);

}  // namespace sben
