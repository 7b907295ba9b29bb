#pragma once

#include <utility>
#include <vector>

#include "sben/ben.hpp"
#include "sben/models.hpp"

namespace sben {

/// Uniform sampling box for the brute-force conjugate. Deliberately
/// naive: the whole point is independence from the closed forms.
struct GridOracle {
  Vector lo, hi;
  int points_per_axis = 401;  // <= 401

  static GridOracle cube(double half_width, Eigen::Index dim, int points = 401) {
    return GridOracle{Vector::Constant(dim, -half_width),
                      Vector::Constant(dim, half_width), points};
  }
};

/// max over the grid of <<w, v>> - phi(v); a lower bound of phi*(w),
/// within a resolution bound of it when the box covers the relevant
/// features of the potential.
/// When argmax is non-null it receives the best grid point found, so
/// callers can refine the box around it (still oracle-only, no closed
/// forms involved).
double brute_force_conjugate(const Potential& p, const Vector& w,
                             const GridOracle& oracle, Vector* argmax = nullptr);

/// Classical reference integrator, sharing no code with the BEN solvers:
/// implicit Euler in the dynamic variables with an elastic-predictor /
/// plastic-corrector (return mapping) stress update; incremental statics
/// for the quasi-static bar (states laid out like BarChain with uniform
/// strain and zero momentum). pi is accumulated as the time integral of
/// sigma so states are comparable to the BEN phase trajectories.
Trajectory return_mapping_oracle(const ModelSpec& spec, const TimeGrid& grid);

/// Max relative error of the analytic gradient against central finite
/// differences (step 1e-6 (1+|z_j|)) over the samples (t, z).
double fd_gradient_check(const Observable& f,
                         const std::vector<std::pair<double, PhaseVector>>& samples);
double fd_gradient_check(const HamiltonianModel& h,
                         const std::vector<std::pair<double, PhaseVector>>& samples);

struct InvarianceReport {
  double max_deviation = 0.0;  // sup_k |Psi z_k - z'_k|
  double tol = 0.0;            // 10 x solver step tolerance
  bool pass = false;
};

/// Solves the problem and its image under the blockwise symplectic
/// rotation by theta, and compares Psi(trajectory) with the trajectory
/// of the transformed problem started at Psi z0.
InvarianceReport invariance_harness(const HamiltonianModel& h, const Potential& p,
                                    const PhaseVector& z0, const TimeGrid& grid,
                                    double theta, const SolverOptions& opts = {});

}  // namespace sben
