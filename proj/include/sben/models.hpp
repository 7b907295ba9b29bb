#pragma once

#include <vector>

#include "sben/ben.hpp"
#include "sben/hamiltonian.hpp"
#include "sben/potential.hpp"

namespace sben {

/// Declarative description of a shipped system. Unused fields are
/// ignored by kinds that do not need them.
struct ModelSpec {
  enum class Kind {
    HarmonicOscillator,      // dof masses on springs, optional load on q_1
    MaxwellElement,          // spring-dashpot in series, strain driven
    ElastoplasticOscillator, // mass + elastic spring + perfectly plastic slider
    BarChain,                // 1-D clamped bar of two-node elements, end load
    QuasiStaticBar,          // same bar without inertia, displacement driven
  };

  Kind kind = Kind::HarmonicOscillator;
  double mass = 1.0;         // m (oscillators)
  double stiffness = 1.0;    // k, or elastic modulus E
  double viscosity = 1.0;    // eta (Maxwell)
  double yield_stress = 1.0; // sigma_y (plastic kinds)
  double density = 1.0;      // rho (bar)
  double length = 1.0;       // bar length L
  int elements = 1;          // n_e (bar)
  int dof = 1;               // oscillator degrees of freedom (1 or 2)
  LoadCurve load = LoadCurve::constant(0.0);          // end/driving force f(t)
  LoadCurve displacement = LoadCurve::constant(0.0);  // imposed u-bar(t)
  /// Initial configuration/momentum blocks; empty = model default.
  Vector initial_position = Vector();
  Vector initial_momentum = Vector();

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct BuiltModel {
  HamiltonianModel hamiltonian;
  Potential potential;
  PhaseVector initial_state;
};

/// Hamiltonian, dissipation potential and initial state for a spec.
/// State layouts:
///   HarmonicOscillator:       x = q (dof), y = p (dof)
///   MaxwellElement:           x = (eps_I), y = (pi)
///   ElastoplasticOscillator:  x = (u, e), y = (p, pi)   (e = plastic strain)
///   BarChain(n_e):            x = (u_1..u_ne, e_1..e_ne), y = (p_1..p_ne, pi_1..pi_ne)
///                             with e_e the plastic elongation of element e,
///                             so that pi-dot = sigma holds coordinatewise.
/// QuasiStaticBar has no finite-dimensional Hamiltonian here; use
/// quasistatic_ben_solve.
BuiltModel build(const ModelSpec& spec);

/// Element stresses sigma_e at (t, z); for the oscillators, the single
/// spring/device stress.
Vector element_stresses(const ModelSpec& spec, double t, const PhaseVector& z);

/// Per-step maxima of the three constitutive-constraint defects that the
/// polar's finiteness enforces at solutions: |p - m u-dot|, momentum
/// balance |p-dot - (div sigma + f)|, and |pi-dot - sigma|.
struct ConstraintDefects {
  std::vector<double> momentum;     // |p - m u-dot|
  std::vector<double> balance;      // |p-dot - div sigma - f|
  std::vector<double> stress_rate;  // |pi-dot - sigma|
};
ConstraintDefects plasticity_constraints_defect(const ModelSpec& spec,
                                                const Trajectory& traj);

/// Angular momentum L = q_1 p_2 - q_2 p_1 for the isotropic 2-DOF
/// oscillator; Poisson-commutes with every H of the form
/// |p|^2/2m + k|q|^2/2.
Observable angular_momentum_observable();

// ---- quasi-static bar ------------------------------------------------

struct QuasiStaticOptions {
  double admm_rho = 1.0;   // scaled further by the bar volume internally
  double tol = 1e-11;      // primal/dual residual tolerance (relative)
  int max_iter = 50000;
};

struct QuasiStaticResult {
  std::vector<double> sigma;  // sigma_0..sigma_N (uniform over the bar)
  double objective = 0.0;
  double lower_bound = 0.0;   // (L/2E)(sigma_0^2 - sum_k dsigma_k^2), the
                              // discrete counterpart of (L/2E) sigma_0^2
  double certificate = 0.0;   // objective - lower_bound
  int iterations = 0;
};

/// Quasi-static perfectly plastic bar under an imposed end displacement
/// u-bar(t): minimizes the discrete space-time functional
///   sum_k dt [ L sigma_y |eps-bar-dot - sigma-dot/E| - L sigma eps-bar-dot ]
///     + (L/2E) sigma_N^2
/// over yield-admissible stress histories with sigma_0 the elastic
/// response of the initial data, by ADMM splitting (box + weighted-l1 on
/// increments). The reported certificate compares against the analytic
/// lower bound of the continuous functional.
QuasiStaticResult quasistatic_ben_solve(const ModelSpec& spec, const TimeGrid& grid,
                                        const QuasiStaticOptions& opts = {});

/// Discrete quasi-static functional value at a given admissible stress
/// history sigma_0..sigma_N (+inf when the yield constraint is violated).
ExtReal quasistatic_objective(const ModelSpec& spec, const TimeGrid& grid,
                              const std::vector<double>& sigma);

/// Mixed-principle objective over independent displacement and stress
/// histories: the equilibrium constraint is relaxed and replaced by the
/// work of the load functional l(t) (end force on the last node):
///   sum_k dt [ sum_e h sigma_y |eps-dot_e - sigma-dot_e/E| - f(t_k) u-dot_end ]
///     + sum_e (h/2E) sigma_{e,N}^2,
/// +inf on yield violation. u[k] holds the n_e free nodal displacements,
/// sigma[k] the n_e element stresses, at node k of the grid.
ExtReal mixed_ben_objective(const ModelSpec& spec, const TimeGrid& grid,
                            const std::vector<Vector>& u,
                            const std::vector<Vector>& sigma);

}  // namespace sben
