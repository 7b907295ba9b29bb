#pragma once

#include <memory>
#include <vector>

#include "sben/extreal.hpp"
#include "sben/phase.hpp"

namespace sben {

/// Convex lsc extended-real potential on R^d, d = 2n when used as a
/// dissipation potential on phase rates. The algebra is a closed
/// enumeration of families with analytic conjugates and proximal maps,
/// not arbitrary callables: the BEN gap must be computed exactly, and a
/// numerically conjugated black box would poison every downstream
/// residual.
///
/// Families and their conjugates (the set is closed under conjugation):
///   Zero            <->  IndicatorPoint(0)
///   Quadratic{A,r}  <->  Quadratic{pinv(A), !r}   (r = restricted to range(A))
///   ScaledNorm(c)   <->  IndicatorBall(c)
///   IndicatorBox    <->  SupportBox
///   IndicatorPoint(a) <-> Linear(a)
///   SeparableSum    <->  SeparableSum of conjugates (+ point mass at 0 on
///                        uncovered coordinates, since uncovered = Zero)
class Potential {
public:
  enum class Kind {
    Zero,
    Quadratic,
    ScaledNorm,
    IndicatorBall,
    IndicatorBox,
    SupportBox,
    IndicatorPoint,
    Linear,
    SeparableSum,
  };

  struct Part;  // member potential plus the coordinates it acts on

  // -- factories ------------------------------------------------------
  static Potential zero(Eigen::Index dim);
  /// phi(v) = (1/2) v^T A v, A symmetric PSD. When restricted, the
  /// effective domain is range(A) and the value is +inf outside it.
  static Potential quadratic(const Matrix& a, bool restricted = false);
  /// Scalar weight on every coordinate: phi(v) = (a/2)|v|^2.
  static Potential quadratic_scalar(double a, Eigen::Index dim);
  /// phi(v) = c |v| (Euclidean norm), c >= 0.
  static Potential scaled_norm(double c, Eigen::Index dim);
  /// Indicator of the Euclidean ball of radius c.
  static Potential indicator_ball(double c, Eigen::Index dim);
  /// Indicator of the box [lo_i, hi_i] per coordinate.
  static Potential indicator_box(const Vector& lo, const Vector& hi);
  static Potential indicator_box(double lo, double hi, Eigen::Index dim);
  /// Support function of the box: sum_i max(lo_i w_i, hi_i w_i).
  static Potential support_box(const Vector& lo, const Vector& hi);
  /// Indicator of the single point {a}.
  static Potential indicator_point(const Vector& a);
  /// phi(v) = <a, v>.
  static Potential linear(const Vector& a);
  /// Sum of member potentials over disjoint coordinate subsets of a
  /// d-dimensional space; uncovered coordinates behave as Zero.
  static Potential separable_sum(std::vector<Part> parts, Eigen::Index dim);

  /// Member potential acting on the y-block of an n-dim phase space.
  static Potential on_y_block(const Potential& p, Eigen::Index n);
  /// Member potential acting on a single coordinate of a d-dim space.
  static Potential on_coord(const Potential& p, Eigen::Index coord, Eigen::Index dim);

  // -- queries --------------------------------------------------------
  Kind kind() const { return kind_; }
  Eigen::Index dim() const { return dim_; }

  ExtReal evaluate(const Vector& v) const;
  ExtReal evaluate(const PhaseVector& z) const { return evaluate(z.flat()); }

  /// Closed-form Fenchel conjugate as a member of the algebra.
  Potential conjugate_potential() const;

  ExtReal conjugate(const Vector& w) const { return conjugate_potential().evaluate(w); }
  ExtReal conjugate(const PhaseVector& w) const { return conjugate(w.flat()); }

  /// argmin_v { phi(v) + |v - w|^2 / (2 lambda) }, closed form per family.
  Vector prox(const Vector& w, double lambda) const;
  PhaseVector prox(const PhaseVector& w, double lambda) const {
    return PhaseVector::from_flat(prox(w.flat(), lambda));
  }

  /// Coordinates on which the potential is not constant.
  std::vector<bool> dependence_coords() const;
  /// Coordinates carrying an indicator-type (bounded-domain) dependence.
  /// The solvers evaluate the Hamiltonian vector field at the step
  /// endpoint on these coordinates so that the constraints bind on grid
  /// states, and at the interval midpoint elsewhere.
  std::vector<bool> hard_coords() const;

  /// phi composed with the inverse of an orthogonal symplectic map Psi
  /// (phi' = phi o Psi^{-1}). Supported for Zero and Quadratic only,
  /// which is what the invariance harness rotates.
  Potential congruence_transform(const Matrix& psi) const;

private:
  Potential() = default;

  Kind kind_ = Kind::Zero;
  Eigen::Index dim_ = 0;

  // Quadratic
  Matrix a_;
  bool restricted_ = false;
  Vector eigval_;
  Matrix eigvec_;

  // ScaledNorm / IndicatorBall
  double c_ = 0.0;

  // IndicatorBox / SupportBox
  Vector lo_, hi_;

  // IndicatorPoint / Linear
  Vector anchor_;

  // SeparableSum
  std::shared_ptr<const std::vector<Part>> parts_;
  std::vector<Eigen::Index> coord_owner_;  // -1 = uncovered

  double indicator_tol() const;
};

struct Potential::Part {
  Potential potential;
  std::vector<Eigen::Index> coords;
};

// -- convex operations on phase space --------------------------------

/// Symplectic polar phi^{*omega}(z') = phi^*(J z').
ExtReal symplectic_polar(const Potential& p, const PhaseVector& z2);

/// Membership g in subdiff phi(z), tested via the Fenchel equality case:
/// phi(z) + phi^*(g) - <<g,z>> <= tol.
bool subdiff_contains(const Potential& p, const PhaseVector& z,
                      const PhaseVector& g, double tol);

/// Membership z2 in the symplectic subdifferential of phi at z,
/// equivalent to J z2 in subdiff phi(z).
bool symp_subdiff_contains(const Potential& p, const PhaseVector& z,
                           const PhaseVector& z2, double tol);

/// phi(zdot) + phi^{*omega}(zdot_I) - omega(zdot_I, zdot). Nonnegative
/// (up to roundoff) whenever finite; zero exactly on symplectic
/// subgradient pairs.
ExtReal ben_gap(const Potential& p, const PhaseVector& zdot,
                const PhaseVector& zdot_I);

}  // namespace sben
