#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <utility>

namespace sben {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A point or rate z = (x, y) in the flat phase space R^n x R^n.
/// x is the configuration-like block, y the momentum-like block.
class PhaseVector {
public:
  PhaseVector() = default;
  PhaseVector(Vector x, Vector y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() != y_.size() || x_.size() < 1)
      throw std::invalid_argument("PhaseVector: x and y must have equal dimension n >= 1");
    if (!x_.allFinite() || !y_.allFinite())
      throw std::invalid_argument("PhaseVector: entries must be finite");
  }

  static PhaseVector zero(Eigen::Index n) {
    return PhaseVector(Vector::Zero(n), Vector::Zero(n));
  }

  /// From a stacked (x; y) vector of even length.
  static PhaseVector from_flat(const Vector& f) {
    if (f.size() % 2 != 0)
      throw std::invalid_argument("PhaseVector: flat vector must have even length");
    const Eigen::Index n = f.size() / 2;
    return PhaseVector(f.head(n), f.tail(n));
  }

  Eigen::Index dim() const { return x_.size(); }
  const Vector& x() const { return x_; }
  const Vector& y() const { return y_; }

  Vector flat() const {
    Vector f(2 * dim());
    f << x_, y_;
    return f;
  }

  double norm() const { return std::sqrt(x_.squaredNorm() + y_.squaredNorm()); }

  friend PhaseVector operator+(const PhaseVector& a, const PhaseVector& b) {
    return PhaseVector(a.x_ + b.x_, a.y_ + b.y_);
  }
  friend PhaseVector operator-(const PhaseVector& a, const PhaseVector& b) {
    return PhaseVector(a.x_ - b.x_, a.y_ - b.y_);
  }
  friend PhaseVector operator*(double s, const PhaseVector& a) {
    return PhaseVector(s * a.x_, s * a.y_);
  }
  PhaseVector operator-() const { return PhaseVector(-x_, -y_); }

private:
  Vector x_, y_;
};

inline void check_same_dim(const PhaseVector& a, const PhaseVector& b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("phase: dimension mismatch");
}

/// Duality product <<(x,y),(x',y')>> = <x,x'> + <y,y'>.
inline double pairing(const PhaseVector& a, const PhaseVector& b) {
  check_same_dim(a, b);
  return a.x().dot(b.x()) + a.y().dot(b.y());
}

/// Symplectic form omega(z,z') = <x,y'> - <x',y>.
inline double omega(const PhaseVector& a, const PhaseVector& b) {
  check_same_dim(a, b);
  return a.x().dot(b.y()) - b.x().dot(a.y());
}

/// J(x,y) = (-y,x). J^2 = -I and omega(z,z') = <<Jz,z'>>.
inline PhaseVector jmap(const PhaseVector& z) {
  return PhaseVector(-z.y(), z.x());
}

/// Inverse of J, equal to -J.
inline PhaseVector jinv(const PhaseVector& z) {
  return PhaseVector(z.y(), -z.x());
}

/// Scalar observable F(t,z) with analytic gradient DF and partial time
/// derivative. Gradients are supplied by the model author; finite
/// differences are used only as a test oracle.
struct Observable {
  std::function<double(double, const PhaseVector&)> evaluate;
  std::function<PhaseVector(double, const PhaseVector&)> gradient;
  std::function<double(double, const PhaseVector&)> time_derivative =
      [](double, const PhaseVector&) { return 0.0; };
};

/// Symplectic gradient XF = -J DF. Satisfies omega(XF, w) = <<DF, w>>.
inline PhaseVector symplectic_gradient(const Observable& f, double t,
                                       const PhaseVector& z) {
  const PhaseVector df = f.gradient(t, z);
  return jinv(df);  // -J DF
}

/// Poisson bracket {f,g} = omega(Xf, Xg).
inline double poisson_bracket(const Observable& f, const Observable& g,
                              double t, const PhaseVector& z) {
  return omega(symplectic_gradient(f, t, z), symplectic_gradient(g, t, z));
}

}  // namespace sben
