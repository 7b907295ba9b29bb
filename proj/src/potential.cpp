#include "sben/potential.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sben {

namespace {

constexpr double kFeasRel = 1e-9;   // indicator feasibility, scaled
constexpr double kRankRel = 1e-12;  // eigenvalue rank cutoff

void check_dim(Eigen::Index have, Eigen::Index want, const char* who) {
  if (have != want)
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

}  // namespace

// ---- factories ------------------------------------------------------

Potential Potential::zero(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("Potential::zero: dim >= 1 required");
  Potential p;
  p.kind_ = Kind::Zero;
  p.dim_ = dim;
  return p;
}

Potential Potential::quadratic(const Matrix& a, bool restricted) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument("Potential::quadratic: square matrix required");
  Potential p;
  p.kind_ = Kind::Quadratic;
  p.dim_ = a.rows();
  p.a_ = 0.5 * (a + a.transpose());
  p.restricted_ = restricted;
  Eigen::SelfAdjointEigenSolver<Matrix> es(p.a_);
  p.eigval_ = es.eigenvalues();
  p.eigvec_ = es.eigenvectors();
  const double cutoff = -kRankRel * std::max(1.0, std::abs(p.eigval_.maxCoeff()));
  if (p.eigval_.minCoeff() < cutoff)
    throw std::invalid_argument("Potential::quadratic: weight matrix must be PSD");
  p.eigval_ = p.eigval_.cwiseMax(0.0);
  return p;
}

Potential Potential::quadratic_scalar(double a, Eigen::Index dim) {
  return quadratic(a * Matrix::Identity(dim, dim));
}

Potential Potential::scaled_norm(double c, Eigen::Index dim) {
  if (c < 0) throw std::invalid_argument("Potential::scaled_norm: c >= 0 required");
  if (dim < 1) throw std::invalid_argument("Potential::scaled_norm: dim >= 1 required");
  Potential p;
  p.kind_ = Kind::ScaledNorm;
  p.dim_ = dim;
  p.c_ = c;
  return p;
}

Potential Potential::indicator_ball(double c, Eigen::Index dim) {
  if (c < 0) throw std::invalid_argument("Potential::indicator_ball: c >= 0 required");
  Potential p;
  p.kind_ = Kind::IndicatorBall;
  p.dim_ = dim;
  p.c_ = c;
  return p;
}

Potential Potential::indicator_box(const Vector& lo, const Vector& hi) {
  if (lo.size() != hi.size() || lo.size() < 1)
    throw std::invalid_argument("Potential::indicator_box: bad bounds");
  if (((hi - lo).array() < 0).any() || !lo.allFinite() || !hi.allFinite())
    throw std::invalid_argument("Potential::indicator_box: need finite lo <= hi");
  Potential p;
  p.kind_ = Kind::IndicatorBox;
  p.dim_ = lo.size();
  p.lo_ = lo;
  p.hi_ = hi;
  return p;
}

Potential Potential::indicator_box(double lo, double hi, Eigen::Index dim) {
  return indicator_box(Vector::Constant(dim, lo), Vector::Constant(dim, hi));
}

Potential Potential::support_box(const Vector& lo, const Vector& hi) {
  Potential p = indicator_box(lo, hi);
  p.kind_ = Kind::SupportBox;
  return p;
}

Potential Potential::indicator_point(const Vector& a) {
  if (a.size() < 1) throw std::invalid_argument("Potential::indicator_point: empty anchor");
  Potential p;
  p.kind_ = Kind::IndicatorPoint;
  p.dim_ = a.size();
  p.anchor_ = a;
  return p;
}

Potential Potential::linear(const Vector& a) {
  if (a.size() < 1) throw std::invalid_argument("Potential::linear: empty slope");
  Potential p;
  p.kind_ = Kind::Linear;
  p.dim_ = a.size();
  p.anchor_ = a;
  return p;
}

Potential Potential::separable_sum(std::vector<Part> parts, Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("Potential::separable_sum: dim >= 1 required");
  Potential p;
  p.kind_ = Kind::SeparableSum;
  p.dim_ = dim;
  p.coord_owner_.assign(static_cast<size_t>(dim), -1);
  for (size_t m = 0; m < parts.size(); ++m) {
    const Part& part = parts[m];
    if (static_cast<Eigen::Index>(part.coords.size()) != part.potential.dim())
      throw std::invalid_argument("Potential::separable_sum: part dim != subset size");
    for (Eigen::Index c : part.coords) {
      if (c < 0 || c >= dim)
        throw std::invalid_argument("Potential::separable_sum: coordinate out of range");
      if (p.coord_owner_[static_cast<size_t>(c)] != -1)
        throw std::invalid_argument("Potential::separable_sum: subsets must be disjoint");
      p.coord_owner_[static_cast<size_t>(c)] = static_cast<Eigen::Index>(m);
    }
  }
  p.parts_ = std::make_shared<const std::vector<Part>>(std::move(parts));
  return p;
}

Potential Potential::on_y_block(const Potential& p, Eigen::Index n) {
  check_dim(p.dim(), n, "Potential::on_y_block");
  std::vector<Eigen::Index> coords(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) coords[static_cast<size_t>(i)] = n + i;
  return separable_sum({Part{p, std::move(coords)}}, 2 * n);
}

Potential Potential::on_coord(const Potential& p, Eigen::Index coord, Eigen::Index dim) {
  check_dim(p.dim(), 1, "Potential::on_coord");
  return separable_sum({Part{p, {coord}}}, dim);
}

// ---- evaluate -------------------------------------------------------

double Potential::indicator_tol() const {
  switch (kind_) {
    case Kind::IndicatorBall:
      return kFeasRel * (1.0 + c_);
    case Kind::IndicatorBox:
      return kFeasRel * (1.0 + std::max(lo_.cwiseAbs().maxCoeff(),
                                        hi_.cwiseAbs().maxCoeff()));
    case Kind::IndicatorPoint:
      return kFeasRel * (1.0 + anchor_.cwiseAbs().maxCoeff());
    default:
      return kFeasRel;
  }
}

ExtReal Potential::evaluate(const Vector& v) const {
  check_dim(v.size(), dim_, "Potential::evaluate");
  switch (kind_) {
    case Kind::Zero:
      return ExtReal(0.0);
    case Kind::Quadratic: {
      if (restricted_) {
        // feasible iff v lies in range(A)
        const double emax = std::max(1.0, eigval_.maxCoeff());
        Vector vt = eigvec_.transpose() * v;
        double off = 0.0;
        for (Eigen::Index i = 0; i < dim_; ++i)
          if (eigval_[i] <= kRankRel * emax) off += vt[i] * vt[i];
        if (std::sqrt(off) > kFeasRel * (1.0 + v.norm())) return ExtReal::infinity();
      }
      return ExtReal(0.5 * v.dot(a_ * v));
    }
    case Kind::ScaledNorm:
      return ExtReal(c_ * v.norm());
    case Kind::IndicatorBall:
      return v.norm() <= c_ + indicator_tol() ? ExtReal(0.0) : ExtReal::infinity();
    case Kind::IndicatorBox: {
      const double tol = indicator_tol();
      for (Eigen::Index i = 0; i < dim_; ++i)
        if (v[i] < lo_[i] - tol || v[i] > hi_[i] + tol) return ExtReal::infinity();
      return ExtReal(0.0);
    }
    case Kind::SupportBox: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < dim_; ++i)
        s += std::max(lo_[i] * v[i], hi_[i] * v[i]);
      return ExtReal(s);
    }
    case Kind::IndicatorPoint:
      return (v - anchor_).cwiseAbs().maxCoeff() <= indicator_tol()
                 ? ExtReal(0.0)
                 : ExtReal::infinity();
    case Kind::Linear:
      return ExtReal(anchor_.dot(v));
    case Kind::SeparableSum: {
      ExtReal total(0.0);
      for (const Part& part : *parts_) {
        Vector sub(part.potential.dim());
        for (Eigen::Index i = 0; i < sub.size(); ++i)
          sub[i] = v[part.coords[static_cast<size_t>(i)]];
        total += part.potential.evaluate(sub);
        if (total.is_infinite()) return total;
      }
      return total;
    }
  }
  throw std::logic_error("Potential::evaluate: unreachable");
}

// ---- conjugate ------------------------------------------------------

Potential Potential::conjugate_potential() const {
  switch (kind_) {
    case Kind::Zero:
      return indicator_point(Vector::Zero(dim_));
    case Kind::Quadratic: {
      const double emax = std::max(1.0, eigval_.maxCoeff());
      Vector inv(dim_);
      for (Eigen::Index i = 0; i < dim_; ++i)
        inv[i] = eigval_[i] > kRankRel * emax ? 1.0 / eigval_[i] : 0.0;
      Matrix pinv = eigvec_ * inv.asDiagonal() * eigvec_.transpose();
      return quadratic(pinv, !restricted_);
    }
    case Kind::ScaledNorm:
      return indicator_ball(c_, dim_);
    case Kind::IndicatorBall:
      return scaled_norm(c_, dim_);
    case Kind::IndicatorBox:
      return support_box(lo_, hi_);
    case Kind::SupportBox: {
      Potential p = indicator_box(lo_, hi_);
      return p;
    }
    case Kind::IndicatorPoint:
      return linear(anchor_);
    case Kind::Linear:
      return indicator_point(anchor_);
    case Kind::SeparableSum: {
      std::vector<Part> conj;
      conj.reserve(parts_->size() + 1);
      for (const Part& part : *parts_)
        conj.push_back(Part{part.potential.conjugate_potential(), part.coords});
      std::vector<Eigen::Index> uncovered;
      for (Eigen::Index i = 0; i < dim_; ++i)
        if (coord_owner_[static_cast<size_t>(i)] == -1) uncovered.push_back(i);
      if (!uncovered.empty())
        conj.push_back(Part{
            indicator_point(Vector::Zero(static_cast<Eigen::Index>(uncovered.size()))),
            uncovered});
      return separable_sum(std::move(conj), dim_);
    }
  }
  throw std::logic_error("Potential::conjugate_potential: unreachable");
}

// ---- prox -----------------------------------------------------------

Vector Potential::prox(const Vector& w, double lambda) const {
  check_dim(w.size(), dim_, "Potential::prox");
  if (!(lambda > 0)) throw std::invalid_argument("Potential::prox: lambda > 0 required");
  switch (kind_) {
    case Kind::Zero:
      return w;
    case Kind::Quadratic: {
      const double emax = std::max(1.0, eigval_.maxCoeff());
      Vector wt = eigvec_.transpose() * w;
      for (Eigen::Index i = 0; i < dim_; ++i) {
        if (eigval_[i] > kRankRel * emax)
          wt[i] /= 1.0 + lambda * eigval_[i];
        else if (restricted_)
          wt[i] = 0.0;
      }
      return eigvec_ * wt;
    }
    case Kind::ScaledNorm: {
      const double nw = w.norm();
      if (nw <= lambda * c_) return Vector::Zero(dim_);  // kink: exactly 0
      return (1.0 - lambda * c_ / nw) * w;
    }
    case Kind::IndicatorBall: {
      const double nw = w.norm();
      return nw <= c_ ? w : Vector((c_ / nw) * w);
    }
    case Kind::IndicatorBox:
      return w.cwiseMax(lo_).cwiseMin(hi_);
    case Kind::SupportBox: {
      // Moreau: prox of the support function via projection on the box.
      Vector proj = (w / lambda).cwiseMax(lo_).cwiseMin(hi_);
      return w - lambda * proj;
    }
    case Kind::IndicatorPoint:
      return anchor_;
    case Kind::Linear:
      return w - lambda * anchor_;
    case Kind::SeparableSum: {
      Vector out = w;
      for (const Part& part : *parts_) {
        Vector sub(part.potential.dim());
        for (Eigen::Index i = 0; i < sub.size(); ++i)
          sub[i] = w[part.coords[static_cast<size_t>(i)]];
        Vector ps = part.potential.prox(sub, lambda);
        for (Eigen::Index i = 0; i < sub.size(); ++i)
          out[part.coords[static_cast<size_t>(i)]] = ps[i];
      }
      return out;
    }
  }
  throw std::logic_error("Potential::prox: unreachable");
}

// ---- structure queries ----------------------------------------------

std::vector<bool> Potential::dependence_coords() const {
  std::vector<bool> dep(static_cast<size_t>(dim_), false);
  switch (kind_) {
    case Kind::Zero:
      break;
    case Kind::Quadratic: {
      const double emax = std::max(1.0, eigval_.maxCoeff());
      for (Eigen::Index i = 0; i < dim_; ++i) {
        if (a_.row(i).cwiseAbs().maxCoeff() > 0) dep[static_cast<size_t>(i)] = true;
      }
      if (restricted_) {
        // coordinates constrained by the range restriction
        for (Eigen::Index i = 0; i < dim_; ++i) {
          double offdiag = 0.0;
          for (Eigen::Index j = 0; j < dim_; ++j)
            if (eigval_[j] <= kRankRel * emax) offdiag += eigvec_(i, j) * eigvec_(i, j);
          if (offdiag > kRankRel) dep[static_cast<size_t>(i)] = true;
        }
      }
      break;
    }
    case Kind::ScaledNorm:
      if (c_ > 0) dep.assign(dep.size(), true);
      break;
    case Kind::IndicatorBall:
    case Kind::IndicatorBox:
    case Kind::IndicatorPoint:
      dep.assign(dep.size(), true);
      break;
    case Kind::SupportBox:
      for (Eigen::Index i = 0; i < dim_; ++i)
        if (std::max(std::abs(lo_[i]), std::abs(hi_[i])) > 0)
          dep[static_cast<size_t>(i)] = true;
      break;
    case Kind::Linear:
      for (Eigen::Index i = 0; i < dim_; ++i)
        if (anchor_[i] != 0) dep[static_cast<size_t>(i)] = true;
      break;
    case Kind::SeparableSum:
      for (const Part& part : *parts_) {
        std::vector<bool> sub = part.potential.dependence_coords();
        for (size_t i = 0; i < sub.size(); ++i)
          if (sub[i]) dep[static_cast<size_t>(part.coords[i])] = true;
      }
      break;
  }
  return dep;
}

std::vector<bool> Potential::hard_coords() const {
  std::vector<bool> hard(static_cast<size_t>(dim_), false);
  switch (kind_) {
    case Kind::IndicatorBall:
    case Kind::IndicatorBox:
    case Kind::IndicatorPoint:
      hard.assign(hard.size(), true);
      break;
    case Kind::Quadratic:
      if (restricted_) {
        const double emax = std::max(1.0, eigval_.maxCoeff());
        for (Eigen::Index i = 0; i < dim_; ++i) {
          double offdiag = 0.0;
          for (Eigen::Index j = 0; j < dim_; ++j)
            if (eigval_[j] <= kRankRel * emax) offdiag += eigvec_(i, j) * eigvec_(i, j);
          if (offdiag > kRankRel) hard[static_cast<size_t>(i)] = true;
        }
      }
      break;
    case Kind::SeparableSum:
      for (const Part& part : *parts_) {
        std::vector<bool> sub = part.potential.hard_coords();
        for (size_t i = 0; i < sub.size(); ++i)
          if (sub[i]) hard[static_cast<size_t>(part.coords[i])] = true;
      }
      break;
    default:
      break;
  }
  return hard;
}

Potential Potential::congruence_transform(const Matrix& psi) const {
  check_dim(psi.rows(), dim_, "Potential::congruence_transform");
  check_dim(psi.cols(), dim_, "Potential::congruence_transform");
  switch (kind_) {
    case Kind::Zero:
      return *this;
    case Kind::Quadratic:
      return quadratic(psi * a_ * psi.transpose(), restricted_);
    default:
      throw std::invalid_argument(
          "Potential::congruence_transform: only Zero and Quadratic families rotate");
  }
}

// ---- convex operations ----------------------------------------------

ExtReal symplectic_polar(const Potential& p, const PhaseVector& z2) {
  return p.conjugate(jmap(z2));
}

bool subdiff_contains(const Potential& p, const PhaseVector& z,
                      const PhaseVector& g, double tol) {
  const ExtReal fz = p.evaluate(z);
  if (fz.is_infinite())
    throw std::domain_error("subdiff_contains: membership undefined at infeasible point");
  const ExtReal gap = fz + p.conjugate(g) - pairing(g, z);
  return gap <= tol;
}

bool symp_subdiff_contains(const Potential& p, const PhaseVector& z,
                           const PhaseVector& z2, double tol) {
  return subdiff_contains(p, z, jmap(z2), tol);
}

ExtReal ben_gap(const Potential& p, const PhaseVector& zdot,
                const PhaseVector& zdot_I) {
  return p.evaluate(zdot) + symplectic_polar(p, zdot_I) - omega(zdot_I, zdot);
}

}  // namespace sben
