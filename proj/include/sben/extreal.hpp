#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace sben {

/// Extended real value in R u {+inf}. Minus infinity is not representable:
/// all potentials handled by the toolkit are proper convex lsc, so their
/// values and conjugates never reach -inf. Keeping the infinity as an
/// explicit flag (instead of IEEE inf) avoids NaN from inf - inf in gap
/// arithmetic.
class ExtReal {
public:
  ExtReal() : value_(0.0), infinite_(false) {}
  ExtReal(double v) : value_(v), infinite_(false) {
    if (std::isnan(v)) throw std::invalid_argument("ExtReal: NaN");
    if (std::isinf(v)) {
      if (v < 0) throw std::invalid_argument("ExtReal: -inf not representable");
      value_ = 0.0;
      infinite_ = true;
    }
  }

  static ExtReal infinity() {
    ExtReal r;
    r.infinite_ = true;
    return r;
  }

  bool is_finite() const { return !infinite_; }
  bool is_infinite() const { return infinite_; }

  /// Finite value; throws when called on +inf.
  double value() const {
    if (infinite_) throw std::logic_error("ExtReal: value() of +inf");
    return value_;
  }

  /// As IEEE double, mapping +inf to std::numeric_limits infinity.
  double as_double() const {
    return infinite_ ? std::numeric_limits<double>::infinity() : value_;
  }

  friend ExtReal operator+(const ExtReal& a, const ExtReal& b) {
    if (a.infinite_ || b.infinite_) return infinity();
    return ExtReal(a.value_ + b.value_);
  }
  friend ExtReal operator-(const ExtReal& a, double b) {
    if (a.infinite_) return infinity();
    return ExtReal(a.value_ - b);
  }
  ExtReal& operator+=(const ExtReal& o) { return *this = *this + o; }

  friend bool operator<=(const ExtReal& a, double b) {
    return !a.infinite_ && a.value_ <= b;
  }
  friend bool operator<=(double a, const ExtReal& b) {
    return b.infinite_ || a <= b.value_;
  }
  friend bool operator==(const ExtReal& a, const ExtReal& b) {
    if (a.infinite_ != b.infinite_) return false;
    return a.infinite_ || a.value_ == b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, const ExtReal& e) {
    if (e.infinite_) return os << "inf";
    return os << e.value_;
  }

private:
  double value_;
  bool infinite_;
};

}  // namespace sben
