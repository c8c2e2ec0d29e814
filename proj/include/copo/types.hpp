#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>

namespace copo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Shared solver tolerances. Feasibility governs constraint satisfaction,
// optimality governs reduced costs / KKT residuals. Ties in pivot and
// working-set choices are always broken toward the lowest index.
struct Tolerances {
  double feasibility = 1e-7;
  double optimality = 1e-7;
};

// Extended value: a finite double or a +infinity tag. The tag never enters
// floating-point arithmetic; callers must branch on is_finite() first.
class ExtendedValue {
 public:
  ExtendedValue() = default;
  static ExtendedValue finite(double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("ExtendedValue: non-finite payload");
    ExtendedValue e;
    e.finite_ = true;
    e.v_ = v;
    return e;
  }
  static ExtendedValue infinity() { return ExtendedValue{}; }

  bool is_finite() const { return finite_; }
  double value() const {
    if (!finite_) throw std::logic_error("ExtendedValue: value() on +infinity");
    return v_;
  }
  double value_or(double fallback) const { return finite_ ? v_ : fallback; }

  // Order with +infinity greater than every finite value.
  friend bool operator<(const ExtendedValue& a, const ExtendedValue& b) {
    if (!a.finite_) return false;
    if (!b.finite_) return true;
    return a.v_ < b.v_;
  }
  friend bool operator<=(const ExtendedValue& a, const ExtendedValue& b) { return !(b < a); }

 private:
  bool finite_ = false;
  double v_ = 0.0;
};

// Bound sentinel for variable boxes. Compared against, never used in
// arithmetic; ratio tests must test unbounded() before forming quotients.
inline double unbounded() { return std::numeric_limits<double>::infinity(); }
inline bool is_unbounded(double b) { return std::isinf(b); }

}  // namespace copo
