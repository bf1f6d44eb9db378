#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace vclock {

// Non-decreasing f with f(0) = 0 and f'(x) <= growth (1 + x).
class TimeChangeFn {
 public:
  enum class Kind { Identity, Linear, LinearPlusQuadratic, Power, Tabulated };

  static TimeChangeFn identity();
  static TimeChangeFn linear(double a1);
  // f(x) = a1 x + a2 x^2
  static TimeChangeFn linear_plus_quadratic(double a1, double a2);
  // f(x) = x^p, p in [1, 2]
  static TimeChangeFn power(double p);
  // Piecewise linear through (x_i, y_i) with x_0 = y_0 = 0, extended with the last slope.
  static TimeChangeFn tabulated(std::vector<double> x, std::vector<double> y);

  Kind kind() const { return kind_; }
  double operator()(double x) const;
  double derivative(double x) const;
  // inf{x >= 0 : f(x) >= y}
  double inverse(double y) const;
  double growth_constant() const { return growth_; }
  bool affine() const { return kind_ == Kind::Identity || kind_ == Kind::Linear; }
  // Coefficient of x^2 in the large-x behaviour (0 when f is subquadratic).
  double quadratic_part() const;
  double a1() const { return a1_; }
  double a2() const { return a2_; }

  // Smallest x in [lo, hi] with c1 x - c2 f(x) = c3, given c1 lo - c2 f(lo) < c3 <= c1 hi - c2 f(hi).
  double solve_crossing(double c1, double c2, double c3, double lo, double hi) const;

  std::string to_string() const;
  static TimeChangeFn parse(const std::string& text);

 private:
  TimeChangeFn() = default;
  Kind kind_ = Kind::Identity;
  double a1_ = 1.0, a2_ = 0.0, p_ = 1.0, growth_ = 1.0;
  std::shared_ptr<const std::vector<double>> xs_, ys_;
};

}  // namespace vclock
