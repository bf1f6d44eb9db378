#pragma once

#include <map>
#include <string>
#include <vector>

#include "vclock/kernels.hpp"

namespace vclock {

// Scalar curves used for the input pieces a and b.
//   constant:c          c
//   exp:c,rate          c e^{-rate t}
//   relax:c0,c1,rate    c0 + c1 e^{-rate t}
//   linear:c            c t
//   power:c,p           c t^p
struct CurveSpec {
  enum class Kind { Constant, Exp, Relax, Linear, Power };
  Kind kind = Kind::Constant;
  double c0 = 0.0, c1 = 0.0, rate = 0.0, p = 1.0;

  static CurveSpec constant(double c) { return {Kind::Constant, c, 0, 0, 1}; }
  static CurveSpec exp_decay(double c, double rate) { return {Kind::Exp, c, 0, rate, 1}; }
  static CurveSpec relax(double c0, double c1, double rate) { return {Kind::Relax, c0, c1, rate, 1}; }
  static CurveSpec linear(double c) { return {Kind::Linear, c, 0, 0, 1}; }
  static CurveSpec power(double c, double p) { return {Kind::Power, c, 0, 0, p}; }

  double value(double t) const;
  double integral(double t) const;         // int_0^t
  double double_integral(double t) const;  // int_0^t int_0^s
  bool nondecreasing() const;
  bool nonnegative() const;
  CurveSpec scaled(double factor) const;
  // value(s t) as a curve in t
  CurveSpec time_scaled(double s) const;

  std::string to_string() const;
  static CurveSpec parse(const std::string& text);
};

// g0 = a + K*b + atom K, G0 = int g0: an admissible input with b allowed an atom at 0.
struct InputCurve {
  CurveSpec a = CurveSpec::constant(0.0);
  CurveSpec b = CurveSpec::constant(0.0);
  double atom = 0.0;
};

// G0 and g0 at nodes t_k = k step, k = 0..N, for the kernel in the given grid.
struct InputNodes {
  std::vector<double> G0;
  std::vector<double> g0;
};

InputNodes input_nodes(const InputCurve& in, const KernelSpec& kernel, double step, std::size_t n_steps);

// Limits of the input as the kernel degenerates to a Dirac mass: abar + bbar + atom.
double dirac_limit_level(const InputCurve& in, double t);

}  // namespace vclock
