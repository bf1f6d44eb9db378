#include "vclock/input_curve.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "vclock/errors.hpp"
#include "vclock/numerics.hpp"

namespace vclock {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// e^{-rt} pieces: int_0^t and int_0^t int_0^s
double exp_int(double r, double t) { return t * phi1(-r * t); }
double exp_dint(double r, double t) { return t * t * phi2(-r * t); }

}  // namespace

double CurveSpec::value(double t) const {
  switch (kind) {
    case Kind::Constant:
      return c0;
    case Kind::Exp:
      return c0 * std::exp(-rate * t);
    case Kind::Relax:
      return c0 + c1 * std::exp(-rate * t);
    case Kind::Linear:
      return c0 * t;
    case Kind::Power:
      return t == 0.0 ? (p == 0.0 ? c0 : 0.0) : c0 * std::pow(t, p);
  }
  return 0.0;
}

double CurveSpec::integral(double t) const {
  switch (kind) {
    case Kind::Constant:
      return c0 * t;
    case Kind::Exp:
      return c0 * exp_int(rate, t);
    case Kind::Relax:
      return c0 * t + c1 * exp_int(rate, t);
    case Kind::Linear:
      return 0.5 * c0 * t * t;
    case Kind::Power:
      return c0 * std::pow(t, p + 1.0) / (p + 1.0);
  }
  return 0.0;
}

double CurveSpec::double_integral(double t) const {
  switch (kind) {
    case Kind::Constant:
      return 0.5 * c0 * t * t;
    case Kind::Exp:
      return c0 * exp_dint(rate, t);
    case Kind::Relax:
      return 0.5 * c0 * t * t + c1 * exp_dint(rate, t);
    case Kind::Linear:
      return c0 * t * t * t / 6.0;
    case Kind::Power:
      return c0 * std::pow(t, p + 2.0) / ((p + 1.0) * (p + 2.0));
  }
  return 0.0;
}

bool CurveSpec::nondecreasing() const {
  switch (kind) {
    case Kind::Constant:
      return true;
    case Kind::Exp:
      return c0 * rate <= 0.0;
    case Kind::Relax:
      return c1 * rate <= 0.0;
    case Kind::Linear:
      return c0 >= 0.0;
    case Kind::Power:
      return c0 * p >= 0.0;
  }
  return false;
}

bool CurveSpec::nonnegative() const {
  switch (kind) {
    case Kind::Relax:
      return c0 >= 0.0 && c0 + c1 >= 0.0;
    default:
      return c0 >= 0.0;
  }
}

CurveSpec CurveSpec::scaled(double factor) const {
  CurveSpec s = *this;
  s.c0 *= factor;
  s.c1 *= factor;
  return s;
}

CurveSpec CurveSpec::time_scaled(double s) const {
  CurveSpec out = *this;
  switch (kind) {
    case Kind::Constant:
      break;
    case Kind::Exp:
    case Kind::Relax:
      out.rate *= s;
      break;
    case Kind::Linear:
      out.c0 *= s;
      break;
    case Kind::Power:
      out.c0 *= std::pow(s, p);
      break;
  }
  return out;
}

std::string CurveSpec::to_string() const {
  switch (kind) {
    case Kind::Constant:
      return "constant:c=" + fmt(c0);
    case Kind::Exp:
      return "exp:c=" + fmt(c0) + ",rate=" + fmt(rate);
    case Kind::Relax:
      return "relax:c0=" + fmt(c0) + ",c1=" + fmt(c1) + ",rate=" + fmt(rate);
    case Kind::Linear:
      return "linear:c=" + fmt(c0);
    case Kind::Power:
      return "power:c=" + fmt(c0) + ",p=" + fmt(p);
  }
  return {};
}

CurveSpec CurveSpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::map<std::string, double> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("curve: expected key=value, got '" + item + "'");
      const std::string v = item.substr(eq + 1);
      double x = 0.0;
      auto r = std::from_chars(v.data(), v.data() + v.size(), x);
      if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw ConfigError("curve: cannot parse '" + v + "'");
      kv[item.substr(0, eq)] = x;
    }
  }
  auto get = [&](const char* k, double def) { return kv.count(k) ? kv[k] : def; };
  if (kind == "constant") return constant(get("c", 0.0));
  if (kind == "exp") return exp_decay(get("c", 1.0), get("rate", 1.0));
  if (kind == "relax") return relax(get("c0", 0.0), get("c1", 0.0), get("rate", 1.0));
  if (kind == "linear") return linear(get("c", 1.0));
  if (kind == "power") {
    const double p = get("p", 1.0);
    if (!(p > -1.0)) throw ConfigError("power curve: p must be > -1");
    return power(get("c", 1.0), p);
  }
  throw ConfigError("curve: unknown kind '" + kind + "'");
}

InputNodes input_nodes(const InputCurve& in, const KernelSpec& kernel, double step, std::size_t n_steps) {
  if (!(step > 0.0)) throw DomainError("input_nodes: step must be > 0");
  InputNodes out;
  out.G0.assign(n_steps + 1, 0.0);
  out.g0.assign(n_steps, 0.0);
  // constant parts of b convolve in closed form: int_0^t Kbar(t-s) c ds = c Kbarbar(t)
  double b_const = 0.0;
  CurveSpec b_rest = in.b;
  if (in.b.kind == CurveSpec::Kind::Constant) {
    b_const = in.b.c0;
    b_rest = CurveSpec::constant(0.0);
  } else if (in.b.kind == CurveSpec::Kind::Relax) {
    b_const = in.b.c0;
    b_rest = CurveSpec::exp_decay(in.b.c1, in.b.rate);
  }
  const bool has_b = !(b_rest.kind == CurveSpec::Kind::Constant && b_rest.c0 == 0.0);
  std::vector<double> dbl, bavg;
  if (has_b) {
    // int_0^t Kbar(t-s) b(s) ds with b replaced by its cell averages
    dbl.resize(n_steps + 1);
    for (std::size_t j = 0; j <= n_steps; ++j) dbl[j] = double_integrated_kernel(kernel, static_cast<double>(j) * step);
    bavg.resize(n_steps);
    for (std::size_t i = 0; i < n_steps; ++i) {
      const double t0 = static_cast<double>(i) * step;
      bavg[i] = (b_rest.integral(t0 + step) - b_rest.integral(t0)) / step;
    }
  }
  for (std::size_t k = 1; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) * step;
    CompensatedSum s;
    s.add(in.a.integral(t));
    if (in.atom != 0.0) s.add(in.atom * integrated_kernel(kernel, t));
    if (b_const != 0.0) s.add(b_const * double_integrated_kernel(kernel, t));
    if (has_b)
      for (std::size_t i = 0; i < k; ++i) s.add(bavg[i] * (dbl[k - i] - dbl[k - i - 1]));
    out.G0[k] = s.value();
  }
  for (std::size_t k = 0; k < n_steps; ++k) out.g0[k] = (out.G0[k + 1] - out.G0[k]) / step;
  return out;
}

double dirac_limit_level(const InputCurve& in, double t) { return in.a.integral(t) + in.b.integral(t) + in.atom; }

}  // namespace vclock
