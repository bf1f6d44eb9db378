#include "vclock/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "vclock/errors.hpp"
#include "vclock/numerics.hpp"

namespace vclock {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

double gl20(const auto& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

// ---- tabulated helpers ----

double tab_value(const Tabulated& tb, double t) {
  const auto& ts = *tb.t;
  const auto& ks = *tb.k;
  if (t <= ts.front()) return ks.front();
  if (t > ts.back()) return 0.0;
  auto it = std::upper_bound(ts.begin(), ts.end(), t);
  std::size_t i = static_cast<std::size_t>(it - ts.begin()) - 1;
  if (i + 1 >= ts.size()) return ks.back();
  const double w = (t - ts[i]) / (ts[i + 1] - ts[i]);
  return ks[i] + w * (ks[i + 1] - ks[i]);
}

// Visits the linear pieces of the table over [a, b]: f(u0, u1, k(u0), slope).
template <class F>
void tab_pieces(const Tabulated& tb, double a, double b, F&& f) {
  const auto& ts = *tb.t;
  const auto& ks = *tb.k;
  if (b <= a) return;
  if (a < ts.front()) f(a, std::min(b, ts.front()), ks.front(), 0.0);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const double lo = std::max(a, ts[i]);
    const double hi = std::min(b, ts[i + 1]);
    if (hi <= lo) continue;
    const double slope = (ks[i + 1] - ks[i]) / (ts[i + 1] - ts[i]);
    f(lo, hi, ks[i] + slope * (lo - ts[i]), slope);
  }
}

double tab_integral(const Tabulated& tb, double a, double b) {
  CompensatedSum s;
  tab_pieces(tb, a, b, [&](double u0, double u1, double k0, double slope) {
    const double h = u1 - u0;
    s.add(h * (k0 + 0.5 * slope * h));
  });
  return s.value();
}

double tab_double_integral(const Tabulated& tb, double t) {
  CompensatedSum s;
  double cum = 0.0;
  tab_pieces(tb, 0.0, t, [&](double u0, double u1, double k0, double slope) {
    const double h = u1 - u0;
    s.add(cum * h + k0 * h * h / 2.0 + slope * h * h * h / 6.0);
    cum += h * (k0 + 0.5 * slope * h);
  });
  if (t > tb.t->back()) s.add(cum * (t - tb.t->back()));
  return s.value();
}

double tab_laplace(const Tabulated& tb, double lambda) {
  CompensatedSum s;
  tab_pieces(tb, 0.0, tb.t->back(), [&](double u0, double u1, double k0, double slope) {
    const double h = u1 - u0;
    const double x = lambda * h;
    // int_0^h (k0 + slope u) e^{-lambda u} du
    const double i0 = h * phi1(-x);
    const double i1 = h * h * std::exp(-x) * phi2(x);
    s.add(std::exp(-lambda * u0) * (k0 * i0 + slope * i1));
  });
  return s.value();
}

// ---- closed-form pieces ----

double frac_norm(double alpha) { return std::tgamma(alpha); }

double gamma_kbar(const GammaKernel& g, double t) {
  const double x = -g.b * t;
  return g.c * std::pow(-g.b, -g.alpha) * boost::math::gamma_p(g.alpha, x);
}

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, const std::string& key) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && std::isspace(static_cast<unsigned char>(*first))) ++first;
  while (last > first && std::isspace(static_cast<unsigned char>(*(last - 1)))) --last;
  if (first < last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ConfigError("kernel parameter '" + key + "': cannot parse '" + s + "'");
  return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (!item.empty()) out.push_back(parse_double(item, key));
  return out;
}

}  // namespace

// ---- construction ----

KernelSpec KernelSpec::exponential(double c, double b) {
  require(std::isfinite(c) && std::isfinite(b), "exponential kernel: non-finite parameter");
  return KernelSpec(Exponential{c, b});
}

KernelSpec KernelSpec::fractional(double c, double alpha) {
  require(std::isfinite(c), "fractional kernel: non-finite c");
  require(alpha > 0.0 && alpha <= 1.0, "fractional kernel: alpha must lie in (0,1]");
  return KernelSpec(Fractional{c, alpha});
}

KernelSpec KernelSpec::gamma(double c, double b, double alpha) {
  require(std::isfinite(c), "gamma kernel: non-finite c");
  require(b <= 0.0 && std::isfinite(b), "gamma kernel: b must be <= 0");
  require(alpha > 0.0 && alpha <= 1.0, "gamma kernel: alpha must lie in (0,1]");
  return KernelSpec(GammaKernel{c, b, alpha});
}

KernelSpec KernelSpec::shifted(const KernelSpec& base, double eps) {
  require(eps > 0.0 && std::isfinite(eps), "shifted kernel: eps must be > 0");
  return KernelSpec(Shifted{std::make_shared<const KernelSpec>(base), eps});
}

KernelSpec KernelSpec::dirac_scaled(const KernelSpec& base, double n) {
  require(n > 0.0 && std::isfinite(n), "dirac-scaled kernel: n must be > 0");
  return KernelSpec(DiracScaled{std::make_shared<const KernelSpec>(base), n});
}

KernelSpec KernelSpec::tabulated(std::vector<double> t, std::vector<double> k, std::string source) {
  require(t.size() == k.size(), "tabulated kernel: t and k sizes differ");
  require(t.size() >= 2, "tabulated kernel: need at least two nodes");
  require(t.front() >= 0.0, "tabulated kernel: first node must be >= 0");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(std::isfinite(t[i]) && std::isfinite(k[i]), "tabulated kernel: non-finite value");
    if (i > 0) require(t[i] > t[i - 1], "tabulated kernel: nodes must be strictly increasing");
  }
  return KernelSpec(Tabulated{std::make_shared<const std::vector<double>>(std::move(t)),
                              std::make_shared<const std::vector<double>>(std::move(k)),
                              std::move(source)});
}

KernelSpec KernelSpec::scaled(double factor) const {
  return std::visit(
      Overloaded{
          [&](const Exponential& e) { return exponential(factor * e.c, e.b); },
          [&](const Fractional& f) { return fractional(factor * f.c, f.alpha); },
          [&](const GammaKernel& g) { return gamma(factor * g.c, g.b, g.alpha); },
          [&](const Shifted& s) { return shifted(s.base->scaled(factor), s.eps); },
          [&](const DiracScaled& d) { return dirac_scaled(d.base->scaled(factor), d.n); },
          [&](const Tabulated& tb) {
            std::vector<double> k = *tb.k;
            for (double& v : k) v *= factor;
            return tabulated(*tb.t, std::move(k));
          }},
      family_);
}

std::string KernelSpec::name() const {
  return std::visit(Overloaded{[](const Exponential&) { return std::string("exponential"); },
                               [](const Fractional&) { return std::string("fractional"); },
                               [](const GammaKernel&) { return std::string("gamma"); },
                               [](const Shifted&) { return std::string("shifted"); },
                               [](const DiracScaled&) { return std::string("dirac"); },
                               [](const Tabulated&) { return std::string("tabulated"); }},
                    family_);
}

bool KernelSpec::completely_monotone() const {
  return std::visit(Overloaded{[](const Exponential& e) { return e.c >= 0.0 && e.b <= 0.0; },
                               [](const Fractional& f) { return f.c >= 0.0; },
                               [](const GammaKernel& g) { return g.c >= 0.0; },
                               [](const Shifted& s) { return s.base->completely_monotone(); },
                               [](const DiracScaled& d) { return d.base->completely_monotone(); },
                               [](const Tabulated&) { return false; }},
                    family_);
}

bool KernelSpec::nonincreasing_nonnegative() const {
  if (completely_monotone()) return true;
  return std::visit(Overloaded{[](const Shifted& s) { return s.base->nonincreasing_nonnegative(); },
                               [](const DiracScaled& d) { return d.base->nonincreasing_nonnegative(); },
                               [](const Tabulated& tb) {
                                 const auto& k = *tb.k;
                                 for (std::size_t i = 0; i < k.size(); ++i) {
                                   if (k[i] < 0.0) return false;
                                   if (i > 0 && k[i] > k[i - 1]) return false;
                                 }
                                 return true;
                               },
                               [](const auto&) { return false; }},
                    family_);
}

bool KernelSpec::integrable() const {
  return std::visit(Overloaded{[](const Exponential& e) { return e.c == 0.0 || e.b < 0.0; },
                               [](const Fractional& f) { return f.c == 0.0; },
                               [](const GammaKernel& g) { return g.c == 0.0 || g.b < 0.0; },
                               [](const Shifted& s) { return s.base->integrable(); },
                               [](const DiracScaled& d) { return d.base->integrable(); },
                               [](const Tabulated&) { return true; }},
                    family_);
}

bool KernelSpec::square_integrable() const {
  return std::visit(Overloaded{[](const Exponential&) { return true; },
                               [](const Fractional& f) { return f.c == 0.0 || f.alpha > 0.5; },
                               [](const GammaKernel& g) { return g.c == 0.0 || g.alpha > 0.5; },
                               [](const Shifted&) { return true; },
                               [](const DiracScaled& d) { return d.base->square_integrable(); },
                               [](const Tabulated&) { return true; }},
                    family_);
}

bool KernelSpec::singular_at_zero() const {
  return std::visit(Overloaded{[](const Fractional& f) { return f.alpha < 1.0 && f.c != 0.0; },
                               [](const GammaKernel& g) { return g.alpha < 1.0 && g.c != 0.0; },
                               [](const DiracScaled& d) { return d.base->singular_at_zero(); },
                               [](const auto&) { return false; }},
                    family_);
}

// ---- evaluation ----

double eval_kernel(const KernelSpec& spec, double t) {
  if (!(t >= 0.0)) throw DomainError("eval_kernel: t must be >= 0");
  if (t == 0.0 && spec.singular_at_zero()) throw DomainError("eval_kernel: kernel is singular at t = 0");
  return std::visit(
      Overloaded{[&](const Exponential& e) { return e.c * std::exp(e.b * t); },
                 [&](const Fractional& f) {
                   if (f.alpha == 1.0) return f.c;
                   return f.c * std::pow(t, f.alpha - 1.0) / frac_norm(f.alpha);
                 },
                 [&](const GammaKernel& g) {
                   const double p = g.alpha == 1.0 ? 1.0 : std::pow(t, g.alpha - 1.0);
                   return g.c * std::exp(g.b * t) * p / frac_norm(g.alpha);
                 },
                 [&](const Shifted& s) { return eval_kernel(*s.base, t + s.eps); },
                 [&](const DiracScaled& d) { return d.n * eval_kernel(*d.base, d.n * t); },
                 [&](const Tabulated& tb) { return tab_value(tb, t); }},
      spec.family());
}

double integrated_kernel(const KernelSpec& spec, double t) {
  if (!(t >= 0.0)) throw DomainError("integrated_kernel: t must be >= 0");
  return std::visit(
      Overloaded{[&](const Exponential& e) { return e.c * t * phi1(e.b * t); },
                 [&](const Fractional& f) { return f.c * std::pow(t, f.alpha) / std::tgamma(f.alpha + 1.0); },
                 [&](const GammaKernel& g) {
                   if (g.b == 0.0) return g.c * std::pow(t, g.alpha) / std::tgamma(g.alpha + 1.0);
                   return gamma_kbar(g, t);
                 },
                 [&](const Shifted& s) { return kernel_mass(*s.base, s.eps, s.eps + t); },
                 [&](const DiracScaled& d) { return integrated_kernel(*d.base, d.n * t); },
                 [&](const Tabulated& tb) { return tab_integral(tb, 0.0, t); }},
      spec.family());
}

double double_integrated_kernel(const KernelSpec& spec, double t) {
  if (!(t >= 0.0)) throw DomainError("double_integrated_kernel: t must be >= 0");
  if (t == 0.0) return 0.0;
  return std::visit(
      Overloaded{[&](const Exponential& e) { return e.c * t * t * phi2(e.b * t); },
                 [&](const Fractional& f) { return f.c * std::pow(t, f.alpha + 1.0) / std::tgamma(f.alpha + 2.0); },
                 [&](const GammaKernel& g) {
                   if (g.b == 0.0) return g.c * std::pow(t, g.alpha + 1.0) / std::tgamma(g.alpha + 2.0);
                   const double x = -g.b * t;
                   return t * gamma_kbar(g, t) -
                          g.c * g.alpha * std::pow(-g.b, -g.alpha - 1.0) * boost::math::gamma_p(g.alpha + 1.0, x);
                 },
                 [&](const Shifted& s) {
                   if (t < 4.0 * s.eps)
                     return gl20([&](double u) { return kernel_mass(*s.base, s.eps, s.eps + u); }, 0.0, t);
                   return double_integrated_kernel(*s.base, t + s.eps) - double_integrated_kernel(*s.base, s.eps) -
                          t * integrated_kernel(*s.base, s.eps);
                 },
                 [&](const DiracScaled& d) { return double_integrated_kernel(*d.base, d.n * t) / d.n; },
                 [&](const Tabulated& tb) { return tab_double_integral(tb, t); }},
      spec.family());
}

namespace {

// int_a^{a+h} K with the width passed separately so equal cells get equal widths.
double cell_mass(const KernelSpec& spec, double a, double h) {
  if (h == 0.0) return 0.0;
  const double b = a + h;
  return std::visit(
      Overloaded{[&](const Exponential& e) { return e.c * std::exp(e.b * a) * h * phi1(e.b * h); },
                 [&](const Fractional& f) {
                   const double norm = std::tgamma(f.alpha + 1.0);
                   if (a == 0.0) return f.c * std::pow(b, f.alpha) / norm;
                   return f.c * std::pow(a, f.alpha) * std::expm1(f.alpha * std::log1p(h / a)) / norm;
                 },
                 [&](const GammaKernel& g) {
                   if (a >= h) return gl20([&](double s) { return eval_kernel(spec, s); }, a, b);
                   if (g.b == 0.0)
                     return g.c * (std::pow(b, g.alpha) - std::pow(a, g.alpha)) / std::tgamma(g.alpha + 1.0);
                   const double scale = g.c * std::pow(-g.b, -g.alpha);
                   const double x1 = -g.b * a, x2 = -g.b * b;
                   if (x1 > g.alpha)
                     return scale * (boost::math::gamma_q(g.alpha, x1) - boost::math::gamma_q(g.alpha, x2));
                   return scale * (boost::math::gamma_p(g.alpha, x2) - boost::math::gamma_p(g.alpha, x1));
                 },
                 [&](const Shifted& s) { return cell_mass(*s.base, a + s.eps, h); },
                 [&](const DiracScaled& d) { return cell_mass(*d.base, d.n * a, d.n * h); },
                 [&](const Tabulated& tb) { return tab_integral(tb, a, b); }},
      spec.family());
}

}  // namespace

double kernel_mass(const KernelSpec& spec, double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) throw DomainError("kernel_mass: need 0 <= a <= b");
  return cell_mass(spec, a, b - a);
}

double laplace_transform(const KernelSpec& spec, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("laplace_transform: lambda must be >= 0");
  if (lambda == 0.0 && !spec.integrable())
    throw DomainError("laplace_transform: lambda = 0 requires an integrable kernel");
  return std::visit(
      Overloaded{
          [&](const Exponential& e) {
            if (e.c == 0.0) return 0.0;
            if (lambda <= e.b) throw DomainError("laplace_transform: divergent (lambda <= b)");
            return e.c / (lambda - e.b);
          },
          [&](const Fractional& f) {
            if (f.c == 0.0) return 0.0;
            return f.c * std::pow(lambda, -f.alpha);
          },
          [&](const GammaKernel& g) {
            if (g.c == 0.0) return 0.0;
            return g.c * std::pow(lambda - g.b, -g.alpha);
          },
          [&](const Shifted& s) -> double {
            const KernelSpec& base = *s.base;
            if (lambda == 0.0) return laplace_transform(base, 0.0) - integrated_kernel(base, s.eps);
            if (const auto* e = std::get_if<Exponential>(&base.family()))
              return e->c * std::exp(e->b * s.eps) / (lambda - e->b);
            if (const auto* f = std::get_if<Fractional>(&base.family()))
              return f->c * std::pow(lambda, -f->alpha) * std::exp(lambda * s.eps) *
                     boost::math::gamma_q(f->alpha, lambda * s.eps);
            if (const auto* g = std::get_if<GammaKernel>(&base.family())) {
              const double mu = lambda - g->b;
              return g->c * std::pow(mu, -g->alpha) * std::exp(lambda * s.eps) *
                     boost::math::gamma_q(g->alpha, mu * s.eps);
            }
            boost::math::quadrature::exp_sinh<double> integrator;
            return integrator.integrate(
                [&](double u) { return eval_kernel(base, u + s.eps) * std::exp(-lambda * u); });
          },
          [&](const DiracScaled& d) { return laplace_transform(*d.base, lambda / d.n); },
          [&](const Tabulated& tb) { return tab_laplace(tb, lambda); }},
      spec.family());
}

double l1_norm(const KernelSpec& spec) {
  if (!spec.integrable()) throw DomainError("l1_norm: kernel is not integrable on R_+");
  return laplace_transform(spec, 0.0);
}

namespace {

// (a+h)^p - a^p without cancellation
double pow_diff(double a, double h, double p) {
  if (a == 0.0) return std::pow(h, p);
  return std::pow(a, p) * std::expm1(p * std::log1p(h / a));
}

}  // namespace

std::optional<double> self_convolution_mass(const KernelSpec& spec, double a, double b) {
  if (!(a >= 0.0) || !(b >= a)) throw DomainError("self_convolution_mass: need 0 <= a <= b");
  const double h = b - a;
  return std::visit(
      Overloaded{
          [&](const Exponential& e) -> std::optional<double> {
            return gl20([&](double t) { return e.c * e.c * t * std::exp(e.b * t); }, a, b);
          },
          [&](const Fractional& f) -> std::optional<double> {
            // K*K = c^2 t^{2 alpha - 1} / Gamma(2 alpha)
            return f.c * f.c * pow_diff(a, h, 2.0 * f.alpha) / std::tgamma(2.0 * f.alpha + 1.0);
          },
          [&](const GammaKernel& g) -> std::optional<double> {
            const double a2 = 2.0 * g.alpha;
            const double c2 = g.c * g.c;
            if (a >= h && a > 0.0)
              return gl20([&](double t) { return c2 * std::exp(g.b * t) * std::pow(t, a2 - 1.0) / std::tgamma(a2); },
                          a, b);
            if (g.b == 0.0) return c2 * pow_diff(a, h, a2) / std::tgamma(a2 + 1.0);
            const double scale = c2 * std::pow(-g.b, -a2);
            return scale * (boost::math::gamma_p(a2, -g.b * b) - boost::math::gamma_p(a2, -g.b * a));
          },
          [&](const DiracScaled& d) -> std::optional<double> {
            return self_convolution_mass(*d.base, d.n * a, d.n * b);
          },
          [&](const auto&) -> std::optional<double> { return std::nullopt; }},
      spec.family());
}

std::vector<double> lag_weights(const KernelSpec& spec, double step, std::size_t n) {
  std::vector<double> w(n);
  if (n == 0) return w;
  auto kk = [&](double t) { return double_integrated_kernel(spec, t); };
  const bool table = std::holds_alternative<Tabulated>(spec.family());
  w[0] = kk(step) / step;
  for (std::size_t d = 1; d < n; ++d) {
    const double t = static_cast<double>(d) * step;
    if (d == 1 || table) {
      // second difference of the double integral; tables are piecewise smooth so quadrature would not help
      w[d] = (kk(t + step) - 2.0 * kk(t) + (d == 1 ? 0.0 : kk(t - step))) / step;
    } else {
      // triangle-weighted average of K around t, smooth on both halves
      const double left = gl20([&](double y) { return (step - y) * eval_kernel(spec, t - y); }, 0.0, step);
      const double right = gl20([&](double y) { return (step - y) * eval_kernel(spec, t + y); }, 0.0, step);
      w[d] = (left + right) / step;
    }
  }
  return w;
}

KernelGrid discretize(const KernelSpec& spec, double step, double horizon) {
  if (!(step > 0.0)) throw DomainError("discretize: step must be > 0");
  if (!(horizon >= step * (1.0 - 1e-12))) throw DomainError("discretize: horizon must be >= step");
  const auto n = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  KernelGrid g;
  g.step = step;
  g.horizon = horizon;
  g.completely_monotone = spec.completely_monotone();
  g.mass.resize(n);
  g.cumulative.resize(n + 1);
  for (std::size_t j = 0; j < n; ++j)
    g.mass[j] = cell_mass(spec, static_cast<double>(j) * step, step);
  for (std::size_t j = 0; j <= n; ++j) g.cumulative[j] = integrated_kernel(spec, static_cast<double>(j) * step);
  g.lag_weight = lag_weights(spec, step, n);
  if (n > 0 && self_convolution_mass(spec, 0.0, step)) {
    g.self_conv_mass.resize(n);
    for (std::size_t j = 0; j < n; ++j)
      g.self_conv_mass[j] =
          *self_convolution_mass(spec, static_cast<double>(j) * step, static_cast<double>(j + 1) * step);
  }
  return g;
}

DiracReport dirac_family_check(const KernelSpec& spec, const std::vector<double>& n_ladder,
                               const std::vector<double>& lambdas) {
  if (!spec.integrable()) throw DomainError("dirac_family_check: base kernel must be integrable");
  DiracReport rep;
  const double k0 = laplace_transform(spec, 0.0);
  for (double lam : lambdas) {
    double prev = std::numeric_limits<double>::infinity();
    for (double n : n_ladder) {
      const double dev = std::abs(laplace_transform(KernelSpec::dirac_scaled(spec, n), lam) - k0);
      rep.rows.push_back({n, lam, dev});
      if (!(dev < prev || (dev <= 1e-15 && prev <= 1e-15))) rep.monotone = false;
      prev = dev;
    }
    rep.final_max = std::max(rep.final_max, prev);
  }
  return rep;
}

// ---- text forms ----

void to_key_values(const KernelSpec& spec, const std::string& prefix, std::map<std::string, std::string>& out) {
  const std::string p = prefix.empty() ? std::string() : prefix + ".";
  out[p + "family"] = spec.name();
  std::visit(Overloaded{[&](const Exponential& e) {
                          out[p + "c"] = fmt_double(e.c);
                          out[p + "b"] = fmt_double(e.b);
                        },
                        [&](const Fractional& f) {
                          out[p + "c"] = fmt_double(f.c);
                          out[p + "alpha"] = fmt_double(f.alpha);
                        },
                        [&](const GammaKernel& g) {
                          out[p + "c"] = fmt_double(g.c);
                          out[p + "b"] = fmt_double(g.b);
                          out[p + "alpha"] = fmt_double(g.alpha);
                        },
                        [&](const Shifted& s) {
                          out[p + "eps"] = fmt_double(s.eps);
                          to_key_values(*s.base, p + "base", out);
                        },
                        [&](const DiracScaled& d) {
                          out[p + "n"] = fmt_double(d.n);
                          to_key_values(*d.base, p + "base", out);
                        },
                        [&](const Tabulated& tb) {
                          if (!tb.source.empty()) {
                            out[p + "file"] = tb.source;
                            return;
                          }
                          std::string ts, ks;
                          for (std::size_t i = 0; i < tb.t->size(); ++i) {
                            if (i) {
                              ts += ';';
                              ks += ';';
                            }
                            ts += fmt_double((*tb.t)[i]);
                            ks += fmt_double((*tb.k)[i]);
                          }
                          out[p + "t"] = ts;
                          out[p + "k"] = ks;
                        }},
             spec.family());
}

KernelSpec from_key_values(const std::map<std::string, std::string>& kv, const std::string& prefix) {
  const std::string p = prefix.empty() ? std::string() : prefix + ".";
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(p + key);
    if (it == kv.end()) throw ConfigError("kernel spec: missing key '" + p + key + "'");
    return it->second;
  };
  auto num = [&](const std::string& key, double dflt) {
    auto it = kv.find(p + key);
    return it == kv.end() ? dflt : parse_double(it->second, p + key);
  };
  const std::string fam = get("family");
  if (fam == "exponential") return KernelSpec::exponential(num("c", 1.0), num("b", 0.0));
  if (fam == "constant") return KernelSpec::constant(num("c", 1.0));
  if (fam == "fractional") return KernelSpec::fractional(num("c", 1.0), parse_double(get("alpha"), p + "alpha"));
  if (fam == "gamma")
    return KernelSpec::gamma(num("c", 1.0), parse_double(get("b"), p + "b"), parse_double(get("alpha"), p + "alpha"));
  if (fam == "shifted") return KernelSpec::shifted(from_key_values(kv, p + "base"), parse_double(get("eps"), p + "eps"));
  if (fam == "dirac") return KernelSpec::dirac_scaled(from_key_values(kv, p + "base"), parse_double(get("n"), p + "n"));
  if (fam == "tabulated") {
    if (kv.count(p + "file")) return load_tabulated_csv(kv.at(p + "file"));
    return KernelSpec::tabulated(parse_list(get("t"), p + "t"), parse_list(get("k"), p + "k"));
  }
  throw ConfigError("kernel spec: unknown family '" + fam + "'");
}

std::string to_string(const KernelSpec& spec) {
  std::map<std::string, std::string> kv;
  to_key_values(spec, "", kv);
  std::string out = kv.at("family") + ":";
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (k == "family") continue;
    if (!first) out += ',';
    out += k + "=" + v;
    first = false;
  }
  return out;
}

KernelSpec parse_kernel(const std::string& text) {
  const auto colon = text.find(':');
  std::map<std::string, std::string> kv;
  kv["k.family"] = text.substr(0, colon);
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("kernel spec: expected key=value, got '" + item + "'");
      kv["k." + item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  return from_key_values(kv, "k");
}

KernelSpec load_tabulated_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("tabulated kernel: cannot open '" + path + "'");
  std::vector<double> t, k;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("tabulated kernel: expected two columns in '" + line + "'");
    try {
      const double tv = parse_double(line.substr(0, comma), "t");
      const double kv = parse_double(line.substr(comma + 1), "k");
      t.push_back(tv);
      k.push_back(kv);
    } catch (const ConfigError&) {
      if (t.empty()) continue;  // header line
      throw;
    }
  }
  return KernelSpec::tabulated(std::move(t), std::move(k), path);
}

}  // namespace vclock
