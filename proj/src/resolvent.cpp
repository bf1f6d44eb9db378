#include "vclock/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vclock/errors.hpp"
#include "vclock/mittag_leffler.hpp"
#include "vclock/numerics.hpp"

namespace vclock {

ResolventForm::ResolventForm(KernelSpec source) : source_(std::move(source)) {
  const auto& f = source_.family();
  if (!std::holds_alternative<Exponential>(f) && !std::holds_alternative<Fractional>(f) &&
      !std::holds_alternative<GammaKernel>(f))
    throw DomainError("resolvent_closed_form: no closed form for the " + source_.name() +
                      " family; use resolvent_numeric");
}

ResolventForm resolvent_closed_form(const KernelSpec& spec) { return ResolventForm(spec); }

namespace {

// Resolvent of c t^{a-1}/Gamma(a) and its integral.
double frac_resolvent(double c, double a, double t) {
  if (a == 1.0) return c * std::exp(-c * t);
  return c * std::pow(t, a - 1.0) * mittag_leffler(a, a, -c * std::pow(t, a));
}

double frac_resolvent_integral(double c, double a, double t) {
  if (t == 0.0) return 0.0;
  const double z = c * std::pow(t, a);
  // 1 - E_{a,1}(-z) = z E_{a,a+1}(-z) avoids cancellation for small z
  return z * mittag_leffler(a, a + 1.0, -z);
}

}  // namespace

double ResolventForm::operator()(double t) const {
  if (!(t > 0.0)) throw DomainError("resolvent: t must be > 0");
  const auto& f = source_.family();
  if (const auto* e = std::get_if<Exponential>(&f)) return e->c * std::exp((e->b - e->c) * t);
  if (const auto* fr = std::get_if<Fractional>(&f)) return frac_resolvent(fr->c, fr->alpha, t);
  const auto& g = std::get<GammaKernel>(f);
  return std::exp(g.b * t) * frac_resolvent(g.c, g.alpha, t);
}

double ResolventForm::integrated(double t) const {
  if (!(t >= 0.0)) throw DomainError("resolvent: t must be >= 0");
  if (t == 0.0) return 0.0;
  const auto& f = source_.family();
  if (const auto* e = std::get_if<Exponential>(&f)) return e->c * t * phi1((e->b - e->c) * t);
  if (const auto* fr = std::get_if<Fractional>(&f)) return frac_resolvent_integral(fr->c, fr->alpha, t);
  const auto& g = std::get<GammaKernel>(f);
  if (g.b == 0.0) return frac_resolvent_integral(g.c, g.alpha, t);
  // int_0^t e^{bs} rho = e^{bt} rhobar(t) - b int_0^t e^{bs} rhobar(s) ds
  thread_local boost::math::quadrature::tanh_sinh<double> ts(15);
  const double rest = ts.integrate(
      [&](double s) { return s <= 0.0 ? 0.0 : std::exp(g.b * s) * frac_resolvent_integral(g.c, g.alpha, s); }, 0.0, t,
      1e-13);
  return std::exp(g.b * t) * frac_resolvent_integral(g.c, g.alpha, t) - g.b * rest;
}

ResolventGrid resolvent_numeric(const KernelGrid& grid) {
  const std::size_t n = grid.size();
  const double step = grid.step;
  if (grid.lag_weight.size() != n) throw DomainError("resolvent_numeric: grid has no lag weights");
  ResolventGrid rg;
  rg.step = step;
  rg.horizon = grid.horizon;
  rg.k.resize(n);
  rg.r.assign(n, 0.0);
  rg.cumulative.assign(n + 1, 0.0);
  if (n == 0) return rg;

  const auto& w = grid.lag_weight;
  const double diag = 1.0 + w[0];
  if (!(std::abs(diag) > 1e-10)) {
    std::ostringstream os;
    os << "resolvent_numeric: |1 + w_0| = " << std::abs(diag) << " is numerically singular";
    throw ConditioningError(os.str());
  }
  double kmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rg.k[i] = grid.mass[i] / step;
    kmax = std::max(kmax, std::abs(rg.k[i]));
  }
  // With a closed form for K*K the unknown is Q = K*R = K*K - K*Q, which is far less
  // singular than R at the origin; R = K - Q then keeps the exact shape of K inside each cell.
  // Either way the residual below is the cell average of K - R - K*R for the represented R.
  const bool split = !grid.self_conv_mass.empty();
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = split ? grid.self_conv_mass[i] / step : rg.k[i];
  std::vector<double> x(n, 0.0);
  // xrev[n-1-j] = x_j keeps the history sum a forward dot product
  std::vector<double> xrev(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double hist = dot(w.data() + 1, xrev.data() + (n - i), i);
    x[i] = (rhs[i] - hist) / diag;
    xrev[n - 1 - i] = x[i];
  }
  // residual with the weights reversed instead of the unknowns
  std::vector<double> wrev(w.rbegin(), w.rend());
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = dot(wrev.data() + (n - 1 - i), x.data(), i + 1);
    res = std::max(res, std::abs(rhs[i] - x[i] - s));
  }
  for (std::size_t i = 0; i < n; ++i) rg.r[i] = split ? rg.k[i] - x[i] : x[i];
  rg.singular_split = split;
  rg.residual = res;
  rg.residual_scale = 1.0 + kmax;
  CompensatedSum cum;
  for (std::size_t i = 0; i < n; ++i) {
    cum.add(step * rg.r[i]);
    rg.cumulative[i + 1] = cum.value();
  }
  return rg;
}

double resolvent_grid_laplace(const ResolventGrid& rg, double lambda) {
  const double cell = rg.step * phi1(-lambda * rg.step);
  CompensatedSum s;
  for (std::size_t j = 0; j < rg.size(); ++j) s.add(rg.r[j] * std::exp(-lambda * rg.step * static_cast<double>(j)));
  return s.value() * cell;
}

MassReport check_resolvent_mass(const ResolventGrid& rg, bool cm_flag, double tol,
                                const std::optional<KernelSpec>& source) {
  if (!cm_flag) throw DomainError("check_resolvent_mass: source kernel is not completely monotone");
  MassReport rep;
  rep.min_r = std::numeric_limits<double>::infinity();
  rep.max_r = -std::numeric_limits<double>::infinity();
  for (double v : rg.r) {
    rep.min_r = std::min(rep.min_r, v);
    rep.max_r = std::max(rep.max_r, v);
  }
  rep.mass_T = rg.cumulative.empty() ? 0.0 : rg.cumulative.back();
  if (source && source->integrable()) {
    const double k0 = laplace_transform(*source, 0.0);
    rep.mass_infinity_bound = k0 / (1.0 + k0);
  }
  rep.tail_bound = rep.mass_infinity_bound - rep.mass_T;
  rep.nonnegative = rep.min_r >= -1e-10;
  rep.mass_ok = rep.mass_T <= 1.0 + tol;
  rep.pass = rep.nonnegative && rep.mass_ok;
  return rep;
}

ScaledLaplaceReport resolvent_scaled_laplace_check(const KernelSpec& spec, const std::vector<double>& n_ladder,
                                                   const std::vector<double>& lambdas, double numeric_step,
                                                   double numeric_horizon) {
  ScaledLaplaceReport rep;
  std::vector<ResolventGrid> grids;
  if (numeric_step > 0.0)
    for (double n : n_ladder) grids.push_back(resolvent_numeric(spec.scaled(n), numeric_step, numeric_horizon));
  for (double lam : lambdas) {
    double prev = std::numeric_limits<double>::infinity();
    const double kh = laplace_transform(spec, lam);
    for (std::size_t i = 0; i < n_ladder.size(); ++i) {
      const double n = n_ladder[i];
      ScaledLaplaceRow row{};
      row.n = n;
      row.lambda = lam;
      row.formula = n * kh / (1.0 + n * kh);
      row.deviation = 1.0 / (1.0 + n * kh);
      row.numeric = std::nan("");
      row.rel_error = std::nan("");
      if (!grids.empty()) {
        row.numeric = resolvent_grid_laplace(grids[i], lam);
        row.rel_error = std::abs(row.numeric / row.formula - 1.0);
        rep.max_rel_error = std::max(rep.max_rel_error, row.rel_error);
      }
      if (!(row.deviation < prev)) rep.monotone = false;
      prev = row.deviation;
      rep.rows.push_back(row);
    }
    rep.final_max_deviation = std::max(rep.final_max_deviation, prev);
  }
  return rep;
}

std::vector<double> convolve_nodes(const KernelGrid& grid, const std::vector<double>& u) {
  if (u.empty()) return {};
  const std::size_t n = u.size() - 1;
  if (n > grid.size()) throw DomainError("convolve_nodes: path longer than the kernel grid");
  std::vector<double> p(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    CompensatedSum s;
    for (std::size_t i = 1; i <= k; ++i) s.add(grid.mass[k - i] * u[i]);
    p[k] = s.value();
  }
  return p;
}

std::vector<double> deconvolve_first_kind(const KernelGrid& grid, const std::vector<double>& path) {
  if (path.empty()) return {};
  const std::size_t n = path.size() - 1;
  if (n > grid.size()) throw DomainError("deconvolve_first_kind: path longer than the kernel grid");
  if (n == 0) return {0.0};
  if (!(std::abs(grid.mass[0]) > 0.0)) throw ConditioningError("deconvolve_first_kind: leading kernel mass is zero");
  std::vector<double> u(n + 1, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    CompensatedSum s;
    for (std::size_t i = 1; i < k; ++i) s.add(grid.mass[k - i] * u[i]);
    u[k] = (path[k] - s.value()) / grid.mass[0];
  }
  u[0] = u[1];
  return u;
}

std::vector<double> shifted_input_curve(const std::function<double(double)>& g0, double lambda,
                                        const KernelSpec& spec, double step, double horizon, double tol) {
  if (!(lambda > 0.0)) throw DomainError("shifted_input_curve: lambda must be > 0");
  const auto rg = resolvent_numeric(spec.scaled(lambda), step, horizon);
  const std::size_t n = rg.size();
  std::vector<double> g(n + 1), h(n);
  for (std::size_t i = 0; i <= n; ++i) g[i] = g0(static_cast<double>(i) * step);
  for (std::size_t i = 0; i < n; ++i) h[i] = g0((static_cast<double>(i) + 0.5) * step);
  if (std::abs(g[0]) > 0.0) throw DomainError("shifted_input_curve: G0(0) must be 0");
  std::vector<double> out(n + 1, 0.0);
  double scale = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    CompensatedSum s;
    // Simpson on each resolvent cell
    for (std::size_t j = 0; j < k; ++j) s.add(rg.r[j] * (g[k - j] + 4.0 * h[k - j - 1] + g[k - j - 1]));
    out[k] = g[k] - s.value() * step / 6.0;
    scale = std::max(scale, std::abs(g[k]));
  }
  const double slack = tol * (1.0 + scale);
  for (std::size_t k = 1; k <= n; ++k) {
    if (out[k] < -slack || out[k] < out[k - 1] - slack) {
      std::ostringstream os;
      os << "shifted_input_curve: output not non-decreasing/nonnegative at t = " << static_cast<double>(k) * step
         << " (value " << out[k] << ", previous " << out[k - 1] << ")";
      throw NumericalFailure(os.str());
    }
  }
  return out;
}

std::string resolvent_csv(const ResolventGrid& rg) {
  std::ostringstream os;
  os.precision(17);
  os << "t,R,Rbar\n";
  for (std::size_t j = 0; j < rg.size(); ++j)
    os << (static_cast<double>(j) + 0.5) * rg.step << ',' << rg.r[j] << ',' << rg.cumulative[j + 1] << '\n';
  return os.str();
}

}  // namespace vclock
