#include "vclock/limit_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "vclock/brownian_clock.hpp"
#include "vclock/errors.hpp"

namespace vclock {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Uniform on (0, 1) from a counter, so cell draws do not depend on visiting order.
double counter_uniform(std::uint64_t key, std::uint64_t c) {
  const std::uint64_t r = mix64(key ^ mix64(c + 0x632be59bd9b4e019ULL));
  return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
}

// Maximum of a Brownian bridge from a to b over a cell of length h with variance rate sigma2.
double bridge_max(double a, double b, double sigma2h, double u) {
  const double d = b - a;
  return 0.5 * (a + b + std::sqrt(d * d - 2.0 * sigma2h * std::log(u)));
}

void check_grid(const std::vector<double>& t) {
  if (t.empty()) throw DomainError("limit sampler: empty time grid");
  if (!(t.front() >= 0.0)) throw DomainError("limit sampler: times must be >= 0");
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i] >= t[i - 1])) throw DomainError("limit sampler: time grid must be non-decreasing");
}

// inf{t in [a, b] : level(t) >= l}, given level(a) < l <= level(b).
double first_time_at_level(const std::function<double(double)>& level, double l, double a, double b) {
  for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + b); ++it) {
    const double m = 0.5 * (a + b);
    (level(m) >= l ? b : a) = m;
  }
  return b;
}

}  // namespace

LimitSpec LimitSpec::standard(TimeChangeFn f, double lambda, double nu, std::function<double(double)> level,
                              double horizon, std::string name) {
  return with_drift(std::move(f), lambda, nu, 1.0 + lambda, std::move(level), horizon, std::move(name));
}

LimitSpec LimitSpec::with_drift(TimeChangeFn f, double lambda, double nu, double drift,
                                std::function<double(double)> level, double horizon, std::string name) {
  LimitSpec s;
  s.f = std::move(f);
  s.lambda = lambda;
  s.nu = nu;
  s.drift = drift;
  s.level = std::move(level);
  s.level_name = std::move(name);
  s.horizon = horizon;
  s.validate();
  return s;
}

void LimitSpec::validate() const {
  if (!(drift > 0.0)) throw DomainError("LimitSpec: drift must be > 0");
  if (!(nu > 0.0)) throw DomainError("LimitSpec: nu must be > 0");
  if (!(horizon > 0.0)) throw DomainError("LimitSpec: horizon must be > 0");
  if (!level) throw DomainError("LimitSpec: missing level curve");
  if (!(level(0.0) >= 0.0)) throw DomainError("LimitSpec: level must be >= 0");
}

JumpPath simulate_limit_grid(const LimitSpec& spec, const std::vector<double>& t_grid, const LimitGridOptions& opt) {
  spec.validate();
  check_grid(t_grid);
  if (!(opt.clock_step > 0.0)) throw DomainError("simulate_limit_grid: clock step must be > 0");
  const BrownianClock clock(opt.seed, opt.stream, std::ldexp(opt.clock_step, opt.clock_depth), opt.clock_depth,
                            opt.node_budget);
  const double h = clock.fine_step();
  const double sigma2h = spec.nu * spec.nu * h;
  const std::uint64_t key = derive_seed({opt.seed, opt.stream, kTagBridgeMax});
  const TimeChangeFn& f = spec.f;

  JumpPath p;
  p.clock_step = h;
  p.clock_depth = opt.clock_depth;
  p.seed = opt.seed;
  p.stream = opt.stream;
  const std::size_t n = t_grid.size();
  p.t = t_grid;
  p.x.assign(n, kNaN);
  p.x_left.assign(n, kNaN);
  p.level.resize(n);
  for (std::size_t k = 0; k < n; ++k) p.level[k] = spec.level(t_grid[k]);

  std::vector<std::size_t> rec_cell;
  std::vector<double> rec_lo, rec_hi;
  // decoration range over the nodes strictly after the previous record cell, up to this record's cell
  std::vector<double> gap_lo, gap_hi;
  double H = 0.0;
  std::size_t c = 0;
  double Z_c = 0.0, F_c = 0.0;
  double run_lo = 0.0, run_hi = 0.0;

  auto advance = [&]() {
    const double u1 = static_cast<double>(c + 1) * h;
    const double W1 = clock.node(c + 1);
    const double s1 = f.inverse(u1);
    const double Z1 = spec.drift * s1 - spec.nu * W1;
    const double M = std::max({bridge_max(Z_c, Z1, sigma2h, counter_uniform(key, c)), Z_c, Z1});
    if (M > H) {
      rec_cell.push_back(c);
      rec_lo.push_back(H);
      rec_hi.push_back(M);
      gap_lo.push_back(std::min(run_lo, F_c));
      gap_hi.push_back(std::max(run_hi, F_c));
      H = M;
      run_lo = std::numeric_limits<double>::infinity();
      run_hi = -run_lo;
    }
    ++c;
    Z_c = Z1;
    F_c = spec.decoration_value(s1, W1);
    run_lo = std::min(run_lo, F_c);
    run_hi = std::max(run_hi, F_c);
  };
  run_lo = run_hi = F_c;

  auto x_at = [&](std::size_t r, double l) {
    const double span = rec_hi[r] - rec_lo[r];
    const double w = span > 0.0 ? std::clamp((l - rec_lo[r]) / span, 0.0, 1.0) : 1.0;
    return f.inverse((static_cast<double>(rec_cell[r]) + w) * h);
  };

  std::size_t r_strict = 0, r_weak = 0;
  try {
    for (std::size_t k = 0; k < n; ++k) {
      const double l = p.level[k];
      if (k > 0 && l < p.level[k - 1]) throw DomainError("simulate_limit_grid: level curve must be non-decreasing");
      while (H <= l) advance();
      while (rec_hi[r_strict] <= l) ++r_strict;
      while (rec_hi[r_weak] < l) ++r_weak;
      p.x[k] = x_at(r_strict, l);
      p.x_left[k] = x_at(r_weak, l);
    }
  } catch (const BudgetError&) {
    if (!opt.allow_partial) throw;
    p.partial = true;
  }
  p.cells = c;

  // jumps: gaps between consecutive record cells, at levels up to G0(T)
  const double l_end = p.level.back();
  for (std::size_t r = 0; r + 1 < rec_cell.size(); ++r) {
    if (rec_cell[r + 1] == rec_cell[r] + 1) continue;
    const double l = rec_hi[r];
    if (l > l_end) break;
    LimitJump j;
    j.x_left = f.inverse(static_cast<double>(rec_cell[r] + 1) * h);
    j.x_right = f.inverse(static_cast<double>(rec_cell[r + 1]) * h);
    if (j.x_right - j.x_left < opt.min_jump) continue;
    const auto it = std::lower_bound(p.level.begin(), p.level.end(), l);
    const std::size_t k = static_cast<std::size_t>(it - p.level.begin());
    if (k == 0)
      j.t = t_grid.front();
    else
      j.t = first_time_at_level(spec.level, l, t_grid[k - 1], t_grid[std::min(k, n - 1)]);
    j.dec_lo = gap_lo[r + 1];
    j.dec_hi = gap_hi[r + 1];
    p.jumps.push_back(j);
  }
  if (opt.keep_records) {
    p.rec_cell = std::move(rec_cell);
    p.rec_lo = std::move(rec_lo);
    p.rec_hi = std::move(rec_hi);
  }
  return p;
}

JumpPath sample_affine_exact(const LimitSpec& spec, const std::vector<double>& t_grid, std::uint64_t seed,
                             std::uint64_t stream) {
  spec.validate();
  if (!spec.f.affine() || spec.f.a1() != 1.0)
    throw SchemeMismatchError("sample_affine_exact: requires f = identity");
  return tangent_step_sampler(spec, t_grid, seed, stream);
}

JumpPath tangent_step_sampler(const LimitSpec& spec, const std::vector<double>& t_grid, std::uint64_t seed,
                              std::uint64_t stream, const TangentOptions& opt) {
  spec.validate();
  check_grid(t_grid);
  const std::size_t n = t_grid.size();
  JumpPath p;
  p.seed = seed;
  p.stream = stream;
  p.t = t_grid;
  p.x.resize(n);
  p.level.resize(n);
  Engine eng = make_engine({seed, stream, kTagExact});
  const double nu2 = spec.nu * spec.nu;
  // clock increment for Z to rise by `gap` from s, walked on a local grid with bridge-maximum detection
  auto grid_cross = [&](double s0, double u0, double gap, std::size_t k, std::size_t it) {
    Engine loc = make_engine({seed, stream, kTagMisc, k, it});
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif;
    const double hh = std::max(1e-10, 1e-4 * gap * gap / nu2);
    double v = 0.0, z = 0.0, w = 0.0;
    for (std::size_t steps = 0; steps < 100'000'000; ++steps) {
      w += spec.nu * std::sqrt(hh) * gauss(loc);
      const double z1 = spec.drift * (spec.f.inverse(u0 + v + hh) - s0) - w;
      const double m = bridge_max(z, z1, nu2 * hh, 1.0 - unif(loc));
      if (m > gap) return v + hh * std::clamp((gap - z) / (m - z), 0.0, 1.0);
      v += hh;
      z = z1;
    }
    throw BudgetError("tangent_step_sampler: fallback walk did not cross");
  };
  double s = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double l = spec.level(t_grid[k]);
    p.level[k] = l;
    const double g = l - prev;
    if (g < 0.0) throw DomainError("tangent_step_sampler: level curve must be non-decreasing");
    if (g > 0.0) {
      // Tangent draws on the remaining gap. For convex f the tangent drift dominates the true one,
      // so at the tangent crossing the true Z sits delta >= 0 below the target and the fresh
      // Brownian motion after that stopping time continues from there.
      double gap = g;
      for (std::size_t it = 0;; ++it) {
        const double u = spec.f(s);
        const double slope = spec.f.derivative(s);
        const double mu = slope > 0.0 && std::isfinite(slope) ? spec.drift / slope : 0.0;
        if (!(mu > 1e-12) || it >= opt.max_corrections) {
          ++p.fallbacks;
          s = spec.f.inverse(u + grid_cross(s, u, gap, k, it));
          break;
        }
        const double du = ig_sample(gap / mu, gap * gap / nu2, eng);
        const double s1 = spec.f.inverse(u + du);
        const double delta = mu * du - spec.drift * (s1 - s);
        s = s1;
        if (!opt.iterate || delta <= opt.gap_tol * (1.0 + g)) break;
        gap = delta;
      }
    }
    p.x[k] = s;
    prev = l;
  }
  p.x_left = p.x;
  return p;
}

double ig_pdf(double x, double mean, double shape) {
  if (!(mean > 0.0) || !(shape > 0.0)) throw DomainError("ig_pdf: mean and shape must be > 0");
  if (!(x > 0.0)) return 0.0;
  const double d = x - mean;
  return std::exp(0.5 * std::log(shape / (2.0 * M_PI)) - 1.5 * std::log(x) - shape * d * d / (2.0 * mean * mean * x));
}

double log_norm_sf(double z) {
  if (z < 30.0) return std::log(0.5L * std::erfc(static_cast<long double>(z) / std::sqrt(2.0L)));
  // Mills-ratio expansion: P(N > z) = phi(z)/z (1 - 1/z^2 + 3/z^4 - 15/z^6 + 105/z^8 - ...)
  const double iz2 = 1.0 / (z * z);
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 8; ++k) {
    term *= -(2.0 * k - 1.0) * iz2;
    sum += term;
  }
  return -0.5 * z * z - std::log(z) - 0.5 * std::log(2.0 * M_PI) + std::log(sum);
}

double ig_cdf(double x, double mean, double shape) {
  if (!(mean > 0.0) || !(shape > 0.0)) throw DomainError("ig_cdf: mean and shape must be > 0");
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double r = std::sqrt(shape / x);
  const double a = r * (x / mean - 1.0);
  const double b = r * (x / mean + 1.0);
  const double first = std::exp(log_norm_sf(-a));
  const double second = std::exp(2.0 * shape / mean + log_norm_sf(b));
  return std::clamp(first + second, 0.0, 1.0);
}

double ig_sample(double mean, double shape, Engine& eng) {
  if (!(mean > 0.0) || !(shape > 0.0)) throw DomainError("ig_sample: mean and shape must be > 0");
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  const double v = gauss(eng);
  const double r = mean * v * v / (2.0 * shape);
  // smaller root of the quadratic, written without cancellation
  const double x = mean / (1.0 + r + std::sqrt(r * (2.0 + r)));
  return unif(eng) * (mean + x) <= mean ? x : mean * mean / x;
}

std::vector<double> ig_sampler(double mean, double shape, std::size_t n, std::uint64_t seed) {
  Engine eng = make_engine({seed, kTagExact});
  std::vector<double> out(n);
  for (auto& v : out) v = ig_sample(mean, shape, eng);
  return out;
}

double stable_half_sample(double level, double nu, Engine& eng) {
  if (!(level > 0.0) || !(nu > 0.0)) throw DomainError("stable_half_sample: level and nu must be > 0");
  std::normal_distribution<double> gauss;
  double z = 0.0;
  while (z == 0.0) z = gauss(eng);
  const double a = level / nu;
  return a * a / (z * z);
}

std::vector<double> sample_stable_half(double level, double nu, std::size_t n, std::uint64_t seed) {
  Engine eng = make_engine({seed, kTagExact, 2});
  std::vector<double> out(n);
  for (auto& v : out) v = stable_half_sample(level, nu, eng);
  return out;
}

double levy_cdf(double x, double level, double nu) {
  if (!(x > 0.0)) return 0.0;
  return std::erfc(level / nu / std::sqrt(2.0 * x));
}

std::string jump_path_csv(const JumpPath& p) {
  std::ostringstream os;
  os.precision(17);
  os << "t,x_left,x,level\n";
  for (std::size_t k = 0; k < p.t.size(); ++k)
    os << p.t[k] << ',' << p.x_left[k] << ',' << p.x[k] << ',' << p.level[k] << '\n';
  return os.str();
}

std::string decorations_csv(const JumpPath& p, const LimitSpec& spec, std::size_t points_per_jump) {
  std::ostringstream os;
  os.precision(17);
  os << "jump,t,s,F\n";
  if (p.jumps.empty() || !(p.clock_step > 0.0)) return os.str();
  const BrownianClock clock(p.seed, p.stream, std::ldexp(p.clock_step, p.clock_depth), p.clock_depth);
  const std::size_t m = std::max<std::size_t>(points_per_jump, 2);
  for (std::size_t j = 0; j < p.jumps.size(); ++j) {
    const auto& J = p.jumps[j];
    for (std::size_t i = 0; i < m; ++i) {
      const double s = J.x_left + (J.x_right - J.x_left) * static_cast<double>(i) / static_cast<double>(m - 1);
      os << j << ',' << J.t << ',' << s << ',' << spec.decoration_value(s, clock(spec.f(s))) << '\n';
    }
  }
  return os.str();
}

}  // namespace vclock
