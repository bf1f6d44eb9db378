#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "vclock/brownian_clock.hpp"
#include "vclock/errors.hpp"
#include "vclock/limit_law.hpp"
#include "vclock/parallel.hpp"
#include "vclock/stats.hpp"

using namespace vclock;

namespace {

std::vector<double> unit_grid(std::size_t n, double T) {
  std::vector<double> t(n + 1);
  for (std::size_t k = 0; k <= n; ++k) t[k] = T * static_cast<double>(k) / static_cast<double>(n);
  return t;
}

std::vector<double> terminal_grid(const LimitSpec& spec, std::size_t paths, double clock_step, std::size_t nt = 10) {
  std::vector<double> out(paths);
  const auto grid = unit_grid(nt, spec.horizon);
  parallel_for(paths, [&](std::size_t i) {
    LimitGridOptions o;
    o.clock_step = clock_step;
    o.seed = 77;
    o.stream = i;
    o.keep_records = false;
    out[i] = simulate_limit_grid(spec, grid, o).x.back();
  });
  return out;
}

double fig1_level(double t) { return 100.0 * -std::expm1(-t); }

}  // namespace

TEST_CASE("inverse Gaussian density and distribution") {
  for (auto [mu, lam] : {std::pair{1.0, 1.0}, {0.3, 5.0}, {2.0, 0.2}, {1.0, 400.0}}) {
    CAPTURE(mu);
    CAPTURE(lam);
    auto pdf = [&](double x) { return ig_pdf(x, mu, lam); };
    const double mass = oracle::integrate(pdf, 0.0, mu) + oracle::integrate(pdf, mu, 20 * mu) +
                        oracle::integrate(pdf, 20 * mu, 1e6);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    for (double x : {0.1 * mu, 0.7 * mu, mu, 1.9 * mu, 6.0 * mu}) {
      CHECK(ig_cdf(x, mu, lam) == doctest::Approx(oracle::integrate(pdf, 0.0, x)).epsilon(1e-9));
      const double h = 1e-5 * x;
      const double fd = (ig_cdf(x + h, mu, lam) - ig_cdf(x - h, mu, lam)) / (2 * h);
      // finite differences only resolve the density where the cdf is away from 1
      if (pdf(x) > 1e-200 && ig_cdf(x, mu, lam) < 1.0 - 1e-6) CHECK(std::abs(fd / pdf(x) - 1.0) <= 1e-6);
    }
  }
  // infinite mean limit is the Levy law
  for (double x : {0.5, 1.0, 2.0}) CHECK(ig_cdf(x, 1e6, 1.0) == doctest::Approx(2.0 * oracle::norm_cdf(-std::sqrt(1.0 / x))).epsilon(1e-5));
  // very large shape stays finite and monotone
  double prev = 0.0;
  for (double x = 0.9; x <= 1.1; x += 0.01) {
    const double c = ig_cdf(x, 1.0, 1e7);
    CHECK(std::isfinite(c));
    CHECK(c >= prev);
    prev = c;
  }
  CHECK(ig_cdf(1.0, 1.0, 1e7) == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(ig_pdf(-1.0, 1.0, 1.0) == 0.0);
  CHECK(ig_cdf(0.0, 1.0, 1.0) == 0.0);
  CHECK_THROWS_AS(ig_cdf(1.0, -1.0, 1.0), DomainError);
  // tail helper against erfc where both are representable
  for (double z : {-3.0, 0.0, 5.0, 29.0, 31.0, 35.0})
    CHECK(log_norm_sf(z) == doctest::Approx(std::log(0.5 * std::erfc(z / std::sqrt(2.0)))).epsilon(1e-12));
}

TEST_CASE("inverse Gaussian sampler") {
  const double mu = 1.5, lam = 2.0;
  const auto big = ig_sampler(mu, lam, 100000, 1);
  const auto m = mc_mean(big);
  CHECK(std::abs(m.mean - mu) <= 4 * std::sqrt(mu * mu * mu / lam / 1e5));
  const auto ks = ks_one_sample(Sample(ig_sampler(mu, lam, 10000, 2)), [&](double x) { return ig_cdf(x, mu, lam); });
  CHECK(ks.statistic <= 0.015);
  const auto conc = ig_sampler(1.0, 1e6, 10000, 3);
  const auto close = std::count_if(conc.begin(), conc.end(), [](double x) { return std::abs(x - 1.0) <= 0.01; });
  CHECK(close >= 9900);
  CHECK(ig_sampler(mu, lam, 10, 9) == ig_sampler(mu, lam, 10, 9));
}

TEST_CASE("half-stable sampler") {
  const double level = 0.7, nu = 1.3;
  auto v = sample_stable_half(level, nu, 100000, 4);
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  const double q75 = 0.6744897501960817;
  const double median = std::pow(level / nu, 2) / (q75 * q75);
  CHECK(std::abs(v[v.size() / 2] / median - 1.0) <= 0.03);
  const auto ks = ks_one_sample(Sample(sample_stable_half(level, nu, 10000, 5)),
                                [&](double x) { return levy_cdf(x, level, nu); });
  CHECK(ks.statistic <= 0.015);
  // level 2G gives four times the law
  auto twice = sample_stable_half(2 * level, nu, 10000, 6);
  for (auto& x : twice) x /= 4.0;
  CHECK(ks_two_sample(Sample(twice), Sample(sample_stable_half(level, nu, 10000, 7))).statistic <= 0.02);
}

TEST_CASE("grid first passage: degenerate cases") {
  const auto grid = unit_grid(20, 1.0);
  LimitGridOptions o;
  o.clock_step = 1e-3;
  {
    const auto spec = LimitSpec::standard(TimeChangeFn::identity(), 0.5, 1e-8, [](double t) { return 2.0 * t; }, 1.0);
    const auto p = simulate_limit_grid(spec, grid, o);
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(std::abs(p.x[k] - 2.0 * grid[k] / 1.5) <= 1e-4);
  }
  {
    const auto spec = LimitSpec::standard(TimeChangeFn::identity(), 1.0, 1.0, [](double) { return 0.0; }, 1.0);
    const auto p = simulate_limit_grid(spec, grid, o);
    for (double x : p.x) CHECK(x == 0.0);
  }
  CHECK_THROWS_AS(LimitSpec::standard(TimeChangeFn::identity(), -1.0, 1.0, [](double) { return 0.0; }, 1.0),
                  DomainError);
  // budget exhaustion
  o.node_budget = 4096;
  const auto spec = LimitSpec::standard(TimeChangeFn::identity(), 0.0, 1.0, [](double t) { return 100.0 * t; }, 1.0);
  CHECK_THROWS_AS(simulate_limit_grid(spec, grid, o), BudgetError);
  o.allow_partial = true;
  CHECK(simulate_limit_grid(spec, grid, o).partial);
}

TEST_CASE("grid first passage: path invariants") {
  // level flat on [0.4, 0.6]
  auto level = [](double t) { return t < 0.4 ? t : (t < 0.6 ? 0.4 : 0.4 + (t - 0.6)); };
  const auto spec = LimitSpec::standard(TimeChangeFn::linear_plus_quadratic(1.0, 0.5), 0.5, 1.0, level, 1.0);
  const auto grid = unit_grid(50, 1.0);
  for (std::uint64_t i = 0; i < 20; ++i) {
    LimitGridOptions o;
    o.clock_step = 1e-3;
    o.stream = i;
    o.min_jump = 0.0;
    const auto p = simulate_limit_grid(spec, grid, o);
    CHECK(std::is_sorted(p.x.begin(), p.x.end()));
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(p.x_left[k] <= p.x[k]);
    CHECK(p.x[20] == p.x[30]);
    // no clock node before the crossing cell sits above the level
    const BrownianClock clock(o.seed, o.stream, std::ldexp(o.clock_step, o.clock_depth), o.clock_depth);
    const double h = clock.fine_step();
    for (std::size_t k = 5; k < grid.size(); k += 9) {
      const auto last = static_cast<std::size_t>(std::floor(spec.f(p.x[k]) / h * (1 - 1e-12)));
      double zmax = -1e300;
      for (std::size_t j = 0; j < last; ++j) zmax = std::max(zmax, spec.drift * spec.f.inverse(j * h) - clock.node(j));
      CHECK(zmax <= p.level[k] + 1e-12);
    }
    // decorations contain both endpoint values F*(X*_{t-}) = X*_{t-} - G0, F*(X*_t) = X*_t - G0,
    // up to the bridge overshoot inside one clock cell
    const double tol = 5.0 * spec.nu * std::sqrt(h);
    for (const auto& J : p.jumps) {
      CHECK(J.x_right > J.x_left);
      CHECK(J.dec_lo <= J.dec_hi);
      const double l = level(J.t);
      CHECK(std::abs(spec.decoration_value(J.x_right, clock(spec.f(J.x_right))) - (J.x_right - l)) <= tol);
      CHECK(J.dec_hi >= J.x_right - l - tol);
    }
  }
}

TEST_CASE("grid first passage and exact sampler: Inverse Gaussian law") {
  const auto spec = LimitSpec::standard(TimeChangeFn::identity(), 0.0, 1.0, [](double t) { return t; }, 1.0);
  const auto grid_draws = terminal_grid(spec, 10000, 1e-3);
  const auto ig = [](double x) { return ig_cdf(x, 1.0, 1.0); };
  const auto ks_grid = ks_one_sample(Sample(grid_draws), ig);
  MESSAGE("grid vs IG(1,1): " << ks_grid.statistic);
  CHECK(ks_grid.statistic <= 0.02);

  std::vector<double> exact(10000), half_sum(10000);
  const auto tgrid = unit_grid(10, 1.0);
  const auto halves = std::vector<double>{0.0, 0.5, 1.0};
  for (std::size_t i = 0; i < exact.size(); ++i) {
    exact[i] = sample_affine_exact(spec, tgrid, 5, i).x.back();
    Engine e = make_engine({6, i});
    half_sum[i] = ig_sample(0.5, 0.25, e) + ig_sample(0.5, 0.25, e);
  }
  CHECK(ks_one_sample(Sample(exact), ig).statistic <= 0.015);
  const auto two = ks_two_sample(Sample(grid_draws), Sample(exact));
  MESSAGE("grid vs exact two-sample: " << two.statistic);
  CHECK(two.statistic <= 0.02);
  CHECK(ks_two_sample(Sample(exact), Sample(half_sum)).statistic <= 0.02);

  // flat level gives zero increments
  auto flat = LimitSpec::standard(TimeChangeFn::identity(), 0.0, 1.0, [](double t) { return std::min(t, 0.5); }, 1.0);
  const auto p = sample_affine_exact(flat, tgrid, 1, 1);
  for (std::size_t k = 5; k < tgrid.size(); ++k) CHECK(p.x[k] == p.x[5]);
  auto quad = spec;
  quad.f = TimeChangeFn::linear_plus_quadratic(1.0, 0.5);
  CHECK_THROWS_AS(sample_affine_exact(quad, tgrid, 1, 1), SchemeMismatchError);
}

TEST_CASE("tangent sampler") {
  const auto grid = unit_grid(100, 0.1);
  const auto affine = LimitSpec::with_drift(TimeChangeFn::identity(), 1.0, 1.0, 1.0, fig1_level, 0.1);
  for (std::uint64_t i = 0; i < 5; ++i)
    CHECK(tangent_step_sampler(affine, grid, 3, i).x == sample_affine_exact(affine, grid, 3, i).x);

  const auto quad = LimitSpec::with_drift(TimeChangeFn::linear_plus_quadratic(1.0, 0.5), 1.0, 1.0, 1.0, fig1_level, 0.1);
  const std::size_t n = 10000;
  const auto oracle_draws = terminal_grid(quad, n, 2e-3);
  const Sample oracle_sample(oracle_draws);
  // one tangent draw per step: error shrinks with the step
  std::vector<double> ks;
  TangentOptions plain;
  plain.iterate = false;
  for (std::size_t steps : {5, 25, 100}) {
    const auto g = unit_grid(steps, 0.1);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = tangent_step_sampler(quad, g, 8, i, plain).x.back();
    ks.push_back(ks_two_sample(Sample(v), oracle_sample).statistic);
    MESSAGE("single tangent, steps " << steps << ": KS " << ks.back());
  }
  CHECK(ks[0] > ks[1]);
  CHECK(ks[1] > ks[2]);
  // redrawing on the remaining gap recovers the grid law
  for (std::size_t steps : {5, 100}) {
    const auto g = unit_grid(steps, 0.1);
    std::vector<double> v(n);
    std::size_t fallbacks = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = tangent_step_sampler(quad, g, 8, i);
      v[i] = p.x.back();
      fallbacks += p.fallbacks;
      CHECK(std::is_sorted(p.x.begin(), p.x.end()));
    }
    const double k = ks_two_sample(Sample(v), oracle_sample).statistic;
    MESSAGE("iterated tangent, steps " << steps << ": KS " << k);
    CHECK(k <= 0.05);
    CHECK(fallbacks == 0);
  }
}
