#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "vclock/errors.hpp"
#include "vclock/resolvent.hpp"

using namespace vclock;

namespace {

double max_cell_error(const ResolventGrid& rg, const ResolventForm& cf, bool relative) {
  double worst = 0.0;
  for (std::size_t j = 0; j < rg.size(); ++j) {
    const double a = j * rg.step, b = (j + 1) * rg.step;
    const double avg = (cf.integrated(b) - cf.integrated(a)) / rg.step;
    const double e = std::abs(rg.r[j] - avg);
    worst = std::max(worst, relative ? e / std::abs(avg) : e);
  }
  return worst;
}

}  // namespace

TEST_CASE("closed-form resolvents") {
  const auto e = resolvent_closed_form(KernelSpec::exponential(1, 0));
  for (double t : {0.1, 1.0, 3.0}) CHECK(e(t) == doctest::Approx(std::exp(-t)).epsilon(1e-14));
  const auto f1 = resolvent_closed_form(KernelSpec::fractional(1, 1.0));
  for (double t : {0.1, 1.0, 3.0}) CHECK(f1(t) == doctest::Approx(std::exp(-t)).epsilon(1e-14));
  CHECK_THROWS_AS(resolvent_closed_form(KernelSpec::tabulated({0, 1}, {1, 1})), DomainError);

  // integrated forms against quadrature of the pointwise forms
  for (const auto& spec : {KernelSpec::fractional(1.3, 0.5), KernelSpec::gamma(1, -1, 0.5),
                           KernelSpec::gamma(0.5, -2, 0.8), KernelSpec::exponential(2, -1)}) {
    const auto cf = resolvent_closed_form(spec);
    for (double t : {0.2, 1.5}) {
      const double ref = oracle::integrate([&](double s) { return s > 0 ? cf(s) : 0.0; }, 0.0, t);
      CHECK_MESSAGE(std::abs(cf.integrated(t) / ref - 1) <= 1e-9, spec.name() << " t=" << t);
    }
  }
}

TEST_CASE("resolvent identity on the continuum for closed forms") {
  // K - R = K*R at a few points, by quadrature
  for (const auto& spec : {KernelSpec::fractional(1, 0.5), KernelSpec::gamma(1, -1, 0.5)}) {
    const auto cf = resolvent_closed_form(spec);
    for (double t : {0.3, 1.0}) {
      const double conv =
          oracle::integrate([&](double s) { return s > 0 && s < t ? eval_kernel(spec, t - s) * cf(s) : 0.0; }, 0.0, t);
      CHECK(std::abs(eval_kernel(spec, t) - cf(t) - conv) <= 1e-8);
    }
  }
}

TEST_CASE("numeric resolvent: trivial and closed-form comparisons") {
  const auto zero = resolvent_numeric(KernelSpec::constant(0), 0.01, 1.0);
  for (double v : zero.r) CHECK(v == 0.0);

  const auto ex = resolvent_numeric(KernelSpec::exponential(1, -1), 1e-3, 2.0);
  CHECK(max_cell_error(ex, resolvent_closed_form(KernelSpec::exponential(1, -1)), false) <= 1e-3);
  CHECK(ex.residual <= 1e-8 * ex.residual_scale);

  const auto fr = resolvent_numeric(KernelSpec::fractional(1, 0.5), 1e-3, 2.0);
  CHECK(fr.singular_split);
  CHECK(max_cell_error(fr, resolvent_closed_form(KernelSpec::fractional(1, 0.5)), true) <= 1e-3);

  // point value at t = 1 on a 1e-4 grid
  const auto fine = resolvent_numeric(KernelSpec::fractional(1, 0.5), 1e-4, 1.0);
  const double last = fine.r.back();  // cell [1 - 1e-4, 1]
  const auto cf = resolvent_closed_form(KernelSpec::fractional(1, 0.5));
  CHECK(std::abs(last / cf(1.0 - 0.5e-4) - 1) <= 1e-3);
}

TEST_CASE("numeric resolvent without a closed-form K*K") {
  // shifted kernel: compare against the same solver on a finer grid
  const auto spec = KernelSpec::shifted(KernelSpec::fractional(1, 0.5), 0.05);
  const auto coarse = resolvent_numeric(spec, 2e-3, 1.0);
  const auto fine = resolvent_numeric(spec, 5e-4, 1.0);
  CHECK_FALSE(coarse.singular_split);
  for (std::size_t j = 0; j < coarse.size(); j += 50) {
    const double avg_fine = (fine.r[4 * j] + fine.r[4 * j + 1] + fine.r[4 * j + 2] + fine.r[4 * j + 3]) / 4;
    CHECK(std::abs(coarse.r[j] - avg_fine) <= 1e-4 * (1 + std::abs(avg_fine)));
  }
  CHECK(coarse.residual <= 1e-8 * coarse.residual_scale);
}

TEST_CASE("sign and mass laws") {
  for (const auto& spec : {KernelSpec::exponential(1, 0), KernelSpec::exponential(1, -1),
                           KernelSpec::fractional(1, 0.5), KernelSpec::gamma(1, -1, 0.5),
                           KernelSpec::shifted(KernelSpec::fractional(1, 0.5), 0.1)}) {
    for (double T : {1.0, 10.0, 100.0}) {
      const double step = T / 2000;
      const auto rg = resolvent_numeric(spec, step, T);
      const auto rep = check_resolvent_mass(rg, spec.completely_monotone(), 1e-8, spec);
      CHECK_MESSAGE(rep.pass, spec.name() << " T=" << T << " min r=" << rep.min_r << " mass=" << rep.mass_T);
      CHECK(rep.tail_bound >= -1e-6);
    }
  }
  const auto one = resolvent_numeric(KernelSpec::exponential(1, -1), 0.05, 100.0);
  CHECK(one.cumulative.back() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK_THROWS_AS(check_resolvent_mass(one, false), DomainError);

  // resolvent of -K for non-increasing K is nonpositive
  for (const auto& spec : {KernelSpec::constant(1), KernelSpec::fractional(1, 0.5),
                           KernelSpec::tabulated({0, 0.5, 1, 3}, {2, 1, 0.7, 0})}) {
    REQUIRE(spec.nonincreasing_nonnegative());
    const auto rg = resolvent_numeric(spec.scaled(-1), 0.005, 3.0);
    double mx = -1e300;
    for (double v : rg.r) mx = std::max(mx, v);
    CHECK_MESSAGE(mx <= 1e-10, spec.name());
  }
}

TEST_CASE("Laplace relations for scaled resolvents") {
  const auto one = resolvent_scaled_laplace_check(KernelSpec::constant(1), {1, 10, 100, 1000}, {0.5, 1, 5});
  CHECK(one.monotone);
  for (const auto& r : one.rows) CHECK(r.formula == doctest::Approx(r.n / (r.n + r.lambda)).epsilon(1e-14));
  const auto fr = resolvent_scaled_laplace_check(KernelSpec::fractional(1, 0.5), {100}, {1});
  CHECK(fr.rows[0].deviation <= 0.01);

  // numeric transforms of numeric resolvents
  const auto num = resolvent_scaled_laplace_check(KernelSpec::exponential(1, -1), {1, 10}, {0.5, 1, 5}, 1e-3, 80.0);
  CHECK(num.max_rel_error <= 1e-3);
  const auto numf = resolvent_scaled_laplace_check(KernelSpec::fractional(1, 0.5), {1, 3}, {0.5, 1, 5}, 1e-3, 20.0);
  CHECK(numf.max_rel_error <= 1e-3);

  // resolvent of n K(n.) is n R(n.): grids on step h and n h agree after rescaling
  const auto base = KernelSpec::gamma(1, -1, 0.5);
  const double n = 5, h = 1e-3;
  const auto scaled = resolvent_numeric(KernelSpec::dirac_scaled(base, n), h, 0.4);
  const auto stretched = resolvent_numeric(base, n * h, 2.0);
  REQUIRE(scaled.size() == stretched.size());
  for (std::size_t j = 0; j < scaled.size(); j += 37)
    CHECK(scaled.r[j] == doctest::Approx(n * stretched.r[j]).epsilon(1e-10));
  for (double lam : {0.5, 1.0, 2.0, 5.0, 10.0}) {
    const double kh = laplace_transform(base, lam / n);
    const double want = kh / (1 + kh);
    const auto rg = resolvent_numeric(KernelSpec::dirac_scaled(base, n), 2e-3 / lam, 20.0 / lam);
    CHECK(std::abs(resolvent_grid_laplace(rg, lam) / want - 1) <= 1e-3);
  }
}

TEST_CASE("first-kind deconvolution") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto grid = discretize(KernelSpec::fractional(1, 0.5), 1e-3, 1.0);
  // random smooth input
  const double a1 = u(rng), a2 = u(rng), a3 = u(rng);
  std::vector<double> ups(grid.size() + 1);
  for (std::size_t k = 0; k < ups.size(); ++k) {
    const double t = k * grid.step;
    ups[k] = a1 + a2 * std::sin(3 * t) + a3 * t * t;
  }
  const auto path = convolve_nodes(grid, ups);
  const auto back = deconvolve_first_kind(grid, path);
  for (std::size_t k = 1; k < ups.size(); ++k) CHECK(std::abs(back[k] - ups[k]) <= 1e-10);

  const auto one = discretize(KernelSpec::constant(1), 0.01, 1.0);
  std::vector<double> lin(101);
  for (std::size_t k = 0; k < lin.size(); ++k) lin[k] = k * 0.01;
  const auto flat = deconvolve_first_kind(one, lin);
  for (double v : flat) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

  // K = t^{-1/2}/Gamma(1/2), path t: Upsilon = t^{1/2}/Gamma(3/2)
  const double h = 1e-4;
  const auto fg = discretize(KernelSpec::fractional(1, 0.5), h, 1.0);
  std::vector<double> p(fg.size() + 1);
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = k * h;
  const auto up = deconvolve_first_kind(fg, p);
  for (double t : {0.1, 0.5, 1.0}) {
    const auto k = static_cast<std::size_t>(std::lround(t / h));
    const double want = std::sqrt(t) / std::tgamma(1.5);
    // the quadrature oracle confirms the closed form of the fractional integral
    const double check = oracle::integrate(
        [&](double v) { return v > 0 ? eval_kernel(KernelSpec::fractional(1, 0.5), v) * std::sqrt(t - v) / std::tgamma(1.5) : 0.0; },
        0.0, t);
    CHECK(check == doctest::Approx(t).epsilon(1e-9));
    CHECK(std::abs(up[k] / want - 1) <= 5e-3);
  }

  auto bad = discretize(KernelSpec::constant(1), 0.1, 1.0);
  bad.mass[0] = 0.0;
  CHECK_THROWS_AS(deconvolve_first_kind(bad, std::vector<double>(5, 0.0)), ConditioningError);
}

TEST_CASE("shifted input curve") {
  const double lam = 2.0;
  const auto out = shifted_input_curve([](double t) { return t; }, lam, KernelSpec::constant(1), 1e-3, 2.0);
  for (std::size_t k = 0; k < out.size(); k += 100) {
    const double t = k * 1e-3;
    CHECK(std::abs(out[k] - (1 - std::exp(-lam * t)) / lam) <= 1e-6);
  }
  const auto zero = shifted_input_curve([](double) { return 0.0; }, 1.0, KernelSpec::constant(1), 0.01, 1.0);
  for (double v : zero) CHECK(v == 0.0);

  // fractional K, lambda = 1, G0 = t against quadrature with the closed-form resolvent
  const auto frac = KernelSpec::fractional(1, 0.5);
  const auto fo = shifted_input_curve([](double t) { return t; }, 1.0, frac, 1e-3, 2.0);
  const auto cf = resolvent_closed_form(frac);
  for (double t : {0.5, 1.0, 2.0}) {
    // int_0^t R(s)(t - s) ds = int_0^t Rbar(s) ds
    const double conv = oracle::integrate([&](double s) { return cf.integrated(s); }, 0.0, t);
    const auto k = static_cast<std::size_t>(std::lround(t / 1e-3));
    CHECK(std::abs(fo[k] - (t - conv)) <= 1e-5);
  }
  CHECK_THROWS_AS(shifted_input_curve([](double t) { return t + 1; }, 1.0, frac, 0.01, 1.0), DomainError);
}
