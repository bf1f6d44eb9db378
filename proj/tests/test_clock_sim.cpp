#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "vclock/clock_sim.hpp"
#include "vclock/errors.hpp"
#include "vclock/stats.hpp"

using namespace vclock;

namespace {

ClockInput base_input(const KernelSpec& K, double lambda, double nu, Scheme scheme) {
  ClockInput in;
  in.kernel = K;
  in.lambda = lambda;
  in.nu = nu;
  in.curve.a = CurveSpec::constant(1.0);
  in.horizon = 1.0;
  in.step = 1e-3;
  in.seed = 2024;
  in.scheme = scheme;
  return in;
}

// X_k (1 + lambda m_0) = G0_k - lambda sum_{i<k} m_{k-i} X_i with cell masses from quadrature.
std::vector<double> direct_linear_solve(const KernelSpec& K, double lambda, const std::vector<double>& G0, double step) {
  const std::size_t N = G0.size() - 1;
  std::vector<double> m(N);
  for (std::size_t j = 0; j < N; ++j)
    m[j] = oracle::integrate([&](double s) { return eval_kernel(K, s); }, j * step, (j + 1) * step);
  std::vector<double> X(N + 1, 0.0);
  for (std::size_t k = 1; k <= N; ++k) {
    long double s = 0;
    for (std::size_t i = 1; i < k; ++i) s += static_cast<long double>(m[k - i]) * X[i];
    X[k] = static_cast<double>((G0[k] - lambda * s) / (1.0 + lambda * m[0]));
  }
  return X;
}

// E[Y] for K = 1: Y = 1 - lambda int Y, so E[X_T] = (1 - e^{-lambda T}) / lambda.
double cir_mean_x(double lambda, double T) { return -std::expm1(-lambda * T) / lambda; }

std::vector<double> terminal(const std::vector<ClockPath>& ps) {
  std::vector<double> v;
  v.reserve(ps.size());
  for (const auto& p : ps) v.push_back(p.X.back());
  return v;
}

}  // namespace

TEST_CASE("deterministic degeneracy") {
  for (Scheme s : {Scheme::TimeChange, Scheme::SDE}) {
    CAPTURE(to_string(s));
    ClockSimulator sim(base_input(KernelSpec::constant(1.0), 0.0, 0.0, s));
    const auto p = sim.path(0);
    for (std::size_t k = 0; k < p.X.size(); ++k) {
      CHECK(p.X[k] == doctest::Approx(p.t(k)).epsilon(1e-12));
      CHECK(p.M[k] == 0.0);
    }
    const auto b = extract_bursts(p, sim);
    for (double v : b.upsilon) CHECK(v == 0.0);
    for (double v : b.F) CHECK(v == 0.0);
  }
}

TEST_CASE("noise-free time change solves the linear Volterra equation") {
  for (const auto& K : {KernelSpec::fractional(1.0, 0.6), KernelSpec::exponential(1.0, -2.0), KernelSpec::constant(1.0)}) {
    CAPTURE(K.name());
    auto in = base_input(K, 1.5, 0.0, Scheme::TimeChange);
    in.curve.b = CurveSpec::exp_decay(5.0, 1.0);
    ClockSimulator sim(in);
    const auto p = sim.path(0);
    const auto X = direct_linear_solve(K, in.lambda, sim.G0(), in.step);
    double err = 0.0;
    for (std::size_t k = 0; k < X.size(); ++k) err = std::max(err, std::abs(p.X[k] - X[k]));
    CHECK(err <= 1e-8);
    CHECK(p.stalled_steps == 0);
  }
}

TEST_CASE("time-change paths: invariants and determinism") {
  for (const auto& f : {TimeChangeFn::identity(), TimeChangeFn::linear_plus_quadratic(1.0, 0.5)}) {
    auto in = base_input(KernelSpec::fractional(1.0, 0.5), 1.0, 1.0, Scheme::TimeChange);
    in.f = f;
    in.curve.b = CurveSpec::exp_decay(10.0, 1.0);
    in.horizon = 0.5;
    ClockSimulator sim(in);
    const auto ps = sim.paths(20);
    for (const auto& p : ps) {
      CHECK(p.X[0] == 0.0);
      CHECK(std::is_sorted(p.X.begin(), p.X.end()));
      const auto clock = sim.clock_for(p.index);
      double worst = 0.0;
      for (std::size_t k = 0; k < p.X.size(); k += 7) worst = std::max(worst, std::abs(clock(f(p.X[k])) - p.M[k]));
      CHECK(worst <= 1e-12);
      // Upsilon from the path and from deconvolving X - G0 coincide under this scheme
      const auto b = extract_bursts(p, sim, 5000);
      double d = 0.0, scale = 1.0;
      for (std::size_t k = 1; k < b.upsilon.size(); ++k) {
        d = std::max(d, std::abs(b.upsilon[k] - b.upsilon_hat[k]));
        scale = std::max(scale, std::abs(b.upsilon[k]));
      }
      CHECK(d <= 1e-7 * scale);
      CHECK(b.clock_s.back() == doctest::Approx(p.X.back()));
    }
    const auto again = ClockSimulator(in).path(3);
    CHECK(again.X == ps[3].X);
    CHECK(again.M == ps[3].M);
    CHECK(ps[3].X != ps[4].X);
  }
}

TEST_CASE("SDE scheme: hypotheses") {
  auto in = base_input(KernelSpec::fractional(1.0, 0.5), 1.0, 1.0, Scheme::SDE);
  CHECK_THROWS_AS(simulate_sde(in, 1), SchemeMismatchError);
  in.kernel = KernelSpec::fractional(1.0, 0.75);
  const auto ps = simulate_sde(in, 5);
  for (const auto& p : ps) {
    CHECK(std::is_sorted(p.X.begin(), p.X.end()));
    CHECK(p.scheme == Scheme::SDE);
  }
  CHECK(simulate_sde(in, 5)[2].X == ps[2].X);
}

TEST_CASE("SDE scheme: mean, martingale and quadratic variation") {
  const double lambda = 1.0;
  const auto in = base_input(KernelSpec::constant(1.0), lambda, 1.0, Scheme::SDE);
  const auto ps = simulate_sde(in, 10000);
  std::vector<double> xT = terminal(ps), mT, m2, fx, mh;
  for (const auto& p : ps) {
    mT.push_back(p.M.back());
    m2.push_back(p.M.back() * p.M.back());
    fx.push_back(p.X.back());
    mh.push_back(p.M[500]);
  }
  const auto mx = mc_mean(xT);
  CHECK(std::abs(mx.mean - cir_mean_x(lambda, 1.0)) <= 4 * mx.se);
  const auto mm = mc_mean(mT);
  CHECK(std::abs(mm.mean) <= 4 * mm.se);
  CHECK(std::abs(mc_mean(mh).mean) <= 4 * mc_mean(mh).se);
  // Var(M_T) = E f(X_T): the pathwise differences M^2 - f(X) have mean zero
  std::vector<double> dq(m2.size());
  for (std::size_t i = 0; i < dq.size(); ++i) dq[i] = m2[i] - fx[i];
  const auto md = mc_mean(dq);
  MESSAGE("QV relative gap " << md.mean / mc_mean(fx).mean << ", se " << md.se / mc_mean(fx).mean);
  CHECK(std::abs(md.mean) <= 3 * md.se);
}

TEST_CASE("time-change scheme: mean and agreement with the SDE scheme") {
  const double lambda = 1.0;
  const auto in = base_input(KernelSpec::constant(1.0), lambda, 1.0, Scheme::TimeChange);
  const auto tc = simulate_timechange(in, 10000);
  const auto sde = simulate_sde(in, 10000);
  const auto mx = mc_mean(terminal(tc));
  CHECK(std::abs(mx.mean - cir_mean_x(lambda, 1.0)) <= 4 * mx.se);
  const auto ks = ks_two_sample(Sample(terminal(tc)), Sample(terminal(sde)));
  CHECK(ks.statistic <= 0.03);
  // E[X_t - X_s] <= G0(t) - G0(s) + 3 SE on a grid of pairs
  ClockSimulator sim(in);
  int bad = 0;
  for (std::size_t s = 0; s <= 1000; s += 100)
    for (std::size_t t = s + 100; t <= 1000; t += 100) {
      std::vector<double> d;
      for (const auto& p : tc) d.push_back(p.X[t] - p.X[s]);
      const auto md = mc_mean(d);
      if (md.mean > sim.G0()[t] - sim.G0()[s] + 3 * md.se) ++bad;
    }
  CHECK(bad == 0);
}

TEST_CASE("pathwise increment bound") {
  for (const auto& K : {KernelSpec::constant(1.0), KernelSpec::fractional(1.0, 0.75)}) {
    CAPTURE(K.name());
    auto in = base_input(K, 1.0, 1.0, Scheme::SDE);
    in.step = 1e-2;
    in.curve.b = CurveSpec::exp_decay(3.0, 1.0);
    ClockSimulator sim(in);
    std::size_t violations = 0;
    for (std::uint64_t i = 0; i < 100; ++i) violations += pathwise_increment_bound_check(sim.path(i), sim).violations;
    CHECK(violations == 0);
  }
  auto in = base_input(KernelSpec::constant(1.0), 1.0, 0.0, Scheme::SDE);
  ClockSimulator sim(in);
  const auto r = pathwise_increment_bound_check(sim.path(0), sim);
  CHECK(r.violations == 0);
  CHECK(r.worst_excess <= 1e-12);
  ClockSimulator tcsim(base_input(KernelSpec::constant(1.0), 1.0, 1.0, Scheme::TimeChange));
  CHECK_THROWS_AS(pathwise_increment_bound_check(tcsim.path(0), tcsim), SchemeMismatchError);
}

TEST_CASE("input validation") {
  auto in = base_input(KernelSpec::constant(1.0), 1.0, 1.0, Scheme::SDE);
  in.step = 0.0;
  CHECK_THROWS_AS(ClockSimulator{in}, DomainError);
  in = base_input(KernelSpec::constant(1.0), 1.0, -1.0, Scheme::SDE);
  CHECK_THROWS_AS(ClockSimulator{in}, DomainError);
  in = base_input(KernelSpec::constant(1.0), 1.0, 1.0, Scheme::SDE);
  in.curve.a = CurveSpec::exp_decay(1.0, 1.0);
  CHECK_THROWS_AS(ClockSimulator{in}, DomainError);
  CHECK(parse_scheme("sde") == Scheme::SDE);
  CHECK_THROWS_AS(parse_scheme("rk4"), ConfigError);
}
