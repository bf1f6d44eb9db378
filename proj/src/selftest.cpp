#include <algorithm>
#include <cmath>
#include <random>

#include "vclock/cadlag.hpp"
#include "vclock/experiments.hpp"

namespace vclock {

namespace {

// clamp(n (t - 1/2), 0, 1) on [0, 1]
CadlagPath ramp(double n) {
  if (0.5 + 1.0 / n >= 1.0) return CadlagPath::piecewise_linear({0.0, 0.5, 1.0}, {0.0, 0.0, std::min(1.0, 0.5 * n)});
  return CadlagPath::piecewise_linear({0.0, 0.5, 0.5 + 1.0 / n, 1.0}, {0.0, 0.0, 1.0, 1.0});
}

CadlagPath unit_step(double at) { return CadlagPath::step({0.0, at, 1.0}, {0.0, 1.0, 1.0}); }

CadlagPath random_monotone(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int m = 3 + static_cast<int>(u(rng) * 6);
  std::vector<double> t{0.0}, v{u(rng)}, l{0.0};
  for (int i = 1; i <= m; ++i) t.push_back(static_cast<double>(i) / m + (i < m ? 0.05 * (u(rng) - 0.5) : 0.0));
  for (int i = 1; i <= m; ++i) {
    l.push_back(v.back() + (u(rng) < 0.5 ? 0.0 : 0.5 * u(rng)));
    v.push_back(l.back() + (u(rng) < 0.5 ? 0.0 : u(rng)));
  }
  return CadlagPath(t, v, l);
}

// u + 2 sin(2 pi u) along a ramp of width 1/n
CadlagPath osc(double n) {
  return CadlagPath::sampled(
      [n](double t) {
        const double u = std::clamp(n * (t - 0.5), 0.0, 1.0);
        return u + 2.0 * std::sin(2 * M_PI * u);
      },
      0.0, 1.0, static_cast<std::size_t>(400 * n));
}

SelftestResult at_most(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, value <= threshold};
}

// largest ratio of consecutive values; below 1 means strict decay
double decay_ratio(const std::vector<double>& v) {
  double worst = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) worst = std::max(worst, v[i - 1] > 0.0 ? v[i] / v[i - 1] : INFINITY);
  return worst;
}

}  // namespace

std::vector<SelftestResult> topology_selftest() {
  std::vector<SelftestResult> out;

  {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double err = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      const auto tau = random_monotone(rng);
      const auto ph =
          SampledPath::from_function([](double s) { return std::cos(5 * s) + s * s; }, 0.0, tau(1.0) + 0.5, 37);
      const TimeChangedPath p(ph, tau);
      const auto c = compose(p);
      for (int k = 0; k < 200; ++k) {
        const double t = u(rng);
        err = std::max({err, std::abs(c(t) - p(t)), std::abs(c.left_limit(t) - p.phi(tau.left_limit(t)))});
      }
    }
    out.push_back(at_most("compose.exact", err, 1e-12));
  }

  {
    std::vector<double> d;
    for (double n : {2.0, 8.0, 32.0, 128.0}) d.push_back(m1_distance_up(ramp(n), unit_step(0.5)));
    out.push_back({"m1.ramp_to_step.decay", decay_ratio(d), 1.0, decay_ratio(d) < 1.0});
    out.push_back(at_most("m1.ramp_to_step.final", d.back(), 1.0 / 128));
    double err = 0.0;
    for (double delta : {0.001, 0.01, 0.1}) err = std::max(err, std::abs(m1_distance_up(unit_step(0.5), unit_step(0.5 + delta)) - delta));
    out.push_back(at_most("m1.shifted_step", err, 1e-12));
    std::mt19937_64 rng(17);
    double asym = 0.0, tri = 0.0;
    for (int rep = 0; rep < 30; ++rep) {
      const auto a = random_monotone(rng), b = random_monotone(rng), c = random_monotone(rng);
      const double ab = m1_distance_up(a, b);
      asym = std::max(asym, std::abs(ab - m1_distance_up(b, a)));
      tri = std::max(tri, ab - m1_distance_up(a, c) - m1_distance_up(c, b));
    }
    out.push_back(at_most("m1.symmetry", asym, 1e-12));
    out.push_back(at_most("m1.triangle", tri, 1e-12));
  }

  {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double err = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      std::vector<double> t(41), v(41), l(41);
      for (std::size_t k = 0; k < t.size(); ++k) {
        t[k] = static_cast<double>(k) / 40.0;
        l[k] = u(rng);
        v[k] = rep % 2 ? u(rng) : l[k];
      }
      const CadlagPath x(t, v, l);
      const auto r = skorokhod_map(x);
      double m = x(0.0);
      for (int k = 0; k <= 4000; ++k) {
        const double s = k / 4000.0;
        m = std::min({m, x(s), x.left_limit(s)});
        err = std::max({err, std::abs(r.l(s) + m), std::abs(r.xhat(s) - (x(s) - m))});
      }
    }
    out.push_back(at_most("skorokhod.sawtooth", err, 1e-12));
  }

  {
    const double e = std::abs(hausdorff_1d({{0.0, 1.0}}, {{0.0, 1.0}})) +
                     std::abs(hausdorff_1d({{0.0, 1.0}}, {{0.0, 0.0}, {1.0, 1.0}}) - 0.5) +
                     std::abs(hausdorff_1d({{0.0, 0.0}}, {{2.0, 3.0}}) - 3.0);
    out.push_back(at_most("hausdorff_1d.known", e, 1e-12));
  }

  {
    const auto base = unit_step(0.5);
    const DecoratedPath d(base, {{0.5, 0.0, 1.0}});
    double err = 0.0;
    for (double eps : {0.05, 0.2}) err = std::max(err, std::abs(d_frak(d, DecoratedPath(base, {{0.5, -eps, 1.0}})) - eps));
    out.push_back(at_most("dfrak.vertical_extension", err, 1e-9));
  }

  {
    const std::vector<double> deltas{0.1, 0.05, 0.02};
    std::vector<CadlagPath> seq;
    for (double n : {2.0, 8.0, 32.0, 128.0}) seq.push_back(ramp(n));
    const auto step = unit_step(0.5);
    const auto lu = local_uniform_check(seq, step, {0.5}, {0.2, 0.8, 0.95}, deltas);
    out.push_back({"local_uniform.ramp.flagged", static_cast<double>(lu.flagged.size()), 0.0,
                   lu.flagged.empty() && lu.endpoint_decays});
    const auto rep = decorated_limit_check(seq, DecoratedPath(step, {{0.5, 0.0, 1.0}}), {0.2, 0.5, 0.8}, deltas);
    out.push_back({"decorated.ramp.flagged", static_cast<double>(rep.flagged.size()), 0.0, rep.flagged.empty()});
    out.push_back(at_most("decorated.ramp.final", rep.final_max, 0.0));

    double glo = 1e300, ghi = -1e300;
    for (int k = 0; k <= 100000; ++k) {
      const double u = k / 100000.0;
      glo = std::min(glo, u + 2.0 * std::sin(2 * M_PI * u));
      ghi = std::max(ghi, u + 2.0 * std::sin(2 * M_PI * u));
    }
    const DecoratedPath target(step, {{0.5, glo, ghi}});
    std::vector<CadlagPath> oseq;
    for (double n : {4.0, 16.0, 64.0}) oseq.push_back(osc(n));
    const auto orep = decorated_limit_check(oseq, target, {0.3, 0.5, 0.7}, deltas);
    out.push_back({"decorated.oscillation.flagged", static_cast<double>(orep.flagged.size()), 0.0, orep.flagged.empty()});
    out.push_back(at_most("decorated.oscillation.final", orep.final_max, 1e-3));
    std::vector<double> d;
    for (const auto& x : oseq) d.push_back(d_frak(DecoratedPath::embed(x), target));
    out.push_back({"dfrak.oscillation.decay", decay_ratio(d), 1.0, decay_ratio(d) < 1.0});
  }
  return out;
}

}  // namespace vclock
