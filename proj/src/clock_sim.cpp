#include "vclock/clock_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "vclock/errors.hpp"
#include "vclock/numerics.hpp"
#include "vclock/parallel.hpp"
#include "vclock/resolvent.hpp"
#include "vclock/rng.hpp"

namespace vclock {

std::string to_string(Scheme s) { return s == Scheme::SDE ? "sde" : "timechange"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "sde" || s == "euler") return Scheme::SDE;
  if (s == "timechange" || s == "time-change" || s == "tc") return Scheme::TimeChange;
  throw ConfigError("unknown scheme '" + s + "'");
}

std::size_t ClockInput::n_steps() const {
  return static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
}

void ClockInput::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw DomainError("ClockInput: step must be > 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("ClockInput: horizon must be > 0");
  if (!(nu >= 0.0)) throw DomainError("ClockInput: nu must be >= 0");
  if (!std::isfinite(lambda)) throw DomainError("ClockInput: lambda must be finite");
  if (!(clock_step >= 0.0)) throw DomainError("ClockInput: clock_step must be >= 0");
  if (clock_depth < 0 || clock_depth > 20) throw DomainError("ClockInput: clock_depth must lie in [0, 20]");
  if (!curve.a.nonnegative() || !curve.a.nondecreasing())
    throw DomainError("ClockInput: a must be nonnegative and non-decreasing");
  if (!curve.b.nonnegative()) throw DomainError("ClockInput: b must be nonnegative");
  if (!(curve.atom >= 0.0)) throw DomainError("ClockInput: atom must be >= 0");
  if (n_steps() > 5'000'000) throw BudgetError("ClockInput: too many time steps");
}

namespace {

struct TcWork {
  const ClockInput& in;
  const KernelGrid& grid;
  const std::vector<double>& G0;
  bool exp_fast;
  double q;
};

// First-crossing time-change scheme. With clock == nullptr the noise is switched off.
ClockPath run_timechange(const TcWork& w, const BrownianClock* clock, std::uint64_t index) {
  const ClockInput& in = w.in;
  const std::size_t N = in.n_steps();
  const double nu = clock ? in.nu : 0.0;
  const double* m = w.grid.mass.data();
  const double m0 = m[0];
  const double c1 = 1.0 + in.lambda * m0;
  if (!(c1 > 0.0)) throw SchemeMismatchError("timechange: 1 + lambda m_0 must be > 0");
  const double c2n = m0 * nu;
  const TimeChangeFn& f = in.f;

  ClockPath p;
  p.index = index;
  p.scheme = Scheme::TimeChange;
  p.step = in.step;
  p.X.assign(N + 1, 0.0);
  p.M.assign(N + 1, 0.0);
  if (clock) {
    p.clock_step = clock->fine_step();
    p.clock_depth = clock->depth();
  }
  std::vector<double> Urev;
  if (!w.exp_fast) Urev.assign(N + 1, 0.0);
  double S = 0.0;
  const double h = clock ? clock->fine_step() : 1.0;

  for (std::size_t k = 0; k < N; ++k) {
    double hist;
    if (k == 0)
      hist = 0.0;
    else if (w.exp_fast)
      hist = m0 * w.q * S;
    else
      hist = dot(m + 1, Urev.data() + (N - k), k);
    const double A = w.G0[k + 1] + hist;
    const double xk = p.X[k];
    double x;
    double Wx = 0.0;
    if (nu == 0.0) {
      x = std::max(xk, A / c1);
      if (x == xk) ++p.stalled_steps;
    } else {
      const double uk = f(xk);
      const double Wk = p.M[k];
      if (c1 * xk - c2n * Wk - A >= 0.0) {
        x = xk;
        Wx = Wk;
        ++p.stalled_steps;
      } else {
        // scan clock segments [u_j, u_{j+1}] from f(X_k); W is linear on each
        std::size_t j = static_cast<std::size_t>(std::floor(uk / h));
        double x_cur = xk;
        double Wj = clock->node(j);
        for (;;) {
          const double u_r = static_cast<double>(j + 1) * h;
          const double Wr = clock->node(j + 1);
          ++p.scanned_nodes;
          const double x_r = f.inverse(u_r);
          if (c1 * x_r - c2n * Wr - A >= 0.0) {
            const double s = (Wr - Wj) / h;
            const double u_j = static_cast<double>(j) * h;
            const double c3 = A + c2n * (Wj - s * u_j);
            x = f.solve_crossing(c1, c2n * s, c3, std::max(x_cur, xk), std::max(x_r, xk));
            const double ux = std::clamp(f(x), u_j, u_r);
            Wx = Wj + s * (ux - u_j);
            break;
          }
          x_cur = x_r;
          Wj = Wr;
          ++j;
        }
      }
    }
    p.X[k + 1] = x;
    p.M[k + 1] = Wx;
    const double U = -in.lambda * x + nu * Wx;
    if (w.exp_fast)
      S = w.q * S + U;
    else
      Urev[N - (k + 1)] = U;
  }
  return p;
}

bool is_plain_exponential(const KernelSpec& k) { return std::holds_alternative<Exponential>(k.family()); }

}  // namespace

ClockSimulator::ClockSimulator(ClockInput in) : in_(std::move(in)) {
  in_.validate();
  const std::size_t N = in_.n_steps();
  grid_ = discretize(in_.kernel, in_.step, static_cast<double>(N) * in_.step);
  nodes_ = input_nodes(in_.curve, in_.kernel, in_.step, N);
  if (is_plain_exponential(in_.kernel)) {
    exp_fast_ = true;
    exp_decay_ = std::exp(std::get<Exponential>(in_.kernel.family()).b * in_.step);
  }
  if (in_.nu > 0.0 && in_.scheme == Scheme::TimeChange) {
    if (in_.clock_step > 0.0) {
      clock_step_ = in_.clock_step;
    } else {
      const TcWork w{in_, grid_, nodes_.G0, exp_fast_, exp_decay_};
      const ClockPath det = run_timechange(w, nullptr, 0);
      const double s_est = in_.f(2.0 * det.X.back() + 1.0);
      clock_step_ = s_est / std::max(2048.0, 8.0 * static_cast<double>(N));
    }
  }
}

BrownianClock ClockSimulator::clock_for(std::uint64_t index) const {
  if (!(clock_step_ > 0.0)) throw SchemeMismatchError("clock_for: no Brownian clock in this configuration");
  return BrownianClock::with_fine_step(in_.seed, index, clock_step_, in_.clock_depth);
}

ClockPath ClockSimulator::timechange_path(std::uint64_t index) const {
  const TcWork w{in_, grid_, nodes_.G0, exp_fast_, exp_decay_};
  if (in_.nu == 0.0) {
    ClockPath p = run_timechange(w, nullptr, index);
    return p;
  }
  const BrownianClock clock = clock_for(index);
  return run_timechange(w, &clock, index);
}

ClockPath ClockSimulator::sde_path(std::uint64_t index) const {
  if (!in_.kernel.square_integrable())
    throw SchemeMismatchError("sde scheme: kernel " + in_.kernel.name() + " is not square integrable");
  const std::size_t N = in_.n_steps();
  const double dt = in_.step;
  const double sdt = std::sqrt(dt);
  const double* wl = grid_.lag_weight.data();
  const double w1 = grid_.lag_weight.size() > 1 ? wl[1] : 0.0;
  ClockPath p;
  p.index = index;
  p.scheme = Scheme::SDE;
  p.step = dt;
  p.X.assign(N + 1, 0.0);
  p.M.assign(N + 1, 0.0);
  Engine eng = make_engine({in_.seed, index, kTagEuler});
  std::normal_distribution<double> gauss;
  std::vector<double> Zrev;
  if (!exp_fast_) Zrev.assign(N, 0.0);
  double H = 0.0;  // sum_{i<k} w_{k-i} Z_i
  for (std::size_t k = 0; k < N; ++k) {
    if (k > 0 && !exp_fast_) H = dot(wl + 1, Zrev.data() + (N - k), k);
    double Y = nodes_.g0[k] + H / dt;
    if (Y < 0.0) {
      Y = 0.0;
      ++p.floored_steps;
    }
    const double dB = in_.nu > 0.0 ? sdt * gauss(eng) : 0.0;  // M is recorded as 0 when the noise is off
    const double vol = std::sqrt(std::max(0.0, in_.f.derivative(p.X[k])) * Y);
    const double Z = -in_.lambda * Y * dt + in_.nu * vol * dB;
    p.X[k + 1] = p.X[k] + Y * dt;
    p.M[k + 1] = p.M[k] + vol * dB;
    if (exp_fast_)
      H = exp_decay_ * H + w1 * Z;
    else
      Zrev[N - 1 - k] = Z;
  }
  return p;
}

ClockPath ClockSimulator::path(std::uint64_t index) const {
  return in_.scheme == Scheme::SDE ? sde_path(index) : timechange_path(index);
}

std::vector<ClockPath> ClockSimulator::paths(std::size_t n, std::uint64_t first) const {
  std::vector<ClockPath> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = path(first + i); });
  return out;
}

std::vector<ClockPath> simulate_timechange(ClockInput in, std::size_t n_paths) {
  in.scheme = Scheme::TimeChange;
  return ClockSimulator(std::move(in)).paths(n_paths);
}

std::vector<ClockPath> simulate_sde(ClockInput in, std::size_t n_paths) {
  in.scheme = Scheme::SDE;
  if (!in.kernel.square_integrable())
    throw SchemeMismatchError("sde scheme: kernel " + in.kernel.name() + " is not square integrable");
  return ClockSimulator(std::move(in)).paths(n_paths);
}

Bursts extract_bursts(const ClockPath& path, const ClockSimulator& sim, std::size_t max_clock_points) {
  const ClockInput& in = sim.input();
  const std::size_t N = path.X.size() - 1;
  Bursts b;
  b.upsilon.resize(N + 1);
  for (std::size_t k = 0; k <= N; ++k) b.upsilon[k] = in.nu * path.M[k] - in.lambda * path.X[k];
  std::vector<double> d(N + 1);
  for (std::size_t k = 0; k <= N; ++k) d[k] = path.X[k] - sim.G0()[k];
  b.upsilon_hat = deconvolve_first_kind(sim.grid(), d);
  b.upsilon_hat[0] = 0.0;
  const double xT = path.X.back();
  std::size_t n_pts = 2;
  std::unique_ptr<BrownianClock> clock;
  if (path.scheme == Scheme::TimeChange && in.nu > 0.0) {
    clock = std::make_unique<BrownianClock>(sim.clock_for(path.index));
    const double uT = in.f(xT);
    n_pts = static_cast<std::size_t>(std::ceil(uT / clock->fine_step())) + 1;
  } else {
    n_pts = N + 1;
  }
  n_pts = std::clamp<std::size_t>(n_pts, 2, std::max<std::size_t>(max_clock_points, 2));
  b.clock_s.resize(n_pts);
  b.F.resize(n_pts);
  for (std::size_t j = 0; j < n_pts; ++j) {
    const double s = xT * static_cast<double>(j) / static_cast<double>(n_pts - 1);
    b.clock_s[j] = s;
    const double W = clock ? (*clock)(in.f(s)) : 0.0;
    b.F[j] = in.nu * W - in.lambda * s;
  }
  return b;
}

IncrementReport pathwise_increment_bound_check(const ClockPath& path, const ClockSimulator& sim, double tol) {
  const ClockInput& in = sim.input();
  if (path.scheme != Scheme::SDE) throw SchemeMismatchError("increment bound: requires an SDE-scheme path");
  if (in.lambda < 0.0 || !in.kernel.nonincreasing_nonnegative())
    throw SchemeMismatchError("increment bound: requires lambda >= 0 and K nonnegative, non-increasing");
  IncrementReport r;
  for (double v : path.M) r.m_sup = std::max(r.m_sup, std::abs(v));
  const auto& G0 = sim.G0();
  const auto& Kbar = sim.grid().cumulative;
  const std::size_t N = path.X.size() - 1;
  r.worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s <= N; ++s)
    for (std::size_t t = s + 1; t <= N; ++t) {
      const double bound = G0[t] - G0[s] + 2.0 * in.nu * r.m_sup * Kbar[t - s];
      const double excess = (path.X[t] - path.X[s]) - bound;
      ++r.pairs;
      r.worst_excess = std::max(r.worst_excess, excess);
      if (excess > tol) ++r.violations;
    }
  return r;
}

std::string path_csv(const ClockPath& path, const ClockSimulator& sim) {
  const ClockInput& in = sim.input();
  std::ostringstream os;
  os.precision(17);
  os << "t,X,M,Upsilon\n";
  for (std::size_t k = 0; k < path.X.size(); ++k)
    os << path.t(k) << ',' << path.X[k] << ',' << path.M[k] << ',' << in.nu * path.M[k] - in.lambda * path.X[k]
       << '\n';
  return os.str();
}

}  // namespace vclock
