#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vclock/brownian_clock.hpp"
#include "vclock/input_curve.hpp"
#include "vclock/kernels.hpp"
#include "vclock/time_change.hpp"

namespace vclock {

enum class Scheme { TimeChange, SDE };

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

// X = G0 + K*(-lambda X + nu W_{f(X)}) on [0, horizon] with step `step`.
struct ClockInput {
  KernelSpec kernel = KernelSpec::constant(1.0);
  TimeChangeFn f = TimeChangeFn::identity();
  InputCurve curve;
  double lambda = 0.0;
  double nu = 0.0;
  double horizon = 1.0;
  double step = 1e-3;
  std::uint64_t seed = 1;
  Scheme scheme = Scheme::TimeChange;
  // Fine step of the Brownian clock; 0 selects f(2 Xdet(T) + 1) / max(2048, 8N), with Xdet the nu = 0 path.
  double clock_step = 0.0;
  int clock_depth = 10;

  std::size_t n_steps() const;
  void validate() const;
};

struct ClockPath {
  std::uint64_t index = 0;
  Scheme scheme = Scheme::TimeChange;
  double step = 0.0;
  std::vector<double> X;  // at t_k = k step, k = 0..N
  std::vector<double> M;  // W(f(X)) for the time-change scheme, the Euler martingale for the SDE scheme
  // time-change scheme metadata
  double clock_step = 0.0;
  int clock_depth = 0;
  std::size_t scanned_nodes = 0;  // clock nodes visited by the crossing search
  std::size_t stalled_steps = 0;  // steps whose crossing condition already held at X_k
  // SDE scheme metadata
  std::size_t floored_steps = 0;  // steps where Y was floored at 0

  double t(std::size_t k) const { return static_cast<double>(k) * step; }
};

// Precomputes the kernel grid and input nodes once; paths are then independent and
// deterministic in (seed, index).
class ClockSimulator {
 public:
  explicit ClockSimulator(ClockInput in);

  ClockPath path(std::uint64_t index) const;
  std::vector<ClockPath> paths(std::size_t n, std::uint64_t first = 0) const;

  const ClockInput& input() const { return in_; }
  const KernelGrid& grid() const { return grid_; }
  const std::vector<double>& G0() const { return nodes_.G0; }
  const std::vector<double>& g0() const { return nodes_.g0; }
  double clock_step() const { return clock_step_; }
  // The Brownian clock driving path `index` under the time-change scheme.
  BrownianClock clock_for(std::uint64_t index) const;

 private:
  ClockPath timechange_path(std::uint64_t index) const;
  ClockPath sde_path(std::uint64_t index) const;

  ClockInput in_;
  KernelGrid grid_;
  InputNodes nodes_;
  double clock_step_ = 0.0;
  bool exp_fast_ = false;
  double exp_decay_ = 1.0;  // e^{b step}
};

std::vector<ClockPath> simulate_timechange(ClockInput in, std::size_t n_paths);
// Throws SchemeMismatchError unless the kernel is square integrable.
std::vector<ClockPath> simulate_sde(ClockInput in, std::size_t n_paths);

struct Bursts {
  std::vector<double> upsilon;      // nu W(f(X_k)) - lambda X_k
  std::vector<double> upsilon_hat;  // deconvolution of X - G0 by K
  std::vector<double> clock_s;      // clock grid covering [0, X_T]
  std::vector<double> F;            // nu W(f(s)) - lambda s on clock_s
};

Bursts extract_bursts(const ClockPath& path, const ClockSimulator& sim, std::size_t max_clock_points = 200000);

struct IncrementReport {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double worst_excess = 0.0;  // max of (X_t - X_s) - bound
  double m_sup = 0.0;
};

// X_t - X_s <= G0(t) - G0(s) + 2 nu ||M|| Kbar(t - s) + tol over all node pairs.
IncrementReport pathwise_increment_bound_check(const ClockPath& path, const ClockSimulator& sim, double tol = 1e-8);

// Comma-separated t,X,M,Upsilon.
std::string path_csv(const ClockPath& path, const ClockSimulator& sim);

}  // namespace vclock
