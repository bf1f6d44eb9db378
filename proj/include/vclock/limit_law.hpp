#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vclock/rng.hpp"
#include "vclock/time_change.hpp"

namespace vclock {

// X*_t = inf{s >= 0 : drift s - nu W(f(s)) > G0(t)}. The standard limit has drift = 1 + lambda;
// mean-reverting regimes use drift = lambda with their own level curve.
struct LimitSpec {
  TimeChangeFn f = TimeChangeFn::identity();
  double lambda = 0.0;
  double nu = 1.0;
  double drift = 1.0;
  std::function<double(double)> level;  // G0, non-decreasing
  std::string level_name;
  double horizon = 1.0;

  static LimitSpec standard(TimeChangeFn f, double lambda, double nu, std::function<double(double)> level,
                            double horizon, std::string name = {});
  static LimitSpec with_drift(TimeChangeFn f, double lambda, double nu, double drift,
                              std::function<double(double)> level, double horizon, std::string name = {});
  void validate() const;
  // F*(s) = nu W(f(s)) - lambda s, given W(f(s))
  double decoration_value(double s, double w) const { return nu * w - lambda * s; }
};

struct LimitJump {
  double t = 0.0;
  double x_left = 0.0;   // X*_{t-}
  double x_right = 0.0;  // X*_t
  double dec_lo = 0.0;   // min of F* over [X*_{t-}, X*_t]
  double dec_hi = 0.0;   // max of F* over [X*_{t-}, X*_t]
};

struct JumpPath {
  std::vector<double> t;
  std::vector<double> x;       // X*_t (strict crossing)
  std::vector<double> x_left;  // inf{s : H(s) >= G0(t)}; equals x except on level plateaus of H
  std::vector<double> level;   // G0(t)
  std::vector<LimitJump> jumps;  // jumps of size >= min_jump on [0, T]
  // running-maximum records of Z on the clock grid (grid sampler)
  std::vector<std::size_t> rec_cell;
  std::vector<double> rec_lo, rec_hi;
  double clock_step = 0.0;
  int clock_depth = 0;
  std::uint64_t seed = 0, stream = 0;
  std::size_t cells = 0;       // clock cells scanned
  std::size_t fallbacks = 0;   // tangent steps solved on a grid
  bool partial = false;
};

struct LimitGridOptions {
  double clock_step = 1e-3;
  int clock_depth = 10;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  double min_jump = 1e-3;
  bool keep_records = true;
  bool allow_partial = false;  // on budget exhaustion return the partial path instead of throwing
  std::size_t node_budget = 400'000'000;
};

// Sweeps the running maximum of Z(u) = drift f^{-1}(u) - nu W(u) on the clock grid, with the
// maximum inside each cell drawn from the Brownian-bridge law. The clock is the one used by the
// clock simulator for the same (seed, stream, clock step, depth).
JumpPath simulate_limit_grid(const LimitSpec& spec, const std::vector<double>& t_grid, const LimitGridOptions& opt);

// Exact increments X*_t - X*_u ~ IG(dG/drift, dG^2/nu^2) for f = identity.
JumpPath sample_affine_exact(const LimitSpec& spec, const std::vector<double>& t_grid, std::uint64_t seed,
                             std::uint64_t stream);

struct TangentOptions {
  // Redraw on the gap left by the tangent until it falls below gap_tol; off gives one tangent draw per step.
  bool iterate = true;
  double gap_tol = 1e-12;
  std::size_t max_corrections = 100000;
};

// Boundary linearised at the current crossing; increments drawn from the tangent IG law.
JumpPath tangent_step_sampler(const LimitSpec& spec, const std::vector<double>& t_grid, std::uint64_t seed,
                              std::uint64_t stream, const TangentOptions& opt = {});

// Inverse Gaussian in (mean, shape) form.
double ig_pdf(double x, double mean, double shape);
double ig_cdf(double x, double mean, double shape);
double ig_sample(double mean, double shape, Engine& eng);
std::vector<double> ig_sampler(double mean, double shape, std::size_t n, std::uint64_t seed);

// inf{s : -nu W_s > level} = (level / nu)^2 / N^2.
double stable_half_sample(double level, double nu, Engine& eng);
std::vector<double> sample_stable_half(double level, double nu, std::size_t n, std::uint64_t seed);
double levy_cdf(double x, double level, double nu);

// log P(N > z) for a standard Gaussian N, accurate far into the tail.
double log_norm_sf(double z);

// (t, X*_{t-}, X*_t) rows; decorations as (t, s, F*(s)) rows per recorded jump.
std::string jump_path_csv(const JumpPath& p);
std::string decorations_csv(const JumpPath& p, const LimitSpec& spec, std::size_t points_per_jump = 64);

}  // namespace vclock
