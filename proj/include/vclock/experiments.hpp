#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vclock/cadlag.hpp"
#include "vclock/clock_sim.hpp"
#include "vclock/limit_law.hpp"

namespace vclock {

enum class Regime { Fast, LargeTime, HyperRough, CustomDirac };

std::string to_string(Regime r);
Regime parse_regime(const std::string& s);

// Flat key-value configuration; see config_schema() for the keys.
struct RegimeConfig {
  Regime regime = Regime::Fast;
  std::vector<double> ladder{4, 16, 64};      // n, strictly increasing
  std::vector<double> alpha_ladder;           // hyper_rough: strictly decreasing in (0, 1)
  // Base input. fast: (K, a, b, f, lambda, nu) gives the n-th clock (K, a + nK*b, f, n lambda, n nu).
  // large_time: the unaccelerated clock. hyper_rough: kernel ignored. custom_dirac: K^n = n K(n .).
  ClockInput clock;
  std::size_t paths = 5000;
  std::vector<double> probes;  // in (0, T]
  double step = 0.0;           // fixed step; 0 gives T / (step_factor n), T / step_factor for hyper_rough
  double step_factor = 200.0;
  std::string output_dir = "vclock-out";
  std::uint64_t seed = 1;

  std::string reference = "auto";  // auto | exact | grid
  double min_jump = 1e-4;
  std::size_t grid_points = 1000;  // t grid of matched limit paths
  double ks_alpha = 0.01;
  double ks_final = 0.08;
  double deviation_final = 0.02;
  double deviation_quantile = 0.9;
  std::size_t matched_paths = 8;
  std::size_t path_rows = 4001;  // rows kept in path tables

  std::string branch = "auto";  // large_time: auto | l1 | non_l1
  bool rescale = false;         // large_time: c_n = 1/n
  double tail_horizon = 200.0;  // large_time non-L1: horizon for the shifted input limit
  double tail_step = 0.01;

  bool bursts = false;
  std::size_t burst_paths = 20;
  std::vector<double> burst_deltas{0.05, 0.02, 0.01};
  std::size_t burst_probes = 3;  // largest limit jumps used as decorated-check probes

  static RegimeConfig parse(const std::string& text);
  static RegimeConfig load(const std::string& path);
  static RegimeConfig from_map(const std::map<std::string, std::string>& kv);
  // Canonical text form, parseable by parse().
  std::string to_text() const;
  void validate() const;
  // VCLOCK_OUTPUT_DIR overrides output_dir.
  std::string resolved_output_dir() const;
  std::size_t ladder_size() const;
  double ladder_value(std::size_t i) const;
};

// Documented keys with defaults, printed on malformed configs.
std::string config_schema();

// Figure 1 settings: K = t^{-1/2}, a = 1, b = 100 e^{-t}, T = 0.1, lambda = nu = 1.
RegimeConfig figure1_config(const TimeChangeFn& f);

// Limit of a regime: X*_t = inf{s : drift s - nu W(f*(s)) > level(t)}, with Upsilon* = (X* - G0*) / kappa.
struct LimitModel {
  LimitSpec spec;
  bool deterministic = false;  // f* = 0 or nu = 0: X*_t = level(t) / drift
  bool affine = false;         // exact IG marginals available
  double kappa = 1.0;          // mass of the Dirac limit of the kernels
  std::function<double(double)> g0_star;  // G0*
  std::string description;
  double tail_change = 0.0;  // large_time non-L1: |G~0(H) - G~0(H/2)|

  double deterministic_value(double t) const { return spec.level(t) / spec.drift; }
  // P(X*_t <= x) for affine limits
  double marginal_cdf(double t, double x) const;
};

LimitModel limit_model(const RegimeConfig& cfg);
// Clock input of ladder point i, including the common Brownian-clock step.
ClockInput ladder_input(const RegimeConfig& cfg, std::size_t i);

struct Gate {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct ProbeStat {
  double t = 0.0;
  std::string reference;  // exact | grid | deterministic
  double statistic = 0.0;  // KS, or the deviation quantile for deterministic limits
  double threshold = 0.0;  // KS critical value at ks_alpha, or deviation_final
  bool pass = false;
};

struct LadderPoint {
  double param = 0.0;  // n, or alpha for hyper_rough
  double step = 0.0;
  std::size_t n_steps = 0;
  double clock_step = 0.0;
  std::size_t paths = 0;
  std::vector<ProbeStat> marginals;
  std::vector<Gate> moments;  // martingale, quadratic variation, mean, monotonicity
  std::vector<double> m1;     // matched-path M1 distances to the limit
  std::vector<double> dfrak;  // matched-path decorated distances (burst runs)
  double mean_deviation = 0.0;  // deterministic limits: mean over paths of the max relative deviation
  std::size_t scanned_nodes = 0;
  double seconds = 0.0;  // timing, excluded from summaries
};

struct RegimeReport {
  RegimeConfig config;
  std::string limit_description;
  std::string marginal_kind;  // ks | deviation
  std::vector<LadderPoint> points;
  std::vector<Gate> gates;        // convergence gates, all must pass
  std::vector<Gate> diagnostics;  // reported with thresholds, not required
  std::optional<DecoratedLimitReport> burst_check;
  double seconds = 0.0;

  bool pass() const;
  // key=value lines; no timing fields
  std::string summary() const;
  std::string marginals_csv() const;
  std::string moments_csv() const;
  std::string distances_csv() const;
  std::string timing() const;
  // config.txt, summary.txt, marginals.csv, moments.csv, distances.csv, timing.txt
  void write(const std::string& dir) const;
};

RegimeReport run_fast_regime(const RegimeConfig& cfg);
RegimeReport run_large_time(const RegimeConfig& cfg);
RegimeReport run_hyper_rough(const RegimeConfig& cfg);
// Any regime but fast, with bursts switched on.
RegimeReport run_burst_diagnostics(const RegimeConfig& cfg);
RegimeReport run_regime(const RegimeConfig& cfg);

// Limit path as a cadlag step path on the grid with recorded jumps inserted.
CadlagPath limit_cadlag(const JumpPath& p);
// (X* - G0*) / kappa with decorations F*([X*_{t-}, X*_t]) at recorded jumps.
DecoratedPath decorated_limit(const JumpPath& p, const LimitModel& m);
// Largest distance between a recorded decoration and the values (x - G0*(t)) / kappa and F* at
// the jump ends, with F* re-evaluated on the Brownian clock.
double decoration_record_error(const JumpPath& p, const LimitModel& m);

// Matched path tables for index `index`: prelimit_<i>.csv per ladder point (t,X,M,Upsilon),
// limit.csv and limit_decorations.csv. Rows are thinned to cfg.path_rows.
void write_matched_paths(const RegimeConfig& cfg, std::uint64_t index, const std::string& dir);

struct SelftestResult {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// Deterministic cadlag property suite.
std::vector<SelftestResult> topology_selftest();

}  // namespace vclock
