#pragma once

#include <functional>
#include <string>
#include <vector>

namespace vclock {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Right-continuous path on [t_0, t_m], linear between breakpoints: on [t_i, t_{i+1}) it runs from
// value[i] to left[i+1], the left limit at t_{i+1}. Steps and polygons are both special cases.
class CadlagPath {
 public:
  CadlagPath() = default;
  CadlagPath(std::vector<double> t, std::vector<double> value, std::vector<double> left);
  static CadlagPath piecewise_linear(std::vector<double> t, std::vector<double> v);
  // value v[i] on [t_i, t_{i+1})
  static CadlagPath step(std::vector<double> t, std::vector<double> v);
  static CadlagPath sampled(const std::function<double(double)>& fn, double t0, double T, std::size_t n);

  double operator()(double t) const;
  double left_limit(double t) const;
  double start() const { return t_.front(); }
  double horizon() const { return t_.back(); }
  std::size_t size() const { return t_.size(); }
  const std::vector<double>& times() const { return t_; }
  const std::vector<double>& values() const { return v_; }
  const std::vector<double>& lefts() const { return l_; }

  std::vector<double> jump_times(double min_size = 0.0) const;
  bool nondecreasing(double tol = 0.0) const;
  bool nonnegative(double tol = 0.0) const;
  bool in_d_up(double tol = 0.0) const { return nondecreasing(tol) && nonnegative(tol); }

  // Closure of x((a, b) ∩ [t_0, t_m]) as sorted disjoint intervals.
  std::vector<Interval> image(double a, double b) const;
  Interval range(double a, double b) const;

  CadlagPath operator+(const CadlagPath& o) const;
  CadlagPath operator-(const CadlagPath& o) const;
  CadlagPath shifted(double c) const;

 private:
  std::size_t piece(double t) const;  // i with t_i <= t < t_{i+1}, clamped
  std::vector<double> t_, v_, l_;
};

// Continuous path on [s_0, s_m] stored as samples with linear interpolation.
struct SampledPath {
  std::vector<double> s;
  std::vector<double> v;

  SampledPath() = default;
  SampledPath(std::vector<double> s, std::vector<double> v);
  static SampledPath from_function(const std::function<double(double)>& fn, double s0, double s1, std::size_t n);
  double operator()(double x) const;
  // exact extrema of the interpolant on [a, b]
  Interval range(double a, double b) const;
  // largest change between neighbouring samples
  double modulus() const;
};

// (phi, tau) with tau non-decreasing; phi is frozen at phi(tau(T)) beyond tau(T).
class TimeChangedPath {
 public:
  TimeChangedPath(SampledPath phi, CadlagPath tau);
  double phi(double s) const;
  double operator()(double t) const { return phi(tau_(t)); }
  const SampledPath& phi_path() const { return phi_; }
  const CadlagPath& tau() const { return tau_; }
  double interpolation_error() const { return phi_.modulus(); }

 private:
  SampledPath phi_;
  CadlagPath tau_;
};

// phi o tau, exact: breakpoints are those of tau plus the preimages of phi's sample points.
CadlagPath compose(const TimeChangedPath& p);

// Hausdorff distance of completed graphs under the max metric, plus |x(0) - y(0)| + |x(T) - y(T)|.
double m1_distance_up(const CadlagPath& x, const CadlagPath& y);

// max(sup_{[0,S]} |phi - psi|, m1 distance of the time changes).
double dcirc_distance(const TimeChangedPath& p, const TimeChangedPath& q, double S);

// phi([tau(t-), tau(t)]); {x(t)} when tau is continuous at t.
Interval jump_range(const TimeChangedPath& p, double t);

struct Envelopes {
  CadlagPath lower;  // running inf of phi from tau(0), composed with tau
  CadlagPath upper;  // running sup
  CadlagPath hat;    // phi - running inf
};

Envelopes running_envelopes(const TimeChangedPath& p);

struct SkorokhodMap {
  CadlagPath l;     // -inf_{s <= t} x(s)
  CadlagPath xhat;  // x + l
};

SkorokhodMap skorokhod_map(const CadlagPath& x);

// Hausdorff distance between finite unions of closed intervals.
double hausdorff_1d(std::vector<Interval> a, std::vector<Interval> b);

struct LocalUniformReport {
  std::vector<double> probes, deltas;
  // sup{|z^n(s) - z(r)| : s, r in B(t, delta)} indexed [probe][delta][n]
  std::vector<std::vector<std::vector<double>>> sup;
  std::vector<double> endpoint_gap;  // |z^n(T) - z(T)|
  std::vector<bool> decays;          // per probe: non-increasing in n at every delta, and in delta at the last n
  bool endpoint_decays = true;
  std::vector<std::size_t> flagged;  // probes that do not decay
};

// probes must avoid the exclusion set (the jump times of the limit)
LocalUniformReport local_uniform_check(const std::vector<CadlagPath>& seq, const CadlagPath& z,
                                       const std::vector<double>& exclusion, const std::vector<double>& probes,
                                       const std::vector<double>& deltas);

struct Mark {
  double t = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Base path with interval decorations at marked times; unmarked times carry {x(t-), x(t)}.
class DecoratedPath {
 public:
  DecoratedPath(CadlagPath base, std::vector<Mark> marks, double tol = 1e-12);
  static DecoratedPath embed(CadlagPath x);
  const CadlagPath& base() const { return base_; }
  const std::vector<Mark>& marks() const { return marks_; }
  std::vector<Interval> decoration(double t) const;

 private:
  CadlagPath base_;
  std::vector<Mark> marks_;  // sorted by time
};

struct Segment {
  double t0 = 0.0, z0 = 0.0, t1 = 0.0, z1 = 0.0;
};

// Graph of the decorations: base arcs between breakpoints plus vertical segments at marks.
std::vector<Segment> decoration_graph(const DecoratedPath& d);

// Hausdorff distance of decoration graphs under the max metric. Points of each graph are sampled
// with max-metric spacing at most `resolution` (segment ends always included) and measured
// exactly against the other graph's segments, so the error is at most resolution / 2.
// resolution <= 0 picks 1e-4 of the larger side of the bounding box.
double d_frak(const DecoratedPath& a, const DecoratedPath& b, double resolution = 0.0);

struct DecoratedLimitReport {
  std::vector<double> probes, deltas;
  // d_H(x^n(B(t, delta)), I_t) indexed [probe][delta][n]
  std::vector<std::vector<std::vector<double>>> dist;
  std::vector<bool> decays;  // per probe: non-increasing in n at every delta, and in delta at the last n
  std::vector<std::size_t> flagged;
  double final_max = 0.0;  // largest last-n value at the smallest delta
};

DecoratedLimitReport decorated_limit_check(const std::vector<CadlagPath>& seq, const DecoratedPath& target,
                                           const std::vector<double>& probes, const std::vector<double>& deltas);

// (t, left, value) rows; marks as (t, lo, hi) rows.
std::string cadlag_csv(const CadlagPath& x);
std::string marks_csv(const DecoratedPath& d);

}  // namespace vclock
