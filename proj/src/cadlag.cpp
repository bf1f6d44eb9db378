#include "vclock/cadlag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vclock/errors.hpp"

namespace vclock {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool close_to(double a, double b) { return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b)); }

double lerp(double x0, double y0, double x1, double y1, double x) {
  if (x1 == x0) return y1;
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

bool non_increasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k)
    if (v[k] > v[k - 1] + 1e-12 * (1.0 + std::abs(v[k - 1]))) return false;
  return true;
}

void check_deltas(const std::vector<double>& deltas) {
  if (deltas.empty()) throw DomainError("delta ladder is empty");
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] > 0.0)) throw DomainError("delta ladder must be positive");
    if (k > 0 && !(deltas[k] < deltas[k - 1])) throw DomainError("delta ladder must be strictly decreasing");
  }
}

std::vector<Interval> merged(std::vector<Interval> a) {
  std::sort(a.begin(), a.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  std::vector<Interval> out;
  for (const auto& iv : a) {
    if (!out.empty() && iv.lo <= out.back().hi)
      out.back().hi = std::max(out.back().hi, iv.hi);
    else
      out.push_back(iv);
  }
  return out;
}

// completed graph of a path in D-up as vertices ordered by sigma = t + x
struct MonotoneCurve {
  std::vector<double> sigma, t, x;

  explicit MonotoneCurve(const CadlagPath& p) {
    const auto& T = p.times();
    const auto& V = p.values();
    const auto& L = p.lefts();
    double run = V[0];
    auto push = [&](double tt, double xx) {
      run = std::max(run, xx);
      const double s = tt + run;
      if (!sigma.empty() && s <= sigma.back()) return;
      sigma.push_back(s);
      t.push_back(tt);
      x.push_back(run);
    };
    push(T[0], V[0]);
    for (std::size_t i = 1; i < T.size(); ++i) {
      push(T[i], L[i]);
      push(T[i], V[i]);
    }
  }
  double t_at(double s) const {
    if (s <= sigma.front()) return t.front();
    if (s >= sigma.back()) return t.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(sigma.begin(), sigma.end(), s) - sigma.begin());
    return lerp(sigma[k - 1], t[k - 1], sigma[k], t[k], s);
  }
};

double linf(double t0, double z0, double t1, double z1) { return std::max(std::abs(t0 - t1), std::abs(z0 - z1)); }

// exact max-metric distance from a point to a segment
double seg_dist(double pt, double pz, const Segment& g) {
  const double et = pt - g.t0, ez = pz - g.z0;
  const double dt = g.t1 - g.t0, dz = g.z1 - g.z0;
  auto f = [&](double th) { return std::max(std::abs(et - th * dt), std::abs(ez - th * dz)); };
  double best = std::min(f(0.0), f(1.0));
  auto try_th = [&](double num, double den) {
    if (den == 0.0) return;
    const double th = num / den;
    if (th > 0.0 && th < 1.0) best = std::min(best, f(th));
  };
  try_th(et, dt);
  try_th(ez, dz);
  try_th(et - ez, dt - dz);
  try_th(et + ez, dt + dz);
  return best;
}

class SegmentIndex {
 public:
  explicit SegmentIndex(std::vector<Segment> segs) : segs_(std::move(segs)) {
    for (auto& g : segs_)
      if (g.t1 < g.t0) {
        std::swap(g.t0, g.t1);
        std::swap(g.z0, g.z1);
      }
    std::sort(segs_.begin(), segs_.end(), [](const Segment& a, const Segment& b) { return a.t0 < b.t0; });
    for (const auto& g : segs_) width_ = std::max(width_, g.t1 - g.t0);
  }
  double dist(double pt, double pz) const {
    const auto it = std::lower_bound(segs_.begin(), segs_.end(), pt, [](const Segment& g, double v) { return g.t0 < v; });
    const std::size_t mid = static_cast<std::size_t>(it - segs_.begin());
    double best = kInf;
    for (std::size_t k = mid; k < segs_.size() && segs_[k].t0 <= pt + best; ++k) best = std::min(best, seg_dist(pt, pz, segs_[k]));
    for (std::size_t k = mid; k-- > 0 && segs_[k].t0 >= pt - best - width_;) best = std::min(best, seg_dist(pt, pz, segs_[k]));
    return best;
  }

 private:
  std::vector<Segment> segs_;
  double width_ = 0.0;
};

double directed_graph_distance(const std::vector<Segment>& from, const SegmentIndex& to, double res) {
  double worst = 0.0;
  for (const auto& g : from) {
    const double len = linf(g.t0, g.z0, g.t1, g.z1);
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / res)));
    for (std::size_t j = 0; j <= n; ++j) {
      const double th = static_cast<double>(j) / static_cast<double>(n);
      worst = std::max(worst, to.dist(g.t0 + th * (g.t1 - g.t0), g.z0 + th * (g.z1 - g.z0)));
    }
  }
  return worst;
}

// running inf (lower = true) or sup of a sampled path, with crossing points inserted
SampledPath running_extreme(const SampledPath& p, bool lower) {
  const double sgn = lower ? 1.0 : -1.0;
  std::vector<double> s{p.s[0]}, v{p.v[0]};
  double m = sgn * p.v[0];
  for (std::size_t k = 1; k < p.s.size(); ++k) {
    const double va = sgn * p.v[k - 1], vb = sgn * p.v[k];
    if (vb < m) {
      if (va > m) {
        const double sc = p.s[k - 1] + (va - m) / (va - vb) * (p.s[k] - p.s[k - 1]);
        if (sc > s.back() && sc < p.s[k]) {
          s.push_back(sc);
          v.push_back(sgn * m);
        }
      }
      m = vb;
    }
    s.push_back(p.s[k]);
    v.push_back(sgn * m);
  }
  return SampledPath(std::move(s), std::move(v));
}

// phi restricted to [a, b] with both ends as sample points
SampledPath restrict(const SampledPath& phi, double a, double b) {
  std::vector<double> s{a}, v{phi(a)};
  for (std::size_t j = 0; j < phi.s.size(); ++j)
    if (phi.s[j] > a && phi.s[j] < b) {
      s.push_back(phi.s[j]);
      v.push_back(phi.v[j]);
    }
  if (b > a) {
    s.push_back(b);
    v.push_back(phi(b));
  }
  return SampledPath(std::move(s), std::move(v));
}

}  // namespace

// ---------------------------------------------------------------- CadlagPath

CadlagPath::CadlagPath(std::vector<double> t, std::vector<double> value, std::vector<double> left)
    : t_(std::move(t)), v_(std::move(value)), l_(std::move(left)) {
  if (t_.empty() || t_.size() != v_.size() || t_.size() != l_.size())
    throw DomainError("CadlagPath: times, values and left limits must have the same nonzero length");
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!std::isfinite(t_[i]) || !std::isfinite(v_[i]) || !std::isfinite(l_[i]))
      throw DomainError("CadlagPath: non-finite entry");
    if (i > 0 && !(t_[i] > t_[i - 1])) throw DomainError("CadlagPath: breakpoints must be strictly increasing");
  }
  l_[0] = v_[0];
}

CadlagPath CadlagPath::piecewise_linear(std::vector<double> t, std::vector<double> v) {
  auto l = v;
  return CadlagPath(std::move(t), std::move(v), std::move(l));
}

CadlagPath CadlagPath::step(std::vector<double> t, std::vector<double> v) {
  std::vector<double> l(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) l[i] = i == 0 ? v[0] : v[i - 1];
  return CadlagPath(std::move(t), std::move(v), std::move(l));
}

CadlagPath CadlagPath::sampled(const std::function<double(double)>& fn, double t0, double T, std::size_t n) {
  if (n == 0 || !(T > t0)) throw DomainError("CadlagPath::sampled: need n >= 1 and T > t0");
  std::vector<double> t(n + 1), v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    t[k] = k == n ? T : t0 + (T - t0) * static_cast<double>(k) / static_cast<double>(n);
    v[k] = fn(t[k]);
  }
  return piecewise_linear(std::move(t), std::move(v));
}

std::size_t CadlagPath::piece(double t) const {
  const auto k = static_cast<std::size_t>(std::upper_bound(t_.begin(), t_.end(), t) - t_.begin());
  return k == 0 ? 0 : k - 1;
}

double CadlagPath::operator()(double t) const {
  if (t <= t_.front()) return v_.front();
  if (t >= t_.back()) return v_.back();
  const std::size_t i = piece(t);
  if (t == t_[i]) return v_[i];
  return lerp(t_[i], v_[i], t_[i + 1], l_[i + 1], t);
}

double CadlagPath::left_limit(double t) const {
  if (t <= t_.front()) return v_.front();
  if (t > t_.back()) return v_.back();
  const std::size_t i = piece(t);
  if (t == t_[i]) return l_[i];
  return lerp(t_[i], v_[i], t_[i + 1], l_[i + 1], t);
}

std::vector<double> CadlagPath::jump_times(double min_size) const {
  std::vector<double> out;
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (std::abs(v_[i] - l_[i]) > min_size) out.push_back(t_[i]);
  return out;
}

bool CadlagPath::nondecreasing(double tol) const {
  for (std::size_t i = 1; i < t_.size(); ++i)
    if (l_[i] < v_[i - 1] - tol || v_[i] < l_[i] - tol) return false;
  return true;
}

bool CadlagPath::nonnegative(double tol) const {
  for (std::size_t i = 0; i < t_.size(); ++i)
    if (v_[i] < -tol || l_[i] < -tol) return false;
  return true;
}

std::vector<Interval> CadlagPath::image(double a, double b) const {
  std::vector<Interval> out;
  for (std::size_t i = 0; i + 1 < t_.size(); ++i) {
    const double lo = std::max(t_[i], a), hi = std::min(t_[i + 1], b);
    if (!(lo < hi)) continue;
    const double x0 = lerp(t_[i], v_[i], t_[i + 1], l_[i + 1], lo);
    const double x1 = lerp(t_[i], v_[i], t_[i + 1], l_[i + 1], hi);
    out.push_back({std::min(x0, x1), std::max(x0, x1)});
  }
  if (a < t_.back() && b > t_.back()) out.push_back({v_.back(), v_.back()});
  if (t_.size() == 1 && a < t_[0] && b > t_[0]) out.push_back({v_[0], v_[0]});
  if (out.empty()) throw DomainError("CadlagPath::image: interval misses the path's domain");
  return merged(std::move(out));
}

Interval CadlagPath::range(double a, double b) const {
  const auto im = image(a, b);
  Interval r{im.front().lo, im.front().hi};
  for (const auto& iv : im) {
    r.lo = std::min(r.lo, iv.lo);
    r.hi = std::max(r.hi, iv.hi);
  }
  return r;
}

CadlagPath CadlagPath::operator+(const CadlagPath& o) const {
  if (!close_to(start(), o.start()) || !close_to(horizon(), o.horizon()))
    throw DomainError("CadlagPath::operator+: paths live on different intervals");
  std::vector<double> t;
  std::merge(t_.begin(), t_.end(), o.t_.begin(), o.t_.end(), std::back_inserter(t));
  t.erase(std::unique(t.begin(), t.end()), t.end());
  while (t.size() > 1 && t.back() > std::min(horizon(), o.horizon())) t.pop_back();
  std::vector<double> v(t.size()), l(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    v[k] = (*this)(t[k]) + o(t[k]);
    l[k] = left_limit(t[k]) + o.left_limit(t[k]);
  }
  return CadlagPath(std::move(t), std::move(v), std::move(l));
}

CadlagPath CadlagPath::shifted(double c) const {
  auto v = v_, l = l_;
  for (auto& x : v) x += c;
  for (auto& x : l) x += c;
  return CadlagPath(t_, std::move(v), std::move(l));
}

CadlagPath CadlagPath::operator-(const CadlagPath& o) const {
  auto v = o.v_, l = o.l_;
  for (auto& x : v) x = -x;
  for (auto& x : l) x = -x;
  return *this + CadlagPath(o.t_, std::move(v), std::move(l));
}

// ---------------------------------------------------------------- SampledPath

SampledPath::SampledPath(std::vector<double> s_, std::vector<double> v_) : s(std::move(s_)), v(std::move(v_)) {
  if (s.empty() || s.size() != v.size()) throw DomainError("SampledPath: samples and values must match");
  for (std::size_t k = 1; k < s.size(); ++k)
    if (!(s[k] > s[k - 1])) throw DomainError("SampledPath: sample points must be strictly increasing");
}

SampledPath SampledPath::from_function(const std::function<double(double)>& fn, double s0, double s1, std::size_t n) {
  if (n == 0 || !(s1 > s0)) throw DomainError("SampledPath::from_function: need n >= 1 and s1 > s0");
  std::vector<double> s(n + 1), v(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    s[k] = k == n ? s1 : s0 + (s1 - s0) * static_cast<double>(k) / static_cast<double>(n);
    v[k] = fn(s[k]);
  }
  return SampledPath(std::move(s), std::move(v));
}

double SampledPath::operator()(double x) const {
  const double tol = 1e-12 * (1.0 + std::abs(s.front()) + std::abs(s.back()));
  if (x < s.front() - tol || x > s.back() + tol) throw CoverageError("SampledPath: evaluation outside the sample range");
  if (x <= s.front()) return v.front();
  if (x >= s.back()) return v.back();
  const auto k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
  return lerp(s[k - 1], v[k - 1], s[k], v[k], x);
}

Interval SampledPath::range(double a, double b) const {
  if (b < a) std::swap(a, b);
  const double fa = (*this)(a), fb = (*this)(b);
  Interval r{std::min(fa, fb), std::max(fa, fb)};
  auto k = std::upper_bound(s.begin(), s.end(), a);
  for (; k != s.end() && *k < b; ++k) {
    const double x = v[static_cast<std::size_t>(k - s.begin())];
    r.lo = std::min(r.lo, x);
    r.hi = std::max(r.hi, x);
  }
  return r;
}

double SampledPath::modulus() const {
  double m = 0.0;
  for (std::size_t k = 1; k < v.size(); ++k) m = std::max(m, std::abs(v[k] - v[k - 1]));
  return m;
}

// ---------------------------------------------------------------- TimeChangedPath

TimeChangedPath::TimeChangedPath(SampledPath phi, CadlagPath tau) : phi_(std::move(phi)), tau_(std::move(tau)) {
  if (!tau_.nondecreasing()) throw DomainError("TimeChangedPath: tau must be non-decreasing");
  const double lo = tau_.values().front(), hi = tau_(tau_.horizon());
  const double tol = 1e-12 * (1.0 + std::abs(lo) + std::abs(hi));
  if (phi_.s.front() > lo + tol || phi_.s.back() < hi - tol)
    throw CoverageError("TimeChangedPath: phi samples do not cover [tau(0), tau(T)]");
}

double TimeChangedPath::phi(double s) const { return phi_(std::min(s, tau_(tau_.horizon()))); }

CadlagPath compose(const TimeChangedPath& p) {
  const auto& tau = p.tau();
  const auto& T = tau.times();
  const auto& V = tau.values();
  const auto& L = tau.lefts();
  const auto& S = p.phi_path().s;
  const auto& PV = p.phi_path().v;
  std::vector<double> t, v, l;
  t.reserve(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) {
    t.push_back(T[i]);
    v.push_back(p.phi(V[i]));
    l.push_back(i == 0 ? v.back() : p.phi(L[i]));
    if (i + 1 == T.size()) break;
    const double s0 = V[i], s1 = L[i + 1];
    if (!(s1 > s0)) continue;
    auto k = std::upper_bound(S.begin(), S.end(), s0);
    for (; k != S.end() && *k < s1; ++k) {
      const double tk = T[i] + (*k - s0) / (s1 - s0) * (T[i + 1] - T[i]);
      if (!(tk > t.back() && tk < T[i + 1])) continue;
      const double val = PV[static_cast<std::size_t>(k - S.begin())];
      t.push_back(tk);
      v.push_back(val);
      l.push_back(val);
    }
  }
  return CadlagPath(std::move(t), std::move(v), std::move(l));
}

// ---------------------------------------------------------------- distances

double m1_distance_up(const CadlagPath& x, const CadlagPath& y) {
  if (!close_to(x.start(), y.start()) || !close_to(x.horizon(), y.horizon()))
    throw DomainError("m1_distance_up: paths live on different intervals");
  auto tol = [](const CadlagPath& p) {
    double m = 0.0;
    for (double v : p.values()) m = std::max(m, std::abs(v));
    return 1e-12 * (1.0 + m);
  };
  if (!x.in_d_up(tol(x)) || !y.in_d_up(tol(y))) throw DomainError("m1_distance_up: paths must be non-negative and non-decreasing");
  const MonotoneCurve a(x), b(y);
  double d = 0.0;
  // on the common sigma range the nearest point of a monotone curve lies on the same anti-diagonal
  const double lo = std::max(a.sigma.front(), b.sigma.front()), hi = std::min(a.sigma.back(), b.sigma.back());
  if (lo <= hi) {
    auto probe = [&](double s) { d = std::max(d, std::abs(a.t_at(s) - b.t_at(s))); };
    probe(lo);
    probe(hi);
    for (const auto* c : {&a, &b})
      for (double s : c->sigma)
        if (s > lo && s < hi) probe(s);
  }
  // beyond the other curve's range the nearest point is its endpoint
  auto tails = [&](const MonotoneCurve& c, const MonotoneCurve& o) {
    for (std::size_t k = 0; k < c.sigma.size(); ++k) {
      if (c.sigma[k] < o.sigma.front()) d = std::max(d, linf(c.t[k], c.x[k], o.t.front(), o.x.front()));
      if (c.sigma[k] > o.sigma.back()) d = std::max(d, linf(c.t[k], c.x[k], o.t.back(), o.x.back()));
    }
  };
  tails(a, b);
  tails(b, a);
  return d + std::abs(x.values().front() - y.values().front()) + std::abs(x(x.horizon()) - y(y.horizon()));
}

double dcirc_distance(const TimeChangedPath& p, const TimeChangedPath& q, double S) {
  if (!(S >= 0.0)) throw DomainError("dcirc_distance: clock horizon must be >= 0");
  std::vector<double> nodes{0.0, S, p.tau()(p.tau().horizon()), q.tau()(q.tau().horizon())};
  for (const auto* path : {&p.phi_path(), &q.phi_path()})
    for (double s : path->s) nodes.push_back(s);
  double d = 0.0;
  for (double s : nodes)
    if (s >= 0.0 && s <= S) d = std::max(d, std::abs(p.phi(s) - q.phi(s)));
  return std::max(d, m1_distance_up(p.tau(), q.tau()));
}

Interval jump_range(const TimeChangedPath& p, double t) {
  const double a = p.tau().left_limit(t), b = p.tau()(t);
  if (!(b > a)) {
    const double x = p.phi(b);
    return {x, x};
  }
  return p.phi_path().range(a, b);
}

Envelopes running_envelopes(const TimeChangedPath& p) {
  const auto& tau = p.tau();
  const double s0 = tau.values().front(), s1 = tau(tau.horizon());
  const SampledPath phi = restrict(p.phi_path(), s0, s1);
  const SampledPath lower = running_extreme(phi, true);
  const SampledPath upper = running_extreme(phi, false);
  std::vector<double> hat(lower.s.size());
  for (std::size_t k = 0; k < hat.size(); ++k) hat[k] = std::max(0.0, phi(lower.s[k]) - lower.v[k]);
  return {compose(TimeChangedPath(lower, tau)), compose(TimeChangedPath(upper, tau)),
          compose(TimeChangedPath(SampledPath(lower.s, std::move(hat)), tau))};
}

SkorokhodMap skorokhod_map(const CadlagPath& x) {
  const auto& T = x.times();
  const auto& V = x.values();
  const auto& L = x.lefts();
  std::vector<double> t{T[0]}, xv{V[0]}, xl{V[0]}, mv{V[0]}, ml{V[0]};
  double m = V[0];
  for (std::size_t i = 0; i + 1 < T.size(); ++i) {
    const double va = V[i], vb = L[i + 1];
    if (vb < m && va > m) {
      const double tc = T[i] + (va - m) / (va - vb) * (T[i + 1] - T[i]);
      if (tc > t.back() && tc < T[i + 1]) {
        t.push_back(tc);
        xv.push_back(m);
        xl.push_back(m);
        mv.push_back(m);
        ml.push_back(m);
      }
    }
    m = std::min(m, vb);
    t.push_back(T[i + 1]);
    xl.push_back(vb);
    ml.push_back(m);
    m = std::min(m, V[i + 1]);
    xv.push_back(V[i + 1]);
    mv.push_back(m);
  }
  std::vector<double> lv(t.size()), ll(t.size()), hv(t.size()), hl(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    lv[k] = -mv[k];
    ll[k] = -ml[k];
    hv[k] = xv[k] - mv[k];
    hl[k] = xl[k] - ml[k];
  }
  return {CadlagPath(t, std::move(lv), std::move(ll)), CadlagPath(t, std::move(hv), std::move(hl))};
}

double hausdorff_1d(std::vector<Interval> a, std::vector<Interval> b) {
  if (a.empty() || b.empty()) throw DomainError("hausdorff_1d: empty set");
  for (auto* set : {&a, &b})
    for (auto& iv : *set)
      if (iv.hi < iv.lo) std::swap(iv.lo, iv.hi);
  a = merged(std::move(a));
  b = merged(std::move(b));
  auto dist = [](double x, const std::vector<Interval>& s) {
    const auto it = std::upper_bound(s.begin(), s.end(), x, [](double v, const Interval& iv) { return v < iv.lo; });
    double d = kInf;
    if (it != s.end()) d = std::min(d, it->lo - x);
    if (it != s.begin()) {
      const auto& prev = *(it - 1);
      d = std::min(d, x <= prev.hi ? 0.0 : x - prev.hi);
    }
    return d;
  };
  auto directed = [&](const std::vector<Interval>& from, const std::vector<Interval>& to) {
    double d = 0.0;
    for (const auto& iv : from) d = std::max({d, dist(iv.lo, to), dist(iv.hi, to)});
    // interior maxima sit at midpoints of gaps of the target set
    for (std::size_t k = 0; k + 1 < to.size(); ++k) {
      const double mid = 0.5 * (to[k].hi + to[k + 1].lo);
      if (dist(mid, from) == 0.0) d = std::max(d, mid - to[k].hi);
    }
    return d;
  };
  return std::max(directed(a, b), directed(b, a));
}

LocalUniformReport local_uniform_check(const std::vector<CadlagPath>& seq, const CadlagPath& z,
                                       const std::vector<double>& exclusion, const std::vector<double>& probes,
                                       const std::vector<double>& deltas) {
  check_deltas(deltas);
  if (seq.empty()) throw DomainError("local_uniform_check: empty sequence");
  for (double t : probes)
    for (double e : exclusion)
      if (close_to(t, e)) throw DomainError("local_uniform_check: probe lies in the exclusion set");
  LocalUniformReport r;
  r.probes = probes;
  r.deltas = deltas;
  for (double t : probes) {
    std::vector<std::vector<double>> per_delta;
    std::vector<double> last;
    bool ok = true;
    for (double d : deltas) {
      const Interval B = z.range(t - d, t + d);
      std::vector<double> per_n;
      for (const auto& x : seq) {
        const Interval A = x.range(t - d, t + d);
        per_n.push_back(std::max(A.hi - B.lo, B.hi - A.lo));
      }
      ok = ok && non_increasing(per_n);
      last.push_back(per_n.back());
      per_delta.push_back(std::move(per_n));
    }
    ok = ok && non_increasing(last);
    r.sup.push_back(std::move(per_delta));
    r.decays.push_back(ok);
    if (!ok) r.flagged.push_back(r.decays.size() - 1);
  }
  for (const auto& x : seq) r.endpoint_gap.push_back(std::abs(x(x.horizon()) - z(z.horizon())));
  r.endpoint_decays = non_increasing(r.endpoint_gap);
  return r;
}

// ---------------------------------------------------------------- decorated paths

DecoratedPath::DecoratedPath(CadlagPath base, std::vector<Mark> marks, double tol)
    : base_(std::move(base)), marks_(std::move(marks)) {
  std::sort(marks_.begin(), marks_.end(), [](const Mark& a, const Mark& b) { return a.t < b.t; });
  for (std::size_t k = 0; k < marks_.size(); ++k) {
    const Mark& m = marks_[k];
    if (k > 0 && close_to(m.t, marks_[k - 1].t)) throw DomainError("DecoratedPath: repeated mark time");
    if (m.t < base_.start() || m.t > base_.horizon()) throw DomainError("DecoratedPath: mark outside [0, T]");
    if (!(m.lo <= m.hi)) throw DomainError("DecoratedPath: decoration with lo > hi");
    for (double x : {base_.left_limit(m.t), base_(m.t)})
      if (x < m.lo - tol || x > m.hi + tol) throw DomainError("DecoratedPath: decoration misses x(t-) or x(t)");
  }
}

DecoratedPath DecoratedPath::embed(CadlagPath x) { return DecoratedPath(std::move(x), {}); }

std::vector<Interval> DecoratedPath::decoration(double t) const {
  const double probe = t - 1e-12 * (1.0 + std::abs(t));
  const auto it = std::lower_bound(marks_.begin(), marks_.end(), probe, [](const Mark& m, double v) { return m.t < v; });
  if (it != marks_.end() && close_to(it->t, t)) return {{it->lo, it->hi}};
  const double a = base_.left_limit(t), b = base_(t);
  if (a == b) return {{a, a}};
  return {{std::min(a, b), std::min(a, b)}, {std::max(a, b), std::max(a, b)}};
}

std::vector<Segment> decoration_graph(const DecoratedPath& d) {
  const auto& x = d.base();
  const auto& T = x.times();
  const auto& V = x.values();
  const auto& L = x.lefts();
  std::vector<Segment> out;
  if (T.size() == 1) out.push_back({T[0], V[0], T[0], V[0]});
  for (std::size_t i = 0; i + 1 < T.size(); ++i) out.push_back({T[i], V[i], T[i + 1], L[i + 1]});
  for (const auto& m : d.marks()) out.push_back({m.t, m.lo, m.t, m.hi});
  return out;
}

double d_frak(const DecoratedPath& a, const DecoratedPath& b, double resolution) {
  const auto ga = decoration_graph(a), gb = decoration_graph(b);
  if (resolution <= 0.0) {
    double t0 = kInf, t1 = -kInf, z0 = kInf, z1 = -kInf;
    for (const auto* g : {&ga, &gb})
      for (const auto& s : *g) {
        t0 = std::min({t0, s.t0, s.t1});
        t1 = std::max({t1, s.t0, s.t1});
        z0 = std::min({z0, s.z0, s.z1});
        z1 = std::max({z1, s.z0, s.z1});
      }
    resolution = 1e-4 * std::max({t1 - t0, z1 - z0, 1e-300});
  }
  const SegmentIndex ia(ga), ib(gb);
  return std::max(directed_graph_distance(ga, ib, resolution), directed_graph_distance(gb, ia, resolution));
}

DecoratedLimitReport decorated_limit_check(const std::vector<CadlagPath>& seq, const DecoratedPath& target,
                                           const std::vector<double>& probes, const std::vector<double>& deltas) {
  check_deltas(deltas);
  if (seq.empty()) throw DomainError("decorated_limit_check: empty sequence");
  DecoratedLimitReport r;
  r.probes = probes;
  r.deltas = deltas;
  for (double t : probes) {
    const auto I = target.decoration(t);
    std::vector<std::vector<double>> per_delta;
    std::vector<double> last;
    bool ok = true;
    for (double d : deltas) {
      std::vector<double> per_n;
      for (const auto& x : seq) per_n.push_back(hausdorff_1d(x.image(t - d, t + d), I));
      ok = ok && non_increasing(per_n);
      last.push_back(per_n.back());
      per_delta.push_back(std::move(per_n));
    }
    ok = ok && non_increasing(last);
    r.final_max = std::max(r.final_max, last.back());
    r.dist.push_back(std::move(per_delta));
    r.decays.push_back(ok);
    if (!ok) r.flagged.push_back(r.decays.size() - 1);
  }
  return r;
}

std::string cadlag_csv(const CadlagPath& x) {
  std::ostringstream os;
  os.precision(17);
  os << "t,left,value\n";
  for (std::size_t i = 0; i < x.size(); ++i) os << x.times()[i] << ',' << x.lefts()[i] << ',' << x.values()[i] << '\n';
  return os.str();
}

std::string marks_csv(const DecoratedPath& d) {
  std::ostringstream os;
  os.precision(17);
  os << "t,lo,hi\n";
  for (const auto& m : d.marks()) os << m.t << ',' << m.lo << ',' << m.hi << '\n';
  return os.str();
}

}  // namespace vclock
