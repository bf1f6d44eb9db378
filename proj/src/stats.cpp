#include "vclock/stats.hpp"

#include <algorithm>
#include <cmath>

#include "vclock/errors.hpp"
#include "vclock/numerics.hpp"

namespace vclock {

Sample::Sample(std::vector<double> draws, std::uint64_t seed, std::string generator)
    : v_(std::move(draws)), seed_(seed), generator_(std::move(generator)) {
  for (double x : v_)
    if (std::isnan(x)) throw DomainError("Sample: NaN draw");
  std::sort(v_.begin(), v_.end());
}

double Sample::ecdf(double x) const {
  if (v_.empty()) throw DomainError("Sample::ecdf: empty sample");
  const auto k = std::upper_bound(v_.begin(), v_.end(), x) - v_.begin();
  return static_cast<double>(k) / static_cast<double>(v_.size());
}

double Sample::quantile(double p) const {
  if (v_.empty()) throw DomainError("Sample::quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("Sample::quantile: p outside [0,1]");
  const double pos = p * static_cast<double>(v_.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v_.size()) return v_.back();
  return v_[i] + (pos - static_cast<double>(i)) * (v_[i + 1] - v_[i]);
}

KsOneSample ks_one_sample(const Sample& s, const std::function<double(double)>& cdf) {
  const auto& v = s.values();
  const std::size_t n = v.size();
  if (n == 0) throw DomainError("ks_one_sample: empty sample");
  const double dn = static_cast<double>(n);
  KsOneSample r;
  // compare both one-sided limits at each distinct value, so atoms of cdf are handled too
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && v[j] == v[i]) ++j;
    const double f = std::clamp(cdf(v[i]), 0.0, 1.0);
    const double f_left = std::clamp(cdf(std::nextafter(v[i], -HUGE_VAL)), 0.0, 1.0);
    r.statistic = std::max({r.statistic, std::abs(static_cast<double>(j) / dn - f),
                            std::abs(f_left - static_cast<double>(i) / dn)});
    i = j;
  }
  r.dkw_band = std::sqrt(std::log(2.0 / 0.05) / (2.0 * dn));
  r.within_band = r.statistic <= r.dkw_band;
  return r;
}

double ks_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("ks_critical: alpha must lie in (0,1)");
  return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

KsTwoSample ks_two_sample(const Sample& a, const Sample& b, double alpha) {
  const auto& x = a.values();
  const auto& y = b.values();
  if (x.empty() || y.empty()) throw DomainError("ks_two_sample: empty sample");
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double t = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == t) ++i;
    while (j < y.size() && y[j] == t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  KsTwoSample r;
  r.statistic = d;
  r.threshold = ks_critical(alpha) * std::sqrt((n + m) / (n * m));
  r.pass = d <= r.threshold;
  return r;
}

MeanSE mc_mean(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n < 2) throw DomainError("mc_mean: need at least two values");
  CompensatedSum s;
  for (double v : values) s.add(v);
  MeanSE r;
  r.n = n;
  r.mean = s.value() / static_cast<double>(n);
  CompensatedSum q;
  for (double v : values) q.add((v - r.mean) * (v - r.mean));
  r.se = std::sqrt(q.value() / static_cast<double>(n - 1) / static_cast<double>(n));
  return r;
}

}  // namespace vclock
