#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace vclock {

// Sorted draws with their provenance.
class Sample {
 public:
  Sample() = default;
  explicit Sample(std::vector<double> draws, std::uint64_t seed = 0, std::string generator = {});

  const std::vector<double>& values() const { return v_; }
  std::size_t size() const { return v_.size(); }
  std::uint64_t seed() const { return seed_; }
  const std::string& generator() const { return generator_; }
  // Right-continuous empirical CDF.
  double ecdf(double x) const;
  double quantile(double p) const;

 private:
  std::vector<double> v_;
  std::uint64_t seed_ = 0;
  std::string generator_;
};

struct KsOneSample {
  double statistic = 0.0;
  double dkw_band = 0.0;  // sqrt(ln(2/0.05) / (2n))
  bool within_band = true;
};

KsOneSample ks_one_sample(const Sample& s, const std::function<double(double)>& cdf);

// Asymptotic two-sided Kolmogorov critical value c(alpha) = sqrt(-ln(alpha/2)/2).
double ks_critical(double alpha);

struct KsTwoSample {
  double statistic = 0.0;
  double threshold = 0.0;  // c(alpha) sqrt((n+m)/(nm))
  bool pass = true;
};

KsTwoSample ks_two_sample(const Sample& a, const Sample& b, double alpha = 0.01);

struct MeanSE {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

MeanSE mc_mean(const std::vector<double>& values);

}  // namespace vclock
