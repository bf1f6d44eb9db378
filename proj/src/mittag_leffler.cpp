#include "vclock/mittag_leffler.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "vclock/errors.hpp"

namespace vclock {

namespace {

constexpr int kMaxTerms = 200000;

std::string describe(double alpha, double beta, double z) {
  std::ostringstream os;
  os.precision(17);
  os << "E_{" << alpha << "," << beta << "}(" << z << ")";
  return os.str();
}

// log of the largest term; stops early once the peak exceeds `cap`.
double log_peak_term(double alpha, double beta, double z, double cap) {
  const double lz = std::log(std::abs(z));
  double best = -std::lgamma(beta);
  for (int k = 1; k < kMaxTerms; ++k) {
    const double lt = k * lz - std::lgamma(alpha * k + beta);
    if (lt > best) best = lt;
    if (best > cap) return best;
    if (lt < best - 60.0 && alpha * k + beta > 2.0) break;
  }
  return best;
}

double series(double alpha, double beta, double z, int& terms) {
  const long double lz = std::log(std::abs(static_cast<long double>(z)));
  long double sum = 1.0L / std::tgamma(static_cast<long double>(beta));
  long double peak = std::abs(sum);
  int k = 1;
  for (; k < kMaxTerms; ++k) {
    const long double mag = std::exp(k * lz - std::lgamma(static_cast<long double>(alpha) * k + beta));
    const long double term = (z < 0 && (k & 1)) ? -mag : mag;
    sum += term;
    peak = std::max(peak, mag);
    if (mag < 1e-20L * std::abs(sum) && mag < peak) break;
    if (mag == 0.0L && alpha * k + beta > 2.0) break;
  }
  terms = k + 1;
  if (k >= kMaxTerms) throw AccuracyLossError("mittag_leffler: series did not converge for " + describe(alpha, beta, z));
  const double out = static_cast<double>(sum);
  if (!std::isfinite(out)) throw AccuracyLossError("mittag_leffler: overflow in series for " + describe(alpha, beta, z));
  return out;
}

// Integral representation for 0 < alpha < 1, z < 0, beta <= 1.
double integral_rep(double alpha, double beta, double z) {
  thread_local boost::math::quadrature::tanh_sinh<double> finite(15);
  thread_local boost::math::quadrature::exp_sinh<double> tail(12);
  const double pa = M_PI * alpha;
  const double s1 = std::sin(M_PI * (1.0 - beta));
  const double s2 = std::sin(M_PI * (1.0 - beta + alpha));
  const double c = std::cos(pa);
  const double p = (1.0 - beta) / alpha;
  auto kern = [&](double chi) {
    if (chi <= 0.0) return 0.0;
    const double decay = std::pow(chi, 1.0 / alpha);
    if (decay > 740.0) return 0.0;
    const double num = chi * s1 - z * s2;
    const double den = chi * chi - 2.0 * chi * z * c + z * z;
    return std::pow(chi, p) * std::exp(-decay) * num / den;
  };
  const double cut = std::pow(40.0, alpha);
  double total = 0.0;
  const double peak = c < 0.0 ? std::abs(z * c) : 0.0;
  if (peak > 0.0 && peak < cut) {
    total += finite.integrate(kern, 0.0, peak, 1e-14);
    total += finite.integrate(kern, peak, cut, 1e-14);
  } else {
    total += finite.integrate(kern, 0.0, cut, 1e-14);
  }
  total += tail.integrate([&](double u) { return kern(cut + u); }, 1e-14);
  return total / pa;
}

}  // namespace

MittagLefflerEval mittag_leffler_eval(double alpha, double beta, double z) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("mittag_leffler: alpha must lie in (0,2]");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("mittag_leffler: beta must be > 0");
  if (!std::isfinite(z)) throw DomainError("mittag_leffler: z must be finite");

  MittagLefflerEval ev;
  ev.alpha = alpha;
  ev.beta = beta;
  ev.z = z;

  if (z == 0.0) {
    ev.value = 1.0 / std::tgamma(beta);
    ev.method = "closed";
    return ev;
  }
  if (alpha == 1.0 && beta == 1.0) {
    ev.value = std::exp(z);
    ev.method = "closed";
    return ev;
  }
  if (alpha == 2.0 && z < 0.0 && (beta == 1.0 || beta == 2.0)) {
    const double r = std::sqrt(-z);
    ev.value = beta == 1.0 ? std::cos(r) : std::sin(r) / r;
    ev.method = "closed";
    return ev;
  }
  if (alpha == 1.0 && z <= -1.0 && beta == std::floor(beta) && beta <= 20.0) {
    double e = std::exp(z);
    for (int m = 1; m < static_cast<int>(beta); ++m) e = (e - 1.0 / std::tgamma(static_cast<double>(m))) / z;
    ev.value = e;
    ev.method = "closed";
    return ev;
  }

  const double log_cap = std::log(kMittagLefflerSeriesPeak);
  const double lp = log_peak_term(alpha, beta, z, z > 0.0 ? std::numeric_limits<double>::infinity() : log_cap);
  ev.peak_term = std::exp(lp);
  if (z > 0.0 || lp <= log_cap) {
    ev.value = series(alpha, beta, z, ev.terms);
    ev.method = "series";
    return ev;
  }
  if (alpha < 1.0) {
    // E_{a,b} = (E_{a,b-a} - 1/Gamma(b-a)) / z moves beta into (0, 1], where the
    // integrand has no endpoint singularity
    int shifts = 0;
    double b = beta;
    while (b > 1.0) {
      b -= alpha;
      ++shifts;
    }
    double v = integral_rep(alpha, b, z);
    for (int s = 0; s < shifts; ++s) {
      v = (v - 1.0 / std::tgamma(b)) / z;
      b += alpha;
    }
    ev.value = v;
    ev.method = shifts ? "recurrence+integral" : "integral";
    return ev;
  }
  std::ostringstream os;
  os << "mittag_leffler: " << describe(alpha, beta, z) << " needs the series with peak term " << ev.peak_term
     << " (cancellation too severe) and no integral representation is implemented for alpha >= 1";
  throw AccuracyLossError(os.str());
}

}  // namespace vclock
