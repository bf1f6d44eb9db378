#pragma once

#include <string>

namespace vclock {

struct MittagLefflerEval {
  double alpha = 0.0;
  double beta = 0.0;
  double z = 0.0;
  double value = 0.0;
  std::string method;      // "closed", "series", "integral" or "recurrence+integral"
  double peak_term = 0.0;  // largest |z^k / Gamma(alpha k + beta)| in the series
  int terms = 0;           // series terms summed (0 when not used)
};

// Largest series term magnitude above which negative arguments leave the power series.
inline constexpr double kMittagLefflerSeriesPeak = 1e3;

// E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta) for real z, alpha in (0,2], beta > 0.
MittagLefflerEval mittag_leffler_eval(double alpha, double beta, double z);

inline double mittag_leffler(double alpha, double beta, double z) {
  return mittag_leffler_eval(alpha, beta, z).value;
}

}  // namespace vclock
