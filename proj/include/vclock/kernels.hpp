#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace vclock {

class KernelSpec;

// K(t) = c e^{bt}
struct Exponential {
  double c;
  double b;
};

// K(t) = c t^{alpha-1} / Gamma(alpha)
struct Fractional {
  double c;
  double alpha;
};

// K(t) = c e^{bt} t^{alpha-1} / Gamma(alpha), b <= 0
struct GammaKernel {
  double c;
  double b;
  double alpha;
};

// K(t) = K_base(t + eps)
struct Shifted {
  std::shared_ptr<const KernelSpec> base;
  double eps;
};

// K(t) = n K_base(n t)
struct DiracScaled {
  std::shared_ptr<const KernelSpec> base;
  double n;
};

// Piecewise-linear through (t_i, k_i); constant k_0 on [0, t_0], zero after t_last.
struct Tabulated {
  std::shared_ptr<const std::vector<double>> t;
  std::shared_ptr<const std::vector<double>> k;
  std::string source;  // CSV path when loaded from file
};

class KernelSpec {
 public:
  using Family = std::variant<Exponential, Fractional, GammaKernel, Shifted, DiracScaled, Tabulated>;

  static KernelSpec exponential(double c, double b);
  static KernelSpec constant(double c) { return exponential(c, 0.0); }
  static KernelSpec fractional(double c, double alpha);
  static KernelSpec gamma(double c, double b, double alpha);
  static KernelSpec shifted(const KernelSpec& base, double eps);
  static KernelSpec dirac_scaled(const KernelSpec& base, double n);
  static KernelSpec tabulated(std::vector<double> t, std::vector<double> k, std::string source = {});

  // factor * K, recursing through wrappers.
  KernelSpec scaled(double factor) const;

  const Family& family() const { return family_; }
  std::string name() const;
  bool completely_monotone() const;
  // Nonnegative and non-increasing on (0, inf).
  bool nonincreasing_nonnegative() const;
  bool integrable() const;           // K in L^1(R_+)
  bool square_integrable() const;    // K in L^2_loc
  bool singular_at_zero() const;

 private:
  explicit KernelSpec(Family f) : family_(std::move(f)) {}
  Family family_;
};

double eval_kernel(const KernelSpec& spec, double t);
// Kbar(t) = int_0^t K
double integrated_kernel(const KernelSpec& spec, double t);
// int_0^t Kbar
double double_integrated_kernel(const KernelSpec& spec, double t);
// int_a^b K(s) ds, evaluated without cancellation where the family allows it.
double kernel_mass(const KernelSpec& spec, double a, double b);
double laplace_transform(const KernelSpec& spec, double lambda);
// ||K||_{L^1}; throws DomainError for non-integrable kernels.
double l1_norm(const KernelSpec& spec);

struct KernelGrid {
  double step = 0.0;
  double horizon = 0.0;
  std::vector<double> mass;        // m_j = int_{j step}^{(j+1) step} K
  std::vector<double> cumulative;  // Kbar(j step), j = 0..size()
  // Cell-average coupling w_d = (1/step) int_0^step int_0^step K(d step + u - v) du dv
  // (K = 0 on negative arguments), used by the second-kind solver.
  std::vector<double> lag_weight;
  // Cell integrals of K*K where a closed form exists (empty otherwise).
  std::vector<double> self_conv_mass;
  bool completely_monotone = false;

  std::size_t size() const { return mass.size(); }
};

// int_a^b (K*K)(s) ds when the family has a closed form for K*K.
std::optional<double> self_convolution_mass(const KernelSpec& spec, double a, double b);

// The lag_weight sequence of KernelGrid for n cells.
std::vector<double> lag_weights(const KernelSpec& spec, double step, std::size_t n);

// Cells cover [0, T] with ceil(T/step - 1e-9) cells.
KernelGrid discretize(const KernelSpec& spec, double step, double horizon);

struct DiracRow {
  double n;
  double lambda;
  double deviation;  // |Khat(lambda/n) - Khat(0)|
};

struct DiracReport {
  std::vector<DiracRow> rows;
  bool monotone = true;  // deviation non-increasing in n for every lambda
  double final_max = 0.0;
};

DiracReport dirac_family_check(const KernelSpec& spec, const std::vector<double>& n_ladder,
                               const std::vector<double>& lambdas);

// Compact text form "family:key=val,..." with nested bases as "base.family=...".
std::string to_string(const KernelSpec& spec);
KernelSpec parse_kernel(const std::string& text);

// Key-value form with a common prefix, e.g. prefix "kernel" gives kernel.family, kernel.c, ...
void to_key_values(const KernelSpec& spec, const std::string& prefix,
                   std::map<std::string, std::string>& out);
KernelSpec from_key_values(const std::map<std::string, std::string>& kv, const std::string& prefix);

// Two-column comma-separated (t, K(t)); lines starting with '#' or a non-numeric header are skipped.
KernelSpec load_tabulated_csv(const std::string& path);

}  // namespace vclock
