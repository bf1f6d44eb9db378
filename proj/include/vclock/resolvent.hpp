#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vclock/kernels.hpp"

namespace vclock {

// Closed-form resolvent of the second kind for the exponential, fractional and gamma families.
class ResolventForm {
 public:
  explicit ResolventForm(KernelSpec source);
  double operator()(double t) const;  // R(t), t > 0
  double integrated(double t) const;  // Rbar(t) = int_0^t R
  const KernelSpec& source() const { return source_; }

 private:
  KernelSpec source_;
};

// Throws DomainError for families without a closed form; use resolvent_numeric for those.
ResolventForm resolvent_closed_form(const KernelSpec& spec);

struct ResolventGrid {
  double step = 0.0;
  double horizon = 0.0;
  std::vector<double> r;           // cell averages of R
  std::vector<double> cumulative;  // Rbar(j step), j = 0..size()
  std::vector<double> k;           // cell averages of K
  double residual = 0.0;           // max_j |k_j - r_j - (k*r)_j|
  double residual_scale = 1.0;     // 1 + max_j |k_j|
  bool singular_split = false;     // solved for K*R using a closed-form K*K

  std::size_t size() const { return r.size(); }
};

// Solves r = k - k*r cell by cell with the grid's lag weights.
ResolventGrid resolvent_numeric(const KernelGrid& grid);
inline ResolventGrid resolvent_numeric(const KernelSpec& spec, double step, double horizon) {
  return resolvent_numeric(discretize(spec, step, horizon));
}

// Laplace transform of the piecewise-constant resolvent, truncated at the horizon.
double resolvent_grid_laplace(const ResolventGrid& rg, double lambda);

struct MassReport {
  double min_r = 0.0;
  double max_r = 0.0;
  double mass_T = 0.0;           // Rbar(T)
  double mass_infinity_bound = 1.0;  // lim_{lambda -> 0} Rhat(lambda) when a source spec is given
  double tail_bound = 0.0;       // mass_infinity_bound - mass_T
  bool nonnegative = true;
  bool mass_ok = true;
  bool pass = true;
};

MassReport check_resolvent_mass(const ResolventGrid& rg, bool cm_flag, double tol = 1e-8,
                                const std::optional<KernelSpec>& source = std::nullopt);

struct ScaledLaplaceRow {
  double n;
  double lambda;
  double formula;     // n Khat / (1 + n Khat)
  double deviation;   // |formula - 1|
  double numeric;     // transform of resolvent_numeric(nK); NaN when not computed
  double rel_error;   // |numeric / formula - 1|
};

struct ScaledLaplaceReport {
  std::vector<ScaledLaplaceRow> rows;
  bool monotone = true;  // deviation decreasing in n at every lambda
  double final_max_deviation = 0.0;
  double max_rel_error = 0.0;
};

// numeric_step > 0 also solves for the resolvent of nK on [0, numeric_horizon] and compares transforms.
ScaledLaplaceReport resolvent_scaled_laplace_check(const KernelSpec& spec, const std::vector<double>& n_ladder,
                                                   const std::vector<double>& lambdas, double numeric_step = 0.0,
                                                   double numeric_horizon = 0.0);

// Node convention: values at t_k = k step, k = 0..N. path[0] must be 0.
// convolve_nodes returns p_k = sum_{i=1}^k m_{k-i} u_i; entry u[0] is ignored.
std::vector<double> convolve_nodes(const KernelGrid& grid, const std::vector<double>& u);
// Inverse of convolve_nodes by forward substitution; entry 0 of the result copies entry 1.
std::vector<double> deconvolve_first_kind(const KernelGrid& grid, const std::vector<double>& path);

// G0 - R_lambda * G0 at the grid nodes, R_lambda the resolvent of lambda K.
std::vector<double> shifted_input_curve(const std::function<double(double)>& g0, double lambda,
                                        const KernelSpec& spec, double step, double horizon, double tol = 1e-9);

// (t, R) rows at cell midpoints.
std::string resolvent_csv(const ResolventGrid& rg);

}  // namespace vclock
