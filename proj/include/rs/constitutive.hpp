// reactive-settling: material functions for hindered settling and sediment
// compressibility, plus the bounds on them needed by the step-size estimate.
#pragma once

#include <vector>

#include "rs/core.hpp"

namespace rs {

// Physical parameters of the settling model. Defaults are the calibrated
// secondary-clarifier values used by the bundled scenarios; SI units.
struct SettlingParams {
  double v0 = 1.76e-3;      // max hindered settling velocity     [m/s]
  double x_breve = 3.87;    // settling curve scale concentration [kg/m^3]
  double eta_exp = 3.58;    // settling curve exponent            [-]
  double x_c = 5.0;         // critical (gel) concentration       [kg/m^3]
  double alpha_comp = 0.2;  // effective solid stress slope       [m^2/s^2]
  double rho_s = 1050.0;    // solids density                     [kg/m^3]
  double rho_f = 998.0;     // fluid density                      [kg/m^3]
  double g = 9.81;          // gravity                            [m/s^2]
  double x_hat = 30.0;      // max admissible total solids        [kg/m^3]
  double eps_r = 1.0;       // biomass growth cutoff band width   [kg/m^3]

  void validate() const;  // throws ConfigError on nonsense values
};

// Evaluates the settling velocity v_hs, the compression function d and its
// primitive D. D has no closed form, so it is tabulated once at construction
// (composite Simpson on a fine grid over [x_c, x_hat], exact partial-cell
// Simpson for points between nodes). All evaluations after construction are
// allocation-free.
class Constitutive {
 public:
  explicit Constitutive(const SettlingParams& p);

  const SettlingParams& params() const { return p_; }

  // Hindered settling velocity; clamped to 0 at and above x_hat.
  double v_hs(double x) const;
  // Derivative of the smooth branch of v_hs (no clamp).
  double dv_hs(double x) const;
  // Effective solid stress derivative: alpha_comp above x_c, else 0.
  double sigma_e_prime(double x) const;
  // Compression function d(x) = v_hs(x) rho_s sigma_e'(x) / (g x (rho_s-rho_f)).
  double d_comp(double x) const;
  // Primitive D(x) = int_{x_c}^{x} d(s) ds, 0 below x_c, flat above x_hat.
  double D_comp(double x) const;

  // Bounds used by the step-size estimate.
  double max_abs_dv_hs() const { return max_abs_dv_; }  // over [0, x_hat]
  double max_d_comp() const { return max_d_; }          // over (x_c, x_hat)
  double D_at_x_hat() const { return D_total_; }

 private:
  SettlingParams p_;
  // D table: nodes_[i] = D(x_c + i*dx_) for i = 0..kTableN.
  std::vector<double> nodes_;
  double dx_ = 0.0;
  double max_abs_dv_ = 0.0;
  double max_d_ = 0.0;
  double D_total_ = 0.0;
};

}  // namespace rs
