// reactive-settling: biokinetic source terms. The concrete model is a
// modified ASM1 (activated sludge model no. 1 without alkalinity, with an
// extra ammonia Monod factor on heterotrophic growth so the ODE system keeps
// solutions non-negative).
#pragma once

#include "rs/core.hpp"

namespace rs {

inline constexpr int kNumProcesses = 8;

// ASM1 parameter set. Literature values are quoted in g, m^3 and days; keep
// them in those units until a single to_si() call at model construction.
struct Asm1Params {
  // stoichiometry (dimensionless)
  double Y_A = 0.24;    // autotrophic yield
  double Y_H = 0.57;    // heterotrophic yield
  double f_P = 0.1;     // particulate fraction of decayed biomass
  double i_XB = 0.07;   // N content of biomass
  double i_XP = 0.06;   // N content of biomass products
  // heterotrophs
  double mu_H = 4.0;    // max growth rate            [1/d]
  double K_S = 20.0;    // substrate half-saturation  [g/m^3]
  double K_OH = 0.25;   // oxygen half-saturation     [g/m^3]
  double K_NO = 0.5;    // nitrate half-saturation    [g/m^3]
  double b_H = 0.5;     // decay rate                 [1/d]
  double eta_g = 0.8;   // anoxic growth correction
  double eta_h = 0.35;  // anoxic hydrolysis correction
  double k_h = 1.5;     // max hydrolysis rate        [1/d]
  double K_X = 0.02;    // hydrolysis half-saturation [-]
  // autotrophs and ammonification
  double mu_A = 0.879;      // max growth rate                     [1/d]
  double K_NH_gr = 0.007;   // ammonia half-saturation, growth     [g/m^3]
  double K_NH = 1.0;        // ammonia half-saturation, autotrophs [g/m^3]
  double b_A = 0.132;       // decay rate                          [1/d]
  double K_OA = 0.5;        // oxygen half-saturation              [g/m^3]
  double k_a = 0.08;        // ammonification rate                 [m^3/(g d)]

  // Convert to kg, m^3, s. The only unit conversion site in the code base:
  // rates 1/d -> 1/s, half-saturations g/m^3 -> kg/m^3, k_a m^3/(g d) ->
  // m^3/(kg s). K_X and the yields/fractions are dimensionless.
  Asm1Params to_si() const;

  void validate() const;  // throws ConfigError
};

// Uniform-in-state rate caps used by the step-size estimates:
//   for every admissible state (C >= 0, S >= 0, sum C <= x_hat):
//     -R_C[k] <= M_C * C[k],  -R_S[k] <= M_S * S[k],  sum_k R_C[k]^+ <= M_t.
struct ReactionBounds {
  double M_C = 0.0;      // [1/s]
  double M_S = 0.0;      // [1/s]
  double M_tilde = 0.0;  // [kg/(m^3 s)]
};

class ReactionModel {
 public:
  virtual ~ReactionModel() = default;
  // Source terms for one local state (6 solids, 6 solubles), SI units.
  virtual void rates(const double* C, const double* S, double* RC,
                     double* RS) const = 0;
  virtual ReactionBounds bounds(double x_hat) const = 0;
  // True for the all-zero model; lets callers skip source accumulation so the
  // split and unsplit step paths execute identical floating point operations.
  virtual bool is_zero() const { return false; }
};

class ZeroReactions final : public ReactionModel {
 public:
  void rates(const double*, const double*, double* RC, double* RS) const override {
    for (int k = 0; k < kNumSolids; ++k) RC[k] = 0.0;
    for (int k = 0; k < kNumSolubles; ++k) RS[k] = 0.0;
  }
  ReactionBounds bounds(double) const override { return {}; }
  bool is_zero() const override { return true; }
};

class Asm1 final : public ReactionModel {
 public:
  // si: parameters already converted by Asm1Params::to_si().
  // Solids growth is switched off once total solids reach x_hat - eps_r so
  // the sludge blanket cannot be pushed past its packing limit; soluble
  // turnover continues there.
  Asm1(const Asm1Params& si, double x_hat, double eps_r);

  // The eight process rates in SI; exposed for tests.
  void process_rates(const double* C, const double* S, double* r) const;

  void rates(const double* C, const double* S, double* RC,
             double* RS) const override;
  ReactionBounds bounds(double x_hat) const override;

  const Asm1Params& params() const { return p_; }

 private:
  Asm1Params p_;       // SI
  double growth_cut_;  // x_hat - eps_r
  // stoichiometric matrices, row = component, column = process
  double sc_[kNumSolids][kNumProcesses];
  double ss_[kNumSolubles][kNumProcesses];
};

}  // namespace rs
