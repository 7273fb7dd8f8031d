#include "rs/reactions.hpp"

#include <algorithm>
#include <cmath>

namespace rs {

namespace {
constexpr double kSecPerDay = 86400.0;
constexpr double kGramPerKg = 1000.0;
}  // namespace

Asm1Params Asm1Params::to_si() const {
  Asm1Params q = *this;
  // first-order rates
  q.mu_H = mu_H / kSecPerDay;
  q.b_H = b_H / kSecPerDay;
  q.k_h = k_h / kSecPerDay;
  q.mu_A = mu_A / kSecPerDay;
  q.b_A = b_A / kSecPerDay;
  // concentrations
  q.K_S = K_S / kGramPerKg;
  q.K_OH = K_OH / kGramPerKg;
  q.K_NO = K_NO / kGramPerKg;
  q.K_NH_gr = K_NH_gr / kGramPerKg;
  q.K_NH = K_NH / kGramPerKg;
  q.K_OA = K_OA / kGramPerKg;
  // second-order rate: m^3/(g d) -> m^3/(kg s)
  q.k_a = k_a * kGramPerKg / kSecPerDay;
  // K_X, yields and fractions are dimensionless
  return q;
}

void Asm1Params::validate() const {
  auto req = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("reaction parameters: ") + msg);
  };
  req(Y_A > 0.0 && Y_A < 4.57, "Y_A out of range");
  req(Y_H > 0.0 && Y_H < 1.0, "Y_H out of range");
  req(f_P >= 0.0 && f_P <= 1.0, "f_P out of range");
  req(i_XB >= 0.0 && i_XP >= 0.0, "nitrogen contents must be non-negative");
  req(mu_H >= 0.0 && b_H >= 0.0 && k_h >= 0.0 && mu_A >= 0.0 && b_A >= 0.0 &&
          k_a >= 0.0,
      "rates must be non-negative");
  req(K_S > 0.0 && K_OH > 0.0 && K_NO > 0.0 && K_NH_gr > 0.0 && K_NH > 0.0 &&
          K_OA > 0.0 && K_X > 0.0,
      "half-saturation constants must be positive");
  req(eta_g >= 0.0 && eta_h >= 0.0, "correction factors must be non-negative");
}

Asm1::Asm1(const Asm1Params& si, double x_hat, double eps_r)
    : p_(si), growth_cut_(x_hat - eps_r) {
  p_.validate();
  if (!(x_hat > 0.0) || !(eps_r > 0.0) || !(growth_cut_ > 0.0)) {
    throw ConfigError("reaction cutoff: need 0 < eps_r < x_hat");
  }

  for (auto& row : sc_) std::fill(std::begin(row), std::end(row), 0.0);
  for (auto& row : ss_) std::fill(std::begin(row), std::end(row), 0.0);

  const double iN = p_.i_XB - p_.f_P * p_.i_XP;  // N released per decayed COD

  // solids: X_I | X_S | X_BH | X_BA | X_P | X_ND  (X_I row stays zero)
  sc_[1][3] = 1.0 - p_.f_P;  // decay -> slowly biodegradable substrate
  sc_[1][4] = 1.0 - p_.f_P;
  sc_[1][6] = -1.0;          // hydrolysis consumes X_S
  sc_[2][0] = 1.0;           // heterotrophic growth, aerobic
  sc_[2][1] = 1.0;           //                       anoxic
  sc_[2][3] = -1.0;          // heterotrophic decay
  sc_[3][2] = 1.0;           // autotrophic growth
  sc_[3][4] = -1.0;          // autotrophic decay
  sc_[4][3] = p_.f_P;        // inert products from decay
  sc_[4][4] = p_.f_P;
  sc_[5][3] = iN;            // organically bound N from decay
  sc_[5][4] = iN;
  sc_[5][7] = -1.0;          // hydrolysis of particulate organic N

  // solubles: S_I | S_S | S_O | S_NO | S_NH | S_ND  (S_I row stays zero)
  ss_[1][0] = -1.0 / p_.Y_H;
  ss_[1][1] = -1.0 / p_.Y_H;
  ss_[1][6] = 1.0;
  ss_[2][0] = -(1.0 - p_.Y_H) / p_.Y_H;
  ss_[2][2] = -(4.57 - p_.Y_A) / p_.Y_A;
  ss_[3][1] = -(1.0 - p_.Y_H) / (2.86 * p_.Y_H);
  ss_[3][2] = 1.0 / p_.Y_A;
  ss_[4][0] = -p_.i_XB;
  ss_[4][1] = -p_.i_XB;
  ss_[4][2] = -p_.i_XB - 1.0 / p_.Y_A;
  ss_[4][5] = 1.0;
  ss_[5][5] = -1.0;
  ss_[5][7] = 1.0;
}

void Asm1::process_rates(const double* C, const double* S, double* r) const {
  const double X_S = C[1], X_BH = C[2], X_BA = C[3], X_ND = C[5];
  const double S_S = S[1], S_O = S[2], S_NO = S[3], S_NH = S[4], S_ND = S[5];

  const double mon_NH_gr = S_NH / (p_.K_NH_gr + S_NH);
  const double mon_SS = S_S / (p_.K_S + S_S);
  const double mon_O_H = S_O / (p_.K_OH + S_O);
  const double inh_O_H = p_.K_OH / (p_.K_OH + S_O);
  const double mon_NO = S_NO / (p_.K_NO + S_NO);

  r[0] = p_.mu_H * mon_NH_gr * mon_SS * mon_O_H * X_BH;
  r[1] = p_.mu_H * mon_NH_gr * mon_SS * inh_O_H * mon_NO * p_.eta_g * X_BH;
  r[2] = p_.mu_A * (S_NH / (p_.K_NH + S_NH)) * (S_O / (p_.K_OA + S_O)) * X_BA;
  r[3] = p_.b_H * X_BH;
  r[4] = p_.b_A * X_BA;
  r[5] = p_.k_a * S_ND * X_BH;

  // Hydrolysis saturation terms are guarded so vanishing biomass (or
  // substrate) gives exactly zero instead of 0/0.
  const double env = mon_O_H + p_.eta_h * inh_O_H * mon_NO;
  const double mu7 =
      (X_S > 0.0 && X_BH > 0.0) ? X_S * X_BH / (p_.K_X * X_BH + X_S) : 0.0;
  const double mu8 =
      (X_BH > 0.0) ? X_BH * X_ND / (p_.K_X * X_BH + X_S) : 0.0;
  r[6] = p_.k_h * mu7 * env;
  r[7] = p_.k_h * mu8 * env;
}

void Asm1::rates(const double* C, const double* S, double* RC,
                 double* RS) const {
  double r[kNumProcesses];
  process_rates(C, S, r);

  double X = 0.0;
  for (int k = 0; k < kNumSolids; ++k) X += C[k];
  // Above the cutoff the sediment is treated as packed: no further change in
  // the particulate phase, while soluble turnover continues.
  const bool grow = X < growth_cut_;
  for (int k = 0; k < kNumSolids; ++k) {
    double acc = 0.0;
    if (grow) {
      for (int j = 0; j < kNumProcesses; ++j) acc += sc_[k][j] * r[j];
    }
    RC[k] = acc;
  }
  for (int k = 0; k < kNumSolubles; ++k) {
    double acc = 0.0;
    for (int j = 0; j < kNumProcesses; ++j) acc += ss_[k][j] * r[j];
    RS[k] = acc;
  }
}

ReactionBounds Asm1::bounds(double x_hat) const {
  ReactionBounds b;
  // Loss rate per unit of the component itself. Solids: decay of biomass and
  // hydrolysis of X_S / X_ND (mu7 <= X_S/K_X, mu8 <= X_ND/K_X, bracket term
  // <= 1 + eta_h).
  const double hyd = p_.k_h * (1.0 + p_.eta_h) / p_.K_X;
  b.M_C = std::max({p_.b_H, p_.b_A, hyd});

  // Solubles: bound each Monod factor S/(K+S) by S/K and every biomass
  // concentration by x_hat.
  const double growth_H = p_.mu_H * (1.0 + p_.eta_g) * x_hat;
  const double m_SS = growth_H / (p_.Y_H * p_.K_S);
  const double m_SO = (1.0 - p_.Y_H) / p_.Y_H * p_.mu_H * x_hat / p_.K_OH +
                      (4.57 - p_.Y_A) / p_.Y_A * p_.mu_A * x_hat / p_.K_OA;
  const double m_SNO =
      (1.0 - p_.Y_H) / (2.86 * p_.Y_H) * p_.mu_H * p_.eta_g * x_hat / p_.K_NO;
  const double m_SNH = p_.i_XB * growth_H / p_.K_NH_gr +
                       (p_.i_XB + 1.0 / p_.Y_A) * p_.mu_A * x_hat / p_.K_NH;
  const double m_SND = p_.k_a * x_hat;
  b.M_S = std::max({m_SS, m_SO, m_SNO, m_SNH, m_SND});

  // Total solids production: growth processes plus the net particulate gain
  // of decay (fraction i_XB - f_P i_XP ends up as X_ND); hydrolysis only
  // removes solids.
  b.M_tilde = (p_.mu_H * (1.0 + p_.eta_g) + p_.mu_A +
               (p_.i_XB - p_.f_P * p_.i_XP) * (p_.b_H + p_.b_A)) *
              x_hat;
  return b;
}

}  // namespace rs
