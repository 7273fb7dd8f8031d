#include "rs/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

namespace rs {

double discrete_volume(const Grid& g, double zbar) {
  const SurfacePos sp = g.locate_surface(zbar);
  double acc = sp.alpha * g.A_cell(sp.jbar);
  for (int j = sp.jbar + 1; j <= g.n(); ++j) acc += g.A_cell(j);
  return acc * g.h();
}

MixedState average_below_surface(const Grid& g, const TankState& st) {
  MixedState m;
  m.zbar = st.zbar;
  m.vol = discrete_volume(g, st.zbar);
  const double scale = g.h() / m.vol;
  for (int j = 1; j <= g.n(); ++j) {
    const double w = scale * g.A_cell(j);
    const double* Cj = st.Crow(j);
    const double* Sj = st.Srow(j);
    for (int k = 0; k < kNumSolids; ++k) m.C[k] += w * Cj[k];
    for (int k = 0; k < kNumSolubles; ++k) m.S[k] += w * Sj[k];
  }
  return m;
}

void redistribute(const Grid& g, const MixedState& m, TankState& st) {
  const SurfacePos sp = g.locate_surface(m.zbar);
  st.zbar = m.zbar;
  for (int j = 1; j < sp.jbar; ++j) {
    std::memset(st.Crow(j), 0, sizeof(double) * kNumSolids);
    std::memset(st.Srow(j), 0, sizeof(double) * kNumSolubles);
  }
  for (int j = sp.jbar; j <= g.n(); ++j) {
    const double w = (j == sp.jbar) ? sp.alpha : 1.0;
    double* Cj = st.Crow(j);
    double* Sj = st.Srow(j);
    for (int k = 0; k < kNumSolids; ++k) Cj[k] = w * m.C[k];
    for (int k = 0; k < kNumSolubles; ++k) Sj[k] = w * m.S[k];
  }
}

double mixed_max_dt(const ReactionModel& r, const SettlingParams& p,
                    const StepFlows& f, double vol_min, double m3) {
  if (!(vol_min > 0.0)) {
    throw RuntimeAbort("mixed stage: submerged volume is not positive");
  }
  const ReactionBounds b = r.bounds(p.x_hat);
  const double flow_rate = (std::abs(f.Q_u - f.Q_bar()) + f.Q_f) / vol_min;
  const double rate =
      std::max({b.M_C * (1.0 + m3), b.M_S, b.M_tilde / p.eps_r, flow_rate});
  return rate > 0.0 ? 0.5 / rate : std::numeric_limits<double>::infinity();
}

void mixed_euler_substep(MixedState& m, const StepFlows& f,
                         const ReactionModel& r, const Grid& g, double tau,
                         MassLedger& led) {
  const double Qbar = f.Q_bar();
  const double coef = (f.Q_u - Qbar) / m.vol;

  double dC[kNumSolids] = {};
  double dS[kNumSolubles] = {};
  if (!r.is_zero()) {
    double RC[kNumSolids], RS[kNumSolubles];
    r.rates(m.C.data(), m.S.data(), RC, RS);
    for (int k = 0; k < kNumSolids; ++k) {
      dC[k] += tau * RC[k];
      led.react_C[k] += tau * m.vol * RC[k];
    }
    for (int k = 0; k < kNumSolubles; ++k) {
      dS[k] += tau * RS[k];
      led.react_S[k] += tau * m.vol * RS[k];
    }
  }
  if (f.Q_f > 0.0 || f.Q_u > 0.0 || f.Q_e > 0.0) {
    for (int k = 0; k < kNumSolids; ++k) {
      dC[k] += tau * (coef * m.C[k] + f.Q_f * f.C_f[k] / m.vol);
      led.feed_C[k] += tau * f.Q_f * f.C_f[k];
    }
    for (int k = 0; k < kNumSolubles; ++k) {
      dS[k] += tau * (coef * m.S[k] + f.Q_f * f.S_f[k] / m.vol);
      led.feed_S[k] += tau * f.Q_f * f.S_f[k];
    }
  }
  for (int k = 0; k < kNumSolids; ++k) m.C[k] += dC[k];
  for (int k = 0; k < kNumSolubles; ++k) m.S[k] += dS[k];

  const double dvol = (Qbar - f.Q_u) * tau;
  if (dvol != 0.0) {
    m.zbar = g.advance_surface(m.zbar, dvol);
    m.vol = discrete_volume(g, m.zbar);
  }
  for (double v : m.C) {
    if (!std::isfinite(v)) throw RuntimeAbort("non-finite mixed concentration");
  }
  for (double v : m.S) {
    if (!std::isfinite(v)) throw RuntimeAbort("non-finite mixed concentration");
  }
}

void pin_oxygen(MixedState& m, double setpoint, MassLedger& led) {
  constexpr int kOxygen = 2;  // S_O slot
  led.aer_S[kOxygen] += m.vol * (setpoint - m.S[kOxygen]);
  m.S[kOxygen] = setpoint;
}

}  // namespace rs
