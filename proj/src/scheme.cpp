#include "rs/scheme.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <limits>

namespace rs {

TankState TankState::zeros(int n, double zbar) {
  TankState st;
  st.n = n;
  st.zbar = zbar;
  st.C.assign(static_cast<size_t>(n + 2) * kNumSolids, 0.0);
  st.S.assign(static_cast<size_t>(n + 2) * kNumSolubles, 0.0);
  return st;
}

double TankState::X_of(int j) const { return total_solids(Crow(j)); }

void StepFlows::validate() const {
  if (!(Q_f >= 0.0) || !(Q_u >= 0.0) || !(Q_e >= 0.0)) {
    throw ConfigError("flows must be non-negative");
  }
  if (Q_f > 0.0 && Q_e > 0.0) {
    throw ConfigError("feeding and extracting at the same time is not supported");
  }
  for (double c : C_f) {
    if (!(c >= 0.0)) throw ConfigError("feed concentrations must be non-negative");
  }
  for (double s : S_f) {
    if (!(s >= 0.0)) throw ConfigError("feed concentrations must be non-negative");
  }
}

const char* to_string(SurfaceCase c) {
  switch (c) {
    case SurfaceCase::kFillStay: return "fill_stay";
    case SurfaceCase::kFillRise: return "fill_rise";
    case SurfaceCase::kFillDrop: return "fill_drop";
    case SurfaceCase::kDrawStay: return "draw_stay";
    case SurfaceCase::kDrawDrop: return "draw_drop";
  }
  return "?";
}

void MassLedger::clear() { *this = MassLedger{}; }

MassLedger& MassLedger::operator+=(const MassLedger& o) {
  auto add = [](auto& a, const auto& b) {
    for (size_t k = 0; k < a.size(); ++k) a[k] += b[k];
  };
  add(feed_C, o.feed_C);
  add(under_out_C, o.under_out_C);
  add(eff_out_C, o.eff_out_C);
  add(flush_C, o.flush_C);
  add(react_C, o.react_C);
  add(feed_S, o.feed_S);
  add(under_out_S, o.under_out_S);
  add(eff_out_S, o.eff_out_S);
  add(flush_S, o.flush_S);
  add(react_S, o.react_S);
  add(aer_S, o.aer_S);
  return *this;
}

Scheme::Scheme(const Grid& grid, const Constitutive& cons,
               const ReactionModel& react)
    : g_(grid), cons_(cons), react_(react) {
  if (g_.n() < 3) {
    throw ConfigError("scheme: need at least three cells");
  }
  const size_t faces = static_cast<size_t>(g_.n()) + 1;
  phiC_.assign(faces * kNumSolids, 0.0);
  phiS_.assign(faces * kNumSolubles, 0.0);
  xrow_.assign(static_cast<size_t>(g_.n()) + 2, 0.0);
}

void Scheme::check_finite(const TankState& st) const {
  for (double v : st.C) {
    if (!std::isfinite(v)) throw RuntimeAbort("non-finite concentration");
  }
  for (double v : st.S) {
    if (!std::isfinite(v)) throw RuntimeAbort("non-finite concentration");
  }
}

StepContext Scheme::do_step(TankState& st, const StepFlows& f, double tau,
                            bool with_reactions, MassLedger& led) const {
  assert(st.n == g_.n());
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw RuntimeAbort("step size must be positive and finite");
  }
  const int n = g_.n();
  const double h = g_.h();
  const double rho = cons_.params().rho_s;
  const bool extraction = f.extraction();
  const bool react_on = with_reactions && !react_.is_zero();

  // --- surface bookkeeping -------------------------------------------------
  const SurfacePos so = g_.locate_surface(st.zbar);
  const int jo = so.jbar;
  const double ao = so.alpha;
  if (jo > n - 1) {
    throw RuntimeAbort(
        "surface reached the bottom cell; the water column is too shallow "
        "for the chosen grid");
  }
  const double zbar_new =
      g_.advance_surface(st.zbar, (f.Q_bar() - f.Q_u) * tau);
  const SurfacePos sn = g_.locate_surface(zbar_new);
  const int dj = sn.jbar - jo;
  if (dj < -1 || dj > 1) {
    throw RuntimeAbort("surface crossed more than one cell face in one step");
  }
  if (extraction && dj < 0) {
    throw RuntimeAbort("surface rose during extraction");  // cannot happen
  }

  StepContext cx;
  cx.jbar_old = jo;
  cx.jbar_new = sn.jbar;
  cx.alpha_old = ao;
  cx.alpha_new = sn.alpha;

  const double A_jo = g_.A_cell(jo);
  const double A_jo1 = g_.A_cell(jo + 1);
  if (extraction) {
    cx.scase = (dj == 0) ? SurfaceCase::kDrawStay : SurfaceCase::kDrawDrop;
  } else {
    cx.scase = (dj == 0)   ? SurfaceCase::kFillStay
               : (dj == -1) ? SurfaceCase::kFillRise
                            : SurfaceCase::kFillDrop;
  }
  switch (cx.scase) {
    case SurfaceCase::kFillStay:
    case SurfaceCase::kDrawStay: {
      const double eta = A_jo / (cx.alpha_new * A_jo + A_jo1);
      cx.w[0] = 0.0;
      cx.w[1] = cx.alpha_new * eta;
      cx.w[2] = eta;
      break;
    }
    case SurfaceCase::kFillRise: {
      assert(jo >= 2);  // the surface can only rise out of cell jo >= 2
      const double theta =
          A_jo / (cx.alpha_new * g_.A_cell(jo - 1) + A_jo + A_jo1);
      cx.w[0] = cx.alpha_new * theta;
      cx.w[1] = theta;
      cx.w[2] = theta;
      break;
    }
    case SurfaceCase::kFillDrop:
    case SurfaceCase::kDrawDrop: {
      cx.w[0] = 0.0;
      cx.w[1] = 0.0;
      cx.w[2] = A_jo / A_jo1;
      break;
    }
  }

  // --- fluxes through the faces below the surface cell ---------------------
  // Face index jf lies at depth jf*h, between rows jf and jf+1; only faces
  // jo+1 .. n enter the update (the face inside the surface pair carries no
  // separate flux). Everything is evaluated from the pre-step state.
  for (int j = jo; j <= n + 1; ++j) {
    const double x = st.X_of(j);
    if (x >= rho) {
      throw RuntimeAbort("total solids reached the solids density");
    }
    xrow_[j] = x;
  }
  for (int jf = jo + 1; jf <= n; ++jf) {
    const double Af = g_.A_face(jf);
    const double q = f.Q_u / Af;
    const double x_up = xrow_[jf], x_dn = xrow_[jf + 1];
    double v = q;
    if (jf < n) {
      // inside the column: hindered settling of the lower cell, damped by
      // the compression gradient; at the outlet face only the bulk flow
      // remains (nothing settles out through the pipe).
      const double J = (cons_.D_comp(x_dn) - cons_.D_comp(x_up)) / h;
      v += cons_.v_hs(x_dn) - J;
    }
    const double vm = neg_part(v), vp = pos_part(v);
    const double FX = vm * x_dn + vp * x_up;
    const double G = rho * q - FX;  // liquid-phase mass flux density
    const double gm = neg_part(G) / (rho - x_dn);
    const double gp = pos_part(G) / (rho - x_up);
    const double* Cup = st.Crow(jf);
    const double* Cdn = st.Crow(jf + 1);
    const double* Sup = st.Srow(jf);
    const double* Sdn = st.Srow(jf + 1);
    double* pc = &phiC_[static_cast<size_t>(jf) * kNumSolids];
    double* ps = &phiS_[static_cast<size_t>(jf) * kNumSolubles];
    for (int k = 0; k < kNumSolids; ++k) {
      pc[k] = Af * (vm * Cdn[k] + vp * Cup[k]);
    }
    for (int k = 0; k < kNumSolubles; ++k) {
      ps[k] = Af * (gm * Sdn[k] + gp * Sup[k]);
    }
  }

  // Upward extraction flux out of the cell just below the surface. Note the
  // compression term D(X)/h here is the primitive itself over h (a one-sided
  // difference against the empty surface region), not a cell difference.
  double phiCe[kNumSolids] = {};
  double phiSe[kNumSolubles] = {};
  if (extraction) {
    const double Af = g_.A_face(jo);
    const double x1 = xrow_[jo + 1];
    const double vs = cons_.v_hs(x1) - cons_.D_comp(x1) / h;
    const double eC = neg_part(Af * vs - f.Q_e);
    const double eS = neg_part(-Af * x1 / (rho - x1) * vs - f.Q_e);
    const double* C1 = st.Crow(jo + 1);
    const double* S1 = st.Srow(jo + 1);
    for (int k = 0; k < kNumSolids; ++k) phiCe[k] = eC * C1[k];
    for (int k = 0; k < kNumSolubles; ++k) phiSe[k] = eS * S1[k];
  }

  // --- pooled mass of the surface cell and the cell below ------------------
  const double lam_jo = tau / (A_jo * h);
  const double ratio = A_jo1 / A_jo;
  const double* Cs = st.Crow(jo);
  const double* Cs1 = st.Crow(jo + 1);
  const double* Ss = st.Srow(jo);
  const double* Ss1 = st.Srow(jo + 1);
  const double* pc1 = &phiC_[static_cast<size_t>(jo + 1) * kNumSolids];
  const double* ps1 = &phiS_[static_cast<size_t>(jo + 1) * kNumSolubles];

  double upsC[kNumSolids], upsS[kNumSolubles];
  for (int k = 0; k < kNumSolids; ++k) {
    const double inflow = extraction ? phiCe[k] : f.Q_f * f.C_f[k];
    upsC[k] = Cs[k] + ratio * Cs1[k] + lam_jo * (inflow - pc1[k]);
  }
  for (int k = 0; k < kNumSolubles; ++k) {
    const double inflow = extraction ? phiSe[k] : f.Q_f * f.S_f[k];
    upsS[k] = Ss[k] + ratio * Ss1[k] + lam_jo * (inflow - ps1[k]);
  }
  if (react_on) {
    // Sources of the surface pair: the wetted part of the surface cell at its
    // below-surface concentration plus the full cell underneath.
    double RCb[kNumSolids], RSb[kNumSolubles];
    double RC1[kNumSolids], RS1[kNumSolubles];
    double Cb[kNumSolids], Sb[kNumSolubles];
    for (int k = 0; k < kNumSolids; ++k) Cb[k] = Cs[k] / ao;
    for (int k = 0; k < kNumSolubles; ++k) Sb[k] = Ss[k] / ao;
    react_.rates(Cb, Sb, RCb, RSb);
    react_.rates(Cs1, Ss1, RC1, RS1);
    for (int k = 0; k < kNumSolids; ++k) {
      const double src = ao * RCb[k] + ratio * RC1[k];
      upsC[k] += tau * src;
      led.react_C[k] += tau * A_jo * h * src;
    }
    for (int k = 0; k < kNumSolubles; ++k) {
      const double src = ao * RSb[k] + ratio * RS1[k];
      upsS[k] += tau * src;
      led.react_S[k] += tau * A_jo * h * src;
    }
  }
  if (!extraction) {
    for (int k = 0; k < kNumSolids; ++k) led.feed_C[k] += tau * f.Q_f * f.C_f[k];
    for (int k = 0; k < kNumSolubles; ++k) led.feed_S[k] += tau * f.Q_f * f.S_f[k];
  }

  // --- cells strictly below the surface pair, in place ---------------------
  for (int j = jo + 2; j <= n; ++j) {
    const double lam = tau / (g_.A_cell(j) * h);
    double* Cj = st.Crow(j);
    double* Sj = st.Srow(j);
    const double* pcl = &phiC_[static_cast<size_t>(j - 1) * kNumSolids];
    const double* pch = &phiC_[static_cast<size_t>(j) * kNumSolids];
    const double* psl = &phiS_[static_cast<size_t>(j - 1) * kNumSolubles];
    const double* psh = &phiS_[static_cast<size_t>(j) * kNumSolubles];
    if (react_on) {
      double RC[kNumSolids], RS[kNumSolubles];
      react_.rates(Cj, Sj, RC, RS);
      const double vol = g_.A_cell(j) * h;
      for (int k = 0; k < kNumSolids; ++k) {
        Cj[k] += -lam * (pch[k] - pcl[k]) + tau * RC[k];
        led.react_C[k] += tau * vol * RC[k];
      }
      for (int k = 0; k < kNumSolubles; ++k) {
        Sj[k] += -lam * (psh[k] - psl[k]) + tau * RS[k];
        led.react_S[k] += tau * vol * RS[k];
      }
    } else {
      for (int k = 0; k < kNumSolids; ++k) Cj[k] -= lam * (pch[k] - pcl[k]);
      for (int k = 0; k < kNumSolubles; ++k) Sj[k] -= lam * (psh[k] - psl[k]);
    }
  }

  // --- underflow pipe cell (no sources) ------------------------------------
  {
    const double lam_u = tau / (g_.A_cell(n + 1) * h);
    double* Cu = st.Crow(n + 1);
    double* Su = st.Srow(n + 1);
    const double* pcn = &phiC_[static_cast<size_t>(n) * kNumSolids];
    const double* psn = &phiS_[static_cast<size_t>(n) * kNumSolubles];
    for (int k = 0; k < kNumSolids; ++k) {
      const double old = Cu[k];
      led.under_out_C[k] += tau * f.Q_u * old;
      Cu[k] = old + lam_u * (pcn[k] - f.Q_u * old);
    }
    for (int k = 0; k < kNumSolubles; ++k) {
      const double old = Su[k];
      led.under_out_S[k] += tau * f.Q_u * old;
      Su[k] = old + lam_u * (psn[k] - f.Q_u * old);
    }
  }

  // --- effluent pipe cell ---------------------------------------------------
  {
    double* Ce = st.Crow(0);
    double* Se = st.Srow(0);
    if (extraction) {
      const double lam_e = tau / (g_.A_cell(1) * h);  // pipe volume := A_1 h
      for (int k = 0; k < kNumSolids; ++k) {
        const double old = Ce[k];
        led.eff_out_C[k] += tau * f.Q_e * old;
        Ce[k] = old - lam_e * (f.Q_e * old + phiCe[k]);
      }
      for (int k = 0; k < kNumSolubles; ++k) {
        const double old = Se[k];
        led.eff_out_S[k] += tau * f.Q_e * old;
        Se[k] = old - lam_e * (f.Q_e * old + phiSe[k]);
      }
    } else {
      // While not extracting, whatever still sits in the effluent pipe is
      // flushed out of the model; account for it so mass stays balanced.
      const double vol_e = g_.A_cell(1) * h;
      for (int k = 0; k < kNumSolids; ++k) {
        led.flush_C[k] += vol_e * Ce[k];
        Ce[k] = 0.0;
      }
      for (int k = 0; k < kNumSolubles; ++k) {
        led.flush_S[k] += vol_e * Se[k];
        Se[k] = 0.0;
      }
    }
  }

  // --- write the surface pair, then blank everything above the new surface -
  for (int i = 0; i < 3; ++i) {
    const int j = jo - 1 + i;
    if (j < 1) continue;
    double* Cj = st.Crow(j);
    double* Sj = st.Srow(j);
    const double w = cx.w[i];
    for (int k = 0; k < kNumSolids; ++k) Cj[k] = w * upsC[k];
    for (int k = 0; k < kNumSolubles; ++k) Sj[k] = w * upsS[k];
  }
  for (int j = 1; j < cx.jbar_new; ++j) {
    std::memset(st.Crow(j), 0, sizeof(double) * kNumSolids);
    std::memset(st.Srow(j), 0, sizeof(double) * kNumSolubles);
  }

  st.zbar = zbar_new;
  return cx;
}

StepContext Scheme::transport_step(TankState& st, const StepFlows& f,
                                   double tau, MassLedger& led) const {
  StepContext cx = do_step(st, f, tau, /*with_reactions=*/false, led);
  check_finite(st);
  return cx;
}

void Scheme::reaction_step(TankState& st, const StepContext& cx, double tau,
                           MassLedger& led) const {
  if (react_.is_zero()) return;  // keep the zero-source path bit-identical
  const int n = g_.n();
  const double h = g_.h();
  const int jo = cx.jbar_old;
  const double ao = cx.alpha_old;
  const double A_jo = g_.A_cell(jo);
  const double ratio = g_.A_cell(jo + 1) / A_jo;

  // Shared source of the surface pair, evaluated on the transported state.
  double RCb[kNumSolids], RSb[kNumSolubles];
  double RC1[kNumSolids], RS1[kNumSolubles];
  {
    double Cb[kNumSolids], Sb[kNumSolubles];
    const double* Cs = st.Crow(jo);
    const double* Ss = st.Srow(jo);
    for (int k = 0; k < kNumSolids; ++k) Cb[k] = Cs[k] / ao;
    for (int k = 0; k < kNumSolubles; ++k) Sb[k] = Ss[k] / ao;
    react_.rates(Cb, Sb, RCb, RSb);
    react_.rates(st.Crow(jo + 1), st.Srow(jo + 1), RC1, RS1);
  }
  double srcC[kNumSolids], srcS[kNumSolubles];
  for (int k = 0; k < kNumSolids; ++k) {
    srcC[k] = ao * RCb[k] + ratio * RC1[k];
    led.react_C[k] += tau * A_jo * h * srcC[k];
  }
  for (int k = 0; k < kNumSolubles; ++k) {
    srcS[k] = ao * RSb[k] + ratio * RS1[k];
    led.react_S[k] += tau * A_jo * h * srcS[k];
  }
  for (int i = 0; i < 3; ++i) {
    const int j = jo - 1 + i;
    if (j < 1 || cx.w[i] == 0.0) continue;
    double* Cj = st.Crow(j);
    double* Sj = st.Srow(j);
    for (int k = 0; k < kNumSolids; ++k) Cj[k] += cx.w[i] * tau * srcC[k];
    for (int k = 0; k < kNumSolubles; ++k) Sj[k] += cx.w[i] * tau * srcS[k];
  }

  for (int j = jo + 2; j <= n; ++j) {
    double* Cj = st.Crow(j);
    double* Sj = st.Srow(j);
    double RC[kNumSolids], RS[kNumSolubles];
    react_.rates(Cj, Sj, RC, RS);
    const double vol = g_.A_cell(j) * h;
    for (int k = 0; k < kNumSolids; ++k) {
      Cj[k] += tau * RC[k];
      led.react_C[k] += tau * vol * RC[k];
    }
    for (int k = 0; k < kNumSolubles; ++k) {
      Sj[k] += tau * RS[k];
      led.react_S[k] += tau * vol * RS[k];
    }
  }
  check_finite(st);
}

StepContext Scheme::step_split(TankState& st, const StepFlows& f, double tau,
                               MassLedger& led) const {
  StepContext cx = do_step(st, f, tau, /*with_reactions=*/false, led);
  reaction_step(st, cx, tau, led);
  check_finite(st);
  return cx;
}

StepContext Scheme::step_unsplit(TankState& st, const StepFlows& f, double tau,
                                 MassLedger& led) const {
  StepContext cx = do_step(st, f, tau, /*with_reactions=*/true, led);
  check_finite(st);
  return cx;
}

CflReport Scheme::cfl_max_dt(double norm_Q) const {
  if (!(norm_Q >= 0.0)) throw ConfigError("flow magnitude must be non-negative");
  const SettlingParams& p = cons_.params();
  const double h = g_.h();
  const double A_min = std::min(g_.A_min_cell(), g_.A_cell(g_.n() + 1));
  const double M1 = g_.M1(), M2 = g_.M2(), M3 = g_.M3();
  const double xh = p.x_hat;

  CflReport r;
  r.transport_solids =
      norm_Q / (A_min * h) +
      M1 / h * (cons_.max_abs_dv_hs() * xh + cons_.v_hs(0.0)) +
      2.0 * M2 / (h * h) * (cons_.max_d_comp() * xh + cons_.D_at_x_hat());
  r.transport_solubles =
      std::max(M1, 1.0) * (p.rho_s + xh) / (p.rho_s - xh) * norm_Q /
          (A_min * h) +
      xh * M1 / (p.rho_s - xh) * 2.0 * cons_.v_hs(0.0) / h +
      xh * M2 / (p.rho_s - xh) * cons_.D_at_x_hat() / (h * h);

  const ReactionBounds b = react_.bounds(xh);
  r.reaction_solids = b.M_C * (1.0 + M3);
  r.reaction_solubles = b.M_S;
  r.solids_headroom = b.M_tilde / p.eps_r;

  struct Term {
    const char* name;
    double rate;
  } terms[] = {
      {"transport_solids", r.transport_solids},
      {"transport_solubles", r.transport_solubles},
      {"reaction_solids", r.reaction_solids},
      {"reaction_solubles", r.reaction_solubles},
      {"solids_headroom", r.solids_headroom},
  };
  const Term* worst = &terms[0];
  for (const Term& t : terms) {
    if (t.rate > worst->rate) worst = &t;
  }

  r.surface_tau = norm_Q > 0.0
                      ? h * g_.A_min_profile() / norm_Q
                      : std::numeric_limits<double>::infinity();
  const double tau_terms = worst->rate > 0.0
                               ? 1.0 / worst->rate
                               : std::numeric_limits<double>::infinity();
  if (r.surface_tau < tau_terms) {
    r.tau_max = r.surface_tau;
    r.dominant = "surface_motion";
  } else {
    r.tau_max = tau_terms;
    r.dominant = worst->name;
  }
  if (!std::isfinite(r.tau_max)) {
    // nothing moves at all: pick an arbitrary large step
    r.tau_max = 3600.0;
    r.dominant = "idle";
  }
  return r;
}

}  // namespace rs
