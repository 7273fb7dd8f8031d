#include "rs/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace rs {

namespace {

constexpr double kTimeEps = 1e-9;  // slack for stage/snapshot time matching

std::string stage_label(size_t idx, const Stage& s) {
  std::ostringstream os;
  os << "stage " << idx + 1 << " (" << to_string(s.kind) << ", "
     << s.t0 / 3600.0 << " h .. " << s.t1 / 3600.0 << " h)";
  return os.str();
}

// Number of equal steps covering `dur` without exceeding `tau_bound`. The
// small slack keeps an exact multiple from picking up a spurious extra step.
long steps_for(double dur, double tau_bound) {
  long k = static_cast<long>(std::ceil(dur / tau_bound - 1e-12));
  if (k < 1) k = 1;
  if (dur / static_cast<double>(k) > tau_bound) ++k;
  return k;
}

// Spread the piecewise-constant initial profiles onto the cells. Only the
// part of a cell below the surface and inside a segment contributes, so the
// surface cell automatically receives its wetted-fraction-scaled value.
void project_initial(const Scenario& sc, const Grid& g, TankState& st) {
  const double h = g.h();
  for (int j = 1; j <= g.n(); ++j) {
    const double z0 = (j - 1) * h, z1 = j * h;
    const double lo = std::max(z0, sc.init_zbar);
    if (lo >= z1) continue;  // cell entirely above the surface
    double* Cj = st.Crow(j);
    double* Sj = st.Srow(j);
    for (const InitSegment& seg : sc.init) {
      const double a = std::max(lo, seg.z0);
      const double b = std::min(z1, seg.z1);
      if (b <= a) continue;
      const double w = (b - a) / h;
      for (int k = 0; k < kNumSolids; ++k) Cj[k] += w * seg.C[k];
      for (int k = 0; k < kNumSolubles; ++k) Sj[k] += w * seg.S[k];
    }
  }
}

struct BalanceTerms {
  double feed = 0.0, under_out = 0.0, eff_out = 0.0, flush = 0.0;
  double react = 0.0, aeration = 0.0;
};

BalanceTerms ledger_component(const MassLedger& led, int k) {
  BalanceTerms t;
  if (k < kNumSolids) {
    t.feed = led.feed_C[k];
    t.under_out = led.under_out_C[k];
    t.eff_out = led.eff_out_C[k];
    t.flush = led.flush_C[k];
    t.react = led.react_C[k];
  } else {
    const int i = k - kNumSolids;
    t.feed = led.feed_S[i];
    t.under_out = led.under_out_S[i];
    t.eff_out = led.eff_out_S[i];
    t.flush = led.flush_S[i];
    t.react = led.react_S[i];
    t.aeration = led.aer_S[i];
  }
  return t;
}

double closure_rel(double start, double end, const BalanceTerms& t) {
  const double expect =
      t.feed - t.under_out - t.eff_out - t.flush + t.react + t.aeration;
  const double resid = (end - start) - expect;
  double den = std::max({std::abs(start), std::abs(end), std::abs(t.feed),
                         std::abs(t.under_out), std::abs(t.eff_out),
                         std::abs(t.flush), std::abs(t.react),
                         std::abs(t.aeration)});
  if (den <= 0.0) den = 1e-300;
  return std::abs(resid) / den;
}

double stage_closure(const StageReport& rep) {
  double worst = 0.0;
  for (int k = 0; k < kNumComponents; ++k) {
    worst = std::max(worst,
                     closure_rel(rep.mass_start[k], rep.mass_end[k],
                                 ledger_component(rep.ledger, k)));
  }
  return worst;
}

}  // namespace

const char* to_string(StageKind k) {
  switch (k) {
    case StageKind::kFill: return "fill";
    case StageKind::kReact: return "react";
    case StageKind::kSettle: return "settle";
    case StageKind::kDraw: return "draw";
    case StageKind::kIdle: return "idle";
  }
  return "?";
}

const char* to_string(Variant v) {
  return v == Variant::kSplit ? "split" : "unsplit";
}

void Scenario::validate() const {
  if (!(depth > 0.0)) throw ConfigError("geometry: depth must be positive");
  if (cells < 3) throw ConfigError("geometry: need at least 3 cells");
  settling.validate();
  if (!zero_reactions) asm1.validate();
  if (!(oxygen_setpoint >= 0.0)) {
    throw ConfigError("reactions: oxygen setpoint must be non-negative");
  }
  if (!(snapshot_every >= 0.0)) {
    throw ConfigError("output: snapshot cadence must be non-negative");
  }

  if (stages.empty()) throw ConfigError("stages: at least one stage required");
  if (std::abs(stages.front().t0) > kTimeEps) {
    throw ConfigError("stages: the first stage must start at t = 0");
  }
  for (size_t i = 0; i < stages.size(); ++i) {
    const Stage& s = stages[i];
    const std::string who = stage_label(i, s);
    if (!(s.t1 > s.t0)) {
      throw ConfigError(who + ": end time must exceed start time");
    }
    if (i + 1 < stages.size() &&
        std::abs(stages[i + 1].t0 - s.t1) > kTimeEps) {
      throw ConfigError(who + " and " + stage_label(i + 1, stages[i + 1]) +
                        ": stages must be contiguous");
    }
    if (s.Q_f < 0.0 || s.Q_u < 0.0 || s.Q_e < 0.0) {
      throw ConfigError(who + ": flows must be non-negative");
    }
    if (s.Q_f > 0.0 && s.Q_e > 0.0) {
      throw ConfigError(who + ": cannot fill and extract at the same time");
    }
    switch (s.kind) {
      case StageKind::kFill:
        if (!(s.Q_f > 0.0)) throw ConfigError(who + ": fill requires Q_f > 0");
        break;
      case StageKind::kReact:
        if (s.Q_e > 0.0) {
          throw ConfigError(who + ": surface extraction is not available "
                                  "while the tank is mixed");
        }
        break;
      case StageKind::kSettle:
      case StageKind::kIdle:
        if (s.Q_f > 0.0 || s.Q_e > 0.0) {
          throw ConfigError(who + ": only bottom withdrawal is allowed here");
        }
        break;
      case StageKind::kDraw:
        if (!(s.Q_e > 0.0)) throw ConfigError(who + ": draw requires Q_e > 0");
        if (s.Q_f > 0.0) throw ConfigError(who + ": draw cannot feed");
        break;
    }
    if (s.aerated && s.kind != StageKind::kReact) {
      throw ConfigError(who + ": aeration is only modelled while mixed");
    }
    if (s.X_f < 0.0) {
      throw ConfigError(who + ": feed solids must be non-negative");
    }
    if (s.X_f > settling.x_hat) {
      throw ConfigError(who + ": feed solids exceed the packing limit");
    }
    if (s.kind == StageKind::kFill && s.X_f > 0.0) {
      double sum = 0.0;
      for (double v : feed_shape) {
        if (v < 0.0) {
          throw ConfigError(
              "feed: composition fractions must be non-negative");
        }
        sum += v;
      }
      // quoted composition tables are often rounded; allow 0.5% slack
      if (std::abs(sum - 1.0) > 5e-3) {
        throw ConfigError("feed: composition fractions must sum to 1");
      }
      if (s.X_f * sum > settling.x_hat) {
        throw ConfigError(who + ": feed solids exceed the packing limit");
      }
    }
  }
  for (double v : feed_S) {
    if (v < 0.0) {
      throw ConfigError("feed: soluble concentrations must be non-negative");
    }
  }

  if (!(init_zbar >= 0.0 && init_zbar <= depth)) {
    throw ConfigError("initial: surface depth outside the tank");
  }
  std::vector<const InitSegment*> segs;
  segs.reserve(init.size());
  for (const InitSegment& s : init) segs.push_back(&s);
  std::sort(segs.begin(), segs.end(),
            [](const InitSegment* a, const InitSegment* b) {
              return a->z0 < b->z0;
            });
  double prev_end = -std::numeric_limits<double>::infinity();
  for (const InitSegment* seg : segs) {
    if (!(seg->z1 > seg->z0)) {
      throw ConfigError("initial: segment must have positive height");
    }
    if (seg->z0 < -kTimeEps || seg->z1 > depth + kTimeEps) {
      throw ConfigError("initial: segment outside the tank");
    }
    if (seg->z0 < prev_end - kTimeEps) {
      throw ConfigError("initial: segments overlap");
    }
    prev_end = seg->z1;
    double x = 0.0;
    for (double v : seg->C) {
      if (v < 0.0) throw ConfigError("initial: solids must be non-negative");
      x += v;
    }
    if (x > settling.x_hat + 1e-12) {
      throw ConfigError("initial: solids exceed the packing limit");
    }
    for (double v : seg->S) {
      if (v < 0.0) {
        throw ConfigError("initial: solubles must be non-negative");
      }
    }
  }
}

double Scenario::norm_Q() const {
  double q = 0.0;
  for (const Stage& s : stages) {
    q = std::max({q, std::abs(s.Q_u - s.Q_f), s.Q_u + s.Q_e});
  }
  return q;
}

StepFlows Scenario::flows_for(const Stage& s) const {
  StepFlows f;
  f.Q_f = s.Q_f;
  f.Q_u = s.Q_u;
  f.Q_e = s.Q_e;
  for (int k = 0; k < kNumSolids; ++k) f.C_f[k] = s.X_f * feed_shape[k];
  f.S_f = feed_S;
  return f;
}

std::array<double, kNumComponents> total_mass(const Grid& g,
                                              const TankState& st) {
  std::array<double, kNumComponents> m{};
  const double h = g.h();
  auto add = [&](int row, double volume) {
    const double* C = st.Crow(row);
    const double* S = st.Srow(row);
    for (int k = 0; k < kNumSolids; ++k) m[k] += volume * C[k];
    for (int k = 0; k < kNumSolubles; ++k) m[kNumSolids + k] += volume * S[k];
  };
  add(0, g.A_cell(1) * h);  // effluent pipe accumulator
  for (int j = 1; j <= g.n(); ++j) add(j, g.A_cell(j) * h);
  add(g.n() + 1, g.A_cell(g.n() + 1) * h);
  return m;
}

RunRecord run_scenario(const Scenario& sc, const RunOptions& opt) {
  const auto wall0 = std::chrono::steady_clock::now();
  sc.validate();

  const int n = opt.cells_override > 0 ? opt.cells_override : sc.cells;
  if (n < 3) throw ConfigError("run: need at least 3 cells");
  const Grid g(sc.area, sc.depth, n);
  const Constitutive cons(sc.settling);
  std::unique_ptr<ReactionModel> model;
  if (sc.zero_reactions) {
    model = std::make_unique<ZeroReactions>();
  } else {
    model = std::make_unique<Asm1>(sc.asm1.to_si(), sc.settling.x_hat,
                                   sc.settling.eps_r);
  }
  Scheme scheme(g, cons, *model);

  RunRecord rec;
  rec.scenario = sc.name;
  rec.cells = n;
  rec.h = g.h();
  rec.variant = opt.variant;
  rec.cfl = scheme.cfl_max_dt(sc.norm_Q());
  const double tau0 = opt.tau_override > 0.0 ? opt.tau_override
                                             : rec.cfl.tau_max;
  if (!(tau0 > 0.0) || !std::isfinite(tau0)) {
    throw ConfigError("run: base step size must be positive and finite");
  }
  rec.tau_used = tau0;

  const double snap_every =
      opt.snapshot_override >= 0.0 ? opt.snapshot_override : sc.snapshot_every;

  TankState st = TankState::zeros(n, sc.init_zbar);
  project_initial(sc, g, st);

  std::vector<double> extras = opt.extra_snapshot_times;
  std::sort(extras.begin(), extras.end());
  size_t extra_idx = 0;
  double next_cad = snap_every > 0.0 ? snap_every
                                     : std::numeric_limits<double>::infinity();
  {
    size_t guess = sc.stages.size() + extras.size() + 2;
    if (snap_every > 0.0) {
      guess += static_cast<size_t>(sc.total_time() / snap_every) + 1;
    }
    rec.snapshots.reserve(guess);
  }
  double last_snap_t = -std::numeric_limits<double>::infinity();
  auto record = [&](double t, const TankState& view) {
    if (t <= last_snap_t + kTimeEps) return;  // already captured this instant
    Snapshot sn;
    sn.t = t;
    sn.zbar = view.zbar;
    sn.C = view.C;
    sn.S = view.S;
    rec.snapshots.push_back(std::move(sn));
    last_snap_t = t;
  };
  // A step-end time t_now is "due" when it passes the next cadence mark or a
  // requested extra time; snapshots land on step ends, never interpolated.
  auto due = [&](double t_now) {
    bool d = false;
    if (snap_every > 0.0 && t_now >= next_cad - kTimeEps) {
      d = true;
      next_cad =
          snap_every * (std::floor(t_now / snap_every + kTimeEps) + 1.0);
    }
    while (extra_idx < extras.size() && extras[extra_idx] <= t_now + kTimeEps) {
      d = true;
      ++extra_idx;
    }
    return d;
  };
  record(0.0, st);

  const std::array<double, kNumComponents> mass_initial = total_mass(g, st);
  rec.stages.reserve(sc.stages.size());
  TankState scratch = st;  // reused for snapshots of mixed stages

  for (size_t si = 0; si < sc.stages.size(); ++si) {
    const Stage& s = sc.stages[si];
    StageReport rep;
    rep.kind = s.kind;
    rep.t0 = s.t0;
    rep.t1 = s.t1;
    rep.mass_start = total_mass(g, st);
    rep.ledger.clear();
    const double dur = s.duration();
    StepFlows f = sc.flows_for(s);
    f.validate();

    long i = 0;  // visible to the abort handler for time context
    try {
      if (!s.ode()) {
        const long nsteps = steps_for(dur, tau0);
        rep.tau = dur / static_cast<double>(nsteps);
        rep.steps = nsteps;
        for (i = 0; i < nsteps; ++i) {
          const StepContext cx =
              opt.variant == Variant::kSplit
                  ? scheme.step_split(st, f, rep.tau, rep.ledger)
                  : scheme.step_unsplit(st, f, rep.tau, rep.ledger);
          ++rec.case_counts[to_string(cx.scase)];
          const double t_now =
              (i + 1 == nsteps) ? s.t1 : s.t0 + (i + 1) * rep.tau;
          if (due(t_now) || i + 1 == nsteps) record(t_now, st);
        }
      } else {
        MixedState m = average_below_surface(g, st);
        if (s.aerated) pin_oxygen(m, sc.oxygen_setpoint, rep.ledger);
        const double vol_end = m.vol + (f.Q_bar() - f.Q_u) * dur;
        const double vol_min = std::min(m.vol, vol_end);
        const double bound =
            mixed_max_dt(*model, sc.settling, f, vol_min, g.M3());
        const long nsteps = steps_for(dur, std::min(bound, dur));
        rep.tau = dur / static_cast<double>(nsteps);
        rep.steps = nsteps;
        const double pipe_vol = g.A_cell(n + 1) * g.h();
        for (i = 0; i < nsteps; ++i) {
          if (f.Q_u > 0.0) {
            // the bottom pipe keeps accumulating while the tank is mixed
            double* Cu = st.Crow(n + 1);
            double* Su = st.Srow(n + 1);
            const double lam = rep.tau / pipe_vol;
            for (int k = 0; k < kNumSolids; ++k) {
              rep.ledger.under_out_C[k] += rep.tau * f.Q_u * Cu[k];
              Cu[k] += lam * f.Q_u * (m.C[k] - Cu[k]);
            }
            for (int k = 0; k < kNumSolubles; ++k) {
              rep.ledger.under_out_S[k] += rep.tau * f.Q_u * Su[k];
              Su[k] += lam * f.Q_u * (m.S[k] - Su[k]);
            }
          }
          mixed_euler_substep(m, f, *model, g, rep.tau, rep.ledger);
          if (s.aerated) pin_oxygen(m, sc.oxygen_setpoint, rep.ledger);
          const double t_now =
              (i + 1 == nsteps) ? s.t1 : s.t0 + (i + 1) * rep.tau;
          if (due(t_now) || i + 1 == nsteps) {
            scratch = st;
            redistribute(g, m, scratch);
            record(t_now, scratch);
          }
        }
        redistribute(g, m, st);
      }
    } catch (const RuntimeAbort& e) {
      std::ostringstream os;
      os << stage_label(si, s) << ", t = "
         << s.t0 + static_cast<double>(i) * rep.tau << " s: " << e.what();
      throw RuntimeAbort(os.str());
    }

    rep.zbar_end = st.zbar;
    rep.mass_end = total_mass(g, st);
    rep.closure_rel = stage_closure(rep);
    rec.stages.push_back(rep);
  }

  for (int k = 0; k < kNumComponents; ++k) {
    MassAuditRow& row = rec.audit.rows[k];
    row.initial = mass_initial[k];
    row.final_mass =
        rec.stages.empty() ? mass_initial[k] : rec.stages.back().mass_end[k];
    BalanceTerms sum;
    for (const StageReport& rep : rec.stages) {
      const BalanceTerms t = ledger_component(rep.ledger, k);
      sum.feed += t.feed;
      sum.under_out += t.under_out;
      sum.eff_out += t.eff_out;
      sum.flush += t.flush;
      sum.react += t.react;
      sum.aeration += t.aeration;
    }
    row.feed = sum.feed;
    row.under_out = sum.under_out;
    row.eff_out = sum.eff_out;
    row.flush = sum.flush;
    row.react = sum.react;
    row.aeration = sum.aeration;
    row.closure_rel = closure_rel(row.initial, row.final_mass, sum);
    rec.audit.worst_closure =
        std::max(rec.audit.worst_closure, row.closure_rel);
  }

  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0)
          .count();
  return rec;
}

double l1_relative_difference(const Snapshot& a, const Snapshot& b, int n,
                              std::vector<std::string>* warnings) {
  double total = 0.0;
  for (int k = 0; k < kNumComponents; ++k) {
    const bool solid = k < kNumSolids;
    const int ik = solid ? k : k - kNumSolids;
    const std::vector<double>& va = solid ? a.C : a.S;
    const std::vector<double>& vb = solid ? b.C : b.S;
    const int stride = solid ? kNumSolids : kNumSolubles;
    double num = 0.0, den = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double x = va[static_cast<size_t>(j) * stride + ik];
      const double y = vb[static_cast<size_t>(j) * stride + ik];
      num += std::abs(x - y);
      den += std::abs(y);
    }
    // the cell height cancels in the ratio of the two L1 norms
    if (den <= 0.0) {
      if (warnings != nullptr) {
        const char* name = solid ? kSolidNames[ik] : kSolubleNames[ik];
        warnings->push_back(std::string("component ") + name +
                            " skipped: reference norm is zero");
      }
      continue;
    }
    total += num / den;
  }
  return total;
}

double relative_difference(const RunRecord& a, const RunRecord& b, double t,
                           std::vector<std::string>* warnings,
                           double time_tol) {
  if (a.cells != b.cells) {
    throw ConfigError("relative difference: runs use different grids");
  }
  auto find = [&](const RunRecord& r) -> const Snapshot& {
    const Snapshot* best = nullptr;
    double best_dt = std::numeric_limits<double>::infinity();
    for (const Snapshot& sn : r.snapshots) {
      const double dt = std::abs(sn.t - t);
      if (dt < best_dt) {
        best_dt = dt;
        best = &sn;
      }
    }
    if (best == nullptr || best_dt > time_tol) {
      std::ostringstream os;
      os << "relative difference: no snapshot within " << time_tol
         << " s of t = " << t << " s";
      throw ConfigError(os.str());
    }
    return *best;
  };
  return l1_relative_difference(find(a), find(b), a.cells, warnings);
}

}  // namespace rs
