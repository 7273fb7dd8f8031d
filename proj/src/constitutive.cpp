#include "rs/constitutive.hpp"

#include <cmath>

namespace rs {

namespace {
constexpr int kTableN = 4096;  // intervals of the D table over [x_c, x_hat]

// Simpson on [a, b] for a callable f.
template <typename F>
double simpson(F&& f, double a, double b) {
  return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

// Adaptive Simpson with absolute tolerance, used only at construction time.
template <typename F>
double adaptive(F&& f, double a, double b, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double left = simpson(f, a, m);
  const double right = simpson(f, m, b);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive(f, a, m, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, b, right, 0.5 * tol, depth - 1);
}
}  // namespace

void SettlingParams::validate() const {
  auto req = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(std::string("settling parameters: ") + msg);
  };
  req(v0 > 0.0, "v0 must be positive");
  req(x_breve > 0.0, "x_breve must be positive");
  req(eta_exp > 0.0, "eta must be positive");
  req(x_c > 0.0, "x_c must be positive");
  req(alpha_comp >= 0.0, "alpha_comp must be non-negative");
  req(rho_s > rho_f && rho_f > 0.0, "need rho_s > rho_f > 0");
  req(g > 0.0, "g must be positive");
  req(x_hat > x_c, "x_hat must exceed x_c");
  req(x_hat < rho_s, "x_hat must stay below the solids density");
  req(eps_r > 0.0 && eps_r < x_hat, "eps_r must lie in (0, x_hat)");
}

Constitutive::Constitutive(const SettlingParams& p) : p_(p) {
  p_.validate();

  // Tabulate D by accumulating adaptive-Simpson integrals per table cell; the
  // integrand is smooth inside (x_c, x_hat), the only kink (at x_c) is a node.
  auto d_branch = [this](double x) {
    return v_hs(x) * p_.rho_s * p_.alpha_comp /
           (p_.g * x * (p_.rho_s - p_.rho_f));
  };
  nodes_.resize(kTableN + 1);
  dx_ = (p_.x_hat - p_.x_c) / kTableN;
  nodes_[0] = 0.0;
  for (int i = 0; i < kTableN; ++i) {
    const double a = p_.x_c + i * dx_;
    const double b = a + dx_;
    const double coarse = simpson(d_branch, a, b);
    nodes_[i + 1] = nodes_[i] + adaptive(d_branch, a, b, coarse, 1e-18, 24);
  }
  D_total_ = nodes_[kTableN];

  // max |v_hs'| over [0, x_hat]: dense scan plus a parabolic refinement of the
  // bracketing triple around the sampled maximum.
  {
    const int n = 1 << 16;
    const double hx = p_.x_hat / n;
    double best = 0.0;
    int besti = 0;
    for (int i = 0; i <= n; ++i) {
      const double v = std::abs(dv_hs(i * hx));
      if (v > best) {
        best = v;
        besti = i;
      }
    }
    if (besti > 0 && besti < n) {
      const double fm = std::abs(dv_hs((besti - 1) * hx));
      const double f0 = best;
      const double fp = std::abs(dv_hs((besti + 1) * hx));
      const double denom = fm - 2.0 * f0 + fp;
      if (denom < 0.0) {
        const double t = 0.5 * (fm - fp) / denom;
        best = std::abs(dv_hs((besti + t) * hx));
        if (best < f0) best = f0;
      }
    }
    max_abs_dv_ = best;
  }

  // max d over the open branch: d is decreasing in practice, so the supremum
  // sits at x_c^+; scan anyway in case of unusual parameter sets.
  {
    const int n = 1 << 14;
    double best = d_branch(p_.x_c);  // right-limit value (sigma_e' = alpha)
    for (int i = 1; i <= n; ++i) {
      const double x = p_.x_c + (p_.x_hat - p_.x_c) * i / n;
      const double v = d_branch(x);
      if (v > best) best = v;
    }
    max_d_ = best;
  }
}

double Constitutive::v_hs(double x) const {
  if (x >= p_.x_hat) return 0.0;
  if (x <= 0.0) return p_.v0;
  return p_.v0 / (1.0 + std::pow(x / p_.x_breve, p_.eta_exp));
}

double Constitutive::dv_hs(double x) const {
  if (x <= 0.0) return 0.0;
  const double r = std::pow(x / p_.x_breve, p_.eta_exp);
  const double den = 1.0 + r;
  return -p_.v0 * p_.eta_exp * r / (x * den * den);
}

double Constitutive::sigma_e_prime(double x) const {
  return x > p_.x_c ? p_.alpha_comp : 0.0;
}

double Constitutive::d_comp(double x) const {
  if (x <= p_.x_c || x >= p_.x_hat) return 0.0;
  return v_hs(x) * p_.rho_s * p_.alpha_comp /
         (p_.g * x * (p_.rho_s - p_.rho_f));
}

double Constitutive::D_comp(double x) const {
  if (x <= p_.x_c) return 0.0;
  if (x >= p_.x_hat) return D_total_;
  const double s = (x - p_.x_c) / dx_;
  int i = static_cast<int>(s);
  if (i >= kTableN) i = kTableN - 1;
  const double a = p_.x_c + i * dx_;
  if (x <= a) return nodes_[i];
  // Simpson over the partial cell [a, x]; use the open-branch formula so the
  // left endpoint of the first cell carries the right-limit value at x_c
  // instead of the clamped 0. d is smooth here and dx_ is small enough that
  // this is accurate to well below 1e-10 relative.
  auto db = [this](double xx) {
    return v_hs(xx) * p_.rho_s * p_.alpha_comp /
           (p_.g * xx * (p_.rho_s - p_.rho_f));
  };
  return nodes_[i] + simpson(db, a, x);
}

}  // namespace rs
