// reactive-settling: tank geometry. Depth coordinate z runs downward from the
// tank top (z = 0) to the outlet (z = depth); the free surface sits at depth
// zbar and moves with the net volumetric balance.
#pragma once

#include <utility>
#include <vector>

#include "rs/core.hpp"

namespace rs {

// Cross-sectional area A(z). Either constant or piecewise linear between
// breakpoints; extended by its end values outside [first, last] breakpoint so
// cell averages near the rim and the outlet are always defined.
class AreaProfile {
 public:
  static AreaProfile constant(double area);
  // points: (z, A) pairs, strictly increasing z, all A > 0.
  static AreaProfile piecewise_linear(std::vector<std::pair<double, double>> points);

  double at(double z) const;
  double integral(double z0, double z1) const;  // exact, z0 <= z1
  double min_over(double z0, double z1) const;
  bool is_constant() const { return z_.size() == 1; }
  const std::vector<double>& knots() const { return z_; }

 private:
  AreaProfile() = default;
  std::vector<double> z_, a_;
};

// Surface position on the grid: the surface lies inside cell jbar (1-based),
// wetted fraction alpha in (0, 1]. alpha = 1 means the surface coincides with
// the cell's upper face.
struct SurfacePos {
  int jbar = 1;
  double alpha = 1.0;
};

// Uniform grid of `cells` cells of height h = depth / cells. Cell j occupies
// ((j-1) h, j h]; index n+1 addresses the underflow pipe extension. Face j
// (0..n) sits at depth j*h. Cell and face areas are exact averages / point
// values of the profile.
class Grid {
 public:
  Grid(AreaProfile area, double depth, int cells);

  int n() const { return n_; }
  double h() const { return h_; }
  double depth() const { return depth_; }
  const AreaProfile& area() const { return area_; }

  double A_cell(int j) const { return a_cell_[j]; }  // j in [1, n+1]
  double A_face(int j) const { return a_face_[j]; }  // face below cell j, j in [0, n]
  double A_min_cell() const { return a_min_cell_; }
  double A_min_profile() const { return a_min_profile_; }

  // Geometry ratios entering the step-size estimate.
  double M1() const { return m1_; }
  double M2() const { return m2_; }
  double M3() const { return m3_; }

  // Liquid volume below depth z and its inverse (exact for piecewise linear
  // profiles; V is strictly decreasing in z).
  double V(double z) const;
  double V_total() const { return v_total_; }
  double z_of_V(double vol) const;

  SurfacePos locate_surface(double zbar) const;

  // New surface depth after the submerged volume changes by dvol (m^3).
  // Tolerates overflow up to a relative slack of 1e-9; throws RuntimeAbort on
  // real overflow or when the tank would drain completely.
  double advance_surface(double zbar, double dvol) const;

 private:
  AreaProfile area_;
  double depth_ = 0.0, h_ = 0.0;
  int n_ = 0;
  std::vector<double> a_cell_, a_face_;
  double a_min_cell_ = 0.0, a_min_profile_ = 0.0;
  double m1_ = 0.0, m2_ = 0.0, m3_ = 0.0;
  double v_total_ = 0.0;
  // profile breakpoints clipped to [0, depth] with precomputed volumes
  std::vector<double> bz_, bv_;  // bv_[i] = V(bz_[i]), bz_ increasing
};

}  // namespace rs
