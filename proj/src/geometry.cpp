#include "rs/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace rs {

AreaProfile AreaProfile::constant(double area) {
  if (!(area > 0.0)) throw ConfigError("area profile: area must be positive");
  AreaProfile p;
  p.z_ = {0.0};
  p.a_ = {area};
  return p;
}

AreaProfile AreaProfile::piecewise_linear(
    std::vector<std::pair<double, double>> points) {
  if (points.empty()) throw ConfigError("area profile: no points");
  AreaProfile p;
  p.z_.reserve(points.size());
  p.a_.reserve(points.size());
  for (const auto& [z, a] : points) {
    if (!p.z_.empty() && !(z > p.z_.back())) {
      throw ConfigError("area profile: depths must be strictly increasing");
    }
    if (!(a > 0.0)) throw ConfigError("area profile: areas must be positive");
    p.z_.push_back(z);
    p.a_.push_back(a);
  }
  return p;
}

double AreaProfile::at(double z) const {
  if (z <= z_.front()) return a_.front();
  if (z >= z_.back()) return a_.back();
  const auto it = std::upper_bound(z_.begin(), z_.end(), z);
  const size_t i = static_cast<size_t>(it - z_.begin());  // z_[i-1] < z < z_[i]
  const double t = (z - z_[i - 1]) / (z_[i] - z_[i - 1]);
  return a_[i - 1] + t * (a_[i] - a_[i - 1]);
}

double AreaProfile::integral(double z0, double z1) const {
  if (!(z1 >= z0)) throw RuntimeAbort("area integral: reversed bounds");
  // Piecewise linear (constant outside the breakpoints), so trapezoids over
  // the pieces are exact.
  double acc = 0.0;
  double a = z0;
  while (a < z1) {
    // next breakpoint strictly beyond a
    double b = z1;
    const auto it = std::upper_bound(z_.begin(), z_.end(), a);
    if (it != z_.end() && *it < b) b = *it;
    acc += 0.5 * (at(a) + at(b)) * (b - a);
    a = b;
  }
  return acc;
}

double AreaProfile::min_over(double z0, double z1) const {
  double m = std::min(at(z0), at(z1));
  for (size_t i = 0; i < z_.size(); ++i) {
    if (z_[i] > z0 && z_[i] < z1) m = std::min(m, a_[i]);
  }
  return m;
}

Grid::Grid(AreaProfile area, double depth, int cells)
    : area_(std::move(area)), depth_(depth), n_(cells) {
  if (!(depth > 0.0)) throw ConfigError("grid: depth must be positive");
  if (cells < 1) throw ConfigError("grid: need at least one cell");
  h_ = depth_ / n_;

  a_cell_.assign(static_cast<size_t>(n_) + 2, 0.0);
  for (int j = 1; j <= n_; ++j) {
    a_cell_[j] = area_.integral((j - 1) * h_, j * h_) / h_;
  }
  a_cell_[0] = a_cell_[1];
  a_cell_[n_ + 1] = area_.at(depth_);  // underflow pipe: constant extension

  a_face_.assign(static_cast<size_t>(n_) + 1, 0.0);
  for (int j = 0; j <= n_; ++j) a_face_[j] = area_.at(j * h_);

  a_min_cell_ = *std::min_element(a_cell_.begin() + 1, a_cell_.begin() + n_ + 1);
  a_min_profile_ = area_.min_over(0.0, depth_);

  m1_ = m2_ = m3_ = 0.0;
  for (int j = 1; j <= n_; ++j) {
    m1_ = std::max(m1_, std::max(a_face_[j - 1], a_face_[j]) / a_cell_[j]);
    m2_ = std::max(m2_, (a_face_[j - 1] + a_face_[j]) / a_cell_[j]);
    if (j < n_) m3_ = std::max(m3_, a_cell_[j] / a_cell_[j + 1]);
  }

  // Volume table at profile breakpoints (clipped to the tank) for the exact
  // inversion of V: between breakpoints A is linear, so V is quadratic there.
  bz_ = {0.0};
  for (double zb : area_.knots()) {
    if (zb > 0.0 && zb < depth_) bz_.push_back(zb);
  }
  bz_.push_back(depth_);
  std::sort(bz_.begin(), bz_.end());
  bv_.assign(bz_.size(), 0.0);
  for (size_t i = bz_.size(); i-- > 0;) {
    bv_[i] = (i + 1 < bz_.size())
                 ? bv_[i + 1] + area_.integral(bz_[i], bz_[i + 1])
                 : 0.0;
  }
  v_total_ = bv_.front();
}

double Grid::V(double z) const { return area_.integral(z, depth_); }

double Grid::z_of_V(double vol) const {
  if (vol <= 0.0) return depth_;
  if (vol >= v_total_) return 0.0;
  // find segment with bv_[i] >= vol >= bv_[i+1]
  size_t i = 0;
  while (i + 2 < bz_.size() && bv_[i + 1] > vol) ++i;
  const double z0 = bz_[i], z1 = bz_[i + 1];
  const double target = vol - bv_[i + 1];  // volume between z and z1
  const double A1 = area_.at(z1);
  const double slope = (A1 - area_.at(z0)) / (z1 - z0);
  // Solve A1*w - slope*w^2/2 = target for w = z1 - z (stable quadratic form,
  // exact limit w = target/A1 as slope -> 0).
  double disc = A1 * A1 - 2.0 * slope * target;
  if (disc < 0.0) disc = 0.0;  // roundoff at segment edge
  const double w = 2.0 * target / (A1 + std::sqrt(disc));
  double z = z1 - w;
  if (z < z0) z = z0;
  if (z > z1) z = z1;
  return z;
}

SurfacePos Grid::locate_surface(double zbar) const {
  if (!std::isfinite(zbar) || zbar < 0.0 || zbar > depth_) {
    throw RuntimeAbort("surface position outside the tank");
  }
  const double x = zbar / h_;
  int j = static_cast<int>(std::ceil(x));
  if (j < 1) j = 1;
  double alpha = static_cast<double>(j) - x;
  // A surface sitting (numerically) on a cell face counts as the face's full
  // cell below it.
  if (alpha <= 1e-12) {
    j += 1;
    alpha = 1.0;
  }
  if (alpha > 1.0) alpha = 1.0;
  if (j > n_ + 1) j = n_ + 1;
  return {j, alpha};
}

double Grid::advance_surface(double zbar, double dvol) const {
  if (dvol == 0.0) return zbar;  // keep no-flow stages bit-stable
  double v = V(zbar) + dvol;
  if (v > v_total_) {
    if (v - v_total_ <= 1e-9 * v_total_) {
      v = v_total_;
    } else {
      throw RuntimeAbort("tank overflow: fill volume exceeds capacity");
    }
  }
  if (v <= 0.0) throw RuntimeAbort("tank drained: no liquid volume left");
  return z_of_V(v);
}

}  // namespace rs
