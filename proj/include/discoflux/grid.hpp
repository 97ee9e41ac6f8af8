#ifndef DISCOFLUX_GRID_HPP
#define DISCOFLUX_GRID_HPP

#include <Eigen/Dense>
#include <string>

#include "discoflux/errors.hpp"

namespace discoflux {

using Profile = Eigen::VectorXd;

/// Uniform periodic grid on [0, 1); dx is derived from the stored cell count.
class Grid1D {
 public:
  explicit Grid1D(int n_cells) : n_(n_cells) {
    if (n_cells <= 0) throw DomainError("grid needs a positive cell count");
  }

  int n_cells() const noexcept { return n_; }
  double dx() const noexcept { return 1.0 / n_; }
  double center(int i) const noexcept { return (i + 0.5) / n_; }
  /// Right interface of cell i, x_{i+1/2}.
  double interface(int i) const noexcept { return static_cast<double>(i + 1) / n_; }
  Profile centers() const {
    return (Eigen::ArrayXd::LinSpaced(n_, 0, n_ - 1) + 0.5).matrix() / n_;
  }
  std::string id() const { return "grid" + std::to_string(n_); }

  friend bool operator==(const Grid1D& a, const Grid1D& b) noexcept { return a.n_ == b.n_; }

 private:
  int n_;
};

/// Samples f at the cell centers.
template <typename Fn>
Profile sample_profile(const Grid1D& grid, Fn&& f) {
  Profile p(grid.n_cells());
  for (int i = 0; i < grid.n_cells(); ++i) p[i] = f(grid.center(i));
  return p;
}

}  // namespace discoflux

#endif  // DISCOFLUX_GRID_HPP
