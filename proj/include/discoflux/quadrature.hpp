#ifndef DISCOFLUX_QUADRATURE_HPP
#define DISCOFLUX_QUADRATURE_HPP

#include <Eigen/Dense>
#include <cmath>

namespace discoflux {

/// Gauss-Legendre rule on [-1, 1] from the Jacobi matrix (Golub-Welsch).
template <typename Scalar, int Order>
struct GaussLegendre {
  using Nodes = Eigen::Matrix<Scalar, Order, 1>;
  Nodes nodes;
  Nodes weights;

  GaussLegendre() {
    Eigen::Matrix<Scalar, Order, Order> jacobi = Eigen::Matrix<Scalar, Order, Order>::Zero();
    for (int k = 1; k < Order; ++k) {
      const Scalar b = Scalar(k) / std::sqrt(Scalar(4 * k * k - 1));
      jacobi(k, k - 1) = b;
      jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Order, Order>> solver(jacobi);
    nodes = solver.eigenvalues();
    weights = Scalar(2) * solver.eigenvectors().row(0).transpose().array().square().matrix();
  }

  template <typename Fn>
  Scalar integrate(Fn&& f, Scalar a, Scalar b) const {
    const Scalar half = Scalar(0.5) * (b - a);
    const Scalar mid = Scalar(0.5) * (a + b);
    Scalar sum = 0;
    for (int k = 0; k < Order; ++k) sum += weights[k] * f(mid + half * nodes[k]);
    return half * sum;
  }
};

template <typename Scalar = double>
const GaussLegendre<Scalar, 16>& gauss_legendre16() {
  static const GaussLegendre<Scalar, 16> rule;
  return rule;
}

namespace detail {

template <typename Scalar, typename Fn>
Scalar adaptive_gl(const Fn& f, Scalar a, Scalar b, Scalar whole, Scalar tol, int depth) {
  const auto& rule = gauss_legendre16<Scalar>();
  const Scalar mid = Scalar(0.5) * (a + b);
  const Scalar left = rule.integrate(f, a, mid);
  const Scalar right = rule.integrate(f, mid, b);
  if (depth <= 0 || std::abs(left + right - whole) <= tol) return left + right;
  return adaptive_gl(f, a, mid, left, Scalar(0.5) * tol, depth - 1) +
         adaptive_gl(f, mid, b, right, Scalar(0.5) * tol, depth - 1);
}

}  // namespace detail

/// Adaptive bisection on 16-point Gauss-Legendre panels to absolute tolerance `tol`.
template <typename Scalar, typename Fn>
Scalar integrate_adaptive(const Fn& f, Scalar a, Scalar b, Scalar tol = Scalar(1e-13),
                          int max_depth = 40) {
  if (a == b) return Scalar(0);
  const Scalar whole = gauss_legendre16<Scalar>().integrate(f, a, b);
  return detail::adaptive_gl(f, a, b, whole, tol, max_depth);
}

}  // namespace discoflux

#endif  // DISCOFLUX_QUADRATURE_HPP
