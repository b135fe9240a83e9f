#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace mabs {

/// Nodes and weights of an n-point rule.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule for weight e^{-x^2} on (-inf, inf), via Golub-Welsch.
/// Cached per order.
const QuadratureRule& gauss_hermite(int order);

/// Gauss-Legendre rule on [-1, 1], via Golub-Welsch. Cached per order.
const QuadratureRule& gauss_legendre(int order);

/// integral of phi(z) f(z) dz with phi the standard normal density, taken
/// over [-10, 10] (the truncated tail is below 1e-20 of the mass). Adaptive
/// composite Gauss-Legendre with `order` nodes per panel: panels are bisected
/// until the two-half refinement changes the panel value by less than its
/// share of `tol`. Deterministic for fixed order. Handles integrands with
/// isolated kinks (option payoffs) at full accuracy.
double gaussian_line_integral(const std::function<double(double)>& f, double tol, int order);

/// Nested version over `dims` standard-normal coordinates:
/// integral of phi(u_1)...phi(u_d) f(u) du. Inner lines are integrated to a
/// tolerance scaled by the outer weights so Gaussian tails stay cheap.
double gaussian_nested_integral(int dims, const std::function<double(const Eigen::VectorXd&)>& f,
                                double tol, int order);

}  // namespace mabs
