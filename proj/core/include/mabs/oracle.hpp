#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "mabs/correlation.hpp"
#include "mabs/pricing.hpp"
#include "mabs/transform.hpp"

namespace mabs {

/// Grid for the finite-difference oracle, in the drift-shifted log
/// coordinates where the pricing equation is a constant-coefficient
/// diffusion. Bounds should cover +-6 sigma sqrt(T) around the evaluation
/// point; nodes >= 32 per dim.
struct FDGrid {
    int dims = 1;
    std::vector<double> lo, hi;
    std::vector<int> nodes;
    int steps = 128;
    double theta = 0.5;  ///< 0 explicit, 1 implicit, 0.5 Crank-Nicolson

    /// Bounds centered on ln(spot) with halfwidth 6 sigma_i sqrt(T). When
    /// `align_x` is finite, the first axis is shifted by a sub-cell amount so
    /// that coordinate falls exactly on a node at every resolution; aligning
    /// the payoff kink this way keeps the spatial error constant stable
    /// across refinements.
    static FDGrid standard(const MarketParams& p, const Eigen::VectorXd& spot, int nodes_per_dim,
                           int steps,
                           double align_x = std::numeric_limits<double>::quiet_NaN());
};

/// Terminal-value solve marched to t = T; prices are read at tau = 0.
struct FDSolution {
    FDGrid grid;
    MarketParams params;
    std::vector<Eigen::VectorXd> axes;  ///< x grid per dim
    Eigen::VectorXd psi;                ///< undiscounted surface at t = T, row-major flat

    /// Multilinear interpolation at x = ln(S), discounted back.
    double price_at_spot(const Eigen::VectorXd& spot) const;
};

/// Theta-scheme on the transformed equation dPsi/dt = 1/2 sum sigma_i
/// sigma_j rho_ij d2Psi/dx_i dx_j (Dirichlet far field from the discounted
/// intrinsic value; Rannacher startup when theta < 1). Interior rho only;
/// dims <= 2.
FDSolution fd_solve(const PayoffDescriptor& payoff, const MarketParams& p,
                    const CorrelationMatrix& rho, const FDGrid& grid);

/// Sample covariance of the normalized log-return draws Z = L G across
/// `paths` Monte Carlo paths; converges to rho at rate paths^{-1/2}.
/// Rejects indefinite rho before sampling.
Eigen::MatrixXd covariance_probe(const CorrelationMatrix& rho, long paths, std::uint64_t seed);

/// Chapman-Kolmogorov deviation: composes the t1- and t2-kernels by
/// Gauss-Hermite quadrature and returns the max |composed - direct| over
/// random (zeta, zeta') pairs.
double semigroup_probe(const SpectralDecomposition& d, double t1, double t2, int sample_pairs,
                       std::uint64_t seed, int gh_order = 64);

}  // namespace mabs
