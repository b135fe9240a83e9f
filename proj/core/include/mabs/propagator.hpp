#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "mabs/correlation.hpp"
#include "mabs/transform.hpp"

namespace mabs {

/// Full-rank Gaussian kernel in the diagonal coordinates:
///   K(zeta, t | zeta') = prod_k (2 pi lambda_k t)^{-1/2}
///                               exp(-(zeta_k - zeta'_k)^2 / (2 lambda_k t)).
/// The time-evolution operator factorizes into commuting per-mode
/// exponentials (the generators d^2/dzeta_k^2 commute), so the ordered
/// product needs no correction terms.
class RegularKernel {
public:
    RegularKernel(SpectralDecomposition decomp, double horizon_t, double eps_rank);

    double evaluate(const Eigen::VectorXd& zeta, const Eigen::VectorXd& zeta_prime) const;

    const SpectralDecomposition& decomposition() const { return decomp_; }
    double horizon() const { return horizon_t_; }

private:
    SpectralDecomposition decomp_;
    double horizon_t_;
};

/// Throws DegenerateInputError when an eigenvalue is null at eps_rank (the
/// caller should build the degenerate kernel) and IndefiniteError when one
/// is negative.
RegularKernel build_regular(const SpectralDecomposition& d, double t, double eps_rank);
RegularKernel build_regular(const SpectralDecomposition& d, double t);

/// Transition kernel for the option price itself, in (S, tau) variables:
///   e^{-r(T-tau)} / [ sqrt((2 pi (T-tau))^N det rho) prod sigma_i prod S'_i ]
///   * exp(-alpha^T rho^{-1} alpha / (2 (T-tau))).
double evaluate_regular_S(const RegularKernel& kernel, const Eigen::VectorXd& S, double tau,
                          const Eigen::VectorXd& S_prime, const MarketParams& p);

/// Kernel on the det rho = 0 locus. The diagonal modes split into A (the N_A
/// positive eigenvalues, diffusive) and B (null eigenvalues, frozen); the
/// delta constraint on the B modes ties the B asset coordinates to the A
/// ones through gamma, leaving an N_A-dimensional Gaussian with inverse
/// covariance rho_inv_sigma.
class DegenerateKernel {
public:
    DegenerateKernel(const SpectralDecomposition& decomp, double eps_rank, double eps_pivot);

    int n() const { return n_; }
    int n_a() const { return static_cast<int>(a_assets_.size()); }
    int n_b() const { return static_cast<int>(b_assets_.size()); }

    /// Asset indices labeled A / B. The split is the natural one (trailing
    /// assets are B) unless the U^{-1}_BB block was singular, in which case
    /// columns were pivoted; the labels always refer to original indices.
    const std::vector<int>& a_assets() const { return a_assets_; }
    const std::vector<int>& b_assets() const { return b_assets_; }

    const Eigen::VectorXd& d_a() const { return d_a_; }

    const Eigen::MatrixXd& u_inv_aa() const { return u_inv_aa_; }
    const Eigen::MatrixXd& u_inv_ab() const { return u_inv_ab_; }
    const Eigen::MatrixXd& u_inv_ba() const { return u_inv_ba_; }
    const Eigen::MatrixXd& u_inv_bb() const { return u_inv_bb_; }

    /// gamma = (U^{-1}_BB)^{-1} U^{-1}_BA, so that the constrained increments
    /// satisfy dchi_B = -gamma dchi_A.
    const Eigen::MatrixXd& gamma() const { return gamma_; }

    /// rho_inv_sigma = M^T D_A^{-1} M with M = U^{-1}_AA - U^{-1}_AB gamma.
    /// Symmetric positive definite.
    const Eigen::MatrixXd& rho_inv_sigma() const { return rho_inv_sigma_; }

    double abs_det_u_inv_bb() const { return abs_det_u_inv_bb_; }

    /// M and M^{-1}: dzeta_A = M dchi_A.
    const Eigen::MatrixXd& dzeta_from_dchi() const { return m_; }
    const Eigen::MatrixXd& dchi_from_dzeta() const { return m_inv_; }

    const SpectralDecomposition& decomposition() const { return decomp_; }

private:
    SpectralDecomposition decomp_;
    int n_;
    std::vector<int> a_assets_, b_assets_;
    Eigen::VectorXd d_a_;
    Eigen::MatrixXd u_inv_aa_, u_inv_ab_, u_inv_ba_, u_inv_bb_;
    Eigen::MatrixXd gamma_, rho_inv_sigma_, m_, m_inv_;
    double abs_det_u_inv_bb_;
};

DegenerateKernel build_degenerate(const SpectralDecomposition& d, double eps_rank);

/// Density of the A-coordinate increment, after the B modes are integrated
/// out against their delta constraint:
///   (2 pi t)^{-N_A/2} det(D_A)^{-1/2} |det U^{-1}_BB|^{-1}
///   * exp(-dchi_A^T rho_inv_sigma dchi_A / (2 t)).
double evaluate_degenerate_density(const DegenerateKernel& kernel, const Eigen::VectorXd& dchi_A,
                                   double t);

/// Terminal B-asset prices implied by the constraint, in price space:
///   S'_B^i = S_B^i prod_j (S_A^j / S'_A^j)^{(sigma_i/sigma_j) gamma_ij}
///            * exp([ (r - sigma_i^2/2)
///                   + sum_j (sigma_i/sigma_j) gamma_ij (r - sigma_j^2/2) ] (T - tau)).
/// sigma indices refer to the kernel's A/B asset labels.
Eigen::VectorXd constrained_SB(const Eigen::VectorXd& S_A, const Eigen::VectorXd& S_A_prime,
                               const Eigen::VectorXd& S_B, double tau, const MarketParams& p,
                               const DegenerateKernel& kernel);

/// Central finite-difference residual of the multi-asset pricing operator
///   dPi/dtau + 1/2 sum_ij sigma_i sigma_j S_i S_j rho_ij d2Pi/dS_i dS_j
///   + r (sum_j S_j dPi/dS_j - Pi)
/// at (S, tau). `h` is relative to each coordinate's scale.
double pde_residual(const std::function<double(const Eigen::VectorXd&, double)>& price_fn,
                    const Eigen::VectorXd& S, double tau, const MarketParams& p,
                    const CorrelationMatrix& rho, double h = 1e-3);

}  // namespace mabs
