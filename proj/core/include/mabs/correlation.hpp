#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "mabs/errors.hpp"

namespace mabs {

/// Off-diagonal correlations r = (rho_12, rho_13, ..., rho_{(N-1)N}) in
/// lexicographic (i,j) order with i < j. The point lives in the cube
/// [-1,1]^M with M = N(N-1)/2.
class CorrelationPoint {
public:
    CorrelationPoint(int n_assets, std::vector<double> entries);

    /// Infers N from the entry count; throws DomainError if no N fits.
    static CorrelationPoint from_flat(std::vector<double> entries);

    int n_assets() const { return n_assets_; }
    int dim() const { return static_cast<int>(entries_.size()); }

    /// Entry for the asset pair (i, j), 0-based, i < j.
    double entry(int i, int j) const;

    const std::vector<double>& entries() const { return entries_; }

private:
    int n_assets_;
    std::vector<double> entries_;
};

/// N x N symmetric correlation matrix with unit diagonal.
struct CorrelationMatrix {
    Eigen::MatrixXd values;

    int n() const { return static_cast<int>(values.rows()); }
};

/// Throws DomainError unless the matrix is square, symmetric, unit-diagonal
/// and has off-diagonals in [-1,1].
void validate_matrix(const CorrelationMatrix& m);

CorrelationMatrix assemble_matrix(const CorrelationPoint& point);
CorrelationPoint point_from_matrix(const CorrelationMatrix& m);

/// Determinant by pivoted elimination (partial-pivot LU). Total on valid
/// matrices; the eigenvalue-product route lives in SpectralDecomposition and
/// the two must agree (tested property).
double determinant_generic(const CorrelationMatrix& m);

/// det rho for N = 3 with r = (x, y, z): 2xyz - x^2 - y^2 - z^2 + 1.
double determinant_closed3(double x, double y, double z);

/// Eigen-decomposition of a correlation matrix with a deterministic
/// convention: eigenvalues sorted descending (stable for ties), each
/// eigenvector flipped so its largest-magnitude component is positive.
/// det(U) may be -1; kernel formulas are insensitive to that (tested).
struct SpectralDecomposition {
    Eigen::VectorXd eigenvalues;  ///< descending
    Eigen::MatrixXd basis;        ///< columns are eigenvectors, U^T U = I
    double determinant;           ///< product of eigenvalues

    int n() const { return static_cast<int>(eigenvalues.size()); }
};

SpectralDecomposition spectral_decompose(const CorrelationMatrix& m);

/// Debug hook for convention-independence tests: randomly flips eigenvector
/// signs and permutes columns within groups of equal eigenvalues. The
/// decomposition stays valid; kernels built from it must not change.
SpectralDecomposition perturb_convention(const SpectralDecomposition& d, std::uint64_t seed);

enum class Verdict { Interior, KummerSurface, Indefinite };

const char* to_string(Verdict v);

struct RegionClassification {
    Verdict verdict;
    int rank;        ///< N minus the count of |lambda| <= eps_rank
    int null_count;  ///< count of |lambda| <= eps_rank
    double determinant;
    double tolerance_used;
};

/// Default null threshold: N * lambda_max * machine_eps * 1e3.
double default_eps_rank(const SpectralDecomposition& d);

/// Classifies from eigenvalue signs, not the determinant sign: an even number
/// of negative eigenvalues yields a positive determinant but no Gaussian law.
RegionClassification classify(const SpectralDecomposition& d, double eps_rank);
RegionClassification classify(const CorrelationPoint& point, double eps_rank);
RegionClassification classify(const CorrelationPoint& point);

/// Gradient of phi(r) = det rho(r) with respect to the M off-diagonal
/// entries. N = 3 uses the closed polynomial form; N > 3 uses the adjugate
/// identity d(det)/d(rho_ij) = 2 adj(rho)_ij for i < j.
std::vector<double> gradient_eta(const CorrelationPoint& point);

enum class SheetBranch { plus, minus };

/// z-coordinate of the det = 0 sheet over (x, y):
/// z = xy +- sqrt(x^2 y^2 - x^2 - y^2 + 1). Absent when the radicand is
/// negative (off the admissible domain).
std::optional<double> kummer_sheet_z(double x, double y, SheetBranch branch);

/// Nonzero eigenvalues (lambda1 >= lambda2 >= 0) of rho(x, y, z_branch);
/// the third eigenvalue is 0 on the sheet, so lambda1 + lambda2 = 3.
/// Throws DomainError when (x, y) is off the admissible domain.
std::pair<double, double> closed3_sheet_eigenvalues(double x, double y, SheetBranch branch);

/// Samples the constant-determinant level set det rho = C for N = 3 by
/// solving the quadratic in z over an (x, y) grid. Requires -3 <= C < 1
/// (the determinant attains its maximum 1 only at the origin) and
/// grid_resolution >= 8. Every returned point satisfies |det - C| <= 1e-9.
std::vector<CorrelationPoint> sample_level_surface(double C, int grid_resolution);

}  // namespace mabs
