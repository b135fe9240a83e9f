#include "mabs/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace mabs {

namespace {

int infer_n_assets(std::size_t m) {
    // M = N(N-1)/2  =>  N = (1 + sqrt(1 + 8M)) / 2
    for (int n = 2; n <= 2048; ++n) {
        std::size_t expect = static_cast<std::size_t>(n) * (n - 1) / 2;
        if (expect == m) return n;
        if (expect > m) break;
    }
    std::ostringstream os;
    os << "entry count " << m << " does not match N(N-1)/2 for any N >= 2";
    throw DomainError(os.str());
}

int pair_index(int n, int i, int j) {
    // lexicographic (i,j), i < j, 0-based: offset of row i plus (j - i - 1)
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

}  // namespace

CorrelationPoint::CorrelationPoint(int n_assets, std::vector<double> entries)
    : n_assets_(n_assets), entries_(std::move(entries)) {
    if (n_assets_ < 2) throw DomainError("need at least 2 assets");
    std::size_t m = static_cast<std::size_t>(n_assets_) * (n_assets_ - 1) / 2;
    if (entries_.size() != m) {
        std::ostringstream os;
        os << "expected " << m << " correlation entries for N=" << n_assets_ << ", got "
           << entries_.size();
        throw DomainError(os.str());
    }
    int k = 0;
    for (int i = 0; i < n_assets_; ++i) {
        for (int j = i + 1; j < n_assets_; ++j, ++k) {
            double v = entries_[k];
            if (!(v >= -1.0 && v <= 1.0)) {
                std::ostringstream os;
                os << "correlation rho(" << (i + 1) << "," << (j + 1) << ") = " << v
                   << " outside [-1,1]";
                throw DomainError(os.str());
            }
        }
    }
}

CorrelationPoint CorrelationPoint::from_flat(std::vector<double> entries) {
    int n = infer_n_assets(entries.size());
    return CorrelationPoint(n, std::move(entries));
}

double CorrelationPoint::entry(int i, int j) const {
    if (i < 0 || j <= i || j >= n_assets_) throw DomainError("bad pair index");
    return entries_[pair_index(n_assets_, i, j)];
}

void validate_matrix(const CorrelationMatrix& m) {
    const auto& a = m.values;
    if (a.rows() != a.cols() || a.rows() < 1) throw DomainError("correlation matrix must be square");
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (a(i, i) != 1.0) throw DomainError("correlation matrix diagonal must be exactly 1");
        for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
            if (a(i, j) != a(j, i)) throw DomainError("correlation matrix must be symmetric");
            if (!(std::fabs(a(i, j)) <= 1.0)) {
                std::ostringstream os;
                os << "correlation rho(" << (i + 1) << "," << (j + 1) << ") = " << a(i, j)
                   << " outside [-1,1]";
                throw DomainError(os.str());
            }
        }
    }
}

CorrelationMatrix assemble_matrix(const CorrelationPoint& point) {
    int n = point.n_assets();
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, ++k) {
            a(i, j) = point.entries()[k];
            a(j, i) = point.entries()[k];
        }
    }
    return CorrelationMatrix{std::move(a)};
}

CorrelationPoint point_from_matrix(const CorrelationMatrix& m) {
    validate_matrix(m);
    int n = m.n();
    std::vector<double> entries;
    entries.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) entries.push_back(m.values(i, j));
    return CorrelationPoint(n, std::move(entries));
}

double determinant_generic(const CorrelationMatrix& m) {
    validate_matrix(m);
    return Eigen::PartialPivLU<Eigen::MatrixXd>(m.values).determinant();
}

double determinant_closed3(double x, double y, double z) {
    return 2.0 * x * y * z - x * x - y * y - z * z + 1.0;
}

SpectralDecomposition spectral_decompose(const CorrelationMatrix& m) {
    validate_matrix(m);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.values);
    if (solver.info() != Eigen::Success)
        throw NumericError("symmetric eigensolver did not converge");

    const int n = m.n();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd& raw = solver.eigenvalues();
    // Stable descending sort: ties keep the solver's order, so the identity
    // matrix decomposes to the identity basis.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return raw(a) > raw(b); });

    SpectralDecomposition d;
    d.eigenvalues.resize(n);
    d.basis.resize(n, n);
    for (int c = 0; c < n; ++c) {
        d.eigenvalues(c) = raw(order[c]);
        Eigen::VectorXd v = solver.eigenvectors().col(order[c]);
        int imax = 0;
        for (int i = 1; i < n; ++i)
            if (std::fabs(v(i)) > std::fabs(v(imax))) imax = i;
        if (v(imax) < 0.0) v = -v;
        d.basis.col(c) = v;
    }
    d.determinant = d.eigenvalues.prod();
    return d;
}

SpectralDecomposition perturb_convention(const SpectralDecomposition& d, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    SpectralDecomposition out = d;
    const int n = d.n();
    double scale = std::max(1.0, std::fabs(d.eigenvalues(0)));
    // permute columns within runs of (numerically) equal eigenvalues
    int start = 0;
    while (start < n) {
        int end = start + 1;
        while (end < n && std::fabs(d.eigenvalues(end) - d.eigenvalues(start)) <= 1e-12 * scale)
            ++end;
        std::vector<int> idx(end - start);
        std::iota(idx.begin(), idx.end(), start);
        std::shuffle(idx.begin(), idx.end(), gen);
        for (int c = start; c < end; ++c) {
            out.eigenvalues(c) = d.eigenvalues(idx[c - start]);
            out.basis.col(c) = d.basis.col(idx[c - start]);
        }
        start = end;
    }
    for (int c = 0; c < n; ++c)
        if (gen() & 1u) out.basis.col(c) = -out.basis.col(c);
    return out;
}

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Interior: return "Interior";
        case Verdict::KummerSurface: return "KummerSurface";
        case Verdict::Indefinite: return "Indefinite";
    }
    return "?";
}

double default_eps_rank(const SpectralDecomposition& d) {
    return d.n() * std::fabs(d.eigenvalues(0)) * std::numeric_limits<double>::epsilon() * 1e3;
}

RegionClassification classify(const SpectralDecomposition& d, double eps_rank) {
    if (!(eps_rank > 0.0)) throw DomainError("eps_rank must be positive");
    const int n = d.n();
    int null_count = 0;
    bool negative = false;
    for (int i = 0; i < n; ++i) {
        double lam = d.eigenvalues(i);
        if (std::fabs(lam) <= eps_rank)
            ++null_count;
        else if (lam < 0.0)
            negative = true;
    }
    Verdict verdict = negative          ? Verdict::Indefinite
                      : null_count > 0 ? Verdict::KummerSurface
                                       : Verdict::Interior;
    return RegionClassification{verdict, n - null_count, null_count, d.determinant, eps_rank};
}

RegionClassification classify(const CorrelationPoint& point, double eps_rank) {
    return classify(spectral_decompose(assemble_matrix(point)), eps_rank);
}

RegionClassification classify(const CorrelationPoint& point) {
    auto d = spectral_decompose(assemble_matrix(point));
    return classify(d, default_eps_rank(d));
}

namespace {

// Determinant of `a` with row `r` and column `c` removed.
double minor_det(const Eigen::MatrixXd& a, int r, int c) {
    const int n = static_cast<int>(a.rows());
    Eigen::MatrixXd sub(n - 1, n - 1);
    for (int i = 0, si = 0; i < n; ++i) {
        if (i == r) continue;
        for (int j = 0, sj = 0; j < n; ++j) {
            if (j == c) continue;
            sub(si, sj) = a(i, j);
            ++sj;
        }
        ++si;
    }
    if (n - 1 == 1) return sub(0, 0);
    return Eigen::PartialPivLU<Eigen::MatrixXd>(sub).determinant();
}

}  // namespace

std::vector<double> gradient_eta(const CorrelationPoint& point) {
    const int n = point.n_assets();
    if (n == 3) {
        double x = point.entries()[0], y = point.entries()[1], z = point.entries()[2];
        return {2.0 * y * z - 2.0 * x, 2.0 * x * z - 2.0 * y, 2.0 * x * y - 2.0 * z};
    }
    CorrelationMatrix m = assemble_matrix(point);
    std::vector<double> eta;
    eta.reserve(point.dim());
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            // adj(A)_ij = (-1)^{i+j} minor(j, i); symmetric A gives a
            // symmetric adjugate, and the symmetric-entry derivative is twice it.
            double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            eta.push_back(2.0 * sign * minor_det(m.values, j, i));
        }
    }
    return eta;
}

std::optional<double> kummer_sheet_z(double x, double y, SheetBranch branch) {
    double radicand = x * x * y * y - x * x - y * y + 1.0;
    if (radicand < 0.0) return std::nullopt;
    double root = std::sqrt(radicand);
    double z = branch == SheetBranch::plus ? x * y + root : x * y - root;
    // inside the square |z| <= 1 holds exactly; snap off the last-ulp noise
    if (std::fabs(x) <= 1.0 && std::fabs(y) <= 1.0) {
        if (z > 1.0 && z < 1.0 + 1e-12) z = 1.0;
        if (z < -1.0 && z > -1.0 - 1e-12) z = -1.0;
    }
    return z;
}

std::pair<double, double> closed3_sheet_eigenvalues(double x, double y, SheetBranch branch) {
    double radicand = x * x * y * y - x * x - y * y + 1.0;
    if (radicand < 0.0) {
        std::ostringstream os;
        os << "(x,y) = (" << x << "," << y << ") is off the sheet domain (radicand " << radicand
           << " < 0)";
        throw DomainError(os.str());
    }
    double s = (branch == SheetBranch::plus ? 1.0 : -1.0);
    double inner = 1.0 + 8.0 * x * x * y * y + s * 8.0 * x * y * std::sqrt(radicand);
    double root = std::sqrt(std::max(inner, 0.0));
    double lam1 = 1.5 + 0.5 * root;
    double lam2 = std::max(1.5 - 0.5 * root, 0.0);
    return {lam1, lam2};
}

std::vector<CorrelationPoint> sample_level_surface(double C, int grid_resolution) {
    if (C >= 1.0)
        throw DomainError(
            "level set is empty for C >= 1: the determinant attains its maximum 1 only at the "
            "origin");
    if (C < -3.0) throw DomainError("C below the supported range [-3, 1)");
    if (grid_resolution < 8) throw DomainError("grid_resolution must be at least 8");

    std::vector<CorrelationPoint> out;
    for (int ix = 0; ix < grid_resolution; ++ix) {
        double x = -1.0 + 2.0 * ix / (grid_resolution - 1);
        for (int iy = 0; iy < grid_resolution; ++iy) {
            double y = -1.0 + 2.0 * iy / (grid_resolution - 1);
            // 2xyz - x^2 - y^2 - z^2 + 1 = C, quadratic in z
            double disc = x * x * y * y - x * x - y * y + 1.0 - C;
            if (disc < 0.0) continue;
            double root = std::sqrt(disc);
            double roots[2] = {x * y + root, x * y - root};
            int count = (root == 0.0) ? 1 : 2;
            for (int k = 0; k < count; ++k) {
                double z = roots[k];
                if (z < -1.0 || z > 1.0) continue;
                if (std::fabs(determinant_closed3(x, y, z) - C) > 1e-9) continue;
                out.emplace_back(3, std::vector<double>{x, y, z});
            }
        }
    }
    return out;
}

}  // namespace mabs
