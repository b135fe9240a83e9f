#include "mabs/propagator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace mabs {

namespace {

constexpr double kEpsPivot = 1e-10;

void check_spectrum(const SpectralDecomposition& d, double eps_rank, bool want_full_rank) {
    double min_lambda = d.eigenvalues(d.n() - 1);
    if (min_lambda < -eps_rank) {
        std::ostringstream os;
        os << "correlation matrix is indefinite (min eigenvalue " << min_lambda
           << ", determinant " << d.determinant << ")";
        throw IndefiniteError(os.str(), d.determinant, min_lambda);
    }
    if (want_full_rank && std::fabs(min_lambda) <= eps_rank)
        throw DegenerateInputError(
            "spectrum is rank deficient at this tolerance; build the degenerate kernel instead");
}

}  // namespace

RegularKernel::RegularKernel(SpectralDecomposition decomp, double horizon_t, double eps_rank)
    : decomp_(std::move(decomp)), horizon_t_(horizon_t) {
    if (!(horizon_t_ > 0.0)) throw DomainError("kernel horizon must be positive");
    check_spectrum(decomp_, eps_rank, /*want_full_rank=*/true);
}

double RegularKernel::evaluate(const Eigen::VectorXd& zeta,
                               const Eigen::VectorXd& zeta_prime) const {
    if (zeta.size() != decomp_.n() || zeta_prime.size() != decomp_.n())
        throw DomainError("kernel evaluate: dimension mismatch");
    double value = 1.0;
    for (int k = 0; k < decomp_.n(); ++k) {
        double var = decomp_.eigenvalues(k) * horizon_t_;
        double dz = zeta(k) - zeta_prime(k);
        value *= std::exp(-0.5 * dz * dz / var) / std::sqrt(2.0 * M_PI * var);
    }
    return value;
}

RegularKernel build_regular(const SpectralDecomposition& d, double t, double eps_rank) {
    return RegularKernel(d, t, eps_rank);
}

RegularKernel build_regular(const SpectralDecomposition& d, double t) {
    return RegularKernel(d, t, default_eps_rank(d));
}

double evaluate_regular_S(const RegularKernel& kernel, const Eigen::VectorXd& S, double tau,
                          const Eigen::VectorXd& S_prime, const MarketParams& p) {
    const auto& d = kernel.decomposition();
    if (p.n() != d.n()) throw DomainError("evaluate_regular_S: dimension mismatch");
    double t = p.maturity - tau;
    if (!(t > 0.0)) throw DomainError("evaluate_regular_S: requires tau < T");

    Eigen::VectorXd alpha = alpha_vector(S, S_prime, tau, p);
    Eigen::VectorXd w = d.basis.transpose() * alpha;
    double quad = 0.0;
    for (int k = 0; k < d.n(); ++k) quad += w(k) * w(k) / d.eigenvalues(k);

    double prefactor = std::exp(-p.rate * t) /
                       std::sqrt(std::pow(2.0 * M_PI * t, d.n()) * d.determinant);
    for (int i = 0; i < d.n(); ++i) prefactor /= p.vols[i] * S_prime(i);
    return prefactor * std::exp(-quad / (2.0 * t));
}

DegenerateKernel::DegenerateKernel(const SpectralDecomposition& decomp, double eps_rank,
                                   double eps_pivot)
    : decomp_(decomp), n_(decomp.n()) {
    if (!(eps_rank > 0.0)) throw DomainError("eps_rank must be positive");
    check_spectrum(decomp_, eps_rank, /*want_full_rank=*/false);

    // Eigenvalues are sorted descending, so the positive modes are a prefix.
    int n_a = 0;
    while (n_a < n_ && decomp_.eigenvalues(n_a) > eps_rank) ++n_a;
    int n_b = n_ - n_a;
    if (n_b == 0)
        throw DomainError("spectrum has full rank at this tolerance; build the regular kernel");
    if (n_a == 0)
        throw NumericError("all eigenvalues null; impossible for a unit-trace-per-asset matrix");

    d_a_ = decomp_.eigenvalues.head(n_a);

    // zeta = U^{-1} chi with U^{-1} = U^T; rows are modes, columns assets.
    Eigen::MatrixXd u_inv = decomp_.basis.transpose();
    Eigen::MatrixXd b_rows = u_inv.bottomRows(n_b);

    // Pick the B asset columns: trailing assets unless that block is
    // singular, then greedy column pivoting on the null-mode rows (pick the
    // largest remaining column norm, orthogonalize, repeat).
    std::vector<int> b_cols(n_b);
    std::iota(b_cols.begin(), b_cols.end(), n_a);
    double nat_det =
        std::fabs(Eigen::PartialPivLU<Eigen::MatrixXd>(b_rows.rightCols(n_b)).determinant());
    if (nat_det <= eps_pivot) {
        Eigen::MatrixXd work = b_rows;
        std::vector<char> used(n_, 0);
        b_cols.clear();
        for (int pick = 0; pick < n_b; ++pick) {
            int best = -1;
            double best_norm = 0.0;
            for (int c = 0; c < n_; ++c) {
                if (used[c]) continue;
                double norm = work.col(c).norm();
                if (norm > best_norm) {
                    best_norm = norm;
                    best = c;
                }
            }
            if (best < 0 || best_norm <= eps_pivot)
                throw NumericError("U^{-1}_BB is singular for every attempted column labeling");
            used[best] = 1;
            b_cols.push_back(best);
            Eigen::VectorXd q = work.col(best) / best_norm;
            for (int c = 0; c < n_; ++c)
                if (!used[c]) work.col(c) -= q.dot(work.col(c)) * q;
        }
        std::sort(b_cols.begin(), b_cols.end());
    }
    std::vector<char> is_b(n_, 0);
    for (int c : b_cols) is_b[c] = 1;
    for (int c = 0; c < n_; ++c)
        if (!is_b[c]) a_assets_.push_back(c);
    b_assets_ = b_cols;

    auto gather = [&](int row0, int nrows, const std::vector<int>& cols) {
        Eigen::MatrixXd block(nrows, static_cast<int>(cols.size()));
        for (int j = 0; j < static_cast<int>(cols.size()); ++j)
            block.col(j) = u_inv.block(row0, cols[j], nrows, 1);
        return block;
    };
    u_inv_aa_ = gather(0, n_a, a_assets_);
    u_inv_ab_ = gather(0, n_a, b_assets_);
    u_inv_ba_ = gather(n_a, n_b, a_assets_);
    u_inv_bb_ = gather(n_a, n_b, b_assets_);

    Eigen::PartialPivLU<Eigen::MatrixXd> bb_lu(u_inv_bb_);
    abs_det_u_inv_bb_ = std::fabs(bb_lu.determinant());
    if (abs_det_u_inv_bb_ <= eps_pivot)
        throw NumericError("U^{-1}_BB is singular for every attempted column labeling");

    // Constraint solve: 0 = U^{-1}_BA dchi_A + U^{-1}_BB dchi_B, so
    // dchi_B = -gamma dchi_A with gamma = (U^{-1}_BB)^{-1} U^{-1}_BA.
    gamma_ = bb_lu.solve(u_inv_ba_);

    m_ = u_inv_aa_ - u_inv_ab_ * gamma_;
    Eigen::PartialPivLU<Eigen::MatrixXd> m_lu(m_);
    double det_m = m_lu.determinant();
    // Schur identity for the permuted orthogonal matrix:
    // |det U^{-1}_BB| |det M| = |det U^{-1}| = 1.
    if (std::fabs(std::fabs(det_m) * abs_det_u_inv_bb_ - 1.0) > 1e-8)
        throw NumericError("degenerate block factorization lost orthogonality");
    m_inv_ = m_lu.inverse();

    rho_inv_sigma_ = m_.transpose() * d_a_.cwiseInverse().asDiagonal() * m_;
    rho_inv_sigma_ = 0.5 * (rho_inv_sigma_ + rho_inv_sigma_.transpose()).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(rho_inv_sigma_);
    if (llt.info() != Eigen::Success)
        throw NumericError("rho_inv_sigma is not positive definite");
}

DegenerateKernel build_degenerate(const SpectralDecomposition& d, double eps_rank) {
    return DegenerateKernel(d, eps_rank, kEpsPivot);
}

double evaluate_degenerate_density(const DegenerateKernel& kernel, const Eigen::VectorXd& dchi_A,
                                   double t) {
    if (!(t > 0.0)) throw DomainError("evaluate_degenerate_density: t must be positive");
    if (dchi_A.size() != kernel.n_a())
        throw DomainError("evaluate_degenerate_density: dimension mismatch");
    double quad = dchi_A.dot(kernel.rho_inv_sigma() * dchi_A);
    double norm = std::pow(2.0 * M_PI * t, -0.5 * kernel.n_a()) /
                  std::sqrt(kernel.d_a().prod()) / kernel.abs_det_u_inv_bb();
    return norm * std::exp(-quad / (2.0 * t));
}

Eigen::VectorXd constrained_SB(const Eigen::VectorXd& S_A, const Eigen::VectorXd& S_A_prime,
                               const Eigen::VectorXd& S_B, double tau, const MarketParams& p,
                               const DegenerateKernel& kernel) {
    const int n_a = kernel.n_a(), n_b = kernel.n_b();
    if (S_A.size() != n_a || S_A_prime.size() != n_a || S_B.size() != n_b)
        throw DomainError("constrained_SB: dimension mismatch");
    if (tau > p.maturity) throw DomainError("constrained_SB: tau beyond maturity");
    double t = p.maturity - tau;

    Eigen::VectorXd log_ratio(n_a);
    for (int j = 0; j < n_a; ++j) {
        if (!(S_A(j) > 0.0) || !(S_A_prime(j) > 0.0))
            throw DomainError("constrained_SB: nonpositive price");
        log_ratio(j) = std::log(S_A(j) / S_A_prime(j));
    }

    Eigen::VectorXd out(n_b);
    for (int i = 0; i < n_b; ++i) {
        if (!(S_B(i) > 0.0)) throw DomainError("constrained_SB: nonpositive price");
        double sig_i = p.vols[kernel.b_assets()[i]];
        if (!(sig_i > 0.0)) throw DomainError("constrained_SB: requires positive vols");
        double log_s = std::log(S_B(i)) + (p.rate - 0.5 * sig_i * sig_i) * t;
        for (int j = 0; j < n_a; ++j) {
            double sig_j = p.vols[kernel.a_assets()[j]];
            if (!(sig_j > 0.0)) throw DomainError("constrained_SB: requires positive vols");
            double coeff = (sig_i / sig_j) * kernel.gamma()(i, j);
            log_s += coeff * (log_ratio(j) + (p.rate - 0.5 * sig_j * sig_j) * t);
        }
        out(i) = std::exp(log_s);
    }
    return out;
}

double pde_residual(const std::function<double(const Eigen::VectorXd&, double)>& price_fn,
                    const Eigen::VectorXd& S, double tau, const MarketParams& p,
                    const CorrelationMatrix& rho, double h) {
    const int n = static_cast<int>(S.size());
    if (rho.n() != n || p.n() != n) throw DomainError("pde_residual: dimension mismatch");
    if (!(h > 0.0)) throw DomainError("pde_residual: h must be positive");

    double h_tau = h * std::max(p.maturity, 1.0);
    double pi0 = price_fn(S, tau);
    double d_tau = (price_fn(S, tau + h_tau) - price_fn(S, tau - h_tau)) / (2.0 * h_tau);

    Eigen::VectorXd hs(n);
    for (int i = 0; i < n; ++i) hs(i) = h * S(i);

    double residual = d_tau - p.rate * pi0;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd up = S, dn = S;
        up(i) += hs(i);
        dn(i) -= hs(i);
        double pi_up = price_fn(up, tau);
        double pi_dn = price_fn(dn, tau);
        double first = (pi_up - pi_dn) / (2.0 * hs(i));
        double second = (pi_up - 2.0 * pi0 + pi_dn) / (hs(i) * hs(i));
        residual += p.rate * S(i) * first;
        residual += 0.5 * p.vols[i] * p.vols[i] * S(i) * S(i) * second;
        for (int j = i + 1; j < n; ++j) {
            Eigen::VectorXd pp = S, pm = S, mp = S, mm = S;
            pp(i) += hs(i); pp(j) += hs(j);
            pm(i) += hs(i); pm(j) -= hs(j);
            mp(i) -= hs(i); mp(j) += hs(j);
            mm(i) -= hs(i); mm(j) -= hs(j);
            double cross = (price_fn(pp, tau) - price_fn(pm, tau) - price_fn(mp, tau) +
                            price_fn(mm, tau)) /
                           (4.0 * hs(i) * hs(j));
            residual += p.vols[i] * p.vols[j] * S(i) * S(j) * rho.values(i, j) * cross;
        }
    }
    return residual;
}

}  // namespace mabs
