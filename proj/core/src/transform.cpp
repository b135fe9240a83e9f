#include "mabs/transform.hpp"

#include <cmath>
#include <sstream>

namespace mabs {

namespace {

void require_space(const StateVector& s, Space want, const char* op) {
    if (s.space != want) {
        std::ostringstream os;
        os << op << ": state is in the wrong coordinate system";
        throw DomainError(os.str());
    }
}

void require_dim(const StateVector& s, int n, const char* op) {
    if (s.coords.size() != n) {
        std::ostringstream os;
        os << op << ": dimension mismatch (state has " << s.coords.size() << ", expected " << n
           << ")";
        throw DomainError(os.str());
    }
}

void require_positive_vols(const MarketParams& p, const char* op) {
    for (double v : p.vols)
        if (!(v > 0.0)) throw DomainError(std::string(op) + ": requires strictly positive vols");
}

}  // namespace

MarketParams::MarketParams(double rate_, std::vector<double> vols_, double maturity_)
    : rate(rate_), vols(std::move(vols_)), maturity(maturity_) {
    if (!std::isfinite(rate)) throw DomainError("rate must be finite");
    if (vols.empty()) throw DomainError("need at least one asset vol");
    for (double v : vols)
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("vols must be finite and >= 0");
    if (!(maturity >= 0.0) || !std::isfinite(maturity))
        throw DomainError("maturity must be finite and >= 0");
}

StateVector make_price_state(Eigen::VectorXd prices, double tau) {
    for (Eigen::Index i = 0; i < prices.size(); ++i)
        if (!(prices(i) > 0.0)) throw DomainError("prices must be strictly positive");
    return StateVector{std::move(prices), Space::price, tau, TimeKind::calendar};
}

StateVector to_log(const StateVector& s, const MarketParams& p) {
    require_space(s, Space::price, "to_log");
    require_dim(s, p.n(), "to_log");
    Eigen::VectorXd x(s.coords.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (!(s.coords(i) > 0.0)) throw DomainError("to_log: nonpositive price");
        double sig = p.vols[i];
        x(i) = std::log(s.coords(i)) - (p.rate - 0.5 * sig * sig) * s.time;
    }
    return StateVector{std::move(x), Space::log_shifted, s.time, s.time_kind};
}

StateVector from_log(const StateVector& x, const MarketParams& p) {
    require_space(x, Space::log_shifted, "from_log");
    require_dim(x, p.n(), "from_log");
    Eigen::VectorXd s(x.coords.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        double sig = p.vols[i];
        s(i) = std::exp(x.coords(i) + (p.rate - 0.5 * sig * sig) * x.time);
    }
    return StateVector{std::move(s), Space::price, x.time, x.time_kind};
}

double discount_wrap(double psi_value, double tau, const MarketParams& p) {
    if (tau > p.maturity) throw DomainError("discount_wrap: tau beyond maturity");
    return std::exp(-p.rate * (p.maturity - tau)) * psi_value;
}

double discount_unwrap(double pi_value, double tau, const MarketParams& p) {
    if (tau > p.maturity) throw DomainError("discount_unwrap: tau beyond maturity");
    return std::exp(p.rate * (p.maturity - tau)) * pi_value;
}

StateVector scale_by_vol(const StateVector& x, const MarketParams& p) {
    require_space(x, Space::log_shifted, "scale_by_vol");
    require_dim(x, p.n(), "scale_by_vol");
    require_positive_vols(p, "scale_by_vol");
    Eigen::VectorXd chi(x.coords.size());
    for (Eigen::Index i = 0; i < chi.size(); ++i) chi(i) = x.coords(i) / p.vols[i];
    return StateVector{std::move(chi), Space::vol_scaled, x.time, x.time_kind};
}

StateVector unscale_by_vol(const StateVector& chi, const MarketParams& p) {
    require_space(chi, Space::vol_scaled, "unscale_by_vol");
    require_dim(chi, p.n(), "unscale_by_vol");
    require_positive_vols(p, "unscale_by_vol");
    Eigen::VectorXd x(chi.coords.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = chi.coords(i) * p.vols[i];
    return StateVector{std::move(x), Space::log_shifted, chi.time, chi.time_kind};
}

double forward_time(double tau, const MarketParams& p) {
    if (!(tau >= 0.0) || tau > p.maturity)
        throw DomainError("forward_time: tau outside [0, T]");
    return p.maturity - tau;
}

double calendar_time(double t, const MarketParams& p) {
    if (!(t >= 0.0) || t > p.maturity) throw DomainError("calendar_time: t outside [0, T]");
    return p.maturity - t;
}

StateVector to_diagonal(const StateVector& chi, const SpectralDecomposition& d) {
    require_space(chi, Space::vol_scaled, "to_diagonal");
    require_dim(chi, d.n(), "to_diagonal");
    return StateVector{d.basis.transpose() * chi.coords, Space::diagonal, chi.time,
                       chi.time_kind};
}

StateVector from_diagonal(const StateVector& zeta, const SpectralDecomposition& d) {
    require_space(zeta, Space::diagonal, "from_diagonal");
    require_dim(zeta, d.n(), "from_diagonal");
    return StateVector{d.basis * zeta.coords, Space::vol_scaled, zeta.time, zeta.time_kind};
}

Eigen::VectorXd alpha_vector(const Eigen::VectorXd& S, const Eigen::VectorXd& S_prime, double tau,
                             const MarketParams& p) {
    if (S.size() != p.n() || S_prime.size() != p.n())
        throw DomainError("alpha_vector: dimension mismatch");
    if (tau > p.maturity) throw DomainError("alpha_vector: tau beyond maturity");
    require_positive_vols(p, "alpha_vector");
    double dt = p.maturity - tau;
    Eigen::VectorXd alpha(S.size());
    for (Eigen::Index i = 0; i < S.size(); ++i) {
        if (!(S(i) > 0.0) || !(S_prime(i) > 0.0))
            throw DomainError("alpha_vector: nonpositive price");
        double sig = p.vols[i];
        alpha(i) = (std::log(S(i) / S_prime(i)) + (p.rate - 0.5 * sig * sig) * dt) / sig;
    }
    return alpha;
}

}  // namespace mabs
