#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mabs/correlation.hpp"
#include "mabs/errors.hpp"

namespace mabs {

/// Flat market inputs, annualized: rate per year, vols per sqrt(year),
/// maturity in years. Real-world drifts never enter pricing (the risk-neutral
/// rate replaces them) and are not stored. Vols may be zero; the operations
/// that divide by a vol enforce strict positivity themselves.
struct MarketParams {
    double rate;
    std::vector<double> vols;
    double maturity;

    MarketParams(double rate_, std::vector<double> vols_, double maturity_);
    int n() const { return static_cast<int>(vols.size()); }
};

/// Coordinate system of a state: asset prices S, drift-shifted logs x,
/// vol-scaled chi, or eigenbasis-diagonal zeta.
enum class Space { price, log_shifted, vol_scaled, diagonal };

enum class TimeKind { calendar, forward };

/// A point of the pricing domain tagged with its coordinate system, so that
/// mixing coordinate systems is an error rather than silent corruption.
struct StateVector {
    Eigen::VectorXd coords;
    Space space;
    double time;
    TimeKind time_kind;
};

StateVector make_price_state(Eigen::VectorXd prices, double tau);

/// x_i = ln S_i - (r - sigma_i^2 / 2) tau
StateVector to_log(const StateVector& s, const MarketParams& p);
StateVector from_log(const StateVector& x, const MarketParams& p);

/// Pi = e^{-r (T - tau)} Psi and its inverse.
double discount_wrap(double psi_value, double tau, const MarketParams& p);
double discount_unwrap(double pi_value, double tau, const MarketParams& p);

/// chi_i = x_i / sigma_i
StateVector scale_by_vol(const StateVector& x, const MarketParams& p);
StateVector unscale_by_vol(const StateVector& chi, const MarketParams& p);

/// t = T - tau, both clamped to [0, T].
double forward_time(double tau, const MarketParams& p);
double calendar_time(double t, const MarketParams& p);

/// zeta = U^T chi (orthogonal change of basis; norm preserving).
StateVector to_diagonal(const StateVector& chi, const SpectralDecomposition& d);
StateVector from_diagonal(const StateVector& zeta, const SpectralDecomposition& d);

/// alpha_i = [ln(S_i / S'_i) + (r - sigma_i^2 / 2)(T - tau)] / sigma_i
Eigen::VectorXd alpha_vector(const Eigen::VectorXd& S, const Eigen::VectorXd& S_prime, double tau,
                             const MarketParams& p);

}  // namespace mabs
