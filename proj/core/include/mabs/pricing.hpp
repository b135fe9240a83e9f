#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mabs/correlation.hpp"
#include "mabs/propagator.hpp"
#include "mabs/transform.hpp"

namespace mabs {

enum class PayoffKind { vanilla_call, vanilla_put, basket_call, exchange, max_call, min_call, custom };

/// Terminal payoff Phi(S'). Weights/strikes are validated against the asset
/// count before pricing.
class PayoffDescriptor {
public:
    static PayoffDescriptor vanilla_call(int asset, double strike);
    static PayoffDescriptor vanilla_put(int asset, double strike);
    static PayoffDescriptor basket_call(std::vector<double> weights, double strike);
    static PayoffDescriptor exchange(int asset_long, int asset_short, double units);
    static PayoffDescriptor max_call(double strike);
    static PayoffDescriptor min_call(double strike);
    static PayoffDescriptor custom(std::function<double(const Eigen::VectorXd&)> fn);

    PayoffKind kind() const { return kind_; }
    double strike() const { return strike_; }
    int asset() const { return asset_; }
    int asset_short() const { return asset_short_; }
    double units() const { return units_; }
    const std::vector<double>& weights() const { return weights_; }

    double operator()(const Eigen::VectorXd& s) const;
    void validate(int n_assets) const;

private:
    PayoffDescriptor() = default;

    PayoffKind kind_ = PayoffKind::custom;
    int asset_ = -1;
    int asset_short_ = -1;
    double strike_ = 0.0;
    double units_ = 1.0;
    std::vector<double> weights_;
    std::function<double(const Eigen::VectorXd&)> fn_;
};

/// Quadrature pricing: per-dimension Gaussian-weighted adaptive composite
/// Gauss-Legendre with `order` nodes per panel (>= 3). `tol` is the absolute
/// tolerance in payoff units; NaN selects a default by dimension count
/// (1e-9 up to 2 integration dims, 1e-6 for 3, 1e-5 for 4). Tensor
/// integration above 4 dims is refused; use Monte Carlo.
struct QuadratureSpec {
    int order = 64;
    double tol = std::numeric_limits<double>::quiet_NaN();
};

struct MonteCarloSpec {
    long paths = 100000;
    std::uint64_t seed = 0;
};

using PricingMethod = std::variant<QuadratureSpec, MonteCarloSpec>;

struct PricingRequest {
    MarketParams params;
    CorrelationPoint correlation;
    Eigen::VectorXd spot;
    double valuation_time = 0.0;
    PayoffDescriptor payoff;
    PricingMethod method = QuadratureSpec{};
    std::optional<double> eps_rank;
};

struct PriceResult {
    double value = 0.0;
    std::optional<double> std_error;  ///< Monte Carlo only
    std::string method_used;
    RegionClassification region{};
    std::optional<int> n_a;  ///< degenerate diagnostics
    std::optional<int> n_b;
};

/// Routes by classification: Interior prices against the regular kernel,
/// KummerSurface against the degenerate kernel (A coordinates only, B assets
/// constrained), Indefinite throws IndefiniteError and never yields a value.
PriceResult price(const PricingRequest& request);

PriceResult price_quadrature(const PricingRequest& request, const RegularKernel& kernel);
PriceResult price_quadrature(const PricingRequest& request, const DegenerateKernel& kernel);

/// Terminal-draw Monte Carlo: S_i(T) = S_i exp((r - sigma_i^2/2) t +
/// sigma_i sqrt(t) Z_i) with Z = L G, L = U diag(sqrt(max(lambda, 0))).
/// The clamped square root samples exactly on the degenerate support at
/// rank-deficient points. Bit-identical for fixed (seed, paths) regardless
/// of the worker count: paths draw from counter-based substreams and partial
/// sums combine in fixed chunk order.
PriceResult price_monte_carlo(const PricingRequest& request, long paths, std::uint64_t seed);

enum class OptionType { call, put };

double closed_form_black_scholes(double S, double K, double r, double sigma, double t,
                                 OptionType type);

/// Margrabe exchange value S1 N(d1) - b S2 N(d2) with effective vol
/// sigma_e = sqrt(sigma1^2 - 2 rho sigma1 sigma2 + sigma2^2); rate free.
/// Degenerate sigma_e sqrt(t) = 0 collapses to the intrinsic max(S1 - b S2, 0).
double closed_form_margrabe(double S1, double S2, double sigma1, double sigma2, double rho12,
                            double t, double b);

/// Central finite-difference deltas with relative bump 1e-4. Monte Carlo
/// methods reuse the request seed, so bumps share random numbers.
Eigen::VectorXd greeks_delta(const PricingRequest& request);

}  // namespace mabs
