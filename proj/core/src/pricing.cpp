#include "mabs/pricing.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "mabs/quadrature.hpp"
#include "mabs/rng.hpp"

namespace mabs {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

constexpr long kChunk = 16384;

struct RequestContext {
    SpectralDecomposition decomp;
    RegionClassification region;
    double eps_rank;
    double t;  // T - tau
};

RequestContext analyze(const PricingRequest& req) {
    const int n = req.params.n();
    if (req.correlation.n_assets() != n)
        throw DomainError("pricing: correlation and market params disagree on N");
    if (req.spot.size() != n) throw DomainError("pricing: spot vector has wrong dimension");
    for (Eigen::Index i = 0; i < req.spot.size(); ++i)
        if (!(req.spot(i) > 0.0)) throw DomainError("pricing: spot prices must be positive");
    if (req.valuation_time < 0.0 || req.valuation_time > req.params.maturity)
        throw DomainError("pricing: valuation time outside [0, T]");
    req.payoff.validate(n);

    RequestContext ctx{spectral_decompose(assemble_matrix(req.correlation)), {}, 0.0, 0.0};
    ctx.eps_rank = req.eps_rank.value_or(default_eps_rank(ctx.decomp));
    ctx.region = classify(ctx.decomp, ctx.eps_rank);
    ctx.t = req.params.maturity - req.valuation_time;
    if (ctx.region.verdict == Verdict::Indefinite) {
        double min_lambda = ctx.decomp.eigenvalues(ctx.decomp.n() - 1);
        std::ostringstream os;
        os << "pricing undefined: correlation matrix is indefinite (determinant "
           << ctx.region.determinant << ", most negative eigenvalue " << min_lambda << ")";
        throw IndefiniteError(os.str(), ctx.region.determinant, min_lambda);
    }
    return ctx;
}

double quad_tol_for(const QuadratureSpec& spec, int dims) {
    if (!std::isnan(spec.tol)) {
        if (!(spec.tol > 0.0)) throw ConfigError("quadrature tol must be positive");
        return spec.tol;
    }
    if (dims <= 2) return 1e-9;
    if (dims == 3) return 1e-6;
    return 1e-5;
}

void check_quad_spec(const QuadratureSpec& spec, int dims) {
    if (spec.order < 3) throw ConfigError("quadrature order must be at least 3");
    if (dims > 4)
        throw ConfigError("tensor quadrature supports at most 4 integration dims; use monte_carlo");
}

PriceResult expiry_result(const PricingRequest& req, const RequestContext& ctx,
                          const char* method) {
    PriceResult out;
    out.value = req.payoff(req.spot);
    out.method_used = method;
    out.region = ctx.region;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// payoff

PayoffDescriptor PayoffDescriptor::vanilla_call(int asset, double strike) {
    PayoffDescriptor p;
    p.kind_ = PayoffKind::vanilla_call;
    p.asset_ = asset;
    p.strike_ = strike;
    return p;
}

PayoffDescriptor PayoffDescriptor::vanilla_put(int asset, double strike) {
    PayoffDescriptor p;
    p.kind_ = PayoffKind::vanilla_put;
    p.asset_ = asset;
    p.strike_ = strike;
    return p;
}

PayoffDescriptor PayoffDescriptor::basket_call(std::vector<double> weights, double strike) {
    PayoffDescriptor p;
    p.kind_ = PayoffKind::basket_call;
    p.weights_ = std::move(weights);
    p.strike_ = strike;
    return p;
}

PayoffDescriptor PayoffDescriptor::exchange(int asset_long, int asset_short, double units) {
    PayoffDescriptor p;
    p.kind_ = PayoffKind::exchange;
    p.asset_ = asset_long;
    p.asset_short_ = asset_short;
    p.units_ = units;
    return p;
}

PayoffDescriptor PayoffDescriptor::max_call(double strike) {
    PayoffDescriptor p;
    p.kind_ = PayoffKind::max_call;
    p.strike_ = strike;
    return p;
}

PayoffDescriptor PayoffDescriptor::min_call(double strike) {
    PayoffDescriptor p;
    p.kind_ = PayoffKind::min_call;
    p.strike_ = strike;
    return p;
}

PayoffDescriptor PayoffDescriptor::custom(std::function<double(const Eigen::VectorXd&)> fn) {
    PayoffDescriptor p;
    p.kind_ = PayoffKind::custom;
    p.fn_ = std::move(fn);
    return p;
}

double PayoffDescriptor::operator()(const Eigen::VectorXd& s) const {
    switch (kind_) {
        case PayoffKind::vanilla_call:
            return std::max(s(asset_) - strike_, 0.0);
        case PayoffKind::vanilla_put:
            return std::max(strike_ - s(asset_), 0.0);
        case PayoffKind::basket_call: {
            double b = 0.0;
            for (Eigen::Index i = 0; i < s.size(); ++i) b += weights_[i] * s(i);
            return std::max(b - strike_, 0.0);
        }
        case PayoffKind::exchange:
            return std::max(s(asset_) - units_ * s(asset_short_), 0.0);
        case PayoffKind::max_call:
            return std::max(s.maxCoeff() - strike_, 0.0);
        case PayoffKind::min_call:
            return std::max(s.minCoeff() - strike_, 0.0);
        case PayoffKind::custom:
            return fn_(s);
    }
    return 0.0;
}

void PayoffDescriptor::validate(int n_assets) const {
    auto check_asset = [n_assets](int a) {
        if (a < 0 || a >= n_assets) throw DomainError("payoff references an asset index >= N");
    };
    switch (kind_) {
        case PayoffKind::vanilla_call:
        case PayoffKind::vanilla_put:
            check_asset(asset_);
            break;
        case PayoffKind::basket_call:
            if (static_cast<int>(weights_.size()) != n_assets)
                throw DomainError("basket weights must have one entry per asset");
            for (double w : weights_)
                if (!std::isfinite(w)) throw DomainError("basket weights must be finite");
            break;
        case PayoffKind::exchange:
            check_asset(asset_);
            check_asset(asset_short_);
            if (!std::isfinite(units_) || units_ < 0.0)
                throw DomainError("exchange units must be finite and >= 0");
            break;
        case PayoffKind::max_call:
        case PayoffKind::min_call:
            break;
        case PayoffKind::custom:
            if (!fn_) throw DomainError("custom payoff has no function");
            break;
    }
    if (kind_ != PayoffKind::exchange && kind_ != PayoffKind::custom) {
        if (!(strike_ >= 0.0) || !std::isfinite(strike_))
            throw DomainError("strike must be finite and >= 0");
    }
}

// ---------------------------------------------------------------------------
// quadrature pricing

PriceResult price_quadrature(const PricingRequest& request, const RegularKernel& kernel) {
    const auto* spec = std::get_if<QuadratureSpec>(&request.method);
    QuadratureSpec quad = spec ? *spec : QuadratureSpec{};
    RequestContext ctx = analyze(request);
    const auto& d = kernel.decomposition();
    const int n = d.n();
    check_quad_spec(quad, n);
    if (ctx.t == 0.0) return expiry_result(request, ctx, "quadrature");

    const MarketParams& p = request.params;
    StateVector chi = scale_by_vol(to_log(make_price_state(request.spot, request.valuation_time), p), p);
    Eigen::VectorXd zeta = d.basis.transpose() * chi.coords;

    Eigen::VectorXd scale(n);
    for (int k = 0; k < n; ++k) scale(k) = std::sqrt(d.eigenvalues(k) * ctx.t);
    // S'_i = exp(sigma_i chi'_i + (r - sigma_i^2/2) T), the log map at tau' = T
    Eigen::VectorXd drift(n);
    for (int i = 0; i < n; ++i)
        drift(i) = (p.rate - 0.5 * p.vols[i] * p.vols[i]) * p.maturity;

    auto integrand = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd zeta_prime = zeta + scale.cwiseProduct(u);
        Eigen::VectorXd chi_prime = d.basis * zeta_prime;
        Eigen::VectorXd s_prime(n);
        for (int i = 0; i < n; ++i)
            s_prime(i) = std::exp(p.vols[i] * chi_prime(i) + drift(i));
        return request.payoff(s_prime);
    };

    double expectation =
        gaussian_nested_integral(n, integrand, quad_tol_for(quad, n), quad.order);

    PriceResult out;
    out.value = discount_wrap(expectation, request.valuation_time, p);
    out.method_used = "quadrature";
    out.region = ctx.region;
    return out;
}

PriceResult price_quadrature(const PricingRequest& request, const DegenerateKernel& kernel) {
    const auto* spec = std::get_if<QuadratureSpec>(&request.method);
    QuadratureSpec quad = spec ? *spec : QuadratureSpec{};
    RequestContext ctx = analyze(request);
    const int n = kernel.n(), n_a = kernel.n_a(), n_b = kernel.n_b();
    check_quad_spec(quad, n_a);
    if (ctx.t == 0.0) return expiry_result(request, ctx, "quadrature");

    const MarketParams& p = request.params;
    StateVector chi = scale_by_vol(to_log(make_price_state(request.spot, request.valuation_time), p), p);

    Eigen::VectorXd chi_a(n_a), spot_a(n_a), spot_b(n_b), drift_a(n_a);
    for (int j = 0; j < n_a; ++j) {
        int asset = kernel.a_assets()[j];
        chi_a(j) = chi.coords(asset);
        spot_a(j) = request.spot(asset);
        drift_a(j) = (p.rate - 0.5 * p.vols[asset] * p.vols[asset]) * p.maturity;
    }
    for (int i = 0; i < n_b; ++i) spot_b(i) = request.spot(kernel.b_assets()[i]);

    Eigen::VectorXd scale(n_a);
    for (int k = 0; k < n_a; ++k) scale(k) = std::sqrt(kernel.d_a()(k) * ctx.t);

    auto integrand = [&](const Eigen::VectorXd& u) {
        Eigen::VectorXd dzeta_a = scale.cwiseProduct(u);
        Eigen::VectorXd dchi_a = kernel.dchi_from_dzeta() * dzeta_a;
        Eigen::VectorXd s_a_prime(n_a);
        for (int j = 0; j < n_a; ++j) {
            int asset = kernel.a_assets()[j];
            s_a_prime(j) = std::exp(p.vols[asset] * (chi_a(j) + dchi_a(j)) + drift_a(j));
        }
        Eigen::VectorXd s_b_prime =
            constrained_SB(spot_a, s_a_prime, spot_b, request.valuation_time, p, kernel);
        Eigen::VectorXd s_prime(n);
        for (int j = 0; j < n_a; ++j) s_prime(kernel.a_assets()[j]) = s_a_prime(j);
        for (int i = 0; i < n_b; ++i) s_prime(kernel.b_assets()[i]) = s_b_prime(i);
        return request.payoff(s_prime);
    };

    double expectation =
        gaussian_nested_integral(n_a, integrand, quad_tol_for(quad, n_a), quad.order);

    PriceResult out;
    out.value = discount_wrap(expectation, request.valuation_time, p);
    out.method_used = "quadrature";
    out.region = ctx.region;
    out.n_a = n_a;
    out.n_b = n_b;
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

PriceResult price_monte_carlo(const PricingRequest& request, long paths, std::uint64_t seed) {
    if (paths < 1000) throw DomainError("monte carlo requires at least 1000 paths");
    RequestContext ctx = analyze(request);
    const MarketParams& p = request.params;
    const int n = p.n();
    if (ctx.t == 0.0) {
        PriceResult out = expiry_result(request, ctx, "monte_carlo");
        out.std_error = 0.0;
        return out;
    }

    // Square root of rho valid at any rank: U diag(sqrt(max(lambda, 0))).
    Eigen::MatrixXd l_factor = ctx.decomp.basis;
    for (int k = 0; k < n; ++k)
        l_factor.col(k) *= std::sqrt(std::max(ctx.decomp.eigenvalues(k), 0.0));

    Eigen::VectorXd drift(n), diffusion(n);
    double sqrt_t = std::sqrt(ctx.t);
    for (int i = 0; i < n; ++i) {
        drift(i) = (p.rate - 0.5 * p.vols[i] * p.vols[i]) * ctx.t;
        diffusion(i) = p.vols[i] * sqrt_t;
    }

    const long n_chunks = (paths + kChunk - 1) / kChunk;
    std::vector<double> chunk_sum(n_chunks, 0.0), chunk_sumsq(n_chunks, 0.0);
    std::atomic<long> next_chunk{0};

    auto worker = [&]() {
        Eigen::VectorXd g(n), z(n), s_t(n);
        for (;;) {
            long c = next_chunk.fetch_add(1);
            if (c >= n_chunks) return;
            long begin = c * kChunk;
            long end = std::min(paths, begin + kChunk);
            double sum = 0.0, sumsq = 0.0;
            for (long path = begin; path < end; ++path) {
                NormalStream stream(seed, static_cast<std::uint64_t>(path));
                for (int i = 0; i < n; ++i) g(i) = stream.next();
                z.noalias() = l_factor * g;
                for (int i = 0; i < n; ++i)
                    s_t(i) = request.spot(i) * std::exp(drift(i) + diffusion(i) * z(i));
                double pay = request.payoff(s_t);
                sum += pay;
                sumsq += pay * pay;
            }
            chunk_sum[c] = sum;
            chunk_sumsq[c] = sumsq;
        }
    };

    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    unsigned n_workers = static_cast<unsigned>(std::min<long>(hw, n_chunks));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(n_workers);
        for (unsigned i = 0; i < n_workers; ++i) threads.emplace_back(worker);
        for (auto& th : threads) th.join();
    }

    double total = 0.0, totalsq = 0.0;
    for (long c = 0; c < n_chunks; ++c) {
        total += chunk_sum[c];
        totalsq += chunk_sumsq[c];
    }
    double mean = total / static_cast<double>(paths);
    double var = std::max(totalsq / static_cast<double>(paths) - mean * mean, 0.0);
    double discount = std::exp(-p.rate * ctx.t);

    PriceResult out;
    out.value = discount * mean;
    out.std_error = discount * std::sqrt(var / static_cast<double>(paths));
    out.method_used = "monte_carlo";
    out.region = ctx.region;
    if (ctx.region.verdict == Verdict::KummerSurface) {
        out.n_a = ctx.region.rank;
        out.n_b = ctx.region.null_count;
    }
    return out;
}

// ---------------------------------------------------------------------------
// routing

PriceResult price(const PricingRequest& request) {
    RequestContext ctx = analyze(request);  // throws IndefiniteError before any work

    if (const auto* mc = std::get_if<MonteCarloSpec>(&request.method))
        return price_monte_carlo(request, mc->paths, mc->seed);

    if (ctx.t == 0.0) return expiry_result(request, ctx, "quadrature");
    if (ctx.region.verdict == Verdict::Interior) {
        RegularKernel kernel = build_regular(ctx.decomp, ctx.t, ctx.eps_rank);
        return price_quadrature(request, kernel);
    }
    DegenerateKernel kernel = build_degenerate(ctx.decomp, ctx.eps_rank);
    return price_quadrature(request, kernel);
}

// ---------------------------------------------------------------------------
// closed forms

double closed_form_black_scholes(double S, double K, double r, double sigma, double t,
                                 OptionType type) {
    if (!(S > 0.0)) throw DomainError("black_scholes: S must be positive");
    if (!(K >= 0.0)) throw DomainError("black_scholes: K must be nonnegative");
    if (!(sigma > 0.0)) throw DomainError("black_scholes: sigma must be positive");
    if (!(t >= 0.0)) throw DomainError("black_scholes: T - tau must be nonnegative");

    if (t == 0.0) {
        double intrinsic = (type == OptionType::call) ? S - K : K - S;
        return std::max(intrinsic, 0.0);
    }
    if (K == 0.0) return (type == OptionType::call) ? S : 0.0;

    double stdev = sigma * std::sqrt(t);
    double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * t) / stdev;
    double d2 = d1 - stdev;
    if (type == OptionType::call) return S * norm_cdf(d1) - K * std::exp(-r * t) * norm_cdf(d2);
    return K * std::exp(-r * t) * norm_cdf(-d2) - S * norm_cdf(-d1);
}

double closed_form_margrabe(double S1, double S2, double sigma1, double sigma2, double rho12,
                            double t, double b) {
    if (!(S1 > 0.0) || !(S2 > 0.0)) throw DomainError("margrabe: prices must be positive");
    if (std::fabs(rho12) > 1.0) throw DomainError("margrabe: |rho| must be <= 1");
    if (!(t >= 0.0)) throw DomainError("margrabe: T - tau must be nonnegative");
    if (!(b >= 0.0)) throw DomainError("margrabe: units must be nonnegative");

    double var = sigma1 * sigma1 - 2.0 * rho12 * sigma1 * sigma2 + sigma2 * sigma2;
    double sigma_e = std::sqrt(std::max(var, 0.0));
    double stdev = sigma_e * std::sqrt(t);
    if (stdev < 1e-14) return std::max(S1 - b * S2, 0.0);

    double d1 = (std::log(S1 / (b * S2)) + 0.5 * stdev * stdev) / stdev;
    double d2 = d1 - stdev;
    return S1 * norm_cdf(d1) - b * S2 * norm_cdf(d2);
}

Eigen::VectorXd greeks_delta(const PricingRequest& request) {
    const int n = request.params.n();
    Eigen::VectorXd delta(n);
    for (int i = 0; i < n; ++i) {
        double h = 1e-4 * request.spot(i);
        PricingRequest up = request, dn = request;
        up.spot(i) += h;
        dn.spot(i) -= h;
        delta(i) = (price(up).value - price(dn).value) / (2.0 * h);
    }
    return delta;
}

}  // namespace mabs
