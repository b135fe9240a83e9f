#include <cmath>
#include <random>

#include "doctest.h"
#include "mabs/transform.hpp"

using namespace mabs;

TEST_CASE("market params validation") {
    CHECK_THROWS_AS(MarketParams(0.05, {-0.1}, 1.0), DomainError);
    CHECK_THROWS_AS(MarketParams(0.05, {0.2}, -1.0), DomainError);
    CHECK_THROWS_AS(MarketParams(0.05, {}, 1.0), DomainError);
    CHECK_NOTHROW(MarketParams(0.05, {0.0, 0.2}, 1.0));  // zero vol allowed at the type level
    CHECK_NOTHROW(MarketParams(-0.01, {0.2}, 0.0));
}

TEST_CASE("log transform") {
    MarketParams p(0.05, {0.2}, 1.0);
    Eigen::VectorXd one(1);
    one << 1.0;
    auto x0 = to_log(make_price_state(one, 0.0), p);
    CHECK(x0.coords(0) == 0.0);
    CHECK(x0.space == Space::log_shifted);

    Eigen::VectorXd s(1);
    s << 100.0;
    auto x = to_log(make_price_state(s, 1.0), p);
    CHECK(x.coords(0) == doctest::Approx(4.5751701859880916).epsilon(1e-15));

    CHECK_THROWS_AS(make_price_state(Eigen::VectorXd::Zero(1), 0.0), DomainError);
    CHECK_THROWS_AS(to_log(x, p), DomainError);  // already in log space
}

TEST_CASE("discount wrap and unwrap") {
    MarketParams p(0.05, {0.2}, 1.0);
    CHECK(discount_wrap(1.0, 1.0, p) == 1.0);  // tau = T
    CHECK(discount_wrap(1.0, 0.0, p) == doctest::Approx(0.951229424500714).epsilon(1e-15));
    MarketParams zero_rate(0.0, {0.2}, 1.0);
    CHECK(discount_wrap(3.25, 0.4, zero_rate) == 3.25);
    CHECK(discount_unwrap(discount_wrap(2.5, 0.3, p), 0.3, p) ==
          doctest::Approx(2.5).epsilon(1e-15));
    CHECK_THROWS_AS(discount_wrap(1.0, 1.5, p), DomainError);
}

TEST_CASE("vol scaling") {
    MarketParams p(0.05, {0.2}, 1.0);
    StateVector x{Eigen::VectorXd::Zero(1), Space::log_shifted, 0.0, TimeKind::calendar};
    CHECK(scale_by_vol(x, p).coords(0) == 0.0);
    x.coords(0) = 0.4;
    CHECK(scale_by_vol(x, p).coords(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(unscale_by_vol(scale_by_vol(x, p), p).coords(0) ==
          doctest::Approx(0.4).epsilon(1e-14));

    MarketParams degenerate(0.05, {0.0}, 1.0);
    CHECK_THROWS_AS(scale_by_vol(x, degenerate), DomainError);
}

TEST_CASE("forward time") {
    MarketParams p(0.05, {0.2}, 2.0);
    CHECK(forward_time(2.0, p) == 0.0);
    CHECK(forward_time(0.0, p) == 2.0);
    CHECK(forward_time(0.5, p) == 1.5);
    CHECK(calendar_time(forward_time(0.7, p), p) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK_THROWS_AS(forward_time(-0.1, p), DomainError);
    CHECK_THROWS_AS(forward_time(2.1, p), DomainError);
}

TEST_CASE("diagonalizing rotation") {
    // identity correlation: zeta = chi under the sign convention
    auto id = spectral_decompose(assemble_matrix(CorrelationPoint(3, {0, 0, 0})));
    Eigen::VectorXd chi(3);
    chi << 0.3, -1.2, 0.7;
    StateVector sv{chi, Space::vol_scaled, 0.5, TimeKind::calendar};
    auto zeta = to_diagonal(sv, id);
    CHECK(zeta.coords.isApprox(chi));
    CHECK(zeta.space == Space::diagonal);

    // perfectly correlated pair: chi = (1,1) maps to (sqrt(2), 0)
    auto pair = spectral_decompose(assemble_matrix(CorrelationPoint(2, {1.0})));
    Eigen::VectorXd chi2(2);
    chi2 << 1.0, 1.0;
    auto z2 = to_diagonal(StateVector{chi2, Space::vol_scaled, 0.0, TimeKind::calendar}, pair);
    CHECK(z2.coords(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(std::fabs(z2.coords(1)) <= 1e-14);

    // norm preservation on random states
    std::mt19937_64 gen(9);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd v(3);
        for (int i = 0; i < 3; ++i) v(i) = normal(gen);
        auto z = to_diagonal(StateVector{v, Space::vol_scaled, 0.0, TimeKind::calendar}, id);
        CHECK(std::fabs(z.coords.norm() - v.norm()) <= 1e-12);
        auto back = from_diagonal(z, id);
        CHECK(back.coords.isApprox(v, 1e-12));
    }

    Eigen::VectorXd wrong(2);
    wrong << 1.0, 2.0;
    CHECK_THROWS_AS(
        to_diagonal(StateVector{wrong, Space::vol_scaled, 0.0, TimeKind::calendar}, id),
        DomainError);
}

TEST_CASE("alpha vector") {
    MarketParams p(0.05, {0.2}, 1.0);
    Eigen::VectorXd s(1), sp(1);
    s << 100.0;
    sp << 100.0;
    CHECK(alpha_vector(s, sp, 1.0, p)(0) == 0.0);  // tau = T, same prices
    CHECK(alpha_vector(s, sp, 0.0, p)(0) == doctest::Approx(0.15).epsilon(1e-14));

    // antisymmetry of the log-ratio part at tau = T
    Eigen::VectorXd a(1), b(1);
    a << 140.0;
    b << 95.0;
    CHECK(alpha_vector(a, b, 1.0, p)(0) == doctest::Approx(-alpha_vector(b, a, 1.0, p)(0)));

    Eigen::VectorXd bad(1);
    bad << -1.0;
    CHECK_THROWS_AS(alpha_vector(bad, sp, 0.0, p), DomainError);
}

TEST_CASE("full chain round trip is the identity") {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 2 + static_cast<int>(gen() % 5);
        std::vector<double> vols(n);
        for (double& v : vols) v = 0.1 + 0.4 * u(gen);
        MarketParams p(0.01 + 0.08 * u(gen), vols, 2.0);

        std::vector<double> corr(n * (n - 1) / 2);
        for (double& c : corr) c = -0.6 + 1.2 * u(gen);
        auto d = spectral_decompose(assemble_matrix(CorrelationPoint(n, corr)));

        Eigen::VectorXd s(n);
        for (int i = 0; i < n; ++i) s(i) = 20.0 + 200.0 * u(gen);
        double tau = 2.0 * u(gen);

        auto state = make_price_state(s, tau);
        auto zeta = to_diagonal(scale_by_vol(to_log(state, p), p), d);
        double t = forward_time(tau, p);
        CHECK(zeta.space == Space::diagonal);
        auto back = from_log(unscale_by_vol(from_diagonal(zeta, d), p), p);
        CHECK(calendar_time(t, p) == doctest::Approx(tau).epsilon(1e-12));
        for (int i = 0; i < n; ++i)
            CHECK(back.coords(i) == doctest::Approx(s(i)).epsilon(1e-10));
    }
}
