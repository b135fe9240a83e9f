#include <cmath>

#include "doctest.h"
#include "mabs/oracle.hpp"
#include "mabs/pricing.hpp"
#include "mabs/rng.hpp"

using namespace mabs;

TEST_CASE("fd grid validation") {
    MarketParams p(0.05, {0.2}, 1.0);
    Eigen::VectorXd s(1);
    s << 100.0;
    FDGrid g = FDGrid::standard(p, s, 64, 64);
    CHECK(g.dims == 1);
    CHECK(g.lo[0] == doctest::Approx(std::log(100.0) - 1.2));
    CHECK(g.hi[0] == doctest::Approx(std::log(100.0) + 1.2));

    FDGrid bad = g;
    bad.nodes[0] = 16;
    CHECK_THROWS_AS(fd_solve(PayoffDescriptor::vanilla_call(0, 100.0), p,
                             CorrelationMatrix{Eigen::MatrixXd::Identity(1, 1)}, bad),
                    DomainError);
    bad = g;
    bad.theta = 1.5;
    CHECK_THROWS_AS(fd_solve(PayoffDescriptor::vanilla_call(0, 100.0), p,
                             CorrelationMatrix{Eigen::MatrixXd::Identity(1, 1)}, bad),
                    DomainError);

    MarketParams p3(0.05, {0.2, 0.2, 0.2}, 1.0);
    Eigen::VectorXd s3 = Eigen::VectorXd::Constant(3, 100.0);
    FDGrid g3 = FDGrid::standard(p3, s3, 32, 32);
    CHECK_THROWS_AS(fd_solve(PayoffDescriptor::max_call(100.0), p3,
                             assemble_matrix(CorrelationPoint(3, {0, 0, 0})), g3),
                    DomainError);

    // the FD operator requires a positive definite correlation
    MarketParams p2(0.05, {0.2, 0.2}, 1.0);
    Eigen::VectorXd s2 = Eigen::VectorXd::Constant(2, 100.0);
    FDGrid g2 = FDGrid::standard(p2, s2, 48, 32);
    CHECK_THROWS_AS(fd_solve(PayoffDescriptor::basket_call({0.5, 0.5}, 100.0), p2,
                             assemble_matrix(CorrelationPoint(2, {1.0})), g2),
                    DomainError);
}

TEST_CASE("fd reproduces the discount bond uniformly") {
    MarketParams p(0.05, {0.2}, 1.0);
    Eigen::VectorXd s(1);
    s << 100.0;
    FDGrid g = FDGrid::standard(p, s, 128, 64);
    auto unit = PayoffDescriptor::custom([](const Eigen::VectorXd&) { return 1.0; });
    FDSolution sol = fd_solve(unit, p, CorrelationMatrix{Eigen::MatrixXd::Identity(1, 1)}, g);
    for (double spot : {60.0, 90.0, 100.0, 130.0, 180.0}) {
        Eigen::VectorXd v(1);
        v << spot;
        CHECK(sol.price_at_spot(v) == doctest::Approx(std::exp(-0.05)).epsilon(1e-6));
    }
}

TEST_CASE("fd matches the closed form with second-order convergence") {
    MarketParams p(0.05, {0.2}, 1.0);
    Eigen::VectorXd s(1);
    s << 100.0;
    double want = closed_form_black_scholes(100, 100, 0.05, 0.2, 1.0, OptionType::call);
    double kink_x = std::log(100.0) - 0.03;

    auto run = [&](int nodes) {
        FDGrid g = FDGrid::standard(p, s, nodes, nodes, kink_x);
        FDSolution sol = fd_solve(PayoffDescriptor::vanilla_call(0, 100.0), p,
                                  CorrelationMatrix{Eigen::MatrixXd::Identity(1, 1)}, g);
        return sol.price_at_spot(s);
    };
    double err256 = std::fabs(run(256) - want);
    double err512 = std::fabs(run(512) - want);
    CHECK(err512 / want <= 1e-3);
    double ratio = err256 / err512;
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
}

TEST_CASE("2-asset fd agrees with quadrature") {
    MarketParams p(0.05, {0.2, 0.25}, 1.0);
    Eigen::VectorXd s(2);
    s << 100.0, 95.0;
    auto basket = PayoffDescriptor::basket_call({0.5, 0.5}, 100.0);
    FDGrid g = FDGrid::standard(p, s, 96, 96);
    FDSolution sol = fd_solve(basket, p, assemble_matrix(CorrelationPoint(2, {0.5})), g);
    double fd = sol.price_at_spot(s);

    PricingRequest req{p, CorrelationPoint(2, {0.5}), s, 0.0, basket, QuadratureSpec{48, 1e-8}};
    double quad = price(req).value;
    CHECK(std::fabs(fd - quad) / quad <= 5e-3);
}

TEST_CASE("covariance probe") {
    SUBCASE("independent assets give a near-identity sample covariance") {
        auto cov = covariance_probe(assemble_matrix(CorrelationPoint(3, {0, 0, 0})), 1000000, 2);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j) CHECK(std::fabs(cov(i, j)) <= 5e-3);
    }

    SUBCASE("the all-ones vertex samples on a line") {
        auto cov = covariance_probe(assemble_matrix(CorrelationPoint(3, {1, 1, 1})), 50000, 3);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
        CHECK(es.eigenvalues()(2) > 0.5);
        CHECK(std::fabs(es.eigenvalues()(1)) <= 1e-12);
        CHECK(std::fabs(es.eigenvalues()(0)) <= 1e-12);
    }

    SUBCASE("sheet points sample with a near-null determinant and null alignment") {
        double z = *kummer_sheet_z(0.5, 0.5, SheetBranch::minus);
        auto m = assemble_matrix(CorrelationPoint(3, {0.5, 0.5, z}));
        auto cov = covariance_probe(m, 1000000, 7);
        CHECK(std::fabs(cov.determinant()) <= 5e-3);

        auto d = spectral_decompose(m);
        Eigen::VectorXd null_vec = d.basis.col(2);
        CHECK(std::fabs(d.eigenvalues(2)) <= 1e-12);
        // the quadratic form on the sample covariance only sees accumulation
        // rounding from 10^6 paths
        CHECK(std::fabs(null_vec.dot(cov * null_vec)) <= 1e-12);

        // per-draw alignment: |v . z| <= 1e-10 for every sampled point
        Eigen::MatrixXd l_factor = d.basis;
        for (int k = 0; k < 3; ++k)
            l_factor.col(k) *= std::sqrt(std::max(d.eigenvalues(k), 0.0));
        for (long path = 0; path < 10000; ++path) {
            NormalStream stream(7, static_cast<std::uint64_t>(path));
            Eigen::VectorXd g(3);
            for (int i = 0; i < 3; ++i) g(i) = stream.next();
            CHECK(std::fabs(null_vec.dot(l_factor * g)) <= 1e-10);
        }
    }

    SUBCASE("indefinite correlations are rejected") {
        CHECK_THROWS_AS(
            covariance_probe(assemble_matrix(CorrelationPoint(3, {0.9, 0.9, -0.9})), 10000, 1),
            IndefiniteError);
    }
}

TEST_CASE("semigroup probe") {
    auto d1 = spectral_decompose(CorrelationMatrix{Eigen::MatrixXd::Identity(1, 1)});
    CHECK(semigroup_probe(d1, 0.5, 0.5, 10, 1) <= 1e-6);

    auto d2 = spectral_decompose(assemble_matrix(CorrelationPoint(2, {0.37})));
    CHECK(semigroup_probe(d2, 0.4, 0.7, 20, 2) <= 1e-5);

    // t1 -> 0: the composition collapses onto the direct kernel
    CHECK(semigroup_probe(d2, 1e-4, 0.5, 10, 3) <= 1e-5);

    CHECK_THROWS_AS(semigroup_probe(d2, 0.0, 0.5, 10, 4), DomainError);
}
