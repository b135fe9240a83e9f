#include <cmath>
#include <set>

#include "doctest.h"
#include "mabs/errors.hpp"
#include "mabs/quadrature.hpp"
#include "mabs/rng.hpp"

using namespace mabs;

namespace {
double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
}  // namespace

TEST_CASE("gauss-hermite rule") {
    const auto& gh = gauss_hermite(64);
    double w_sum = 0.0, m2 = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
        w_sum += gh.weights[i];
        m2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
        m4 += gh.weights[i] * std::pow(gh.nodes[i], 4);
    }
    CHECK(w_sum == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(m2 == doctest::Approx(0.5 * std::sqrt(M_PI)).epsilon(1e-13));
    CHECK(m4 == doctest::Approx(0.75 * std::sqrt(M_PI)).epsilon(1e-13));
    CHECK_THROWS_AS(gauss_hermite(0), DomainError);
}

TEST_CASE("gauss-legendre rule") {
    const auto& gl = gauss_legendre(16);
    double w_sum = 0.0, m4 = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        w_sum += gl.weights[i];
        m4 += gl.weights[i] * std::pow(gl.nodes[i], 4);
    }
    CHECK(w_sum == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(m4 == doctest::Approx(0.4).epsilon(1e-13));
}

TEST_CASE("gaussian line integral handles smooth and kinked integrands") {
    CHECK(gaussian_line_integral([](double) { return 1.0; }, 1e-12, 64) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gaussian_line_integral([](double z) { return z * z; }, 1e-12, 64) ==
          doctest::Approx(1.0).epsilon(1e-11));

    // E[(Z - k)^+] = phi(k) - k (1 - Phi(k))
    for (double k : {-1.3, 0.0, 0.3, 2.1}) {
        double want = std::exp(-0.5 * k * k) / std::sqrt(2 * M_PI) - k * (1.0 - norm_cdf(k));
        double got = gaussian_line_integral([k](double z) { return std::max(z - k, 0.0); },
                                            1e-12, 64);
        CHECK(got == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("nested gaussian integral") {
    // E[z1^2 z2^2] = 1 for independent standard normals
    double m22 = gaussian_nested_integral(
        2, [](const Eigen::VectorXd& u) { return u(0) * u(0) * u(1) * u(1); }, 1e-10, 32);
    CHECK(m22 == doctest::Approx(1.0).epsilon(1e-8));

    // E[(z1 + z2 - 1)^+]: reduces to sqrt(2) E[(U - 1/sqrt(2))^+], U standard
    double k = 1.0 / std::sqrt(2.0);
    double want = std::sqrt(2.0) *
                  (std::exp(-0.5 * k * k) / std::sqrt(2 * M_PI) - k * (1.0 - norm_cdf(k)));
    double got = gaussian_nested_integral(
        2, [](const Eigen::VectorXd& u) { return std::max(u(0) + u(1) - 1.0, 0.0); }, 1e-10, 32);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("philox known-answer vectors") {
    // Random123 kat_vectors, philox4x32-10
    auto zeros = philox4x32(0, 0, 0);
    CHECK(zeros[0] == 0x6627e8d5u);
    CHECK(zeros[1] == 0xe169c58du);
    CHECK(zeros[2] == 0xbc57ac4cu);
    CHECK(zeros[3] == 0x9b00dbd8u);

    auto ones = philox4x32(~0ULL, ~0ULL, ~0ULL);
    CHECK(ones[0] == 0x408f276du);
    CHECK(ones[1] == 0x41c83b0eu);
    CHECK(ones[2] == 0xa20bc7c6u);
    CHECK(ones[3] == 0x6d5451fdu);

    auto pi = philox4x32(0x299f31d0a4093822ULL, 0x0370734413198a2eULL, 0x85a308d3243f6a88ULL);
    CHECK(pi[0] == 0xd16cfe09u);
    CHECK(pi[1] == 0x94fdccebu);
    CHECK(pi[2] == 0x5001e420u);
    CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("normal streams are deterministic and path indexed") {
    NormalStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    for (int i = 0; i < 16; ++i) {
        double va = a.next();
        CHECK(va == b.next());
        CHECK(va != c.next());
        CHECK(va != d.next());
        CHECK(std::isfinite(va));
    }

    // moments over many paths
    double sum = 0.0, sum2 = 0.0;
    const long paths = 20000;
    for (long p = 0; p < paths; ++p) {
        NormalStream s(1, static_cast<std::uint64_t>(p));
        for (int k = 0; k < 4; ++k) {
            double z = s.next();
            sum += z;
            sum2 += z * z;
        }
    }
    double n = 4.0 * paths;
    CHECK(std::fabs(sum / n) <= 0.02);
    CHECK(std::fabs(sum2 / n - 1.0) <= 0.02);
}
