#include "mabs/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "mabs/errors.hpp"

namespace mabs {

namespace {

constexpr double kZMax = 10.0;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix,
// weights mu0 * (first eigenvector component)^2.
QuadratureRule golub_welsch(int order, const std::function<double(int)>& off_diag, double mu0) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        double b = off_diag(k);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    if (es.info() != Eigen::Success) throw NumericError("quadrature eigensolver failed");
    QuadratureRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        rule.nodes[i] = es.eigenvalues()(i);
        double v0 = es.eigenvectors()(0, i);
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

const QuadratureRule& cached(std::map<int, QuadratureRule>& cache, std::mutex& mu, int order,
                             const std::function<QuadratureRule(int)>& make) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make(order)).first;
    return it->second;
}

double panel(const QuadratureRule& gl, const std::function<double(double)>& g, double a,
             double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i)
        s += gl.weights[i] * g(mid + half * gl.nodes[i]);
    return half * s;
}

double adapt(const QuadratureRule& gl, const std::function<double(double)>& g, double a, double b,
             double whole, double tol, int depth) {
    double mid = 0.5 * (a + b);
    double left = panel(gl, g, a, mid);
    double right = panel(gl, g, mid, b);
    if (std::fabs(whole - (left + right)) <= tol || depth >= 48) return left + right;
    return adapt(gl, g, a, mid, left, 0.5 * tol, depth + 1) +
           adapt(gl, g, mid, b, right, 0.5 * tol, depth + 1);
}

double line_integral(const QuadratureRule& gl, const std::function<double(double)>& f,
                     double tol) {
    auto g = [&f](double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z) * f(z); };
    // Two symmetric start panels; refinement is driven entirely by the
    // two-half error estimate, so smooth lines stay at the base cost.
    const double knots[] = {-kZMax, 0.0, kZMax};
    double total = 0.0;
    for (int k = 0; k + 1 < 3; ++k) {
        double a = knots[k], b = knots[k + 1];
        total += adapt(gl, g, a, b, panel(gl, g, a, b), tol / 2.0, 0);
    }
    return total;
}

}  // namespace

const QuadratureRule& gauss_hermite(int order) {
    if (order < 1) throw DomainError("gauss_hermite: order must be >= 1");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mu;
    return cached(cache, mu, order, [](int n) {
        return golub_welsch(
            n, [](int k) { return std::sqrt(0.5 * k); }, std::sqrt(M_PI));
    });
}

const QuadratureRule& gauss_legendre(int order) {
    if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
    static std::map<int, QuadratureRule> cache;
    static std::mutex mu;
    return cached(cache, mu, order, [](int n) {
        return golub_welsch(
            n, [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); }, 2.0);
    });
}

double gaussian_line_integral(const std::function<double(double)>& f, double tol, int order) {
    return line_integral(gauss_legendre(order), f, tol);
}

namespace {

double nested(const QuadratureRule& gl, int dims, int level, Eigen::VectorXd& u,
              const std::function<double(const Eigen::VectorXd&)>& f, double tol,
              double weight_so_far) {
    // Error budget: each level integrates against a unit-mass density, so a
    // per-level tolerance of tol/dims bounds the total. Inner lines may relax
    // by the accumulated outer weight (their error is multiplied back down).
    double local_tol = (tol / dims) / std::max(weight_so_far, 1e-12);
    if (level == dims - 1) {
        auto g = [&](double z) {
            u(level) = z;
            return f(u);
        };
        return line_integral(gl, g, local_tol);
    }
    auto g = [&](double z) {
        u(level) = z;
        double w = kInvSqrt2Pi * std::exp(-0.5 * z * z);
        Eigen::VectorXd u_copy = u;
        return nested(gl, dims, level + 1, u_copy, f, tol, weight_so_far * std::min(w, 1.0));
    };
    return line_integral(gl, g, local_tol);
}

}  // namespace

double gaussian_nested_integral(int dims, const std::function<double(const Eigen::VectorXd&)>& f,
                                double tol, int order) {
    if (dims < 1) throw DomainError("gaussian_nested_integral: dims must be >= 1");
    Eigen::VectorXd u = Eigen::VectorXd::Zero(dims);
    return nested(gauss_legendre(order), dims, 0, u, f, tol, 1.0);
}

}  // namespace mabs
