#include <catch2/catch_amalgamated.hpp>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "regress/regress.hpp"

#include <cmath>

using namespace olymp;
using namespace olymp::regress;
using Catch::Approx;

namespace {

DesignMatrix random_design(Rng& rng, int n, int p, bool intercept = true) {
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) X(i, j) = (intercept && j == 0) ? 1.0 : normal(rng);
    return DesignMatrix(X, {});
}

// Normal equations solved by Gauss-Jordan elimination in long double.
Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const int p = static_cast<int>(X.cols());
    std::vector<std::vector<long double>> A(p, std::vector<long double>(p + 1, 0.0L));
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b)
            for (int i = 0; i < X.rows(); ++i) A[a][b] += (long double)X(i, a) * X(i, b);
        for (int i = 0; i < X.rows(); ++i) A[a][p] += (long double)X(i, a) * y(i);
    }
    for (int c = 0; c < p; ++c) {
        int piv = c;
        for (int r = c + 1; r < p; ++r)
            if (std::fabs(A[r][c]) > std::fabs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        for (int r = 0; r < p; ++r) {
            if (r == c) continue;
            const long double f = A[r][c] / A[c][c];
            for (int k = c; k <= p; ++k) A[r][k] -= f * A[c][k];
        }
    }
    Eigen::VectorXd out(p);
    for (int c = 0; c < p; ++c) out(c) = static_cast<double>(A[c][p] / A[c][c]);
    return out;
}

} // namespace

TEST_CASE("ols exact and intercept-only fits", "[regress]") {
    Rng rng = derived_rng(41, 0);
    const auto X = random_design(rng, 50, 3);
    const Eigen::Vector3d beta(1.5, -2.0, 0.25);
    const Eigen::VectorXd y = X.values * beta;
    const auto fit = ols(X, y);
    CHECK((fit.coefficients - beta).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(fit.standard_errors.maxCoeff() <= 1e-8);

    Eigen::VectorXd z(4);
    z << 1, 2, 3, 10;
    const auto mean_fit = ols(DesignMatrix(Eigen::MatrixXd::Ones(4, 1), {"const"}), z);
    CHECK(mean_fit.coef("const") == Approx(4.0).epsilon(1e-14));
}

TEST_CASE("ols agrees with the normal-equations oracle and leaves orthogonal residuals", "[regress]") {
    Rng rng = derived_rng(42, 0);
    const auto X = random_design(rng, 200, 5);
    Eigen::VectorXd y(200);
    for (int i = 0; i < 200; ++i) y(i) = X.values.row(i).sum() + normal(rng);
    const auto fit = ols(X, y);
    const auto oracle = normal_equations(X.values, y);
    CHECK((fit.coefficients - oracle).cwiseAbs().maxCoeff() <= 1e-8);
    const double scale = X.values.cwiseAbs().maxCoeff() * y.cwiseAbs().maxCoeff();
    CHECK((X.values.transpose() * fit.residuals).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    CHECK(fit.dof == 195);
}

TEST_CASE("ols rank deficiency names the collinear column", "[regress]") {
    Eigen::MatrixXd X(6, 3);
    X << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8, 1, 5, 10, 1, 6, 12;
    try {
        ols(DesignMatrix(X, {"const", "a", "twice_a"}), Eigen::VectorXd::Ones(6));
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        CHECK((msg.find("twice_a") != std::string::npos || msg.find("a") != std::string::npos));
    }
}

TEST_CASE("cluster-robust standard errors match an explicit sandwich", "[regress]") {
    Rng rng = derived_rng(43, 0);
    const int n = 60;
    const auto X = random_design(rng, n, 2);
    Eigen::VectorXd y(n);
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
        ids.push_back("g" + std::to_string(i % 6));
        y(i) = 1.0 + 0.5 * X.values(i, 1) + normal(rng) + 0.3 * (i % 6);
    }
    const auto fit = ols(X, y, ids);
    const Eigen::MatrixXd bread = (X.values.transpose() * X.values).inverse();
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(2, 2);
    for (int g = 0; g < 6; ++g) {
        Eigen::Vector2d s = Eigen::Vector2d::Zero();
        for (int i = g; i < n; i += 6) s += X.values.row(i).transpose() * fit.residuals(i);
        meat += s * s.transpose();
    }
    const Eigen::MatrixXd V = (6.0 / 5.0) * (59.0 / 58.0) * bread * meat * bread;
    CHECK(fit.standard_errors(1) == Approx(std::sqrt(V(1, 1))).epsilon(1e-10));
    CHECK(fit.n_clusters == 6);
}

TEST_CASE("logit_mle behaviour", "[regress]") {
    // Balanced labels independent of x.
    Eigen::MatrixXd X(8, 2);
    X << 1, -1, 1, -1, 1, 1, 1, 1, 1, -2, 1, -2, 1, 2, 1, 2;
    Eigen::VectorXd y(8);
    y << 0, 1, 0, 1, 0, 1, 0, 1;
    const auto fit = logit_mle(DesignMatrix(X, {"const", "x"}), y);
    CHECK(fit.converged);
    CHECK(std::abs(fit.coefficients(0)) < 1e-8);
    CHECK(std::abs(fit.coefficients(1)) < 1e-8);
    CHECK(fit.gradient_norm < 1e-8);

    // Complete separation at x = 0.
    Eigen::VectorXd ysep(8);
    ysep << 0, 0, 1, 1, 0, 0, 1, 1;
    CHECK_THROWS_AS(logit_mle(DesignMatrix(X, {"const", "x"}), ysep), DomainError);

    CHECK_THROWS_AS(logit_mle(DesignMatrix(X, {"const", "x"}), Eigen::VectorXd::Ones(8)), DomainError);
}

TEST_CASE("logit_mle recovers generator coefficients", "[regress]") {
    Rng rng = derived_rng(44, 0);
    const int n = 5000;
    const Eigen::Vector3d truth(-0.5, 1.2, -0.8);
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = normal(rng);
        X(i, 2) = bernoulli(rng, 0.4) ? 1.0 : 0.0;
        const double p = 1.0 / (1.0 + std::exp(-X.row(i).dot(truth)));
        y(i) = bernoulli(rng, p) ? 1.0 : 0.0;
    }
    const auto fit = logit_mle(DesignMatrix(X, {}), y);
    for (int j = 0; j < 3; ++j) CHECK(std::abs(fit.coefficients(j) - truth(j)) <= 3.0 * fit.standard_errors(j));
}

TEST_CASE("analytic gradients match central differences", "[regress][property]") {
    Rng rng = derived_rng(45, 0);
    const int n = 40;
    const auto X = random_design(rng, n, 4);
    Eigen::VectorXd yb(n), yc(n), w(n);
    for (int i = 0; i < n; ++i) {
        yb(i) = bernoulli(rng, 0.5);
        yc(i) = static_cast<double>(poisson(rng, 2.0));
        w(i) = uniform(rng, 0.5, 2.0);
    }
    LogitOptions lo;
    lo.l2 = 0.3;
    PoissonOptions po;
    po.weights = w;
    po.offset = Eigen::VectorXd::Constant(n, 0.1);
    for (int trial = 0; trial < 10; ++trial) {
        Eigen::VectorXd b(4);
        for (int j = 0; j < 4; ++j) b(j) = uniform(rng, -0.5, 0.5);
        const auto gl = logit_gradient(X.values, yb, w, b, lo);
        const auto gp = poisson_smooth_gradient(X.values, yc, b, 0.05, po);
        for (int j = 0; j < 4; ++j) {
            const double h = 1e-5;
            Eigen::VectorXd up = b, dn = b;
            up(j) += h;
            dn(j) -= h;
            const double fl = (logit_loglik(X.values, yb, w, up, lo) - logit_loglik(X.values, yb, w, dn, lo)) / (2 * h);
            const double fp = (poisson_smooth_objective(X.values, yc, up, 0.05, po) -
                               poisson_smooth_objective(X.values, yc, dn, 0.05, po)) / (2 * h);
            CHECK(std::abs(gl(j) - fl) <= 1e-6 * std::max(1.0, std::abs(fl)));
            CHECK(std::abs(gp(j) - fp) <= 1e-6 * std::max(1.0, std::abs(fp)));
        }
    }
}

TEST_CASE("elastic_net_poisson closed forms", "[regress]") {
    Eigen::VectorXd y(6);
    y << 0, 1, 2, 3, 5, 1;
    const auto fit = elastic_net_poisson(DesignMatrix(Eigen::MatrixXd::Ones(6, 1), {"const"}), y, 0.0, 0.0);
    CHECK(fit.coefficients(0) == Approx(std::log(2.0)).epsilon(1e-8));

    Rng rng = derived_rng(46, 0);
    const auto X = random_design(rng, 100, 4);
    Eigen::VectorXd counts(100);
    for (int i = 0; i < 100; ++i) counts(i) = static_cast<double>(poisson(rng, std::exp(0.5 + 0.3 * X.values(i, 1))));
    const auto sparse = elastic_net_poisson(X, counts, 1e5, 0.0);
    for (int j = 1; j < 4; ++j) CHECK(sparse.coefficients(j) == 0.0);
    CHECK(sparse.coefficients(0) == Approx(std::log(counts.mean())).epsilon(1e-6));

    CHECK_THROWS_AS(elastic_net_poisson(X, counts, -1.0, 0.0), DomainError);
    Eigen::VectorXd negative = counts;
    negative(0) = -1;
    CHECK_THROWS_AS(elastic_net_poisson(X, negative, 0.1, 0.0), DomainError);
}

TEST_CASE("elastic_net_poisson objective is monotone and matches a grid search", "[regress]") {
    Rng rng = derived_rng(47, 0);
    const int n = 300;
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = normal(rng);
        y(i) = static_cast<double>(poisson(rng, std::exp(0.8 + 0.4 * X(i, 1))));
    }
    const auto fit = elastic_net_poisson(DesignMatrix(X, {"const", "x"}), y, 0.1, 0.05);
    CHECK(fit.converged);
    for (std::size_t k = 1; k < fit.objective_trace.size(); ++k)
        CHECK(fit.objective_trace[k] <= fit.objective_trace[k - 1] + 1e-12 * std::abs(fit.objective_trace[k - 1]));

    // Zooming grid search over (b0, b1).
    double c0 = 0.0, c1 = 0.0, width = 4.0, best = INFINITY;
    for (int level = 0; level < 12; ++level) {
        double b0s = c0, b1s = c1;
        for (int a = -20; a <= 20; ++a)
            for (int b = -20; b <= 20; ++b) {
                Eigen::Vector2d beta(c0 + width * a / 20.0, c1 + width * b / 20.0);
                const double f = poisson_objective(X, y, beta, 0.1, 0.05);
                if (f < best) {
                    best = f;
                    b0s = beta(0);
                    b1s = beta(1);
                }
            }
        c0 = b0s;
        c1 = b1s;
        width /= 4.0;
    }
    CHECK(std::abs(fit.objective - best) <= 1e-4);
}
