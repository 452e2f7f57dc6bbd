#include "regress/regress.hpp"

#include "common/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <map>

namespace olymp::regress {

DesignMatrix::DesignMatrix(Eigen::MatrixXd v, std::vector<std::string> names)
    : values(std::move(v)), column_names(std::move(names)) {
    if (column_names.empty())
        for (Eigen::Index j = 0; j < values.cols(); ++j) column_names.push_back("x" + std::to_string(j));
}

void DesignMatrix::validate() const {
    if (static_cast<Eigen::Index>(column_names.size()) != values.cols())
        throw DomainError("design matrix: column name count does not match column count");
    if (!values.allFinite()) throw DomainError("design matrix: non-finite entries");
}

double FitResult::coef(const std::string& name) const {
    const auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) throw DomainError("no coefficient named '" + name + "'");
    return coefficients(it - column_names.begin());
}

double FitResult::se(const std::string& name) const {
    const auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) throw DomainError("no coefficient named '" + name + "'");
    return standard_errors(it - column_names.begin());
}

double two_sided_p(double estimate, double se, int dof) {
    if (!(se > 0.0)) return estimate == 0.0 ? 1.0 : 0.0;
    const double z = std::abs(estimate / se);
    if (dof <= 0) {
        const boost::math::normal_distribution<double> n;
        return std::clamp(2.0 * boost::math::cdf(boost::math::complement(n, z)), 0.0, 1.0);
    }
    const boost::math::students_t_distribution<double> t(dof);
    return std::clamp(2.0 * boost::math::cdf(boost::math::complement(t, z)), 0.0, 1.0);
}

OlsResult ols(const DesignMatrix& X, const Eigen::VectorXd& y, const std::optional<std::vector<std::string>>& clusters) {
    X.validate();
    const Eigen::Index n = X.rows(), p = X.cols();
    if (y.size() != n) throw DomainError("ols: response length does not match design rows");
    if (!y.allFinite()) throw DomainError("ols: non-finite response");
    if (p == 0) throw DomainError("ols: design has no columns");
    if (n < p) throw DomainError("ols: fewer rows than columns");

    // Scale columns so the rank test is insensitive to units.
    Eigen::VectorXd scale = X.values.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < p; ++j)
        if (scale(j) == 0.0) scale(j) = 1.0;
    const Eigen::MatrixXd Xs = X.values * scale.cwiseInverse().asDiagonal();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
    qr.setThreshold(1e-10);
    if (qr.rank() < p) {
        std::string names;
        const auto& perm = qr.colsPermutation().indices();
        for (Eigen::Index k = qr.rank(); k < p; ++k) {
            if (!names.empty()) names += ", ";
            names += X.column_names[static_cast<std::size_t>(perm(k))];
        }
        throw DomainError("ols: design is rank deficient; collinear columns: " + names);
    }

    OlsResult r;
    r.column_names = X.column_names;
    r.coefficients = qr.solve(y).cwiseQuotient(scale);
    r.residuals = y - X.values * r.coefficients;
    r.ssr = r.residuals.squaredNorm();
    const double mean = y.mean();
    const double sst = (y.array() - mean).square().sum();
    r.r_squared = sst > 0.0 ? 1.0 - r.ssr / sst : 1.0;
    r.adj_r_squared = n > p ? 1.0 - (1.0 - r.r_squared) * static_cast<double>(n - 1) / static_cast<double>(n - p)
                            : r.r_squared;
    r.objective = r.ssr;
    r.converged = true;

    // (X'X)^-1 from the scaled R factor.
    const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(p, p).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd Rinv =
        R.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd inv_scaled = Rinv * Rinv.transpose();
    Eigen::MatrixXd xtx_inv(p, p);
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = 0; b < p; ++b)
            xtx_inv(perm(a), perm(b)) = inv_scaled(a, b) / (scale(perm(a)) * scale(perm(b)));

    if (clusters) {
        if (static_cast<Eigen::Index>(clusters->size()) != n) throw DomainError("ols: cluster id count mismatch");
        std::map<std::string, Eigen::VectorXd> scores;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto [it, inserted] = scores.try_emplace((*clusters)[static_cast<std::size_t>(i)], Eigen::VectorXd::Zero(p));
            it->second += X.values.row(i).transpose() * r.residuals(i);
        }
        const Eigen::Index g = static_cast<Eigen::Index>(scores.size());
        if (g < 2) throw DomainError("ols: clustered standard errors need at least two clusters");
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
        for (const auto& [_, s] : scores) meat += s * s.transpose();
        const double factor = static_cast<double>(g) / static_cast<double>(g - 1) *
                              static_cast<double>(n - 1) / static_cast<double>(std::max<Eigen::Index>(n - p, 1));
        r.covariance = factor * xtx_inv * meat * xtx_inv;
        r.n_clusters = static_cast<int>(g);
        r.dof = static_cast<int>(g - 1);
    } else {
        const double sigma2 = n > p ? r.ssr / static_cast<double>(n - p) : 0.0;
        r.covariance = sigma2 * xtx_inv;
        r.dof = static_cast<int>(n - p);
    }
    r.standard_errors = r.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    r.gradient_norm = (X.values.transpose() * r.residuals).cwiseAbs().maxCoeff();
    return r;
}

namespace {

Eigen::VectorXd ones_if_empty(const Eigen::VectorXd& w, Eigen::Index n) {
    return w.size() == 0 ? Eigen::VectorXd::Ones(n) : w;
}

Eigen::VectorXd penalty_mask(Eigen::Index p, const std::optional<Eigen::Index>& intercept) {
    Eigen::VectorXd m = Eigen::VectorXd::Ones(p);
    if (intercept && *intercept >= 0 && *intercept < p) m(*intercept) = 0.0;
    return m;
}

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

double logit_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w_in,
                    const Eigen::VectorXd& beta, const LogitOptions& options) {
    const Eigen::VectorXd w = ones_if_empty(w_in, X.rows());
    const Eigen::VectorXd eta = X * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) ll += w(i) * (y(i) * eta(i) - log1pexp(eta(i)));
    const Eigen::VectorXd mask = penalty_mask(beta.size(), options.intercept);
    return ll - options.l2 * beta.cwiseProduct(mask).squaredNorm();
}

Eigen::VectorXd logit_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w_in,
                               const Eigen::VectorXd& beta, const LogitOptions& options) {
    const Eigen::VectorXd w = ones_if_empty(w_in, X.rows());
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd resid(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) resid(i) = w(i) * (y(i) - sigmoid(eta(i)));
    const Eigen::VectorXd mask = penalty_mask(beta.size(), options.intercept);
    return X.transpose() * resid - 2.0 * options.l2 * beta.cwiseProduct(mask);
}

FitResult logit_mle(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights,
                    const LogitOptions& options) {
    X.validate();
    const Eigen::Index n = X.rows(), p = X.cols();
    if (y.size() != n) throw DomainError("logit_mle: response length does not match design rows");
    if ((y.array() < 0.0).any() || (y.array() > 1.0).any()) throw DomainError("logit_mle: labels must lie in [0, 1]");
    const Eigen::VectorXd w = ones_if_empty(weights, n);
    if (w.size() != n || (w.array() < 0.0).any()) throw DomainError("logit_mle: invalid weights");
    const double pos = w.dot(y), neg = w.dot((1.0 - y.array()).matrix());
    if (!(pos > 0.0) || !(neg > 0.0)) throw DomainError("logit_mle: both outcome classes must be present");

    const Eigen::VectorXd mask = penalty_mask(p, options.intercept);
    FitResult r;
    r.column_names = X.column_names;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    double ll = logit_loglik(X.values, y, w, beta, options);
    r.objective_trace.push_back(ll);

    Eigen::MatrixXd H(p, p);
    for (int it = 1; it <= options.max_iter; ++it) {
        const Eigen::VectorXd g = logit_gradient(X.values, y, w, beta, options);
        r.gradient_norm = g.cwiseAbs().maxCoeff();
        r.n_iter = it - 1;
        if (r.gradient_norm < options.tolerance) {
            r.converged = true;
            break;
        }
        const Eigen::VectorXd eta = X.values * beta;
        Eigen::VectorXd curv(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double q = sigmoid(eta(i));
            curv(i) = w(i) * q * (1.0 - q);
        }
        H = X.values.transpose() * curv.asDiagonal() * X.values;
        H.diagonal() += 2.0 * options.l2 * mask;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        Eigen::VectorXd step = ldlt.solve(g);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) step = g;

        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 60; ++k, t *= 0.5) {
            const Eigen::VectorXd trial = beta + t * step;
            const double ll_trial = logit_loglik(X.values, y, w, trial, options);
            if (std::isfinite(ll_trial) && ll_trial >= ll) {
                beta = trial;
                ll = ll_trial;
                accepted = true;
                break;
            }
        }
        r.objective_trace.push_back(ll);
        if (!accepted) break;
    }

    r.coefficients = beta;
    r.objective = ll;
    if (options.l2 == 0.0) {
        const Eigen::VectorXd eta = X.values * beta;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) worst = std::max(worst, w(i) * std::abs(y(i) - sigmoid(eta(i))));
        if (beta.cwiseAbs().maxCoeff() > 10.0 && worst < 1e-5)
            throw DomainError("logit_mle: perfect separation; coefficients diverge");
    }
    if (!r.converged)
        throw NonConvergenceError("logit_mle: gradient norm " + std::to_string(r.gradient_norm) + " above tolerance",
                                  std::vector<double>(beta.data(), beta.data() + p), r.gradient_norm);

    const Eigen::VectorXd eta = X.values * beta;
    Eigen::VectorXd curv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double q = sigmoid(eta(i));
        curv(i) = w(i) * q * (1.0 - q);
    }
    H = X.values.transpose() * curv.asDiagonal() * X.values;
    H.diagonal() += 2.0 * options.l2 * mask;
    r.covariance = H.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    r.standard_errors = r.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return r;
}

namespace {

struct PoissonTerms {
    Eigen::VectorXd w;
    Eigen::VectorXd offset;
    Eigen::VectorXd mask;
};

PoissonTerms poisson_terms(const Eigen::MatrixXd& X, const Eigen::VectorXd& beta, const PoissonOptions& o) {
    PoissonTerms t;
    t.w = ones_if_empty(o.weights, X.rows());
    t.offset = o.offset.size() == 0 ? Eigen::VectorXd::Zero(X.rows()) : o.offset;
    t.mask = penalty_mask(beta.size(), o.intercept);
    return t;
}

} // namespace

double poisson_smooth_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                double rho2, const PoissonOptions& options) {
    const auto t = poisson_terms(X, beta, options);
    const Eigen::VectorXd eta = X * beta + t.offset;
    double f = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) f += t.w(i) * (std::exp(eta(i)) - y(i) * eta(i));
    return f + rho2 * beta.cwiseProduct(t.mask).squaredNorm();
}

Eigen::VectorXd poisson_smooth_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& beta, double rho2, const PoissonOptions& options) {
    const auto t = poisson_terms(X, beta, options);
    const Eigen::VectorXd eta = X * beta + t.offset;
    Eigen::VectorXd resid(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) resid(i) = t.w(i) * (std::exp(eta(i)) - y(i));
    return X.transpose() * resid + 2.0 * rho2 * beta.cwiseProduct(t.mask);
}

double poisson_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double rho1,
                         double rho2, const PoissonOptions& options) {
    const Eigen::VectorXd mask = penalty_mask(beta.size(), options.intercept);
    return poisson_smooth_objective(X, y, beta, rho2, options) + rho1 * beta.cwiseProduct(mask).lpNorm<1>();
}

FitResult elastic_net_poisson(const DesignMatrix& X, const Eigen::VectorXd& y, double rho1, double rho2,
                              const PoissonOptions& options) {
    X.validate();
    const Eigen::Index n = X.rows(), p = X.cols();
    if (y.size() != n) throw DomainError("elastic_net_poisson: response length does not match design rows");
    if (rho1 < 0.0 || rho2 < 0.0) throw DomainError("elastic_net_poisson: penalties must be non-negative");
    for (Eigen::Index i = 0; i < n; ++i)
        if (y(i) < 0.0 || !std::isfinite(y(i))) throw DomainError("elastic_net_poisson: counts must be non-negative");
    if (options.offset.size() != 0 && options.offset.size() != n)
        throw DomainError("elastic_net_poisson: offset length mismatch");
    if (options.weights.size() != 0 && options.weights.size() != n)
        throw DomainError("elastic_net_poisson: weights length mismatch");

    const auto terms = poisson_terms(X.values, Eigen::VectorXd::Zero(p), options);
    const Eigen::VectorXd& mask = terms.mask;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (options.start.size() == p) {
        beta = options.start;
    } else if (options.intercept && *options.intercept < p) {
        const double wy = terms.w.dot(y);
        const double wexp = terms.w.dot(terms.offset.array().exp().matrix());
        if (wy > 0.0 && wexp > 0.0) {
            // Only meaningful when the intercept column is constant one.
            if ((X.values.col(*options.intercept).array() == 1.0).all()) beta(*options.intercept) = std::log(wy / wexp);
        }
    }

    auto prox = [&](const Eigen::VectorXd& v, double t) {
        Eigen::VectorXd out = v;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (mask(j) == 0.0) continue;
            const double thr = t * rho1;
            out(j) = v(j) > thr ? v(j) - thr : (v(j) < -thr ? v(j) + thr : 0.0);
        }
        return out;
    };
    auto optimality = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& g) {
        double worst = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            double v;
            if (mask(j) == 0.0 || rho1 == 0.0) v = std::abs(g(j));
            else if (b(j) != 0.0) v = std::abs(g(j) + rho1 * (b(j) > 0 ? 1.0 : -1.0));
            else v = std::max(0.0, std::abs(g(j)) - rho1);
            worst = std::max(worst, v);
        }
        return worst;
    };

    FitResult r;
    r.column_names = X.column_names;
    double f = poisson_smooth_objective(X.values, y, beta, rho2, options);
    if (!std::isfinite(f)) throw DomainError("elastic_net_poisson: non-finite objective at the starting point");
    Eigen::VectorXd g = poisson_smooth_gradient(X.values, y, beta, rho2, options);
    r.objective_trace.push_back(f + rho1 * beta.cwiseProduct(mask).lpNorm<1>());

    double t = 1.0 / std::max(1.0, X.values.squaredNorm() * std::max(1.0, y.mean()));
    Eigen::VectorXd prev_beta, prev_g;
    for (int it = 1; it <= options.max_iter; ++it) {
        r.gradient_norm = optimality(beta, g);
        r.n_iter = it - 1;
        if (r.gradient_norm <= options.tolerance) {
            r.converged = true;
            break;
        }
        if (prev_beta.size() == p) {
            // Barzilai-Borwein trial step; backtracking below keeps descent monotone.
            const Eigen::VectorXd s = beta - prev_beta, d = g - prev_g;
            const double sd = s.dot(d);
            if (sd > 0.0) t = std::clamp(s.squaredNorm() / sd, 1e-12, 1e6);
        }
        bool accepted = false;
        Eigen::VectorXd candidate;
        double f_candidate = 0.0;
        for (int k = 0; k < 80; ++k) {
            candidate = prox(beta - t * g, t);
            const Eigen::VectorXd delta = candidate - beta;
            f_candidate = poisson_smooth_objective(X.values, y, candidate, rho2, options);
            if (std::isfinite(f_candidate) &&
                f_candidate <= f + g.dot(delta) + delta.squaredNorm() / (2.0 * t) + 1e-12 * std::abs(f)) {
                accepted = true;
                break;
            }
            t *= 0.5;
            if (t < 1e-300) break;
        }
        if (!accepted)
            throw NonConvergenceError("elastic_net_poisson: step size underflow at iteration " + std::to_string(it) +
                                          " (optimality " + std::to_string(r.gradient_norm) + ")",
                                      std::vector<double>(beta.data(), beta.data() + p), r.gradient_norm);
        prev_beta = beta;
        prev_g = g;
        beta = candidate;
        f = f_candidate;
        g = poisson_smooth_gradient(X.values, y, beta, rho2, options);
        const double full = f + rho1 * beta.cwiseProduct(mask).lpNorm<1>();
        r.objective_trace.push_back(full);
        if ((beta - prev_beta).cwiseAbs().maxCoeff() == 0.0) {
            r.gradient_norm = optimality(beta, g);
            r.converged = r.gradient_norm <= std::max(options.tolerance, 1e-6);
            break;
        }
    }
    r.coefficients = beta;
    r.objective = f + rho1 * beta.cwiseProduct(mask).lpNorm<1>();
    if (!r.converged)
        throw NonConvergenceError("elastic_net_poisson: optimality " + std::to_string(r.gradient_norm) +
                                      " above tolerance after " + std::to_string(options.max_iter) + " iterations",
                                  std::vector<double>(beta.data(), beta.data() + p), r.gradient_norm);

    // Standard errors from the penalised Hessian (rough: ignores the L1 term).
    const Eigen::VectorXd eta = X.values * beta + terms.offset;
    Eigen::VectorXd curv(n);
    for (Eigen::Index i = 0; i < n; ++i) curv(i) = terms.w(i) * std::exp(eta(i));
    Eigen::MatrixXd H = X.values.transpose() * curv.asDiagonal() * X.values;
    H.diagonal() += 2.0 * rho2 * mask;
    r.covariance = H.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
    r.standard_errors = r.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return r;
}

} // namespace olymp::regress
