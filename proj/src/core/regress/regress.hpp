#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace olymp::regress {

struct DesignMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> column_names;

    DesignMatrix() = default;
    DesignMatrix(Eigen::MatrixXd v, std::vector<std::string> names);

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    /// Throws DomainError on non-finite entries or a names/columns mismatch.
    void validate() const;
};

struct FitResult {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::MatrixXd covariance;
    double objective = 0.0;
    bool converged = false;
    int n_iter = 0;
    double gradient_norm = 0.0;          ///< L-infinity norm of the final (sub)gradient measure
    std::vector<double> objective_trace; ///< one entry per accepted iterate (iterative solvers)
    std::vector<std::string> column_names;

    double coef(const std::string& name) const;
    double se(const std::string& name) const;
};

struct OlsResult : FitResult {
    Eigen::VectorXd residuals;
    double ssr = 0.0;
    double r_squared = 0.0;
    double adj_r_squared = 0.0;
    int dof = 0;         ///< residual degrees of freedom (n - p), or clusters - 1 when clustered
    int n_clusters = 0;  ///< 0 when standard errors are not clustered
};

/// Least squares via column-pivoted QR. With cluster_ids, standard errors are
/// cluster-robust (sandwich with G/(G-1) * (n-1)/(n-p) correction).
/// Throws DomainError naming the collinear columns on rank deficiency.
OlsResult ols(const DesignMatrix& X, const Eigen::VectorXd& y,
              const std::optional<std::vector<std::string>>& cluster_ids = std::nullopt);

/// Two-sided p-value of coefficient/se under a t distribution (normal when dof <= 0).
double two_sided_p(double estimate, double se, int dof);

struct LogitOptions {
    double tolerance = 1e-8;
    int max_iter = 200;
    double l2 = 0.0;                         ///< ridge on non-intercept columns
    std::optional<Eigen::Index> intercept{0}; ///< unpenalised column
};

/// Bernoulli log-likelihood sum_i w_i [y_i ln p_i + (1-y_i) ln(1-p_i)] (minus ridge).
double logit_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                    const Eigen::VectorXd& beta, const LogitOptions& options = {});
Eigen::VectorXd logit_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                               const Eigen::VectorXd& beta, const LogitOptions& options = {});

/// Newton ascent on the (optionally weighted, soft-label) Bernoulli likelihood.
/// Labels may be fractional in [0, 1]. Converged when the gradient L-infinity
/// norm drops below options.tolerance. Perfect separation raises DomainError.
FitResult logit_mle(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& weights = {},
                    const LogitOptions& options = {});

struct PoissonOptions {
    double tolerance = 1e-8;
    int max_iter = 50000;
    Eigen::VectorXd offset;                   ///< added to the linear predictor (log scale)
    Eigen::VectorXd weights;                  ///< per-observation weights (default 1)
    std::optional<Eigen::Index> intercept{0}; ///< never penalised
    Eigen::VectorXd start;                    ///< warm start
};

/// Smooth part sum_i w_i (lambda_i - y_i ln lambda_i) + rho2 ||beta_pen||^2.
double poisson_smooth_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                                double rho2, const PoissonOptions& options = {});
Eigen::VectorXd poisson_smooth_gradient(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& beta, double rho2, const PoissonOptions& options = {});
/// Full elastic-net objective (smooth part + rho1 ||beta_pen||_1).
double poisson_objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& beta, double rho1,
                         double rho2, const PoissonOptions& options = {});

/// Elastic-net penalised Poisson regression with log link, solved by proximal
/// gradient descent (soft-thresholding) with backtracking. The objective is
/// non-increasing over accepted steps (recorded in objective_trace).
FitResult elastic_net_poisson(const DesignMatrix& X, const Eigen::VectorXd& y, double rho1, double rho2,
                              const PoissonOptions& options = {});

} // namespace olymp::regress
