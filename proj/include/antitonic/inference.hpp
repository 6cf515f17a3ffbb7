#pragma once

#include "antitonic/monotone.hpp"

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

namespace antitonic {

// Centring function for the intercept: mean-zero errors or a zero tau-quantile.
struct Zeta {
    enum class Kind { mean, quantile };
    Kind kind = Kind::mean;
    double tau = 0.5;

    static Zeta mean() { return {}; }
    static Zeta quantile(double tau);
};

double estimate_i_star(const MonotoneScore& score, std::span<const double> residuals);

// kde_at_zero is the density estimate at 0 used for quantile centring; when
// absent it is computed with a Gaussian kernel and Silverman bandwidth.
double estimate_upsilon(const Zeta& zeta, std::span<const double> residuals,
                        std::optional<double> kde_at_zero = std::nullopt);

// Inverse of (i/n) X'X: the asymptotic covariance of sqrt(n)(beta - beta0).
Eigen::MatrixXd covariance_symmetric(const Eigen::MatrixXd& X, double i_star_hat);
// Inverse of (i/n) X'X - (i - 1/upsilon) xbar xbar'. The last column of X is
// the intercept.
Eigen::MatrixXd covariance_intercept(const Eigen::MatrixXd& X, double i_star_hat, double upsilon_hat);

// n^{-1} sum (x_i - xbar)(x_i - xbar)'.
Eigen::MatrixXd centred_covariance(const Eigen::MatrixXd& X);

struct Interval {
    double lo;
    double hi;
};

// beta_j -/+ z_{alpha/2} sqrt(cov_jj / n).
std::vector<Interval> confidence_intervals(const Eigen::VectorXd& beta, const Eigen::MatrixXd& cov,
                                           std::size_t n, double alpha);

struct Ellipsoid {
    Eigen::VectorXd center;
    Eigen::MatrixXd info;
    double threshold;  // chi^2_k upper alpha quantile
    std::size_t n;
    double log_volume;

    bool contains(const Eigen::VectorXd& b) const;
    double volume() const;
};

// {b : n (beta - b)' info (beta - b) <= chi^2_k(alpha)}.
Ellipsoid confidence_ellipsoid(const Eigen::VectorXd& beta, const Eigen::MatrixXd& info, std::size_t n,
                               double alpha);

struct InferenceResult {
    double i_star_hat;
    std::optional<double> upsilon_hat;
    Eigen::MatrixXd cov_matrix;
    std::vector<Interval> intervals;
    Ellipsoid ellipsoid;
};

} // namespace antitonic
