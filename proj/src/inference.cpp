#include "antitonic/inference.hpp"

#include "antitonic/error.hpp"
#include "antitonic/numeric.hpp"
#include "antitonic/score_estimation.hpp"

#include <cmath>

namespace antitonic {

Zeta Zeta::quantile(double tau)
{
    if (!(tau > 0 && tau < 1)) throw InvalidInput("zeta: tau must lie in (0, 1)");
    return {Kind::quantile, tau};
}

double estimate_i_star(const MonotoneScore& score, std::span<const double> residuals)
{
    if (residuals.empty()) throw InvalidInput("estimate_i_star: no residuals");
    double s = 0;
    for (double e : residuals) {
        double v = score(e);
        s += v * v;
    }
    return s / static_cast<double>(residuals.size());
}

double estimate_upsilon(const Zeta& zeta, std::span<const double> residuals, std::optional<double> kde_at_zero)
{
    if (residuals.empty()) throw InvalidInput("estimate_upsilon: no residuals");
    const double n = static_cast<double>(residuals.size());
    if (zeta.kind == Zeta::Kind::mean) {
        double s = 0;
        for (double e : residuals) s += e * e;
        return s / n;
    }
    double s = 0;
    for (double e : residuals) {
        double z = (e < 0 ? 1.0 : 0.0) - zeta.tau;
        s += z * z;
    }
    double p0 = kde_at_zero ? *kde_at_zero : KdeModel(residuals).pdf(0.0);
    if (!(p0 > 0)) throw DegenerateSample("estimate_upsilon: density estimate at zero is not positive");
    return s / n / (p0 * p0);
}

namespace {

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& A, const char* who)
{
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, ldlt.vectorD().maxCoeff()))
        throw InvalidInput(std::string(who) + ": information matrix is singular");
    Eigen::MatrixXd inv = ldlt.solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
    return 0.5 * (inv + inv.transpose());
}

} // namespace

Eigen::MatrixXd covariance_symmetric(const Eigen::MatrixXd& X, double i_star_hat)
{
    if (!(i_star_hat > 0)) throw InvalidInput("covariance_symmetric: information must be positive");
    Eigen::MatrixXd info = (i_star_hat / static_cast<double>(X.rows())) * (X.transpose() * X);
    return spd_inverse(info, "covariance_symmetric");
}

Eigen::MatrixXd covariance_intercept(const Eigen::MatrixXd& X, double i_star_hat, double upsilon_hat)
{
    if (!(i_star_hat > 0) || !(upsilon_hat > 0))
        throw InvalidInput("covariance_intercept: information and upsilon must be positive");
    const double n = static_cast<double>(X.rows());
    Eigen::VectorXd xbar = X.colwise().mean().transpose();
    Eigen::MatrixXd info = (i_star_hat / n) * (X.transpose() * X) - (i_star_hat - 1 / upsilon_hat) * xbar * xbar.transpose();
    return spd_inverse(0.5 * (info + info.transpose()), "covariance_intercept");
}

Eigen::MatrixXd centred_covariance(const Eigen::MatrixXd& X)
{
    Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
    return (C.transpose() * C) / static_cast<double>(X.rows());
}

std::vector<Interval> confidence_intervals(const Eigen::VectorXd& beta, const Eigen::MatrixXd& cov, std::size_t n,
                                           double alpha)
{
    if (!(alpha > 0 && alpha < 1)) throw InvalidInput("confidence_intervals: alpha must lie in (0, 1)");
    double z = norm_quantile(1 - alpha / 2);
    std::vector<Interval> out;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        double half = z * std::sqrt(std::max(cov(j, j), 0.0) / static_cast<double>(n));
        out.push_back({beta(j) - half, beta(j) + half});
    }
    return out;
}

bool Ellipsoid::contains(const Eigen::VectorXd& b) const
{
    Eigen::VectorXd d = center - b;
    return static_cast<double>(n) * d.dot(info * d) <= threshold;
}

double Ellipsoid::volume() const { return std::exp(log_volume); }

Ellipsoid confidence_ellipsoid(const Eigen::VectorXd& beta, const Eigen::MatrixXd& info, std::size_t n, double alpha)
{
    if (!(alpha > 0 && alpha < 1)) throw InvalidInput("confidence_ellipsoid: alpha must lie in (0, 1)");
    const auto k = static_cast<double>(beta.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (info + info.transpose()));
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0)
        throw InvalidInput("confidence_ellipsoid: information matrix is not positive definite");
    double q = chi2_quantile_upper(alpha, k);
    double logdet = es.eigenvalues().array().log().sum();
    double log_unit_ball = 0.5 * k * std::log(kPi) - std::lgamma(0.5 * k + 1);
    double log_volume = log_unit_ball + 0.5 * k * std::log(q / static_cast<double>(n)) - 0.5 * logdet;
    return {beta, info, q, n, log_volume};
}

} // namespace antitonic
