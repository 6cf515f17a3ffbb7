#pragma once

#include "antitonic/inference.hpp"
#include "antitonic/monotone.hpp"
#include "antitonic/score_estimation.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace antitonic {

// Design and response. Checked for n > d >= 1, finite entries and full
// column rank on construction.
class RegressionData {
public:
    RegressionData(Eigen::MatrixXd design, Eigen::VectorXd response);

    const Eigen::MatrixXd& X() const { return X_; }
    const Eigen::VectorXd& y() const { return y_; }
    std::size_t n() const { return static_cast<std::size_t>(X_.rows()); }
    std::size_t d() const { return static_cast<std::size_t>(X_.cols()); }
    // True when the last column is identically one.
    bool has_intercept_column() const;

    RegressionData subset(std::span<const std::size_t> rows) const;

private:
    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
};

enum class Mode { plain, symmetric, intercept };
enum class Folds { none, three };
enum class CrossfitKind { average, pooled };

struct PilotSpec {
    enum class Kind { ols, lad, huber };
    Kind kind = Kind::lad;
    double huber_k = 1.345;

    static PilotSpec ols() { return {Kind::ols, 1.345}; }
    static PilotSpec lad() { return {Kind::lad, 1.345}; }
    static PilotSpec huber(double k);
};

struct SolverOptions {
    int max_iter = 100;
    double grad_tol = 1e-9;
    // Add the identity to every Hessian, not only near-singular ones.
    bool always_ridge = false;
};

struct FitConfig {
    Mode mode = Mode::intercept;
    Folds folds = Folds::none;
    CrossfitKind crossfit = CrossfitKind::average;
    PilotSpec pilot;
    Kernel kernel = Kernel::gaussian;
    double bandwidth = 0;  // <= 0: Silverman
    TruncationParams trunc;
    int grid = 2049;
    Zeta zeta;
    SolverOptions solver;
    std::uint64_t seed = 1;

    void validate() const;
};

struct FitResult {
    Eigen::VectorXd beta;
    std::vector<double> objective_trace;
    std::vector<double> residuals;
    double i_star_hat = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> upsilon_hat;
    Eigen::VectorXd score_at_optimum;
    bool converged = false;
    int iterations = 0;
    // Set when the fit took a special path (exact fit, degenerate score, ridge).
    std::string note;
    // Estimated score for unsplit fits.
    std::optional<MonotoneScore> score;
};

// Minimises beta -> n^{-1} sum loss(y_i - x_i'beta) by damped Newton.
FitResult solve_convex_m(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ConvexLoss& loss,
                         const Eigen::VectorXd& init, const SolverOptions& opts = {});
FitResult solve_convex_m(const RegressionData& data, const ConvexLoss& loss, const Eigen::VectorXd& init,
                         const SolverOptions& opts = {});
// Row i uses losses[loss_index[i]].
FitResult solve_convex_m_multi(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const std::vector<const ConvexLoss*>& losses, std::span<const int> loss_index,
                               const Eigen::VectorXd& init, const SolverOptions& opts = {});

FitResult fit_pilot(const RegressionData& data, const PilotSpec& pilot, const SolverOptions& opts = {});

// Lower empirical tau-quantile, or the mean.
double fit_intercept(std::span<const double> residual_base, const Zeta& zeta);

FitResult asm_fit(const RegressionData& data, const FitConfig& config);
FitResult asm_fit_crossfit(const RegressionData& data, const FitConfig& config);
// asm_fit or asm_fit_crossfit according to config.folds.
FitResult fit(const RegressionData& data, const FitConfig& config);

FitResult alternating_fit(const RegressionData& data, const FitConfig& config, int max_iter = 50);

struct OneStepUpdate {
    Eigen::VectorXd beta;
    bool ridged;
};
// beta_bar - (sum psi_i^2 x_i x_i')^{-1} sum psi_i x_i.
OneStepUpdate one_step_update(const Eigen::MatrixXd& X, std::span<const double> psi, const Eigen::VectorXd& beta_bar);

FitResult one_step_fit(const RegressionData& data, const FitConfig& config);

// Joint fit of all coefficients with a known score, started at the pilot.
FitResult oracle_fit(const RegressionData& data, const FitConfig& config, const MonotoneScore& score);

// Intervals and ellipsoid for all coefficients of a fit.
InferenceResult infer(const RegressionData& data, const FitResult& fit, const FitConfig& config, double alpha);

} // namespace antitonic
