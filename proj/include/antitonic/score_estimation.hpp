#pragma once

#include "antitonic/monotone.hpp"

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace antitonic {

// `compact` is the triweight kernel 35/32 (1 - x^2)^3 on [-1, 1], which is
// twice continuously differentiable.
enum class Kernel { gaussian, compact };

double silverman_bandwidth(std::span<const double> x);

class KdeModel {
public:
    struct Eval {
        double pdf;
        double dpdf;
        double cdf;
    };

    // bandwidth <= 0 selects Silverman's rule.
    KdeModel(std::span<const double> residuals, Kernel kernel = Kernel::gaussian, double bandwidth = 0);

    Eval evaluate(double z) const;
    double pdf(double z) const { return evaluate(z).pdf; }
    double pdf_deriv(double z) const { return evaluate(z).dpdf; }
    double cdf(double z) const { return evaluate(z).cdf; }
    double quantile(double u) const;

    double bandwidth() const { return h_; }
    Kernel kernel() const { return kernel_; }
    const std::vector<double>& centers() const { return centers_; }
    std::size_t size() const { return centers_.size(); }

    // Newton on the cdf from `guess`, safeguarded by bisection on the support
    // bracket. Returns the root and the evaluation there.
    double solve_quantile(double u, double guess, Eval& at) const;

private:
    std::vector<double> centers_;  // sorted
    Kernel kernel_;
    double h_;
    double window_;  // kernel support in units of h
};

KdeModel kde(std::span<const double> residuals, Kernel kernel = Kernel::gaussian, double bandwidth = 0);

struct TruncationParams {
    double alpha = std::numeric_limits<double>::infinity();
    double gamma = std::numeric_limits<double>::min();

    TruncationParams() = default;
    TruncationParams(double a, double g);
    // alpha = log n, gamma = 1 / log n.
    static TruncationParams theory(std::size_t n);
};

// psi~ = (p'/p) 1{|p'| <= alpha, p >= gamma}.
class TruncatedScore {
public:
    TruncatedScore(KdeModel model, TruncationParams trunc);
    double operator()(double z) const;
    // Value at a point where the kde has already been evaluated.
    double from_eval(const KdeModel::Eval& e) const;
    bool in_support(const KdeModel::Eval& e) const;
    const KdeModel& model() const { return model_; }
    const TruncationParams& truncation() const { return trunc_; }

private:
    KdeModel model_;
    TruncationParams trunc_;
};

TruncatedScore truncated_score(const KdeModel& model, const TruncationParams& trunc = {});

struct ScoreEstimate {
    MonotoneScore score;
    std::vector<double> grid_z;      // F~^{-1}(u_k) for interior grid points
    std::vector<double> raw_slopes;  // per-cell slopes of the antiderivative before projection
    std::vector<double> slopes;      // per-cell slopes after the LCM
};

ScoreEstimate projected_score_estimate_detail(const KdeModel& model, const TruncationParams& trunc = {},
                                              int grid_size = 2049);
MonotoneScore projected_score_estimate(const KdeModel& model, const TruncationParams& trunc = {},
                                       int grid_size = 2049);

MonotoneScore antisymmetrize(const MonotoneScore& score);

// n^{-1} sum psi(e_i)^2 + 2 psi'(e_i).
double empirical_score_matching_objective(const MonotoneScore& score, std::span<const double> residuals);

} // namespace antitonic
