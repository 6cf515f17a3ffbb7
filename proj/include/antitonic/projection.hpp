#pragma once

#include "antitonic/densities.hpp"
#include "antitonic/monotone.hpp"

#include <functional>
#include <string>
#include <vector>

namespace antitonic {

struct ProjectedScore {
    MonotoneScore score;
    double i_star;
    double fisher_info;
    bool fisher_infinite = false;
    double are_star;
};

// LCM of a density-quantile-type function sampled on the uniform grid
// u_k = k/(N-1). slopes[k] is the majorant's slope on cell k (N-1 cells).
struct GridProjection {
    std::vector<double> slopes;
    double i_star;      // sum slopes^2 du
    double raw_energy;  // sum of squared chord slopes of the input, times du
};
GridProjection project_on_ugrid(std::span<const double> G);

// Score with one knot per u-cell (the cell's representative z) carrying the
// cell slope, in linear mode. Coincident knots are merged.
MonotoneScore score_from_cells(std::span<const double> cell_knots, std::span<const double> slopes);

ProjectedScore projected_score_numeric(const ReferenceDensity& density, int grid_size = 2049);

// family in {cauchy, t2, pareto (alpha, sigma), laplace_mix (rho, mu), prop1 (eps)}.
ProjectedScore projected_score_closed_form(const std::string& family, const std::vector<double>& params = {});

// Closed form when the density is one of the supported families in standard
// form, numeric otherwise.
ProjectedScore projected_score(const ReferenceDensity& density, int grid_size = 8193);

// Log-concave density proportional to exp(int psi) for a decreasing psi.
class LogConcaveDensity : public ReferenceDensity {
public:
    explicit LogConcaveDensity(MonotoneScore score);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    std::optional<double> score(double z) const override { return score_(z); }
    std::string name() const override { return "log_concave_projection"; }
    bool log_concave() const override { return true; }
    // int psi^2 dP for this density.
    double fisher_info() const;
    const MonotoneScore& psi() const { return score_; }

protected:
    double location_hint() const override;
    double scale_hint() const override;

private:
    double mass_between(double a, double b) const;

    MonotoneScore score_;
    ConvexLoss loss_;
    double shift_;
    double norm_;
    std::vector<double> cum_;  // unnormalized mass left of each knot
};

std::shared_ptr<const LogConcaveDensity> fisher_divergence_projection(const ProjectedScore& ps,
                                                                      const ReferenceDensity& density);

double two_sided_hazard(const ReferenceDensity& density, double z);
double v_cq(const ReferenceDensity& density);
double huber_relative_efficiency(double K);

// int g(psi(z)) dP0(z), exact for step scores and Gauss-Legendre between
// knots of linear scores.
double integrate_score(const ReferenceDensity& density, const MonotoneScore& psi,
                       const std::function<double(double)>& g);
// int (psi1 - psi2)^2 dP0.
double l2_distance_sq(const ReferenceDensity& density, const MonotoneScore& a, const MonotoneScore& b);
// V_{p0}(psi) = int psi^2 dP0 / (int p0 dpsi)^2.
double asymptotic_variance_factor(const ReferenceDensity& density, const MonotoneScore& psi);

// Huber score psi(z) = clamp(-z, -K, K).
MonotoneScore huber_score(double K);

} // namespace antitonic
