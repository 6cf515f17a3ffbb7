#pragma once

#include "antitonic/numeric.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace antitonic {

class ReferenceDensity {
public:
    virtual ~ReferenceDensity() = default;

    virtual double pdf(double z) const = 0;
    virtual double cdf(double z) const = 0;
    // 1 - cdf, overridden where the tail can be computed without cancellation.
    virtual double sf(double z) const { return 1.0 - cdf(z); }
    // Default: safeguarded Newton on the cdf.
    virtual double quantile(double u) const;
    // psi_0 = p_0'/p_0 where defined.
    virtual std::optional<double> score(double) const { return std::nullopt; }
    virtual double draw(Rng& rng) const { return quantile(rng.uniform()); }
    virtual std::string name() const = 0;
    virtual bool log_concave() const { return false; }

    std::vector<double> sample(std::size_t n, Rng& rng) const;

    // Quantile solver tolerance on z, relative to (1 + |z|).
    void set_quantile_tolerance(double tol) { quantile_tol_ = tol; }

protected:
    // Starting bracket for the numeric quantile.
    virtual double location_hint() const { return 0.0; }
    virtual double scale_hint() const { return 1.0; }

private:
    double quantile_tol_ = 1e-13;
};

using DensityPtr = std::shared_ptr<const ReferenceDensity>;

class Gaussian : public ReferenceDensity {
public:
    explicit Gaussian(double mu = 0, double sigma = 1);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    double quantile(double u) const override;
    std::optional<double> score(double z) const override;
    double draw(Rng& rng) const override { return mu_ + sigma_ * rng.normal(); }
    std::string name() const override;
    bool log_concave() const override { return true; }

private:
    double mu_, sigma_;
};

class Cauchy : public ReferenceDensity {
public:
    explicit Cauchy(double loc = 0, double scale = 1);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    double quantile(double u) const override;
    std::optional<double> score(double z) const override;
    std::string name() const override;

private:
    double loc_, scale_;
};

// p(z) = (1 + z^2)^{-3/2} / 2, a t_2 density rescaled by 1/sqrt(2).
class T2Scaled : public ReferenceDensity {
public:
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    double quantile(double u) const override;
    std::optional<double> score(double z) const override;
    std::string name() const override { return "t2"; }
};

// p(z) = alpha sigma^alpha / (2 (|z| + sigma)^{alpha + 1}).
class SymPareto : public ReferenceDensity {
public:
    SymPareto(double alpha, double sigma);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override { return cdf(-z); }
    double quantile(double u) const override;
    std::optional<double> score(double z) const override;
    std::string name() const override;
    double alpha() const { return alpha_; }
    double sigma() const { return sigma_; }

private:
    double alpha_, sigma_;
};

class Laplace : public ReferenceDensity {
public:
    explicit Laplace(double mu = 0, double b = 1);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    double quantile(double u) const override;
    std::optional<double> score(double z) const override;
    std::string name() const override;
    bool log_concave() const override { return true; }

private:
    double mu_, b_;
};

// (1 - rho)/2 exp(-|z + mu|) + rho/2 exp(-|z - mu|).
class LaplaceMixture : public ReferenceDensity {
public:
    LaplaceMixture(double rho, double mu);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    std::optional<double> score(double z) const override;
    double draw(Rng& rng) const override;
    std::string name() const override;
    double rho() const { return rho_; }
    double mu() const { return mu_; }

protected:
    double scale_hint() const override { return 1.0 + mu_; }

private:
    double rho_, mu_;
};

class Logistic : public ReferenceDensity {
public:
    explicit Logistic(double s = 1);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    double quantile(double u) const override;
    std::optional<double> score(double z) const override;
    std::string name() const override;
    bool log_concave() const override { return true; }

private:
    double s_;
};

class GaussianMixture : public ReferenceDensity {
public:
    GaussianMixture(std::vector<double> weights, std::vector<double> means, std::vector<double> sds);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    std::optional<double> score(double z) const override;
    double draw(Rng& rng) const override;
    std::string name() const override;
    bool log_concave() const override;

protected:
    double location_hint() const override;
    double scale_hint() const override;

private:
    std::vector<double> w_, m_, s_;
};

// U[-1, 1] + s Z.
class SmoothedUniform : public ReferenceDensity {
public:
    explicit SmoothedUniform(double s = 0.1) : s_(s) {}
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override { return cdf(-z); }
    std::optional<double> score(double z) const override;
    double draw(Rng& rng) const override;
    std::string name() const override { return "smooth_uniform"; }
    bool log_concave() const override { return true; }

private:
    double s_;
};

// Exp(1) - 1 + s Z.
class SmoothedExponential : public ReferenceDensity {
public:
    explicit SmoothedExponential(double s = 0.17320508075688773) : s_(s) {}
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    std::optional<double> score(double z) const override;
    double draw(Rng& rng) const override;
    std::string name() const override { return "smooth_exp"; }
    bool log_concave() const override { return true; }

private:
    // Density and derivative of Exp(1) + s Z at x.
    void emg(double x, double& p, double& dp) const;
    double s_;
};

// Symmetric density from the counterexample family: exponential tails with
// rate a = (1 - eps^2)/eps^2 outside [-1, 1] and a growing exponential inside.
class Prop1Density : public ReferenceDensity {
public:
    explicit Prop1Density(double eps);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override { return cdf(-z); }
    std::optional<double> score(double z) const override;
    std::string name() const override;
    double eps() const { return eps_; }
    double a() const { return a_; }
    double b() const { return b_; }
    // delta solving 1 = eps (a (1 + delta) + 1) e^{-a delta}.
    double ml_delta() const;

private:
    double eps_, a_, b_;
};

// z -> a p0(a z + b).
class AffineDensity : public ReferenceDensity {
public:
    AffineDensity(DensityPtr base, double a, double b);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    double quantile(double u) const override;
    std::optional<double> score(double z) const override;
    double draw(Rng& rng) const override;
    std::string name() const override;
    bool log_concave() const override { return base_->log_concave(); }

private:
    DensityPtr base_;
    double a_, b_;
};

// (1 - t) p0 + t p1.
class TwoMixture : public ReferenceDensity {
public:
    TwoMixture(DensityPtr p0, DensityPtr p1, double t);
    double pdf(double z) const override;
    double cdf(double z) const override;
    double sf(double z) const override;
    std::optional<double> score(double z) const override;
    double draw(Rng& rng) const override;
    std::string name() const override;

private:
    DensityPtr p0_, p1_;
    double t_;
};

// Constants of the Cauchy projection: t0 solves t = tan(t/2), z0 = cot(t0/2).
struct CauchyConstants {
    double t0;
    double u0;
    double z0;
    double level;  // sin t0
    double i_star;
};
const CauchyConstants& cauchy_constants();

// Builds a density from names like "cauchy", "gaussian:0,2",
// "gaussian_mix:0.4,-2,1,0.6,2,1", "pareto:3,2", "prop1:0.2".
DensityPtr make_density(const std::string& spec);
std::vector<std::string> density_names();

} // namespace antitonic
