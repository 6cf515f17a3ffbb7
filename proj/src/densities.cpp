#include "antitonic/densities.hpp"

#include "antitonic/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace antitonic {

namespace {

std::string fmt(double x)
{
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

double sgn(double x) { return (x > 0) - (x < 0); }

// log Phi(y), stable far into the lower tail.
double log_norm_cdf(double y)
{
    if (y > -30) return std::log(norm_cdf(y));
    double y2 = y * y;
    return -0.5 * y2 - std::log(-y) - 0.5 * std::log(2 * kPi) + std::log1p(-1 / y2 + 3 / (y2 * y2));
}

double laplace_cdf(double x) { return x < 0 ? 0.5 * std::exp(x) : 1 - 0.5 * std::exp(-x); }

} // namespace

double ReferenceDensity::quantile(double u) const
{
    if (!(u > 0 && u < 1)) throw DomainError(name() + ": quantile argument must lie in (0, 1)");
    const bool upper = u > 0.5;
    const double target = upper ? 1 - u : u;
    // g is increasing in z and vanishes at the quantile.
    auto g = [&](double z) { return upper ? target - sf(z) : cdf(z) - target; };

    double loc = location_hint(), width = scale_hint();
    double lo = loc - width, hi = loc + width;
    for (int i = 0; g(lo) > 0; ++i) {
        if (i > 2000) throw DomainError(name() + ": quantile bracket failed (u too extreme)");
        lo = loc - 2 * (loc - lo);
    }
    for (int i = 0; g(hi) < 0; ++i) {
        if (i > 2000) throw DomainError(name() + ": quantile bracket failed (u too extreme)");
        hi = loc + 2 * (hi - loc);
    }
    double z = 0.5 * (lo + hi);
    for (int it = 0; it < 400; ++it) {
        double gz = g(z);
        if (gz == 0) return z;
        if (gz > 0)
            hi = z;
        else
            lo = z;
        if (hi - lo <= quantile_tol_ * (1 + std::abs(z))) break;
        double p = pdf(z);
        double next = p > 0 ? z - gz / p : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - z) <= 0.25 * quantile_tol_ * (1 + std::abs(z))) {
            z = next;
            break;
        }
        z = next;
    }
    if (!std::isfinite(z)) throw DomainError(name() + ": quantile solver produced non-finite value");
    return z;
}

std::vector<double> ReferenceDensity::sample(std::size_t n, Rng& rng) const
{
    std::vector<double> out(n);
    for (auto& v : out) v = draw(rng);
    return out;
}

// ---------------------------------------------------------------- Gaussian

Gaussian::Gaussian(double mu, double sigma) : mu_(mu), sigma_(sigma)
{
    if (!(sigma > 0)) throw InvalidInput("gaussian: sigma must be positive");
}
double Gaussian::pdf(double z) const { return norm_pdf((z - mu_) / sigma_) / sigma_; }
double Gaussian::cdf(double z) const { return norm_cdf((z - mu_) / sigma_); }
double Gaussian::sf(double z) const { return norm_sf((z - mu_) / sigma_); }
double Gaussian::quantile(double u) const
{
    if (!(u > 0 && u < 1)) throw DomainError("gaussian: quantile argument must lie in (0, 1)");
    return mu_ + sigma_ * norm_quantile(u);
}
std::optional<double> Gaussian::score(double z) const { return -(z - mu_) / (sigma_ * sigma_); }
std::string Gaussian::name() const { return "gaussian:" + fmt(mu_) + "," + fmt(sigma_); }

// ---------------------------------------------------------------- Cauchy

Cauchy::Cauchy(double loc, double scale) : loc_(loc), scale_(scale)
{
    if (!(scale > 0)) throw InvalidInput("cauchy: scale must be positive");
}
double Cauchy::pdf(double z) const
{
    double x = (z - loc_) / scale_;
    return 1 / (kPi * scale_ * (1 + x * x));
}
double Cauchy::cdf(double z) const { return std::atan2(1.0, -(z - loc_) / scale_) / kPi; }
double Cauchy::sf(double z) const { return std::atan2(1.0, (z - loc_) / scale_) / kPi; }
double Cauchy::quantile(double u) const
{
    if (!(u > 0 && u < 1)) throw DomainError("cauchy: quantile argument must lie in (0, 1)");
    // -cot(pi u) avoids the loss of accuracy of tan near u = 0, 1.
    double x = u < 0.5 ? -1 / std::tan(kPi * u) : 1 / std::tan(kPi * (1 - u));
    return loc_ + scale_ * x;
}
std::optional<double> Cauchy::score(double z) const
{
    double x = (z - loc_) / scale_;
    return -2 * x / ((1 + x * x) * scale_);
}
std::string Cauchy::name() const { return "cauchy:" + fmt(loc_) + "," + fmt(scale_); }

// ---------------------------------------------------------------- t2

double T2Scaled::pdf(double z) const { return 0.5 * std::pow(1 + z * z, -1.5); }
double T2Scaled::cdf(double z) const { return sf(-z); }
double T2Scaled::sf(double z) const
{
    double r = std::sqrt(1 + z * z);
    if (z > 0) return 0.5 / (r * (r + z));
    return 0.5 * (1 - z / r);
}
double T2Scaled::quantile(double u) const
{
    if (!(u > 0 && u < 1)) throw DomainError("t2: quantile argument must lie in (0, 1)");
    double v = 2 * u - 1;
    return v / std::sqrt(4 * u * (1 - u));
}
std::optional<double> T2Scaled::score(double z) const { return -3 * z / (1 + z * z); }

// ---------------------------------------------------------------- Pareto

SymPareto::SymPareto(double alpha, double sigma) : alpha_(alpha), sigma_(sigma)
{
    if (!(alpha > 0 && sigma > 0)) throw InvalidInput("pareto: alpha and sigma must be positive");
}
double SymPareto::pdf(double z) const
{
    return alpha_ * std::pow(sigma_, alpha_) / (2 * std::pow(std::abs(z) + sigma_, alpha_ + 1));
}
double SymPareto::cdf(double z) const
{
    double tail = 0.5 * std::pow(sigma_ / (sigma_ + std::abs(z)), alpha_);
    return z <= 0 ? tail : 1 - tail;
}
double SymPareto::quantile(double u) const
{
    if (!(u > 0 && u < 1)) throw DomainError("pareto: quantile argument must lie in (0, 1)");
    double t = std::min(u, 1 - u);
    double z = sigma_ * (std::pow(2 * t, -1 / alpha_) - 1);
    return u < 0.5 ? -z : z;
}
std::optional<double> SymPareto::score(double z) const
{
    return -(alpha_ + 1) * sgn(z) / (std::abs(z) + sigma_);
}
std::string SymPareto::name() const { return "pareto:" + fmt(alpha_) + "," + fmt(sigma_); }

// ---------------------------------------------------------------- Laplace

Laplace::Laplace(double mu, double b) : mu_(mu), b_(b)
{
    if (!(b > 0)) throw InvalidInput("laplace: scale must be positive");
}
double Laplace::pdf(double z) const { return std::exp(-std::abs(z - mu_) / b_) / (2 * b_); }
double Laplace::cdf(double z) const { return laplace_cdf((z - mu_) / b_); }
double Laplace::sf(double z) const { return laplace_cdf(-(z - mu_) / b_); }
double Laplace::quantile(double u) const
{
    if (!(u > 0 && u < 1)) throw DomainError("laplace: quantile argument must lie in (0, 1)");
    return u < 0.5 ? mu_ + b_ * std::log(2 * u) : mu_ - b_ * std::log(2 * (1 - u));
}
std::optional<double> Laplace::score(double z) const { return -sgn(z - mu_) / b_; }
std::string Laplace::name() const { return "laplace:" + fmt(mu_) + "," + fmt(b_); }

// ---------------------------------------------------------------- Laplace mixture

LaplaceMixture::LaplaceMixture(double rho, double mu) : rho_(rho), mu_(mu)
{
    if (!(rho > 0 && rho < 1) || !(mu > 0)) throw InvalidInput("laplace_mix: need rho in (0,1), mu > 0");
}
double LaplaceMixture::pdf(double z) const
{
    return 0.5 * (1 - rho_) * std::exp(-std::abs(z + mu_)) + 0.5 * rho_ * std::exp(-std::abs(z - mu_));
}
double LaplaceMixture::cdf(double z) const
{
    return (1 - rho_) * laplace_cdf(z + mu_) + rho_ * laplace_cdf(z - mu_);
}
double LaplaceMixture::sf(double z) const
{
    return (1 - rho_) * laplace_cdf(-(z + mu_)) + rho_ * laplace_cdf(-(z - mu_));
}
std::optional<double> LaplaceMixture::score(double z) const
{
    double a = 0.5 * (1 - rho_) * std::exp(-std::abs(z + mu_));
    double b = 0.5 * rho_ * std::exp(-std::abs(z - mu_));
    return (-sgn(z + mu_) * a - sgn(z - mu_) * b) / (a + b);
}
double LaplaceMixture::draw(Rng& rng) const
{
    double c = rng.uniform() < rho_ ? mu_ : -mu_;
    double u = rng.uniform();
    return c + (u < 0.5 ? std::log(2 * u) : -std::log(2 * (1 - u)));
}
std::string LaplaceMixture::name() const { return "laplace_mix:" + fmt(rho_) + "," + fmt(mu_); }

// ---------------------------------------------------------------- Logistic

Logistic::Logistic(double s) : s_(s)
{
    if (!(s > 0)) throw InvalidInput("logistic: scale must be positive");
}
double Logistic::pdf(double z) const
{
    double e = std::exp(-std::abs(z) / s_);
    return e / (s_ * (1 + e) * (1 + e));
}
double Logistic::cdf(double z) const { return 1 / (1 + std::exp(-z / s_)); }
double Logistic::sf(double z) const { return 1 / (1 + std::exp(z / s_)); }
double Logistic::quantile(double u) const
{
    if (!(u > 0 && u < 1)) throw DomainError("logistic: quantile argument must lie in (0, 1)");
    return s_ * (std::log(u) - std::log1p(-u));
}
std::optional<double> Logistic::score(double z) const { return -std::tanh(z / (2 * s_)) / s_; }
std::string Logistic::name() const { return "logistic:" + fmt(s_); }

// ---------------------------------------------------------------- Gaussian mixture

GaussianMixture::GaussianMixture(std::vector<double> w, std::vector<double> m, std::vector<double> s)
    : w_(std::move(w)), m_(std::move(m)), s_(std::move(s))
{
    if (w_.empty() || w_.size() != m_.size() || w_.size() != s_.size())
        throw InvalidInput("gaussian_mix: weights, means and sds must have equal non-zero length");
    double total = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) {
        if (!(w_[k] > 0) || !(s_[k] > 0)) throw InvalidInput("gaussian_mix: weights and sds must be positive");
        total += w_[k];
    }
    for (double& v : w_) v /= total;
}
double GaussianMixture::pdf(double z) const
{
    double p = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) p += w_[k] * norm_pdf((z - m_[k]) / s_[k]) / s_[k];
    return p;
}
double GaussianMixture::cdf(double z) const
{
    double p = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) p += w_[k] * norm_cdf((z - m_[k]) / s_[k]);
    return p;
}
double GaussianMixture::sf(double z) const
{
    double p = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) p += w_[k] * norm_sf((z - m_[k]) / s_[k]);
    return p;
}
std::optional<double> GaussianMixture::score(double z) const
{
    // Component posterior weights in log space so the tails do not underflow.
    std::vector<double> lw(w_.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w_.size(); ++k) {
        double x = (z - m_[k]) / s_[k];
        lw[k] = std::log(w_[k] / s_[k]) - 0.5 * x * x;
        mx = std::max(mx, lw[k]);
    }
    double num = 0, den = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) {
        double e = std::exp(lw[k] - mx);
        den += e;
        num += e * (-(z - m_[k]) / (s_[k] * s_[k]));
    }
    return num / den;
}
double GaussianMixture::draw(Rng& rng) const
{
    double u = rng.uniform(), acc = 0;
    std::size_t k = 0;
    for (; k + 1 < w_.size(); ++k) {
        acc += w_[k];
        if (u < acc) break;
    }
    return m_[k] + s_[k] * rng.normal();
}
std::string GaussianMixture::name() const
{
    std::string out = "gaussian_mix:";
    for (std::size_t k = 0; k < w_.size(); ++k) {
        if (k) out += ",";
        out += fmt(w_[k]) + "," + fmt(m_[k]) + "," + fmt(s_[k]);
    }
    return out;
}
bool GaussianMixture::log_concave() const
{
    if (w_.size() == 1) return true;
    if (w_.size() == 2 && s_[0] == s_[1]) return std::abs(m_[0] - m_[1]) <= 2 * s_[0];
    return false;
}
double GaussianMixture::location_hint() const
{
    double c = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) c += w_[k] * m_[k];
    return c;
}
double GaussianMixture::scale_hint() const
{
    double c = location_hint(), v = 0;
    for (std::size_t k = 0; k < w_.size(); ++k) v += w_[k] * (s_[k] * s_[k] + (m_[k] - c) * (m_[k] - c));
    return std::sqrt(v);
}

// ---------------------------------------------------------------- smoothed uniform

namespace {

// Phi(a) - Phi(b) for a > b without cancellation in the upper tail.
double norm_diff(double a, double b) { return b >= 0 ? norm_sf(b) - norm_sf(a) : norm_cdf(a) - norm_cdf(b); }

// Antiderivative of Phi.
double norm_cdf_integral(double x) { return x * norm_cdf(x) + norm_pdf(x); }

} // namespace

double SmoothedUniform::pdf(double z) const
{
    double x = std::abs(z);
    return 0.5 * norm_diff((x + 1) / s_, (x - 1) / s_);
}
double SmoothedUniform::cdf(double z) const
{
    if (z > 0) return 1 - cdf(-z);
    return 0.5 * s_ * (norm_cdf_integral((z + 1) / s_) - norm_cdf_integral((z - 1) / s_));
}
std::optional<double> SmoothedUniform::score(double z) const
{
    double x = std::abs(z);
    double p = pdf(x);
    double dp = (norm_pdf((x + 1) / s_) - norm_pdf((x - 1) / s_)) / (2 * s_);
    double v;
    if (p > 1e-280) {
        v = dp / p;
    } else {
        double y = (x - 1) / s_;
        v = -y / s_;
    }
    return z >= 0 ? v : -v;
}
double SmoothedUniform::draw(Rng& rng) const { return 2 * rng.uniform() - 1 + s_ * rng.normal(); }

// ---------------------------------------------------------------- smoothed exponential

void SmoothedExponential::emg(double x, double& p, double& dp) const
{
    double logp = -x + 0.5 * s_ * s_ + log_norm_cdf(x / s_ - s_);
    p = std::exp(logp);
    dp = -p + norm_pdf(x / s_) / s_;
}
double SmoothedExponential::pdf(double z) const
{
    double p, dp;
    emg(z + 1, p, dp);
    return p;
}
double SmoothedExponential::cdf(double z) const
{
    double p, dp;
    emg(z + 1, p, dp);
    return std::max(0.0, norm_cdf((z + 1) / s_) - p);
}
double SmoothedExponential::sf(double z) const
{
    double p, dp;
    emg(z + 1, p, dp);
    return norm_sf((z + 1) / s_) + p;
}
std::optional<double> SmoothedExponential::score(double z) const
{
    double x = z + 1;
    double logp = -x + 0.5 * s_ * s_ + log_norm_cdf(x / s_ - s_);
    double logq = -0.5 * (x / s_) * (x / s_) - 0.5 * std::log(2 * kPi) - std::log(s_);
    return -1 + std::exp(logq - logp);
}
double SmoothedExponential::draw(Rng& rng) const
{
    return -std::log(rng.uniform()) - 1 + s_ * rng.normal();
}

// ---------------------------------------------------------------- Prop. 1 family

Prop1Density::Prop1Density(double eps) : eps_(eps)
{
    if (!(eps > 0 && eps < 1)) throw InvalidInput("prop1: eps must lie in (0, 1)");
    a_ = (1 - eps * eps) / (eps * eps);
    double target = 1 - eps;
    auto f = [&](double b) { return eps_ * a_ * (-std::expm1(-b)) / b - target; };
    double hi = 1;
    while (f(hi) > 0) hi *= 2;
    b_ = bisect(f, 1e-12, hi, 1e-14);
}
double Prop1Density::pdf(double z) const
{
    double x = std::abs(z);
    if (x >= 1) return 0.5 * eps_ * a_ * std::exp(-a_ * (x - 1));
    return 0.5 * eps_ * a_ * std::exp(-b_ * (1 - x));
}
double Prop1Density::cdf(double z) const
{
    if (z > 0) return 1 - cdf(-z);
    if (z <= -1) return 0.5 * eps_ * std::exp(a_ * (z + 1));
    return 0.5 * eps_ + 0.5 * eps_ * a_ / b_ * (-std::expm1(-b_ * (1 + z)));
}
std::optional<double> Prop1Density::score(double z) const
{
    double x = std::abs(z);
    if (x == 0) return 0.0;
    return x >= 1 ? -a_ * sgn(z) : b_ * sgn(z);
}
std::string Prop1Density::name() const { return "prop1:" + fmt(eps_); }
double Prop1Density::ml_delta() const
{
    auto f = [&](double d) { return eps_ * (a_ * (1 + d) + 1) * std::exp(-a_ * d) - 1; };
    double hi = 1;
    while (f(hi) > 0) hi *= 2;
    return bisect(f, 0, hi, 1e-15);
}

// ---------------------------------------------------------------- affine / mixture wrappers

AffineDensity::AffineDensity(DensityPtr base, double a, double b) : base_(std::move(base)), a_(a), b_(b)
{
    if (!(a > 0)) throw InvalidInput("affine density: scale must be positive");
}
double AffineDensity::pdf(double z) const { return a_ * base_->pdf(a_ * z + b_); }
double AffineDensity::cdf(double z) const { return base_->cdf(a_ * z + b_); }
double AffineDensity::sf(double z) const { return base_->sf(a_ * z + b_); }
double AffineDensity::quantile(double u) const { return (base_->quantile(u) - b_) / a_; }
std::optional<double> AffineDensity::score(double z) const
{
    auto s = base_->score(a_ * z + b_);
    if (!s) return std::nullopt;
    return a_ * *s;
}
double AffineDensity::draw(Rng& rng) const { return (base_->draw(rng) - b_) / a_; }
std::string AffineDensity::name() const
{
    return "affine(" + base_->name() + ";" + fmt(a_) + "," + fmt(b_) + ")";
}

TwoMixture::TwoMixture(DensityPtr p0, DensityPtr p1, double t) : p0_(std::move(p0)), p1_(std::move(p1)), t_(t)
{
    if (!(t >= 0 && t <= 1)) throw InvalidInput("mixture: weight must lie in [0, 1]");
}
double TwoMixture::pdf(double z) const { return (1 - t_) * p0_->pdf(z) + t_ * p1_->pdf(z); }
double TwoMixture::cdf(double z) const { return (1 - t_) * p0_->cdf(z) + t_ * p1_->cdf(z); }
double TwoMixture::sf(double z) const { return (1 - t_) * p0_->sf(z) + t_ * p1_->sf(z); }
std::optional<double> TwoMixture::score(double z) const
{
    auto s0 = p0_->score(z), s1 = p1_->score(z);
    if (!s0 || !s1) return std::nullopt;
    double a = (1 - t_) * p0_->pdf(z), b = t_ * p1_->pdf(z);
    if (a + b <= 0) return std::nullopt;
    return (a * *s0 + b * *s1) / (a + b);
}
double TwoMixture::draw(Rng& rng) const { return rng.uniform() < t_ ? p1_->draw(rng) : p0_->draw(rng); }
std::string TwoMixture::name() const
{
    return "mix(" + p0_->name() + ";" + p1_->name() + ";" + fmt(t_) + ")";
}

// ---------------------------------------------------------------- Cauchy constants

const CauchyConstants& cauchy_constants()
{
    static const CauchyConstants c = [] {
        CauchyConstants k{};
        k.t0 = bisect([](double t) { return t - std::tan(t / 2); }, 2, 3, 1e-14);
        k.u0 = k.t0 / (2 * kPi);
        k.z0 = bisect([](double z) { return z * std::atan(1 / z) - 0.5; }, 0.1, 1, 1e-14);
        k.level = std::sin(k.t0);
        k.i_star = 0.5 - (2 * k.t0 * std::cos(2 * k.t0) - std::sin(2 * k.t0)) / (4 * kPi);
        return k;
    }();
    return c;
}

// ---------------------------------------------------------------- names

namespace {

std::vector<double> parse_params(const std::string& s, const std::string& full)
{
    std::vector<double> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw InvalidInput("density '" + full + "': bad parameter '" + tok + "'");
        }
    }
    return out;
}

void expect(const std::vector<double>& p, std::size_t lo, std::size_t hi, const std::string& full)
{
    if (p.size() < lo || p.size() > hi)
        throw InvalidInput("density '" + full + "': wrong number of parameters");
}

} // namespace

DensityPtr make_density(const std::string& spec)
{
    auto colon = spec.find(':');
    std::string name = spec.substr(0, colon);
    std::vector<double> p = parse_params(colon == std::string::npos ? "" : spec.substr(colon + 1), spec);
    auto get = [&](std::size_t i, double def) { return i < p.size() ? p[i] : def; };

    if (name == "gaussian" || name == "normal") {
        expect(p, 0, 2, spec);
        return std::make_shared<Gaussian>(get(0, 0), get(1, 1));
    }
    if (name == "cauchy") {
        expect(p, 0, 2, spec);
        return std::make_shared<Cauchy>(get(0, 0), get(1, 1));
    }
    if (name == "t2") {
        expect(p, 0, 0, spec);
        return std::make_shared<T2Scaled>();
    }
    if (name == "pareto" || name == "sym_pareto") {
        expect(p, 2, 2, spec);
        return std::make_shared<SymPareto>(p[0], p[1]);
    }
    if (name == "laplace") {
        expect(p, 0, 2, spec);
        return std::make_shared<Laplace>(get(0, 0), get(1, 1));
    }
    if (name == "laplace_mix") {
        expect(p, 2, 2, spec);
        return std::make_shared<LaplaceMixture>(p[0], p[1]);
    }
    if (name == "logistic") {
        expect(p, 0, 1, spec);
        return std::make_shared<Logistic>(get(0, 1));
    }
    if (name == "gaussian_mix") {
        if (p.empty() || p.size() % 3 != 0)
            throw InvalidInput("density '" + spec + "': expected triples weight,mean,sd");
        std::vector<double> w, m, s;
        for (std::size_t i = 0; i < p.size(); i += 3) {
            w.push_back(p[i]);
            m.push_back(p[i + 1]);
            s.push_back(p[i + 2]);
        }
        return std::make_shared<GaussianMixture>(w, m, s);
    }
    if (name == "scale_mix") {
        expect(p, 0, 0, spec);
        return std::make_shared<GaussianMixture>(std::vector<double>{0.5, 0.5}, std::vector<double>{0, 0},
                                                 std::vector<double>{1, 4});
    }
    if (name == "location_mix") {
        expect(p, 0, 0, spec);
        return std::make_shared<GaussianMixture>(std::vector<double>{0.5, 0.5},
                                                 std::vector<double>{-1.5, 1.5},
                                                 std::vector<double>{0.1, 0.1});
    }
    if (name == "inference_mix") {
        expect(p, 0, 0, spec);
        return std::make_shared<GaussianMixture>(std::vector<double>{2.0 / 3, 1.0 / 3},
                                                 std::vector<double>{0, 0.5}, std::vector<double>{1, 3});
    }
    if (name == "smooth_uniform") {
        expect(p, 0, 1, spec);
        return std::make_shared<SmoothedUniform>(get(0, 0.1));
    }
    if (name == "smooth_exp") {
        expect(p, 0, 1, spec);
        return std::make_shared<SmoothedExponential>(get(0, std::sqrt(3.0) / 10));
    }
    if (name == "prop1") {
        expect(p, 1, 1, spec);
        return std::make_shared<Prop1Density>(p[0]);
    }
    throw InvalidInput("unknown density '" + spec + "'");
}

std::vector<std::string> density_names()
{
    return {"gaussian[:mu,sigma]", "cauchy[:loc,scale]", "t2", "pareto:alpha,sigma", "laplace[:mu,b]",
            "laplace_mix:rho,mu", "logistic[:s]", "gaussian_mix:w,m,s,...", "scale_mix", "location_mix",
            "inference_mix", "smooth_uniform[:s]", "smooth_exp[:s]", "prop1:eps"};
}

} // namespace antitonic
