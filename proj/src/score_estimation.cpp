#include "antitonic/score_estimation.hpp"

#include "antitonic/error.hpp"
#include "antitonic/numeric.hpp"
#include "antitonic/projection.hpp"

#include <algorithm>
#include <cmath>

namespace antitonic {

double silverman_bandwidth(std::span<const double> x)
{
    if (x.size() < 2) throw DegenerateSample("bandwidth: need at least two residuals");
    double sd = sample_sd(x);
    std::vector<double> v(x.begin(), x.end());
    double iqr = quantile_type7(v, 0.75) - quantile_type7(v, 0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0)) spread = sd > 0 ? sd : iqr / 1.34;
    if (!(spread > 0)) throw DegenerateSample("bandwidth: all residuals are identical");
    return 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

KdeModel::KdeModel(std::span<const double> residuals, Kernel kernel, double bandwidth)
    : centers_(residuals.begin(), residuals.end()), kernel_(kernel), h_(bandwidth)
{
    if (centers_.size() < 2) throw DegenerateSample("kde: need at least two residuals");
    for (double c : centers_)
        if (!std::isfinite(c)) throw InvalidInput("kde: non-finite residual");
    std::sort(centers_.begin(), centers_.end());
    if (centers_.front() == centers_.back()) throw DegenerateSample("kde: all residuals are identical");
    if (!(h_ > 0)) h_ = silverman_bandwidth(centers_);
    // Gaussian terms beyond 8.5 h are below 3e-16 of the peak weight and are
    // dropped; the kde is zero far from all centers.
    window_ = kernel_ == Kernel::gaussian ? 8.5 : 1.0;
}

KdeModel::Eval KdeModel::evaluate(double z) const
{
    const double n = static_cast<double>(centers_.size());
    auto lo = std::lower_bound(centers_.begin(), centers_.end(), z - window_ * h_);
    auto hi = std::upper_bound(lo, centers_.end(), z + window_ * h_);
    double sp = 0, sd = 0, sc = 0;
    const double inv_h = 1 / h_;
    if (kernel_ == Kernel::gaussian) {
        constexpr double r2 = 0.70710678118654752440;
        for (auto it = lo; it != hi; ++it) {
            double x = (z - *it) * inv_h;
            double e = std::exp(-0.5 * x * x);
            sp += e;
            sd -= x * e;
            sc += 0.5 * std::erfc(-x * r2);
        }
        sp *= kInvSqrt2Pi;
        sd *= kInvSqrt2Pi;
    } else {
        for (auto it = lo; it != hi; ++it) {
            double x = (z - *it) * inv_h;
            if (x <= -1) continue;
            if (x >= 1) {
                sc += 1;
                continue;
            }
            double q = 1 - x * x;
            sp += 35.0 / 32.0 * q * q * q;
            sd -= 105.0 / 16.0 * x * q * q;
            double x2 = x * x;
            sc += 0.5 + 35.0 / 32.0 * x * (1 - x2 + 0.6 * x2 * x2 - x2 * x2 * x2 / 7);
        }
    }
    double below = static_cast<double>(lo - centers_.begin());
    return {sp / (n * h_), sd / (n * h_ * h_), std::clamp((below + sc) / n, 0.0, 1.0)};
}

double KdeModel::solve_quantile(double u, double guess, Eval& at) const
{
    if (!(u > 0 && u < 1)) throw DomainError("kde quantile: argument must lie in (0, 1)");
    double pad = kernel_ == Kernel::gaussian ? 10 * h_ : h_;
    double lo = centers_.front() - pad, hi = centers_.back() + pad;
    double z = std::isfinite(guess) ? std::clamp(guess, lo, hi) : 0.5 * (lo + hi);
    // Safeguarded Newton; stops at 1e-13 in u or when the bracket can no
    // longer be split in floating point.
    for (int it = 0; it < 400; ++it) {
        at = evaluate(z);
        double g = at.cdf - u;
        if (std::abs(g) <= 1e-13) return z;
        if (g > 0)
            hi = z;
        else
            lo = z;
        double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi)) return z;
        double next = at.pdf > 0 ? z - g / at.pdf : mid;
        if (!(next > lo && next < hi)) next = mid;
        z = next;
    }
    at = evaluate(z);
    if (std::abs(at.cdf - u) > 1e-7)
        throw NumericError("kde quantile: solver did not converge at u = " + std::to_string(u));
    return z;
}

double KdeModel::quantile(double u) const
{
    Eval at{};
    double guess = centers_[static_cast<std::size_t>(std::clamp(u, 0.0, 1.0) * static_cast<double>(size() - 1))];
    return solve_quantile(u, guess, at);
}

KdeModel kde(std::span<const double> residuals, Kernel kernel, double bandwidth)
{
    return KdeModel(residuals, kernel, bandwidth);
}

TruncationParams::TruncationParams(double a, double g) : alpha(a), gamma(g)
{
    if (!(a > 0) || !(g > 0)) throw InvalidInput("truncation: alpha and gamma must be positive");
}

TruncationParams TruncationParams::theory(std::size_t n)
{
    double l = std::log(static_cast<double>(std::max<std::size_t>(n, 3)));
    return TruncationParams(l, 1 / l);
}

TruncatedScore::TruncatedScore(KdeModel model, TruncationParams trunc)
    : model_(std::move(model)), trunc_(trunc)
{
}

bool TruncatedScore::in_support(const KdeModel::Eval& e) const
{
    return std::abs(e.dpdf) <= trunc_.alpha && e.pdf >= trunc_.gamma && e.pdf > 0;
}

double TruncatedScore::from_eval(const KdeModel::Eval& e) const
{
    return in_support(e) ? e.dpdf / e.pdf : 0.0;
}

double TruncatedScore::operator()(double z) const { return from_eval(model_.evaluate(z)); }

TruncatedScore truncated_score(const KdeModel& model, const TruncationParams& trunc)
{
    return TruncatedScore(model, trunc);
}

ScoreEstimate projected_score_estimate_detail(const KdeModel& model, const TruncationParams& trunc,
                                              int grid_size)
{
    if (grid_size < 64) throw InvalidInput("projected_score_estimate: grid_size must be >= 64");
    const auto N = static_cast<std::size_t>(grid_size);
    const double du = 1.0 / static_cast<double>(N - 1);
    const double gamma = trunc.gamma;
    auto in_s = [&](const KdeModel::Eval& e) {
        return std::abs(e.dpdf) <= trunc.alpha && e.pdf >= gamma && e.pdf > 0;
    };

    std::vector<double> z(N, 0.0);
    std::vector<KdeModel::Eval> ev(N);
    const double h = model.bandwidth();
    z[1] = model.solve_quantile(du, model.centers().front(), ev[1]);
    for (std::size_t k = 2; k + 1 < N; ++k) {
        double u = static_cast<double>(k) * du;
        const auto& prev = ev[k - 1];
        // Second-order expansion of the quantile function from the previous
        // knot; when the Newton correction from there is negligible the kde
        // values are carried over by a first-order update.
        double guess = std::numeric_limits<double>::quiet_NaN();
        if (prev.pdf > 0) {
            double ip = 1 / prev.pdf;
            guess = z[k - 1] + du * ip - 0.5 * du * du * prev.dpdf * ip * ip * ip;
        }
        if (std::isfinite(guess) && std::abs(guess - z[k - 1]) < 0.5 * h) {
            KdeModel::Eval e = model.evaluate(guess);
            double step = e.pdf > 0 ? (u - e.cdf) / e.pdf : std::numeric_limits<double>::infinity();
            if (std::abs(step) <= 1e-6 * h) {
                z[k] = guess + step;
                ev[k] = {e.pdf + e.dpdf * step, e.dpdf, u};
                continue;
            }
            z[k] = model.solve_quantile(u, guess + (std::isfinite(step) ? step : 0), ev[k]);
            continue;
        }
        z[k] = model.solve_quantile(u, std::isfinite(guess) ? guess : z[k - 1], ev[k]);
    }

    // Antiderivative of psi~ o F~^{-1}: exact differences of p~ inside the
    // truncation set, trapezoid across its boundary.
    std::vector<double> G(N, 0.0);
    G[1] = in_s(ev[1]) ? std::max(ev[1].pdf - gamma, 0.0) : 0.0;
    for (std::size_t k = 1; k + 2 < N; ++k) {
        bool a = in_s(ev[k]), b = in_s(ev[k + 1]);
        double inc;
        if (a && b)
            inc = ev[k + 1].pdf - ev[k].pdf;
        else if (!a && !b)
            inc = 0;
        else {
            double pa = a ? ev[k].dpdf / ev[k].pdf : 0, pb = b ? ev[k + 1].dpdf / ev[k + 1].pdf : 0;
            inc = 0.5 * du * (pa + pb);
        }
        G[k + 1] = G[k] + inc;
    }
    G[N - 1] = G[N - 2] - (in_s(ev[N - 2]) ? std::max(ev[N - 2].pdf - gamma, 0.0) : 0.0);

    GridProjection gp = project_on_ugrid(G);

    std::vector<double> reps(N - 1);
    KdeModel::Eval tmp{};
    reps[0] = model.solve_quantile(0.5 * du, z[1] - 0.5 * du / std::max(ev[1].pdf, 1e-300), tmp);
    for (std::size_t k = 1; k + 2 < N; ++k) reps[k] = 0.5 * (z[k] + z[k + 1]);
    reps[N - 2] = model.solve_quantile(1 - 0.5 * du, z[N - 2] + 0.5 * du / std::max(ev[N - 2].pdf, 1e-300), tmp);

    ScoreEstimate out{score_from_cells(reps, gp.slopes), {}, {}, gp.slopes};
    out.grid_z.assign(z.begin() + 1, z.end() - 1);
    out.raw_slopes.resize(N - 1);
    for (std::size_t k = 0; k + 1 < N; ++k) out.raw_slopes[k] = (G[k + 1] - G[k]) / du;
    return out;
}

MonotoneScore projected_score_estimate(const KdeModel& model, const TruncationParams& trunc, int grid_size)
{
    return projected_score_estimate_detail(model, trunc, grid_size).score;
}

MonotoneScore antisymmetrize(const MonotoneScore& score)
{
    std::vector<double> u(score.knots());
    for (double k : score.knots()) u.push_back(-k);
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    std::vector<double> levels;
    if (score.mode() == ScoreMode::linear) {
        levels.reserve(u.size());
        for (double k : u) levels.push_back(0.5 * (score(k) - score(-k)));
        return MonotoneScore(std::move(u), std::move(levels), ScoreMode::linear);
    }
    // Step mode: the value on [u_j, u_{j+1}) is read off at the cell midpoint,
    // and a leading knot carries the left tail value.
    std::vector<double> knots;
    knots.reserve(u.size() + 1);
    knots.push_back(u.front() - 1);
    levels.push_back(0.5 * (score.left_limit() - score.right_limit()));
    for (std::size_t j = 0; j < u.size(); ++j) {
        knots.push_back(u[j]);
        if (j + 1 < u.size()) {
            double mid = 0.5 * (u[j] + u[j + 1]);
            levels.push_back(0.5 * (score(mid) - score(-mid)));
        } else {
            levels.push_back(0.5 * (score.right_limit() - score.left_limit()));
        }
    }
    return MonotoneScore(std::move(knots), std::move(levels), ScoreMode::step);
}

double empirical_score_matching_objective(const MonotoneScore& score, std::span<const double> residuals)
{
    if (residuals.empty()) throw InvalidInput("score matching objective: no residuals");
    if (score.mode() != ScoreMode::linear)
        throw InvalidInput("score matching objective: score must be piecewise linear");
    double s = 0;
    for (double e : residuals) {
        double v = score(e);
        s += v * v + 2 * score.derivative(e);
    }
    return s / static_cast<double>(residuals.size());
}

} // namespace antitonic
