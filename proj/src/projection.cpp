#include "antitonic/projection.hpp"

#include "antitonic/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace antitonic {

namespace {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 8> kGlX = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                        -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                        0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlW = {0.1012285362903763, 0.2223810344533745, 0.3137066278678188,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066278678188,
                                        0.2223810344533745, 0.1012285362903763};

double gauss_legendre(const std::function<double(double)>& f, double a, double b, int pieces = 1)
{
    double total = 0, h = (b - a) / pieces;
    for (int p = 0; p < pieces; ++p) {
        double lo = a + p * h, c = lo + 0.5 * h, r = 0.5 * h;
        double s = 0;
        for (std::size_t i = 0; i < kGlX.size(); ++i) s += kGlW[i] * f(c + r * kGlX[i]);
        total += s * r;
    }
    return total;
}

// Pieces needed so that no piece carries much more than 1e-3 of the mass.
int pieces_for(const ReferenceDensity& d, double a, double b)
{
    double mass = std::abs(d.cdf(b) - d.cdf(a));
    return std::clamp(static_cast<int>(std::ceil(mass / 1e-3)), 1, 64);
}

std::vector<double> linspace(double a, double b, std::size_t n)
{
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    v.back() = b;
    return v;
}

} // namespace

GridProjection project_on_ugrid(std::span<const double> G)
{
    const std::size_t n = G.size();
    if (n < 3) throw InvalidInput("project_on_ugrid: grid too small");
    const double du = 1.0 / static_cast<double>(n - 1);
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = static_cast<double>(k) / static_cast<double>(n - 1);
    LcmResult r = antitonic::lcm(u, G);
    GridProjection out;
    out.slopes.assign(r.right_derivative.begin(), r.right_derivative.end() - 1);
    out.i_star = 0;
    out.raw_energy = 0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        out.i_star += out.slopes[k] * out.slopes[k] * du;
        double chord = (G[k + 1] - G[k]) / du;
        out.raw_energy += chord * chord * du;
    }
    return out;
}

MonotoneScore score_from_cells(std::span<const double> cell_knots, std::span<const double> slopes)
{
    if (cell_knots.size() != slopes.size() || cell_knots.empty())
        throw InvalidInput("score_from_cells: size mismatch");
    std::vector<double> knots, levels;
    std::vector<int> count;
    for (std::size_t k = 0; k < cell_knots.size(); ++k) {
        if (!std::isfinite(cell_knots[k])) throw NumericError("score_from_cells: non-finite knot");
        if (!knots.empty() && !(cell_knots[k] > knots.back())) {
            levels.back() = (levels.back() * count.back() + slopes[k]) / (count.back() + 1);
            ++count.back();
            continue;
        }
        knots.push_back(cell_knots[k]);
        levels.push_back(slopes[k]);
        count.push_back(1);
    }
    return MonotoneScore(std::move(knots), std::move(levels), ScoreMode::linear);
}

ProjectedScore projected_score_numeric(const ReferenceDensity& density, int grid_size)
{
    if (grid_size < 64) throw InvalidInput("projected_score_numeric: grid_size must be >= 64");
    const auto n = static_cast<std::size_t>(grid_size);
    auto J = [&](double u) {
        double j = density.pdf(density.quantile(u));
        if (!std::isfinite(j) || j < 0) throw InvalidDensity(density.name() + ": non-finite density quantile value");
        return j;
    };
    // Uniform in u, except that the outer kTailCells cells on each side are
    // split kTailSplit ways and the outer kTailCells of those once more: in
    // steep tails a linear ramp across one coarse cell misplaces mass.
    constexpr std::size_t kTailSplit = 32;
    const std::size_t kTailCells = std::min<std::size_t>(64, (n - 1) / 4);
    const double du = 1.0 / static_cast<double>(n - 1);
    const double w1 = du / kTailSplit, w2 = w1 / kTailSplit;
    std::vector<double> half;  // points in [0, 1/2)
    for (std::size_t k = 0; k < kTailCells * kTailSplit; ++k) half.push_back(static_cast<double>(k) * w2);
    for (std::size_t k = kTailCells; k < kTailCells * kTailSplit; ++k) half.push_back(static_cast<double>(k) * w1);
    for (std::size_t k = kTailCells; 2 * k + 1 < n; ++k) half.push_back(static_cast<double>(k) * du);
    std::vector<double> u = half;
    u.push_back(0.5);
    for (auto it = half.rbegin(); it != half.rend(); ++it) u.push_back(1.0 - *it);
    std::vector<double> G(u.size(), 0.0);
    for (std::size_t k = 1; k + 1 < u.size(); ++k) G[k] = J(u[k]);

    // A jump of the score shows up as a kink of J inside one cell, whose
    // chord slope then blends the two sides. Such cells are split a few
    // times so the blended mass becomes negligible.
    constexpr int kRounds = 3;
    constexpr std::size_t kSplit = 32, kMaxCells = 64;
    LcmResult r = antitonic::lcm(u, G);
    for (int round = 0; round < kRounds; ++round) {
        const std::size_t m = u.size() - 1;
        const auto& s = r.right_derivative;
        auto [lo, hi] = std::minmax_element(s.begin(), s.end() - 1);
        const double tol = 0.05 * (*hi - *lo);
        std::vector<std::pair<double, std::size_t>> jumps;
        // A kink stands out against the slope changes on either side; steep
        // but smooth stretches (Gaussian-type tails) do not.
        for (std::size_t k = 2; k + 2 < m; ++k) {
            double d = s[k - 1] - s[k + 1];
            double around = std::max(s[k - 2] - s[k - 1], s[k + 1] - s[k + 2]);
            if (d > tol && d > 8 * around) jumps.push_back({d, k});
        }
        if (jumps.empty()) break;
        if (jumps.size() > kMaxCells) {
            std::nth_element(jumps.begin(), jumps.begin() + kMaxCells, jumps.end(), std::greater<>());
            jumps.resize(kMaxCells);
        }
        std::vector<char> split(m, 0);
        for (auto [d, k] : jumps) split[k] = 1;
        std::vector<double> u2, G2;
        for (std::size_t k = 0; k < m; ++k) {
            u2.push_back(u[k]);
            G2.push_back(G[k]);
            if (!split[k]) continue;
            for (std::size_t i = 1; i < kSplit; ++i) {
                double v = u[k] + (u[k + 1] - u[k]) * static_cast<double>(i) / kSplit;
                if (v <= u2.back() || v >= u[k + 1]) continue;
                u2.push_back(v);
                G2.push_back(J(v));
            }
        }
        u2.push_back(u.back());
        G2.push_back(G.back());
        u = std::move(u2);
        G = std::move(G2);
        r = antitonic::lcm(u, G);
    }

    const std::size_t m = u.size() - 1;
    std::vector<double> slopes(r.right_derivative.begin(), r.right_derivative.begin() + static_cast<std::ptrdiff_t>(m));
    std::vector<double> knots(m);
    double i_star = 0, raw = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double du = u[k + 1] - u[k];
        knots[k] = density.quantile(0.5 * (u[k] + u[k + 1]));
        i_star += slopes[k] * slopes[k] * du;
        double chord = (G[k + 1] - G[k]) / du;
        raw += chord * chord * du;
    }
    ProjectedScore ps{score_from_cells(knots, slopes), i_star, raw, false, 0.0};
    if (!(ps.i_star > 0)) throw InvalidDensity(density.name() + ": projected score vanishes");
    ps.are_star = ps.i_star / ps.fisher_info;
    return ps;
}

ProjectedScore projected_score_closed_form(const std::string& family, const std::vector<double>& params)
{
    auto need = [&](std::size_t k) {
        if (params.size() != k) throw InvalidInput("projected_score_closed_form: '" + family + "' expects " +
                                                   std::to_string(k) + " parameters");
    };
    if (family == "cauchy") {
        need(0);
        const auto& c = cauchy_constants();
        auto knots = linspace(-c.z0, c.z0, 4001);
        std::vector<double> levels(knots.size());
        for (std::size_t i = 0; i < knots.size(); ++i) levels[i] = -2 * knots[i] / (1 + knots[i] * knots[i]);
        levels.front() = c.level;
        levels.back() = -c.level;
        return {MonotoneScore(knots, levels, ScoreMode::linear), c.i_star, 0.5, false, c.i_star / 0.5};
    }
    if (family == "t2") {
        need(0);
        double cut = 1 / std::sqrt(3.0);
        auto knots = linspace(-cut, cut, 4001);
        std::vector<double> levels(knots.size());
        for (std::size_t i = 0; i < knots.size(); ++i) levels[i] = -3 * knots[i] / (1 + knots[i] * knots[i]);
        double i_star = 93.0 / 80.0, fisher = 1.2;
        return {MonotoneScore(knots, levels, ScoreMode::linear), i_star, fisher, false, i_star / fisher};
    }
    if (family == "pareto") {
        need(2);
        double a = params[0], s = params[1];
        if (!(a > 0 && s > 0)) throw InvalidInput("pareto: alpha and sigma must be positive");
        double lvl = a / s;
        double fisher = a * (a + 1) * (a + 1) / ((a + 2) * s * s);
        return {MonotoneScore({-1.0, 0.0}, {lvl, -lvl}, ScoreMode::step), lvl * lvl, fisher, false,
                lvl * lvl / fisher};
    }
    if (family == "laplace_mix") {
        need(2);
        double rho = params[0], mu = params[1];
        LaplaceMixture d(rho, mu);
        double mid = 2 * rho - 1;
        // -int p0 dpsi*: jumps 2(1 - rho) at -mu and 2 rho at mu.
        double i_star = 2 * (1 - rho) * d.pdf(-mu) + 2 * rho * d.pdf(mu);
        auto f = [&](double z) {
            double s = *d.score(z);
            return s * s * d.pdf(z);
        };
        double fisher = d.cdf(-mu) + d.sf(mu) + adaptive_simpson(f, -mu, mu, 1e-13);
        return {MonotoneScore({-mu - 1, -mu, mu}, {1.0, mid, -1.0}, ScoreMode::step), i_star, fisher, false,
                i_star / fisher};
    }
    if (family == "prop1") {
        need(1);
        Prop1Density d(params[0]);
        double a = d.a(), b = d.b(), eps = d.eps();
        double i_star = a * a * eps, fisher = b * b * (1 - eps) + a * a * eps;
        return {MonotoneScore({-2.0, -1.0, 1.0}, {a, 0.0, -a}, ScoreMode::step), i_star, fisher, false,
                i_star / fisher};
    }
    throw InvalidInput("projected_score_closed_form: unknown family '" + family + "'");
}

ProjectedScore projected_score(const ReferenceDensity& density, int grid_size)
{
    if (density.name() == "cauchy:0,1") return projected_score_closed_form("cauchy");
    if (density.name() == "t2") return projected_score_closed_form("t2");
    if (auto* p = dynamic_cast<const SymPareto*>(&density))
        return projected_score_closed_form("pareto", {p->alpha(), p->sigma()});
    if (auto* p = dynamic_cast<const LaplaceMixture*>(&density))
        return projected_score_closed_form("laplace_mix", {p->rho(), p->mu()});
    if (auto* p = dynamic_cast<const Prop1Density*>(&density))
        return projected_score_closed_form("prop1", {p->eps()});
    return projected_score_numeric(density, grid_size);
}

// ---------------------------------------------------------------- log-concave projection

namespace {

double zero_crossing(const MonotoneScore& s)
{
    const auto& k = s.knots();
    const auto& l = s.levels();
    if (l.front() <= 0) return k.front();
    for (std::size_t j = 0; j + 1 < k.size(); ++j) {
        if (l[j + 1] <= 0) {
            if (s.mode() == ScoreMode::step || l[j] == l[j + 1]) return k[j + 1];
            return k[j] + (k[j + 1] - k[j]) * l[j] / (l[j] - l[j + 1]);
        }
    }
    return k.back();
}

} // namespace

LogConcaveDensity::LogConcaveDensity(MonotoneScore score)
    : score_(std::move(score)), loss_(score_, zero_crossing(score_)), shift_(0), norm_(0)
{
    if (!(score_.left_limit() > 0) || !(score_.right_limit() < 0))
        throw InvalidDensity("log-concave projection: score must change sign for exp(-loss) to be integrable");
    const auto& k = score_.knots();
    const auto& l = score_.levels();
    cum_.assign(k.size(), 0.0);
    cum_[0] = std::exp(-loss_.value(k[0])) / score_.left_limit();
    for (std::size_t j = 0; j + 1 < k.size(); ++j) cum_[j + 1] = cum_[j] + mass_between(k[j], k[j + 1]);
    norm_ = cum_.back() + std::exp(-loss_.value(k.back())) / (-score_.right_limit());
    (void)l;
}

double LogConcaveDensity::mass_between(double a, double b) const
{
    if (b <= a) return 0;
    double la = loss_.value(a);
    if (score_.mode() == ScoreMode::step) {
        // psi is constant on [a, b) inside one interval.
        double c = score_(a);
        double h = b - a;
        if (std::abs(c * h) < 1e-12) return std::exp(-la) * h;
        return std::exp(-la) * std::expm1(c * h) / c;
    }
    double spread = std::max(std::abs(score_(a)), std::abs(score_(b))) * (b - a);
    int pieces = std::clamp(static_cast<int>(std::ceil(spread / 0.5)), 1, 2000);
    return gauss_legendre([&](double z) { return std::exp(-loss_.value(z)); }, a, b, pieces);
}

double LogConcaveDensity::pdf(double z) const { return std::exp(-loss_.value(z)) / norm_; }

double LogConcaveDensity::cdf(double z) const
{
    const auto& k = score_.knots();
    if (z <= k.front()) return std::exp(-loss_.value(z)) / score_.left_limit() / norm_;
    if (z >= k.back()) return 1 - sf(z);
    auto j = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), z) - k.begin()) - 1;
    return std::min(1.0, (cum_[j] + mass_between(k[j], z)) / norm_);
}

double LogConcaveDensity::sf(double z) const
{
    const auto& k = score_.knots();
    if (z >= k.back()) return std::exp(-loss_.value(z)) / (-score_.right_limit()) / norm_;
    return std::max(0.0, 1 - cdf(z));
}

double LogConcaveDensity::fisher_info() const
{
    return integrate_score(*this, score_, [](double x) { return x * x; });
}

double LogConcaveDensity::location_hint() const { return zero_crossing(score_); }

double LogConcaveDensity::scale_hint() const
{
    const auto& k = score_.knots();
    return std::max({1 / score_.left_limit(), -1 / score_.right_limit(), 0.5 * (k.back() - k.front()), 1e-3});
}

std::shared_ptr<const LogConcaveDensity> fisher_divergence_projection(const ProjectedScore& ps,
                                                                      const ReferenceDensity&)
{
    return std::make_shared<LogConcaveDensity>(ps.score);
}

// ---------------------------------------------------------------- functionals

double two_sided_hazard(const ReferenceDensity& density, double z)
{
    double m = std::min(density.cdf(z), density.sf(z));
    double p = density.pdf(z);
    if (m <= 0) return p <= 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return p / m;
}

double v_cq(const ReferenceDensity& density)
{
    double prev = std::numeric_limits<double>::quiet_NaN(), cur = 0;
    for (std::size_t n = 1025; n <= (std::size_t{1} << 20) + 1; n = 2 * n - 1) {
        std::vector<double> J(n, 0.0);
        double du = 1.0 / static_cast<double>(n - 1);
        for (std::size_t k = 1; k + 1 < n; ++k) J[k] = density.pdf(density.quantile(static_cast<double>(k) * du));
        cur = simpson(J, du);
        if (std::isfinite(prev) && std::abs(cur - prev) <= 1e-8 * std::abs(cur)) break;
        prev = cur;
    }
    if (!(cur > 0)) throw InvalidDensity(density.name() + ": density quantile function vanishes");
    return 1 / (12 * cur * cur);
}

double huber_relative_efficiency(double K)
{
    if (!(K > 0)) throw InvalidInput("huber_relative_efficiency: K must be positive");
    double at = std::atan(K);
    double inner;
    if (K < 1e-2) {
        double K3 = K * K * K;
        inner = -4 * K3 / 3 + 4 * K3 * K * K / 15 - 4 * K3 * K3 * K / 35;
    } else {
        inner = 2 * K - 2 * (1 + K * K) * at;
    }
    double den = kPi * (kPi * K * K + inner) * cauchy_constants().i_star;
    return 4 * at * at / den;
}

double integrate_score(const ReferenceDensity& density, const MonotoneScore& psi,
                       const std::function<double(double)>& g)
{
    const auto& k = psi.knots();
    const auto& l = psi.levels();
    double total = g(psi.left_limit()) * density.cdf(k.front()) + g(psi.right_limit()) * density.sf(k.back());
    for (std::size_t j = 0; j + 1 < k.size(); ++j) {
        if (psi.mode() == ScoreMode::step || l[j] == l[j + 1]) {
            total += g(l[j]) * (density.cdf(k[j + 1]) - density.cdf(k[j]));
        } else {
            total += gauss_legendre([&](double z) { return g(psi(z)) * density.pdf(z); }, k[j], k[j + 1],
                                    pieces_for(density, k[j], k[j + 1]));
        }
    }
    return total;
}

double l2_distance_sq(const ReferenceDensity& density, const MonotoneScore& a, const MonotoneScore& b)
{
    std::vector<double> knots(a.knots());
    knots.insert(knots.end(), b.knots().begin(), b.knots().end());
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    auto sq = [&](double z) {
        double d = a(z) - b(z);
        return d * d;
    };
    double dl = a.left_limit() - b.left_limit(), dr = a.right_limit() - b.right_limit();
    double total = dl * dl * density.cdf(knots.front()) + dr * dr * density.sf(knots.back());
    const bool both_step = a.mode() == ScoreMode::step && b.mode() == ScoreMode::step;
    for (std::size_t j = 0; j + 1 < knots.size(); ++j) {
        double lo = knots[j], hi = knots[j + 1];
        if (both_step)
            total += sq(lo) * (density.cdf(hi) - density.cdf(lo));
        else
            total += gauss_legendre([&](double z) { return sq(z) * density.pdf(z); }, lo, hi,
                                    pieces_for(density, lo, hi));
    }
    return total;
}

double asymptotic_variance_factor(const ReferenceDensity& density, const MonotoneScore& psi)
{
    double num = integrate_score(density, psi, [](double x) { return x * x; });
    const auto& k = psi.knots();
    const auto& l = psi.levels();
    double den = 0;
    for (std::size_t j = 0; j + 1 < k.size(); ++j) {
        if (psi.mode() == ScoreMode::step)
            den += density.pdf(k[j + 1]) * (l[j + 1] - l[j]);
        else
            den += (l[j + 1] - l[j]) / (k[j + 1] - k[j]) * (density.cdf(k[j + 1]) - density.cdf(k[j]));
    }
    if (den == 0) throw InvalidInput("asymptotic_variance_factor: score is constant");
    return num / (den * den);
}

MonotoneScore huber_score(double K)
{
    if (!(K > 0)) throw InvalidInput("huber_score: K must be positive");
    return MonotoneScore({-K, K}, {K, -K}, ScoreMode::linear);
}

} // namespace antitonic
