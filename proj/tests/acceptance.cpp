// Acceptance checks. Run as `acceptance N` for one criterion or with no
// argument for all of them; one PASS/FAIL line per criterion.

#include "antitonic/densities.hpp"
#include "antitonic/error.hpp"
#include "antitonic/experiment.hpp"
#include "antitonic/inference.hpp"
#include "antitonic/monotone.hpp"
#include "antitonic/numeric.hpp"
#include "antitonic/projection.hpp"
#include "antitonic/regression.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <iterator>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace antitonic;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Collects sub-checks; the criterion passes when all of them do.
struct Report {
    bool ok = true;
    std::ostringstream detail;

    void check(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << ']';
        }
    }
    template <class T>
    void note(const std::string& k, T v)
    {
        detail << ' ' << k << '=' << v;
    }
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// Analytic oracles.
void criterion1(Report& r)
{
    auto c = projected_score_numeric(Cauchy(), 8193);
    r.note("i*_cauchy", c.i_star);
    r.note("ARE*_cauchy", c.are_star);
    r.check(near(c.i_star, 0.439, 0.002), "i*(cauchy)");
    r.check(near(c.are_star, 0.878, 0.002), "ARE*(cauchy)");
    r.check(c.are_star >= 8 / (kPi * kPi), "ARE lower bound");

    auto t = projected_score_numeric(T2Scaled(), 8193);
    r.note("1/i*_t2", 1 / t.i_star);
    r.check(near(1 / t.i_star, 80.0 / 93, 0.002), "1/i*(t2)");

    for (const char* s : {"gaussian", "laplace", "logistic", "gaussian:1,2", "gaussian_mix:0.5,-0.8,1,0.5,0.8,1"}) {
        auto ps = projected_score_numeric(*make_density(s), 8193);
        r.check(near(ps.are_star, 1, 1e-3), std::string("ARE* of log-concave ") + s);
    }
}

// Optimal loss shape.
void criterion2(Report& r)
{
    const auto& cc = cauchy_constants();
    auto ps = projected_score_numeric(Cauchy(), 8193);
    auto loss = negative_antiderivative(ps.score);
    double worst = 0, worst_slope = 0;
    int curved = 0;
    for (double z = -5; z <= 5; z += 1e-3) {
        double closed = std::abs(z) <= cc.z0 ? std::log1p(z * z) : std::log1p(cc.z0 * cc.z0) + cc.level * (std::abs(z) - cc.z0);
        worst = std::max(worst, std::abs(loss.value(z) - closed));
        if (std::abs(z) > cc.z0 + 0.01) {
            worst_slope = std::max(worst_slope, std::abs(std::abs(loss.derivative(z)) - cc.level));
            curved += loss.second_derivative(z) != 0;
        }
    }
    r.note("sup_err", worst);
    r.note("slope_err", worst_slope);
    r.check(worst <= 1e-3, "Cauchy loss sup-norm");
    r.check(worst_slope <= 1e-3, "Cauchy tail slope");
    r.check(curved == 0, "linear tails");

    // Symmetrised Pareto: the optimal loss is a multiple of |z|.
    auto pp = projected_score_numeric(*make_density("pareto:3,2"), 8193);
    auto pl = negative_antiderivative(pp.score);
    double c = pl.value(5.0) / 5.0, dev = 0;
    for (double z = -20; z <= 20; z += 0.01)
        if (std::abs(z) >= 0.05) dev = std::max(dev, std::abs(pl.value(z) - c * std::abs(z)) / (1 + std::abs(z)));
    r.note("pareto_slope", c);
    r.note("pareto_dev", dev);
    r.check(near(c, 1.5, 1e-3), "Pareto slope alpha/sigma");
    r.check(dev <= 1e-3, "Pareto loss proportional to |z|");
}

// Counterexample family.
void criterion3(Report& r)
{
    for (double eps : {0.1, 0.2}) {
        Prop1Density p(eps);
        auto ps = projected_score(p);
        double d = p.ml_delta();
        MonotoneScore ml({-2 - d, -1 - d, 1 + d}, {p.a(), 0, -p.a()}, ScoreMode::step);
        double ratio = asymptotic_variance_factor(p, ps.score) / asymptotic_variance_factor(p, ml);
        r.note("V_ratio(" + std::to_string(eps).substr(0, 3) + ")", ratio);
        r.note("ARE*(" + std::to_string(eps).substr(0, 3) + ")", ps.are_star);
        r.check(ratio <= eps, "variance ratio");
        r.check(ps.are_star >= 1 - eps, "ARE*");
    }
}

// Brute-force equivalence of the fast algorithms.
void criterion4(Report& r)
{
    Rng rng(2024);
    double worst_lcm = 0, worst_pava = 0, worst_proj = 0;
    for (int rep = 0; rep < 500; ++rep) {
        std::size_t m = 2 + rng.below(199);
        std::vector<double> xs(m), ys(m), w(m);
        double x = 0;
        for (std::size_t i = 0; i < m; ++i) {
            x += 0.01 + rng.uniform();
            xs[i] = x;
            ys[i] = rng.normal();
            w[i] = 0.1 + rng.uniform();
        }
        auto fast = antitonic::lcm(xs, ys);
        auto slow = oracle::lcm_values(xs, ys);
        for (std::size_t i = 0; i < m; ++i) worst_lcm = std::max(worst_lcm, std::abs(fast.majorant(xs[i]) - slow[i]));
        auto pf = pava_decreasing(ys, w);
        auto ps = oracle::pava_minmax(ys, w);
        for (std::size_t i = 0; i < m; ++i) worst_pava = std::max(worst_pava, std::abs(pf[i] - ps[i]));
    }
    for (int rep = 0; rep < 500; ++rep) {
        std::vector<WeightedPoint> pts;
        for (int i = 0; i < 8; ++i) pts.push_back({rng.normal(), rng.normal(), 0.2 + rng.uniform()});
        auto s = antitonic_project(pts);
        std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.x < b.x; });
        std::vector<double> y, w;
        for (auto& p : pts) {
            y.push_back(p.y);
            w.push_back(p.w);
        }
        auto ex = oracle::pava_exhaustive(y, w);
        for (std::size_t i = 0; i < 8; ++i) worst_proj = std::max(worst_proj, std::abs(s(pts[i].x) - ex[i]));
    }
    r.note("lcm_err", worst_lcm);
    r.note("pava_err", worst_pava);
    r.note("project_err", worst_proj);
    r.check(worst_lcm <= 1e-10, "LCM vs gift wrapping");
    r.check(worst_pava <= 1e-10, "PAVA vs min-max");
    r.check(worst_proj <= 1e-10, "projection vs exhaustive");
}

double mse_of(const std::vector<EstimatorSummary>& rows, const std::string& name)
{
    for (const auto& s : rows)
        if (s.name == name) return s.mse;
    return std::nan("");
}

std::vector<EstimatorSummary> run_mse(const std::string& noise, std::vector<std::string> est)
{
    ExperimentSpec s;
    s.noise = noise;
    s.n = 600;
    s.d = 6;
    s.reps = 200;
    s.seed = 1;
    s.estimators = std::move(est);
    s.config.pilot = default_pilot_for(noise);
    return mse_compare(s);
}

// Monte Carlo estimation error.
void criterion5(Report& r)
{
    auto c = run_mse("cauchy", {"oracle", "asm", "ols"});
    double a_o = mse_of(c, "asm") / mse_of(c, "oracle");
    double o_a = mse_of(c, "ols") / mse_of(c, "asm");
    r.note("cauchy_asm/oracle", a_o);
    r.note("cauchy_ols/asm", o_a);
    r.check(a_o >= 0.95 && a_o <= 1.20, "(a) Cauchy ASM/oracle");
    r.check(o_a > 100, "(d) Cauchy OLS/ASM");

    auto g = run_mse("gaussian", {"asm", "ols"});
    double g_r = mse_of(g, "asm") / mse_of(g, "ols");
    r.note("gaussian_asm/ols", g_r);
    r.check(g_r >= 0.95 && g_r <= 1.25, "(b) Gaussian ASM/OLS");

    auto m = run_mse("location_mix", {"asm", "ols"});
    double m_r = mse_of(m, "asm") / mse_of(m, "ols");
    r.note("mixture_asm/ols", m_r);
    r.check(m_r < 0.05, "(c) mixture ASM/OLS");

    for (const auto* rows : {&c, &g, &m})
        for (const auto& s : *rows) r.check(s.failures == 0, "no failed replications (" + s.name + ")");
}

double rel_frobenius(const MatrixXd& emp, const MatrixXd& target) { return (emp - target).norm() / target.norm(); }

MatrixXd empirical_cov(const std::vector<VectorXd>& z)
{
    const auto d = z.front().size();
    VectorXd m = VectorXd::Zero(d);
    for (const auto& v : z) m += v;
    m /= static_cast<double>(z.size());
    MatrixXd c = MatrixXd::Zero(d, d);
    for (const auto& v : z) c += (v - m) * (v - m).transpose();
    return c / static_cast<double>(z.size() - 1);
}

// Limiting covariance of the estimators.
void criterion6(Report& r)
{
    const std::size_t n = 1200, reps = 500;
    const double i_star = cauchy_constants().i_star;
    Cauchy noise;

    // Symmetric mode, cross-fitted, X ~ N(0, I_4).
    VectorXd beta0(4);
    beta0 << 1, -1, 0.5, 2;
    std::vector<VectorXd> zs(reps);
    std::vector<char> ok(reps, 0);
    parallel_for(reps, 0, [&](std::size_t rep) {
        Rng rng(stream_seed(606, rep));
        MatrixXd X(n, 4);
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            for (Eigen::Index j = 0; j < 4; ++j) X(i, j) = rng.normal();
        VectorXd y = X * beta0;
        for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += noise.draw(rng);
        FitConfig cfg;
        cfg.mode = Mode::symmetric;
        cfg.folds = Folds::three;
        cfg.seed = stream_seed(607, rep);
        try {
            FitResult f = asm_fit_crossfit(RegressionData(X, y), cfg);
            zs[rep] = std::sqrt(double(n)) * (f.beta - beta0);
            ok[rep] = 1;
        } catch (const Error&) {
        }
    });
    std::vector<VectorXd> good;
    for (std::size_t k = 0; k < reps; ++k)
        if (ok[k]) good.push_back(zs[k]);
    r.check(good.size() == reps, "symmetric fits all succeed");
    double e1 = rel_frobenius(empirical_cov(good), MatrixXd::Identity(4, 4) / i_star);
    r.note("symmetric_rel_err", e1);
    r.check(e1 <= 0.2, "symmetric covariance within 20%");

    // Intercept mode with median centring; covariates N(1, I_3) plus ones.
    ExperimentSpec s;
    s.noise = "cauchy";
    s.n = n;
    s.d = 4;
    s.seed = 608;
    const VectorXd theta0 = batch_theta(s);
    std::vector<VectorXd> zi(reps);
    std::fill(ok.begin(), ok.end(), 0);
    parallel_for(reps, 0, [&](std::size_t rep) {
        SimulatedData sim = simulate(s, noise, rep, theta0);
        FitConfig cfg;
        cfg.zeta = Zeta::quantile(0.5);
        cfg.seed = stream_seed(609, rep);
        try {
            FitResult f = asm_fit(RegressionData(sim.design, sim.response), cfg);
            VectorXd b0(4);
            b0 << sim.theta0, sim.mu0;
            zi[rep] = std::sqrt(double(n)) * (f.beta - b0);
            ok[rep] = 1;
        } catch (const Error&) {
        }
    });
    good.clear();
    for (std::size_t k = 0; k < reps; ++k)
        if (ok[k]) good.push_back(zi[k]);
    r.check(good.size() == reps, "intercept fits all succeed");
    // Population second moments: E X X' with mean vector m = (1, 1, 1, 1).
    VectorXd m = VectorXd::Ones(4);
    MatrixXd exx = m * m.transpose();
    exx.topLeftCorner(3, 3) += MatrixXd::Identity(3, 3);
    const double ups = 0.25 / std::pow(noise.pdf(0), 2);
    MatrixXd target = (i_star * exx - (i_star - 1 / ups) * m * m.transpose()).inverse();
    double e2 = rel_frobenius(empirical_cov(good), target);
    r.note("intercept_rel_err", e2);
    r.check(e2 <= 0.2, "intercept covariance within 20%");
}

// Coverage, volumes and information estimates.
void criterion7(Report& r)
{
    struct Case {
        const char* noise;
        double rmse_reported;
        bool gate_coverage;
    };
    for (const Case& c : {Case{"gaussian", 0.1, true}, Case{"cauchy", 0.01, true}, Case{"inference_mix", 0.05, false}}) {
        ExperimentSpec s;
        s.noise = c.noise;
        s.n = 600;
        s.d = 4;
        s.reps = 2000;
        s.seed = 7;
        s.config.pilot = default_pilot_for(c.noise);
        CoverageSummary cs = coverage_experiment(s, {0.05});
        std::string tag = c.noise;
        double lo = 1, hi = 0;
        for (double v : cs.coverage[0]) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        r.note(tag + "_coverage_min", lo);
        r.note(tag + "_coverage_max", hi);
        r.note(tag + "_rmse_i", cs.i_star_rmse);
        r.note(tag + "_volume_ratio", cs.mean_volume_ratio);
        r.check(cs.failures == 0, tag + " failures");
        if (c.gate_coverage) r.check(lo >= 0.93 && hi <= 0.975, tag + " coverage");
        r.check(cs.i_star_rmse <= 2 * c.rmse_reported, tag + " RMSE of the information estimate");
        if (tag == "cauchy") r.check(cs.mean_volume_ratio < 0.05, "Cauchy volume ratio");
    }
}

// Property suites.
void criterion8(Report& r)
{
    int fisher_bad = 0;
    // One concrete member per registered family.
    const char* members[] = {"gaussian", "cauchy", "t2", "pareto:3,2", "laplace", "laplace_mix:0.3,1", "logistic",
                             "gaussian_mix:0.4,-2,1,0.6,2,1", "scale_mix", "location_mix", "inference_mix",
                             "smooth_uniform", "smooth_exp", "prop1:0.2"};
    r.check(std::size(members) == density_names().size(), "every family covered");
    for (const char* name : members) {
        auto p = make_density(name);
        auto ps = projected_score(*p);
        if (std::abs(integrate_score(*p, ps.score, [](double v) { return v; })) > 1e-5) ++fisher_bad;
    }
    r.note("fisher_violations", fisher_bad);
    r.check(fisher_bad == 0, "Fisher consistency");

    // Projection is a contraction in weighted L2 and in sup norm.
    Rng rng(88);
    bool l2 = true, sup = true;
    for (int rep = 0; rep < 300; ++rep) {
        std::size_t m = 2 + rng.below(60);
        std::vector<WeightedPoint> a, b;
        for (std::size_t i = 0; i < m; ++i) {
            double x = rng.normal(), w = 0.1 + rng.uniform();
            a.push_back({x, rng.normal(), w});
            b.push_back({x, rng.normal() + 0.5 * x, w});
        }
        auto pa = antitonic_project(a), pb = antitonic_project(b);
        double dp = 0, dd = 0, sp = 0, sd = 0;
        for (std::size_t i = 0; i < m; ++i) {
            double u = pa(a[i].x) - pb(b[i].x), v = a[i].y - b[i].y;
            dp += a[i].w * u * u;
            dd += a[i].w * v * v;
            sp = std::max(sp, std::abs(u));
            sd = std::max(sd, std::abs(v));
        }
        l2 = l2 && dp <= dd + 1e-10;
        sup = sup && sp <= sd + 1e-10;
    }
    r.check(l2, "L2 contraction");
    r.check(sup, "sup-norm contraction");

    // Affine equivariance.
    auto base = make_density("cauchy");
    AffineDensity ad(base, 2.0, 0.5);
    auto p0 = projected_score_numeric(*base, 8193), pa = projected_score_numeric(ad, 8193);
    double aff = 0;
    for (double z = -3; z <= 3; z += 0.05) aff = std::max(aff, std::abs(pa.score(z) - 2 * p0.score(2 * z + 0.5)));
    r.note("affine_err", aff);
    r.check(aff < 1e-3, "affine equivariance of the score");
    r.check(near(pa.i_star, 4 * p0.i_star, 4e-3 * p0.i_star), "affine scaling of i*");

    // Convexity of i* along mixtures.
    bool conv = true;
    for (auto [s0, s1] : {std::pair{"gaussian", "cauchy"}, std::pair{"laplace", "t2"}}) {
        auto d0 = make_density(s0), d1 = make_density(s1);
        double i0 = projected_score(*d0).i_star, i1 = projected_score(*d1).i_star;
        for (double t : {0.25, 0.5, 0.75})
            conv = conv && projected_score_numeric(TwoMixture(d0, d1, t), 8193).i_star <= (1 - t) * i0 + t * i1 + 1e-3;
    }
    r.check(conv, "i* convex along mixtures");

    // Convexity probes on an estimated loss.
    std::vector<double> res = Cauchy().sample(2000, rng);
    auto loss = negative_antiderivative(projected_score_estimate(KdeModel(res)));
    bool lconv = true;
    for (int k = 0; k < 2000; ++k) {
        double a = 10 * rng.normal(), b = 10 * rng.normal();
        double mid = loss.value(0.5 * (a + b));
        lconv = lconv && mid <= 0.5 * (loss.value(a) + loss.value(b)) + 1e-9 * (1 + std::abs(mid));
    }
    r.check(lconv, "estimated loss convex");

    // Seeded experiments do not depend on the number of threads.
    ExperimentSpec s;
    s.noise = "cauchy";
    s.n = 200;
    s.d = 4;
    s.reps = 8;
    s.seed = 3;
    s.estimators = {"asm", "alt", "1s", "lad"};
    s.threads = 1;
    auto one = mse_compare(s);
    s.threads = 4;
    auto four = mse_compare(s);
    bool same = one.size() == four.size();
    for (std::size_t k = 0; same && k < one.size(); ++k) same = one[k].errors == four[k].errors;
    r.check(same, "thread-count independence");
}

} // namespace

int main(int argc, char** argv)
{
    const std::vector<std::function<void(Report&)>> criteria = {criterion1, criterion2, criterion3, criterion4,
                                                                criterion5, criterion6, criterion7, criterion8};
    std::vector<int> which;
    if (argc > 1) which.push_back(std::atoi(argv[1]));
    else
        for (int k = 1; k <= 8; ++k) which.push_back(k);

    bool all = true;
    for (int k : which) {
        if (k < 1 || k > 8) {
            std::fprintf(stderr, "unknown criterion %d\n", k);
            return 2;
        }
        Report r;
        auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[static_cast<std::size_t>(k - 1)](r);
        } catch (const std::exception& e) {
            r.check(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s (%.1fs)%s\n", k, r.ok ? "PASS" : "FAIL", secs, r.detail.str().c_str());
        all = all && r.ok;
    }
    return all ? 0 : 1;
}
