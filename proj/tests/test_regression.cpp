#include "antitonic/densities.hpp"
#include "antitonic/error.hpp"
#include "antitonic/experiment.hpp"
#include "antitonic/numeric.hpp"
#include "antitonic/projection.hpp"
#include "antitonic/regression.hpp"

#include <doctest.h>

#include <cmath>

using namespace antitonic;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Covariates N(1, I) with a trailing ones column.
SimulatedData make_data(const std::string& noise, std::size_t n, std::size_t d, std::uint64_t seed)
{
    ExperimentSpec s;
    s.noise = noise;
    s.n = n;
    s.d = d;
    s.seed = seed;
    auto p = make_density(noise);
    return simulate(s, *p, 0, batch_theta(s));
}

double objective(const MatrixXd& X, const VectorXd& y, const ConvexLoss& l, const VectorXd& b)
{
    VectorXd r = y - X * b;
    double f = 0;
    for (Eigen::Index i = 0; i < r.size(); ++i) f += l.value(r(i));
    return f;
}

MatrixXd ones(Eigen::Index n) { return MatrixXd::Ones(n, 1); }

} // namespace

TEST_SUITE("regression") {

TEST_CASE("regression data validation")
{
    MatrixXd X(4, 3);
    X << 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8, 1;
    VectorXd y(4);
    y << 1, 2, 3, 4;
    try {
        RegressionData d(X, y);
        FAIL("rank deficiency not detected");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("column 2") != std::string::npos);
    }
    CHECK_THROWS_AS(RegressionData(MatrixXd::Ones(2, 2), VectorXd::Ones(2)), InvalidInput);
    CHECK_THROWS_AS(RegressionData(MatrixXd::Ones(3, 1), VectorXd::Ones(4)), InvalidInput);
    RegressionData ok(ones(3), VectorXd::Ones(3));
    CHECK(ok.has_intercept_column());
}

TEST_CASE("Newton solver")
{
    auto sim = make_data("gaussian", 200, 4, 1);
    RegressionData data(sim.design, sim.response);
    ConvexLoss sq(MonotoneScore({-1e3, 1e3}, {1e3, -1e3}, ScoreMode::linear));
    FitResult r = solve_convex_m(data, sq, VectorXd::Zero(4));
    VectorXd ols = sim.design.colPivHouseholderQr().solve(sim.response);
    CHECK((r.beta - ols).norm() <= 1e-8 * ols.norm());
    CHECK(r.converged);

    // Smooth LAD surrogate on three points: minimiser near the median.
    VectorXd y3(3);
    y3 << 1, 2, 100;
    ConvexLoss hub(huber_score(0.01));
    FitResult m = solve_convex_m(ones(3), y3, hub, VectorXd::Zero(1));
    double best = 0, bestf = INFINITY;
    for (double b = 0; b <= 5; b += 1e-4) {
        VectorXd bb(1);
        bb << b;
        double f = objective(ones(3), y3, hub, bb);
        if (f < bestf) {
            bestf = f;
            best = b;
        }
    }
    CHECK(std::abs(m.beta(0) - 2) < 0.05);
    CHECK(std::abs(m.beta(0) - best) < 1e-3);

    auto s3 = make_data("gaussian", 200, 3, 2);
    ConvexLoss h(huber_score(1.345));
    FitResult hf = solve_convex_m(s3.design, s3.response, h, VectorXd::Zero(3));
    double f0 = objective(s3.design, s3.response, h, hf.beta);
    Rng rng(3);
    for (int k = 0; k < 1000; ++k) {
        VectorXd dir(3);
        for (int j = 0; j < 3; ++j) dir(j) = rng.normal();
        VectorXd b = hf.beta + 0.1 * rng.uniform() * dir / dir.norm();
        CHECK(objective(s3.design, s3.response, h, b) >= f0 - 1e-9);
    }
}

TEST_CASE("estimating-equation certificate at the solution")
{
    for (const char* fam : {"pareto", "laplace_mix"}) {
        CAPTURE(fam);
        auto ps = fam == std::string("pareto") ? projected_score_closed_form("pareto", {3, 1})
                                               : projected_score_closed_form("laplace_mix", {0.3, 1});
        auto sim = make_data(fam == std::string("pareto") ? "pareto:3,1" : "laplace_mix:0.3,1", 300, 3, 4);
        FitResult r = solve_convex_m(sim.design, sim.response, ConvexLoss(ps.score),
                                     sim.design.colPivHouseholderQr().solve(sim.response));
        CHECK(r.converged);
        double bound = 3 * ps.score.max_jump() * sim.design.cwiseAbs().maxCoeff() + 1e-6 * 300;
        CHECK(r.score_at_optimum.norm() <= bound);
    }
    auto sim = make_data("cauchy", 300, 3, 5);
    auto ps = projected_score_closed_form("cauchy");
    FitResult r = solve_convex_m(sim.design, sim.response, ConvexLoss(ps.score), VectorXd::Zero(3));
    CHECK(r.score_at_optimum.norm() <= 1e-6);
}

TEST_CASE("pilots")
{
    auto sim = make_data("gaussian", 50, 4, 6);
    VectorXd beta(4);
    beta << 1, -2, 0.5, 3;
    VectorXd y = sim.design * beta;
    RegressionData data(sim.design, y);
    for (auto p : {PilotSpec::ols(), PilotSpec::lad(), PilotSpec::huber(1.345)})
        CHECK((fit_pilot(data, p).beta - beta).norm() <= 1e-8);

    VectorXd v(7);
    v << 5, -1, 3, 10, 2, 8, -4;
    FitResult lad = fit_pilot(RegressionData(ones(7), v), PilotSpec::lad());
    CHECK(std::abs(lad.beta(0) - 3) <= 1e-6);

    double lad_err = 0, ols_err = 0;
    for (int rep = 0; rep < 50; ++rep) {
        auto s = make_data("cauchy", 2000, 3, 100 + rep);
        RegressionData d(s.design, s.response);
        lad_err += (fit_pilot(d, PilotSpec::lad()).beta.head(2) - s.theta0).squaredNorm();
        ols_err += (fit_pilot(d, PilotSpec::ols()).beta.head(2) - s.theta0).squaredNorm();
    }
    CHECK(lad_err / ols_err < 0.05);
}

TEST_CASE("intercept estimate")
{
    std::vector<double> a = {1, 2, 3};
    CHECK(fit_intercept(a, Zeta::mean()) == 2);
    std::vector<double> b = {4, 1, 3, 2};
    CHECK(fit_intercept(b, Zeta::quantile(0.5)) == 2);
    Rng rng(7);
    auto c = Cauchy(1.3, 1).sample(10000, rng);
    CHECK(std::abs(fit_intercept(c, Zeta::quantile(0.5)) - 1.3) < 0.05);
    CHECK_THROWS_AS(Zeta::quantile(1.0), InvalidInput);
}

TEST_CASE("antitonic score matching fits")
{
    auto sim = make_data("gaussian", 100, 4, 8);
    VectorXd beta(4);
    beta << 0.5, 1, -1, 2;
    VectorXd y = sim.design * beta;
    RegressionData exact(sim.design, y);
    for (Mode m : {Mode::intercept, Mode::symmetric}) {
        FitConfig cfg;
        cfg.mode = m;
        FitResult r = asm_fit(exact, cfg);
        CHECK((r.beta - beta).norm() <= 1e-8);
        CHECK(r.converged);
    }

    auto cs = make_data("cauchy", 600, 4, 9);
    RegressionData data(cs.design, cs.response);
    FitConfig cfg;
    cfg.zeta = Zeta::quantile(0.5);
    FitResult r = asm_fit(data, cfg);
    CHECK(r.converged);
    CHECK(r.score);
    CHECK((r.beta.head(3) - cs.theta0).norm() < 0.5);
    CHECK(std::abs(r.beta(3) - cs.mu0) < 0.5);
    CHECK(r.upsilon_hat);
    CHECK(r.i_star_hat > 0.2);
    CHECK(r.i_star_hat < 0.7);
    CHECK(r.residuals.size() == 600);

    // Truncation that removes everything leaves the pilot, flagged.
    FitConfig harsh;
    harsh.trunc = TruncationParams(1e-12, 1e6);
    FitResult h = asm_fit(data, harsh);
    CHECK_FALSE(h.converged);
    CHECK(h.note == "degenerate score estimate");
    CHECK((h.beta - fit_pilot(data, PilotSpec::lad()).beta).norm() < 1e-12);
}

TEST_CASE("translation and scale equivariance")
{
    auto cs = make_data("cauchy", 400, 4, 10);
    FitConfig cfg;
    cfg.zeta = Zeta::quantile(0.5);
    FitResult base = asm_fit(RegressionData(cs.design, cs.response), cfg);

    VectorXd shifted = cs.response.array() + 5.0;
    FitResult t = asm_fit(RegressionData(cs.design, shifted), cfg);
    CHECK((t.beta.head(3) - base.beta.head(3)).norm() < 1e-8);
    CHECK(t.beta(3) - base.beta(3) == doctest::Approx(5.0).epsilon(1e-8));

    const double a = 2.5;
    FitResult s = asm_fit(RegressionData(cs.design, a * cs.response), cfg);
    CHECK((s.beta - a * base.beta).norm() <= 1e-6 * a * base.beta.norm());
}

TEST_CASE("fitted objective is convex")
{
    auto cs = make_data("cauchy", 300, 3, 11);
    FitConfig cfg;
    FitResult r = asm_fit(RegressionData(cs.design, cs.response), cfg);
    ConvexLoss loss(*r.score);
    Rng rng(12);
    for (int k = 0; k < 300; ++k) {
        VectorXd a(3), b(3);
        for (int j = 0; j < 3; ++j) {
            a(j) = r.beta(j) + rng.normal();
            b(j) = r.beta(j) + rng.normal();
        }
        double fm = objective(cs.design, cs.response, loss, 0.5 * (a + b));
        CHECK(fm <= 0.5 * (objective(cs.design, cs.response, loss, a) + objective(cs.design, cs.response, loss, b)) +
                        1e-9 * (1 + std::abs(fm)));
    }
}

TEST_CASE("cross-fitting")
{
    auto cs = make_data("cauchy", 300, 4, 13);
    RegressionData data(cs.design, cs.response);
    FitConfig cfg;
    cfg.mode = Mode::symmetric;
    cfg.folds = Folds::three;
    cfg.seed = 99;
    FitResult avg = asm_fit_crossfit(data, cfg);

    // Rebuild the three fold fits by hand and average them.
    Rng rng(99);
    auto perm = shuffled_indices(300, rng);
    std::vector<std::size_t> f[3] = {{perm.begin(), perm.begin() + 100},
                                     {perm.begin() + 100, perm.begin() + 200},
                                     {perm.begin() + 200, perm.end()}};
    VectorXd sum = VectorXd::Zero(4);
    for (int j = 0; j < 3; ++j) {
        FitResult pilot = fit_pilot(data.subset(f[j]), cfg.pilot);
        auto S = data.subset(f[(j + 1) % 3]);
        auto F = data.subset(f[(j + 2) % 3]);
        VectorXd eps = S.y() - S.X() * pilot.beta;
        std::vector<double> e(eps.data(), eps.data() + eps.size());
        auto psi = antisymmetrize(projected_score_estimate(KdeModel(e)));
        std::vector<double> sorted = e;
        std::nth_element(sorted.begin(), sorted.begin() + 50, sorted.end());
        sum += solve_convex_m(F, ConvexLoss(psi, sorted[50]), pilot.beta).beta;
    }
    CHECK((avg.beta - sum / 3.0).norm() <= 1e-12 * (1 + avg.beta.norm()));

    FitResult again = asm_fit_crossfit(data, cfg);
    CHECK(again.beta == avg.beta);

    cfg.crossfit = CrossfitKind::pooled;
    FitResult pooled = asm_fit_crossfit(data, cfg);
    CHECK(pooled.converged);
    CHECK((pooled.beta - avg.beta).norm() < 0.3);

    cfg.mode = Mode::intercept;
    cfg.zeta = Zeta::quantile(0.5);
    FitResult ic = asm_fit_crossfit(data, cfg);
    CHECK((ic.beta.head(3) - cs.theta0).norm() < 0.6);
    CHECK(ic.i_star_hat > 0.2);

    auto small = make_data("gaussian", 17, 4, 14);
    CHECK_THROWS_AS(asm_fit_crossfit(RegressionData(small.design, small.response), cfg), InvalidInput);
}

TEST_CASE("alternating fit")
{
    auto sim = make_data("gaussian", 80, 4, 15);
    VectorXd beta(4);
    beta << 1, 2, 3, 4;
    RegressionData exact(sim.design, sim.design * beta);
    FitResult r = alternating_fit(exact, FitConfig{});
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK((r.beta - beta).norm() <= 1e-8);

    auto mix = make_data("location_mix", 600, 6, 16);
    FitConfig cfg;
    cfg.pilot = PilotSpec::ols();
    FitResult a = alternating_fit(RegressionData(mix.design, mix.response), cfg);
    CHECK(a.converged);
    // The objective falls steeply over the first rounds and then settles;
    // later rounds move it by well under a percent in either direction.
    const auto& tr = a.objective_trace;
    REQUIRE(tr.size() >= 3);
    CHECK(tr[1] < tr[0]);
    CHECK(tr[2] < tr[1]);
    for (std::size_t t = 3; t < tr.size(); ++t) CHECK(std::abs(tr[t] - tr[t - 1]) <= 1e-2 * std::abs(tr[t]));
    CHECK(std::abs(tr.back() - tr[tr.size() - 2]) <= 1e-6 * (1 + std::abs(tr.back())));
}

TEST_CASE("alternating fit matches the oracle under the location mixture")
{
    auto dens = make_density("location_mix");
    auto oracle_score = projected_score(*dens).score;
    double alt = 0, orc = 0;
    for (int rep = 0; rep < 30; ++rep) {
        auto s = make_data("location_mix", 600, 6, 200 + rep);
        RegressionData d(s.design, s.response);
        FitConfig cfg;
        cfg.pilot = PilotSpec::ols();
        alt += (alternating_fit(d, cfg).beta.head(5) - s.theta0).squaredNorm();
        orc += (oracle_fit(d, cfg, oracle_score).beta.head(5) - s.theta0).squaredNorm();
    }
    CHECK(alt / orc < 1.25);
}

TEST_CASE("one-step estimator")
{
    MatrixXd X(4, 2);
    X << 1, 0, 0, 1, 1, 1, 2, -1;
    std::vector<double> psi = {0, 0, 0, 0};
    VectorXd b(2);
    b << 0.3, -0.7;
    CHECK(one_step_update(X, psi, b).beta == b);
    // Directions cancelling exactly also give no update.
    MatrixXd Z(2, 1);
    Z << 1, 1;
    std::vector<double> canc = {1, -1};
    VectorXd z1(1);
    z1 << 2;
    CHECK(one_step_update(Z, canc, z1).beta(0) == doctest::Approx(2));
    // The update solves the weighted normal equations.
    std::vector<double> w = {0.5, -1, 2, 0.1};
    auto up = one_step_update(X, w, b);
    Eigen::Map<const VectorXd> s(w.data(), 4);
    MatrixXd G = X.transpose() * s.array().square().matrix().asDiagonal() * X;
    CHECK((G * (b - up.beta) - X.transpose() * s).norm() < 1e-12);

    double one = 0, asmv = 0, lad = 0;
    for (int rep = 0; rep < 20; ++rep) {
        auto sm = make_data("location_mix", 600, 6, 300 + rep);
        RegressionData d(sm.design, sm.response);
        FitConfig cfg;
        cfg.pilot = PilotSpec::ols();
        cfg.seed = rep;
        one += (one_step_fit(d, cfg).beta.head(5) - sm.theta0).squaredNorm();
        asmv += (asm_fit(d, cfg).beta.head(5) - sm.theta0).squaredNorm();
    }
    CHECK(one / asmv > 10);

    one = asmv = 0;
    for (int rep = 0; rep < 40; ++rep) {
        auto sm = make_data("gaussian", 600, 6, 400 + rep);
        RegressionData d(sm.design, sm.response);
        FitConfig cfg;
        cfg.seed = rep;
        one += (one_step_fit(d, cfg).beta.head(5) - sm.theta0).squaredNorm();
        lad += (fit_pilot(d, PilotSpec::lad()).beta.head(5) - sm.theta0).squaredNorm();
    }
    CHECK(one < lad);
}

}
