#include "antitonic/regression.hpp"

#include "antitonic/error.hpp"
#include "antitonic/numeric.hpp"
#include "antitonic/projection.hpp"

#include <algorithm>
#include <cmath>

namespace antitonic {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kRankTol = 1e-10;

Eigen::Index rank_of(const MatrixXd& A)
{
    Eigen::ColPivHouseholderQR<MatrixXd> qr(A);
    qr.setThreshold(kRankTol);
    return qr.rank();
}

std::vector<double> to_vector(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double spread(std::span<const double> r)
{
    auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    return *hi - *lo;
}

bool exact_fit(std::span<const double> r, const VectorXd& y)
{
    return spread(r) <= 1e-10 * (1 + y.cwiseAbs().maxCoeff());
}

bool identically_zero(const MonotoneScore& s)
{
    return std::all_of(s.levels().begin(), s.levels().end(), [](double v) { return v == 0.0; });
}

MatrixXd rows_of(const MatrixXd& A, std::span<const std::size_t> idx)
{
    MatrixXd out(static_cast<Eigen::Index>(idx.size()), A.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = A.row(static_cast<Eigen::Index>(idx[i]));
    return out;
}

VectorXd rows_of(const VectorXd& v, std::span<const std::size_t> idx)
{
    VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
    return out;
}

// Covariate block without the trailing ones column.
MatrixXd covariates(const MatrixXd& X) { return X.leftCols(X.cols() - 1); }

void require_intercept(const RegressionData& data, const char* who)
{
    if (!data.has_intercept_column())
        throw InvalidInput(std::string(who) + ": intercept mode needs a last design column of ones");
    if (data.d() < 2) throw InvalidInput(std::string(who) + ": intercept mode needs at least one covariate");
}

MonotoneScore estimate_score(std::span<const double> residuals, const FitConfig& cfg, bool antisym)
{
    KdeModel model(residuals, cfg.kernel, cfg.bandwidth);
    MonotoneScore s = projected_score_estimate(model, cfg.trunc, cfg.grid);
    return antisym ? antisymmetrize(s) : s;
}

double median_of(std::vector<double> r)
{
    auto mid = r.begin() + static_cast<std::ptrdiff_t>(r.size() / 2);
    std::nth_element(r.begin(), mid, r.end());
    return *mid;
}

ConvexLoss loss_for(const MonotoneScore& s, std::span<const double> residuals)
{
    return ConvexLoss(s, median_of({residuals.begin(), residuals.end()}));
}

std::vector<double> residuals_of(const MatrixXd& X, const VectorXd& y, const VectorXd& beta)
{
    return to_vector(y - X * beta);
}

double max_abs(const MatrixXd& X) { return X.size() ? X.cwiseAbs().maxCoeff() : 0.0; }

} // namespace

RegressionData::RegressionData(Eigen::MatrixXd design, Eigen::VectorXd response)
    : X_(std::move(design)), y_(std::move(response))
{
    if (X_.rows() != y_.size()) throw InvalidInput("regression data: design and response lengths differ");
    if (X_.cols() < 1) throw InvalidInput("regression data: design has no columns");
    if (X_.rows() <= X_.cols()) throw InvalidInput("regression data: need more observations than coefficients");
    if (!X_.allFinite() || !y_.allFinite()) throw InvalidInput("regression data: non-finite entries");
    if (rank_of(X_) < X_.cols()) {
        // First column that is a combination of the ones before it.
        for (Eigen::Index j = 0; j < X_.cols(); ++j)
            if (rank_of(X_.leftCols(j + 1)) < j + 1)
                throw InvalidInput("regression data: design is rank deficient at column " + std::to_string(j + 1));
        throw InvalidInput("regression data: design is rank deficient");
    }
}

bool RegressionData::has_intercept_column() const { return (X_.col(X_.cols() - 1).array() == 1.0).all(); }

RegressionData RegressionData::subset(std::span<const std::size_t> rows) const
{
    return RegressionData(rows_of(X_, rows), rows_of(y_, rows));
}

PilotSpec PilotSpec::huber(double k)
{
    if (!(k > 0)) throw InvalidInput("huber pilot: K must be positive");
    return {Kind::huber, k};
}

void FitConfig::validate() const
{
    if (zeta.kind == Zeta::Kind::quantile && !(zeta.tau > 0 && zeta.tau < 1))
        throw InvalidInput("config: tau must lie in (0, 1)");
    if (!(solver.grad_tol > 0) || solver.max_iter < 1) throw InvalidInput("config: solver tolerances must be positive");
    if (grid < 64) throw InvalidInput("config: grid must have at least 64 points");
    if (!(trunc.alpha > 0) || !(trunc.gamma > 0)) throw InvalidInput("config: truncation levels must be positive");
    if (pilot.kind == PilotSpec::Kind::huber && !(pilot.huber_k > 0)) throw InvalidInput("config: huber K must be positive");
}

// ---------------------------------------------------------------------------
// Newton solver

FitResult solve_convex_m_multi(const MatrixXd& X, const VectorXd& y, const std::vector<const ConvexLoss*>& losses,
                               std::span<const int> loss_index, const VectorXd& init, const SolverOptions& opts)
{
    const Eigen::Index n = X.rows(), d = X.cols();
    if (y.size() != n || static_cast<Eigen::Index>(loss_index.size()) != n || init.size() != d)
        throw InvalidInput("solve_convex_m: dimension mismatch");
    if (n == 0 || d == 0) throw InvalidInput("solve_convex_m: empty problem");
    if (rank_of(X) < d) throw InvalidInput("solve_convex_m: design is rank deficient");
    for (int k : loss_index)
        if (k < 0 || static_cast<std::size_t>(k) >= losses.size()) throw InvalidInput("solve_convex_m: bad loss index");

    const double inv_n = 1.0 / static_cast<double>(n);
    double max_jump = 0;
    for (const ConvexLoss* l : losses) max_jump = std::max(max_jump, l->score().max_jump());

    auto objective = [&](const VectorXd& b) {
        VectorXd r = y - X * b;
        double f = 0;
        for (Eigen::Index i = 0; i < n; ++i) f += losses[static_cast<std::size_t>(loss_index[i])]->value(r(i));
        return f * inv_n;
    };

    VectorXd beta = init;
    VectorXd g(d);
    MatrixXd H(d, d);
    FitResult res;
    bool ridged_once = false;

    auto evaluate = [&](const VectorXd& b) {
        VectorXd r = y - X * b;
        double f = 0;
        g.setZero();
        VectorXd w(n);
        VectorXd psi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double v, d1, d2;
            losses[static_cast<std::size_t>(loss_index[i])]->evaluate(r(i), v, d1, d2);
            f += v;
            psi(i) = -d1;
            w(i) = d2;
        }
        g = X.transpose() * psi * inv_n;
        H = X.transpose() * w.asDiagonal() * X * inv_n;
        return f * inv_n;
    };

    const double xmax = max_abs(X);
    double f = evaluate(beta);
    int it = 0;
    for (;; ++it) {
        res.objective_trace.push_back(f);
        const double bnorm = beta.norm();
        if (g.norm() <= opts.grad_tol * (1 + bnorm)) {
            res.converged = true;
            break;
        }
        // With a step score the gradient never vanishes; stop once it is
        // within what the jumps at the current kinks can explain.
        if (max_jump > 0 && static_cast<double>(n) * g.norm() <= static_cast<double>(d) * max_jump * xmax) {
            res.converged = true;
            break;
        }
        if (it >= opts.max_iter) break;

        MatrixXd Hm = 0.5 * (H + H.transpose());
        Eigen::LDLT<MatrixXd> ldlt(Hm);
        const double tr = std::max(Hm.trace(), 0.0);
        bool ridge = opts.always_ridge || ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                     ldlt.vectorD().minCoeff() < 1e-8 * tr / static_cast<double>(d);
        if (ridge) {
            ridged_once = true;
            Hm += MatrixXd::Identity(d, d);
            ldlt.compute(Hm);
        }
        VectorXd dir = -ldlt.solve(g);
        double slope = g.dot(dir);
        if (!(slope < 0) || !dir.allFinite()) {
            dir = -g;
            slope = -g.squaredNorm();
        }
        // Predicted Newton decrease below rounding level: nothing left to gain.
        if (-0.5 * slope <= 1e-15 * (1 + std::abs(f))) {
            res.converged = true;
            break;
        }

        // Backtracking from t = 1. A ridged direction has an arbitrary scale
        // (the loss may be linear there), so an accepted unit step is then
        // stretched by doubling while the Armijo condition keeps holding.
        auto search = [&](const VectorXd& dvec, double s, bool expand, VectorXd& out, double& fout) {
            double t = 1;
            for (int h = 0; h < 60; ++h, t *= 0.5) {
                VectorXd cand = beta + t * dvec;
                double fc = objective(cand);
                if (std::isfinite(fc) && fc <= f + 1e-4 * t * s) {
                    out = cand;
                    fout = fc;
                    if (expand && h == 0) {
                        for (int e = 0; e < 60; ++e) {
                            t *= 2;
                            VectorXd c2 = beta + t * dvec;
                            double f2 = objective(c2);
                            if (!(std::isfinite(f2) && f2 <= f + 1e-4 * t * s && f2 < fout)) break;
                            out = c2;
                            fout = f2;
                        }
                    }
                    return true;
                }
            }
            return false;
        };

        VectorXd next;
        double fnext = f;
        const bool steepest = dir == -g;
        bool ok = search(dir, slope, ridge || steepest, next, fnext);
        if (!ok && !steepest) ok = search(-g, -g.squaredNorm(), true, next, fnext);
        if (!ok) {
            // Subgradient certificate: at a kink of a piecewise-linear loss
            // the gradient is bounded by the jumps of the score.
            double cert = static_cast<double>(n) * g.norm();
            double bound = static_cast<double>(d) * max_jump * xmax +
                           static_cast<double>(n) * std::sqrt(opts.grad_tol) * (1 + bnorm);
            if (cert <= bound) {
                res.converged = true;
                break;
            }
            throw StalledSolver("solve_convex_m: line search failed to decrease the objective", res.objective_trace);
        }
        const double step = (next - beta).norm();
        beta = next;
        f = evaluate(beta);
        if (step <= 1e-13 * (1 + beta.norm())) {
            res.objective_trace.push_back(f);
            ++it;
            res.converged = true;
            break;
        }
    }

    res.beta = beta;
    res.iterations = it;
    res.residuals = residuals_of(X, y, beta);
    res.score_at_optimum = g * static_cast<double>(n);
    if (ridged_once) res.note = "hessian ridge applied";
    return res;
}

FitResult solve_convex_m(const MatrixXd& X, const VectorXd& y, const ConvexLoss& loss, const VectorXd& init,
                         const SolverOptions& opts)
{
    std::vector<int> idx(static_cast<std::size_t>(X.rows()), 0);
    return solve_convex_m_multi(X, y, {&loss}, idx, init, opts);
}

FitResult solve_convex_m(const RegressionData& data, const ConvexLoss& loss, const VectorXd& init,
                         const SolverOptions& opts)
{
    return solve_convex_m(data.X(), data.y(), loss, init, opts);
}

// ---------------------------------------------------------------------------
// Pilots

namespace {

VectorXd ols_solve(const MatrixXd& X, const VectorXd& y) { return X.colPivHouseholderQr().solve(y); }

FitResult finish_simple(const MatrixXd& X, const VectorXd& y, VectorXd beta, bool converged, int iterations)
{
    FitResult res;
    res.beta = std::move(beta);
    res.residuals = residuals_of(X, y, res.beta);
    res.converged = converged;
    res.iterations = iterations;
    return res;
}

} // namespace

FitResult fit_pilot(const RegressionData& data, const PilotSpec& pilot, const SolverOptions& opts)
{
    const MatrixXd& X = data.X();
    const VectorXd& y = data.y();
    VectorXd b0 = ols_solve(X, y);
    switch (pilot.kind) {
    case PilotSpec::Kind::ols: {
        FitResult r = finish_simple(X, y, b0, true, 1);
        VectorXd rv = Eigen::Map<const VectorXd>(r.residuals.data(), static_cast<Eigen::Index>(r.residuals.size()));
        r.score_at_optimum = X.transpose() * rv;
        r.objective_trace = {0.5 * rv.squaredNorm() / static_cast<double>(data.n())};
        return r;
    }
    case PilotSpec::Kind::lad: {
        VectorXd beta = b0;
        std::vector<double> trace;
        bool conv = false;
        int it = 0;
        for (; it < 200; ++it) {
            VectorXd r = y - X * beta;
            trace.push_back(r.cwiseAbs().mean());
            // Floor relative to the residual scale keeps the fixed point equivariant.
            const double floor = 1e-12 * (r.cwiseAbs().mean() + 1e-300);
            VectorXd w = r.cwiseAbs().cwiseMax(floor).cwiseInverse();
            MatrixXd A = X.transpose() * w.asDiagonal() * X;
            VectorXd next = A.ldlt().solve(X.transpose() * w.asDiagonal() * y);
            if (!next.allFinite()) break;
            double change = (next - beta).norm() / std::max(beta.norm(), 1e-300);
            beta = next;
            if (change < 1e-10) {
                conv = true;
                ++it;
                break;
            }
        }
        FitResult r = finish_simple(X, y, beta, conv, it);
        r.objective_trace = std::move(trace);
        return r;
    }
    case PilotSpec::Kind::huber:
        return solve_convex_m(data, ConvexLoss(huber_score(pilot.huber_k)), b0, opts);
    }
    throw InvalidInput("fit_pilot: unknown pilot");
}

double fit_intercept(std::span<const double> residual_base, const Zeta& zeta)
{
    if (residual_base.empty()) throw InvalidInput("fit_intercept: no residuals");
    if (zeta.kind == Zeta::Kind::mean) return mean(residual_base);
    std::vector<double> r(residual_base.begin(), residual_base.end());
    const double n = static_cast<double>(r.size());
    auto k = static_cast<std::size_t>(std::max(1.0, std::ceil(zeta.tau * n - 1e-12)) - 1);
    k = std::min(k, r.size() - 1);
    std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(k), r.end());
    return r[k];
}

// ---------------------------------------------------------------------------
// Antitonic score matching

namespace {

void attach_intercept_stats(FitResult& res, const RegressionData& data, const FitConfig& cfg)
{
    res.residuals = residuals_of(data.X(), data.y(), res.beta);
    if (cfg.mode == Mode::intercept) {
        try {
            res.upsilon_hat = estimate_upsilon(cfg.zeta, res.residuals);
        } catch (const DegenerateSample&) {
            res.upsilon_hat.reset();
        }
    }
}

FitResult pilot_as_result(const RegressionData& data, FitResult pilot, const FitConfig& cfg, bool converged,
                          std::string note)
{
    pilot.converged = converged;
    pilot.note = std::move(note);
    attach_intercept_stats(pilot, data, cfg);
    if (!pilot.score_at_optimum.size()) pilot.score_at_optimum = VectorXd::Zero(static_cast<Eigen::Index>(data.d()));
    return pilot;
}

} // namespace

FitResult asm_fit(const RegressionData& data, const FitConfig& cfg)
{
    cfg.validate();
    const MatrixXd& X = data.X();
    const VectorXd& y = data.y();
    const bool icpt = cfg.mode == Mode::intercept;
    if (icpt) require_intercept(data, "asm_fit");

    FitResult pilot = fit_pilot(data, cfg.pilot, cfg.solver);
    const Eigen::Index d = X.cols();

    std::vector<double> eps;
    MatrixXd Xt;
    VectorXd theta_bar;
    if (icpt) {
        Xt = covariates(X);
        theta_bar = pilot.beta.head(d - 1);
        eps = residuals_of(Xt, y, theta_bar);
    } else {
        eps = residuals_of(X, y, pilot.beta);
    }
    if (exact_fit(eps, y)) {
        FitResult r = pilot_as_result(data, pilot, cfg, true, "exact fit");
        if (icpt) r.beta(d - 1) = fit_intercept(residuals_of(Xt, y, theta_bar), cfg.zeta);
        r.residuals = residuals_of(X, y, r.beta);
        r.i_star_hat = std::numeric_limits<double>::infinity();
        return r;
    }

    MonotoneScore psi = estimate_score(eps, cfg, cfg.mode == Mode::symmetric);
    if (identically_zero(psi)) return pilot_as_result(data, pilot, cfg, false, "degenerate score estimate");
    ConvexLoss loss = loss_for(psi, eps);

    FitResult res;
    if (icpt) {
        VectorXd xbar = Xt.colwise().mean().transpose();
        MatrixXd Xc = Xt.rowwise() - xbar.transpose();
        VectorXd yc = y.array() - xbar.dot(theta_bar);
        res = solve_convex_m(Xc, yc, loss, theta_bar, cfg.solver);
        VectorXd theta = res.beta;
        std::vector<double> base = residuals_of(Xt, y, theta);
        res.beta.resize(d);
        res.beta.head(d - 1) = theta;
        res.beta(d - 1) = fit_intercept(base, cfg.zeta);
    } else {
        res = solve_convex_m(X, y, loss, pilot.beta, cfg.solver);
    }
    res.i_star_hat = estimate_i_star(psi, eps);
    attach_intercept_stats(res, data, cfg);
    res.score = psi;
    return res;
}

FitResult asm_fit_crossfit(const RegressionData& data, const FitConfig& cfg)
{
    cfg.validate();
    const std::size_t n = data.n(), d = data.d();
    if (n < 3 * (d + 2)) throw InvalidInput("asm_fit_crossfit: need n >= 3(d + 2) for three folds");
    const bool icpt = cfg.mode == Mode::intercept;
    if (icpt) require_intercept(data, "asm_fit_crossfit");
    const MatrixXd& X = data.X();
    const VectorXd& y = data.y();
    const auto di = static_cast<Eigen::Index>(d);
    const Eigen::Index p = icpt ? di - 1 : di;  // fitted coefficients per fold

    Rng rng(cfg.seed);
    std::vector<std::size_t> perm = shuffled_indices(n, rng);
    const std::size_t a = n / 3;
    std::vector<std::size_t> folds[3] = {{perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(a)},
                                         {perm.begin() + static_cast<std::ptrdiff_t>(a),
                                          perm.begin() + static_cast<std::ptrdiff_t>(2 * a)},
                                         {perm.begin() + static_cast<std::ptrdiff_t>(2 * a), perm.end()}};

    std::vector<MonotoneScore> scores;
    std::vector<ConvexLoss> losses;
    std::vector<VectorXd> starts;
    std::vector<MatrixXd> designs;
    std::vector<VectorXd> responses;
    double info_sum = 0;
    for (int j = 0; j < 3; ++j) {
        const auto& P = folds[j];
        const auto& S = folds[(j + 1) % 3];
        const auto& F = folds[(j + 2) % 3];
        FitResult pilot = fit_pilot(data.subset(P), cfg.pilot, cfg.solver);
        VectorXd start = icpt ? VectorXd(pilot.beta.head(di - 1)) : pilot.beta;
        MatrixXd XS = rows_of(X, S), XF = rows_of(X, F);
        if (icpt) {
            XS = covariates(XS);
            XF = covariates(XF);
        }
        VectorXd yS = rows_of(y, S), yF = rows_of(y, F);
        std::vector<double> eps = residuals_of(XS, yS, start);
        if (spread(eps) <= 1e-10 * (1 + y.cwiseAbs().maxCoeff()))
            throw DegenerateSample("asm_fit_crossfit: pilot residuals are constant on a fold");
        MonotoneScore psi = estimate_score(eps, cfg, cfg.mode == Mode::symmetric);
        if (identically_zero(psi)) throw DegenerateSample("asm_fit_crossfit: score estimate vanishes on a fold");

        std::vector<double> epsF = residuals_of(XF, yF, start);
        for (double e : epsF) info_sum += psi(e) * psi(e);

        VectorXd yfit = yF;
        if (icpt) {
            VectorXd xbar = XF.colwise().mean().transpose();
            XF = XF.rowwise() - xbar.transpose();
            yfit = yF.array() - xbar.dot(start);
        }
        losses.push_back(loss_for(psi, eps));
        scores.push_back(std::move(psi));
        starts.push_back(std::move(start));
        designs.push_back(std::move(XF));
        responses.push_back(std::move(yfit));
    }

    FitResult res;
    VectorXd coef = VectorXd::Zero(p);
    std::string note;
    bool conv = true;
    for (int j = 0; j < 3; ++j) {
        FitResult fj = solve_convex_m(designs[j], responses[j], losses[j], starts[j], cfg.solver);
        coef += fj.beta / 3.0;
        conv = conv && fj.converged;
        res.iterations += fj.iterations;
        res.objective_trace.insert(res.objective_trace.end(), fj.objective_trace.begin(), fj.objective_trace.end());
        if (!fj.note.empty()) note = fj.note;
    }
    if (cfg.crossfit == CrossfitKind::pooled) {
        MatrixXd Xs(static_cast<Eigen::Index>(n), p);
        VectorXd ys(static_cast<Eigen::Index>(n));
        std::vector<int> idx;
        Eigen::Index row = 0;
        for (int j = 0; j < 3; ++j) {
            Xs.middleRows(row, designs[j].rows()) = designs[j];
            ys.segment(row, designs[j].rows()) = responses[j];
            row += designs[j].rows();
            idx.insert(idx.end(), static_cast<std::size_t>(designs[j].rows()), j);
        }
        std::vector<const ConvexLoss*> lp = {&losses[0], &losses[1], &losses[2]};
        FitResult pooled = solve_convex_m_multi(Xs, ys, lp, idx, coef, cfg.solver);
        coef = pooled.beta;
        conv = pooled.converged;
        res.iterations += pooled.iterations;
        res.objective_trace = pooled.objective_trace;
        res.score_at_optimum = pooled.score_at_optimum;
        if (!pooled.note.empty()) note = pooled.note;
    }

    if (icpt) {
        res.beta.resize(di);
        res.beta.head(p) = coef;
        res.beta(di - 1) = fit_intercept(residuals_of(covariates(X), y, coef), cfg.zeta);
    } else {
        res.beta = coef;
    }
    if (!res.score_at_optimum.size()) {
        // Pooled estimating equation evaluated at the averaged estimate.
        VectorXd s = VectorXd::Zero(p);
        for (int j = 0; j < 3; ++j) {
            VectorXd r = responses[j] - designs[j] * coef;
            for (Eigen::Index i = 0; i < r.size(); ++i) s += designs[j].row(i).transpose() * scores[j](r(i));
        }
        res.score_at_optimum = s;
    }
    res.converged = conv;
    res.note = note;
    res.i_star_hat = info_sum / static_cast<double>(n);
    attach_intercept_stats(res, data, cfg);
    return res;
}

FitResult fit(const RegressionData& data, const FitConfig& cfg)
{
    return cfg.folds == Folds::three ? asm_fit_crossfit(data, cfg) : asm_fit(data, cfg);
}

// ---------------------------------------------------------------------------
// Alternating optimisation

FitResult alternating_fit(const RegressionData& data, const FitConfig& cfg, int max_iter)
{
    cfg.validate();
    const MatrixXd& X = data.X();
    const VectorXd& y = data.y();
    const bool icpt = data.has_intercept_column();
    const Eigen::Index d = X.cols();

    VectorXd beta = VectorXd::Zero(d);
    std::vector<double> trace;
    std::optional<MonotoneScore> last;
    std::vector<double> last_resid;
    FitResult res;
    bool conv = false;
    int it = 0;
    double prev_spread = std::numeric_limits<double>::infinity();
    for (; it < max_iter; ++it) {
        std::vector<double> r = residuals_of(X, y, beta);
        // A fit that removes all but 1e-6 of the residual spread interpolates
        // the data; the remainder is solver tolerance, not noise.
        const double sp = spread(r);
        if (exact_fit(r, y) || (std::isfinite(prev_spread) && sp <= 1e-6 * prev_spread)) {
            if (!exact_fit(r, y)) {
                // Polish: the leftover lies in the column span up to solver tolerance.
                Eigen::Map<const VectorXd> rv(r.data(), Eigen::Index(r.size()));
                beta += X.colPivHouseholderQr().solve(rv);
                r = residuals_of(X, y, beta);
            }
            if (icpt) beta(d - 1) += fit_intercept(r, cfg.zeta);
            conv = true;
            res.note = "exact fit";
            break;
        }
        prev_spread = sp;
        MonotoneScore psi = estimate_score(r, cfg, false);
        double D = empirical_score_matching_objective(psi, r);
        trace.push_back(D);
        last = psi;
        last_resid = r;
        if (trace.size() >= 2 && std::abs(D - trace[trace.size() - 2]) <= 1e-6 * (1 + std::abs(D))) {
            conv = true;
            break;
        }
        if (identically_zero(psi)) {
            res.note = "degenerate score estimate";
            break;
        }
        FitResult step = solve_convex_m(X, y, loss_for(psi, r), beta, cfg.solver);
        beta = step.beta;
    }
    if (icpt && res.note.empty()) {
        // Report the intercept under the requested centring.
        beta(d - 1) = 0;
        beta(d - 1) = fit_intercept(residuals_of(X, y, beta), cfg.zeta);
    }
    res.beta = beta;
    res.objective_trace = std::move(trace);
    res.converged = conv;
    res.iterations = it + (conv ? 1 : 0);
    if (last) {
        res.i_star_hat = estimate_i_star(*last, last_resid);
        VectorXd r = y - X * beta;
        VectorXd s = VectorXd::Zero(d);
        for (Eigen::Index i = 0; i < r.size(); ++i) s += X.row(i).transpose() * (*last)(r(i));
        res.score_at_optimum = s;
        res.score = last;
    } else {
        res.i_star_hat = std::numeric_limits<double>::infinity();
        res.score_at_optimum = VectorXd::Zero(d);
    }
    FitConfig c = cfg;
    c.mode = icpt ? Mode::intercept : Mode::plain;
    attach_intercept_stats(res, data, c);
    return res;
}

// ---------------------------------------------------------------------------
// One-step

OneStepUpdate one_step_update(const MatrixXd& X, std::span<const double> psi, const VectorXd& beta_bar)
{
    if (static_cast<Eigen::Index>(psi.size()) != X.rows() || beta_bar.size() != X.cols())
        throw InvalidInput("one_step_update: dimension mismatch");
    Eigen::Map<const VectorXd> s(psi.data(), X.rows());
    MatrixXd G = X.transpose() * s.array().square().matrix().asDiagonal() * X;
    VectorXd g = X.transpose() * s;
    Eigen::LDLT<MatrixXd> ldlt(G);
    bool ridged = ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
                  ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().cwiseAbs().maxCoeff());
    if (ridged) ldlt.compute(G + 1e-8 * MatrixXd::Identity(G.rows(), G.cols()));
    return {beta_bar - ldlt.solve(g), ridged};
}

FitResult one_step_fit(const RegressionData& data, const FitConfig& cfg)
{
    cfg.validate();
    const MatrixXd& X = data.X();
    const VectorXd& y = data.y();
    const std::size_t n = data.n();
    const bool icpt = cfg.mode == Mode::intercept;
    if (icpt) require_intercept(data, "one_step_fit");
    const Eigen::Index d = X.cols();

    FitResult pilot = fit_pilot(data, cfg.pilot, cfg.solver);
    std::vector<double> eps = residuals_of(X, y, pilot.beta);
    if (exact_fit(eps, y)) {
        FitResult r = pilot_as_result(data, pilot, cfg, true, "exact fit");
        r.i_star_hat = std::numeric_limits<double>::infinity();
        return r;
    }

    Rng rng(cfg.seed);
    std::vector<std::size_t> perm = shuffled_indices(n, rng);
    const std::size_t half = n / 2;
    std::vector<std::size_t> A(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<std::size_t> B(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
    auto fold_resid = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> r;
        for (std::size_t i : idx) r.push_back(eps[i]);
        return r;
    };
    TruncatedScore sA(KdeModel(fold_resid(A), cfg.kernel, cfg.bandwidth), TruncationParams{});
    TruncatedScore sB(KdeModel(fold_resid(B), cfg.kernel, cfg.bandwidth), TruncationParams{});

    // Each observation is scored with the density estimate from the other fold.
    std::vector<double> psi(n);
    for (std::size_t i : A) psi[i] = sB(eps[i]);
    for (std::size_t i : B) psi[i] = sA(eps[i]);

    FitResult res;
    OneStepUpdate up;
    if (icpt) {
        up = one_step_update(covariates(X), psi, pilot.beta.head(d - 1));
        res.beta = pilot.beta;
        res.beta.head(d - 1) = up.beta;
    } else {
        up = one_step_update(X, psi, pilot.beta);
        res.beta = up.beta;
    }
    if (up.ridged) res.note = "weighted gram matrix ridged";
    res.converged = true;
    res.iterations = 1;
    double s2 = 0;
    for (double v : psi) s2 += v * v;
    res.i_star_hat = s2 / static_cast<double>(n);
    Eigen::Map<const VectorXd> pv(psi.data(), static_cast<Eigen::Index>(n));
    res.score_at_optimum = X.transpose() * pv;
    attach_intercept_stats(res, data, cfg);
    return res;
}

// ---------------------------------------------------------------------------
// Oracle

FitResult oracle_fit(const RegressionData& data, const FitConfig& cfg, const MonotoneScore& score)
{
    cfg.validate();
    FitResult pilot = fit_pilot(data, cfg.pilot, cfg.solver);
    std::vector<double> eps = residuals_of(data.X(), data.y(), pilot.beta);
    if (exact_fit(eps, data.y())) {
        FitResult r = pilot_as_result(data, pilot, cfg, true, "exact fit");
        r.i_star_hat = std::numeric_limits<double>::infinity();
        return r;
    }
    FitResult res = solve_convex_m(data, ConvexLoss(score), pilot.beta, cfg.solver);
    res.i_star_hat = estimate_i_star(score, res.residuals);
    res.score = score;
    attach_intercept_stats(res, data, cfg);
    return res;
}

// ---------------------------------------------------------------------------

InferenceResult infer(const RegressionData& data, const FitResult& fit, const FitConfig& cfg, double alpha)
{
    const MatrixXd& X = data.X();
    const std::size_t n = data.n();
    const double i_hat = fit.i_star_hat;
    if (!(i_hat > 0) || !std::isfinite(i_hat))
        throw DegenerateSample("infer: the information estimate is not a positive finite number");
    MatrixXd cov;
    std::optional<double> ups;
    if (cfg.mode == Mode::intercept) {
        if (!fit.upsilon_hat) throw DegenerateSample("infer: no upsilon estimate for the intercept");
        ups = fit.upsilon_hat;
        cov = covariance_intercept(X, i_hat, *ups);
    } else {
        cov = covariance_symmetric(X, i_hat);
    }
    MatrixXd info = cov.inverse();
    info = 0.5 * (info + info.transpose());
    return {i_hat, ups, cov, confidence_intervals(fit.beta, cov, n, alpha),
            confidence_ellipsoid(fit.beta, info, n, alpha)};
}

} // namespace antitonic
