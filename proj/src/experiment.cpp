#include "antitonic/experiment.hpp"

#include "antitonic/csv.hpp"
#include "antitonic/error.hpp"
#include "antitonic/projection.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace antitonic {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void ExperimentSpec::validate() const
{
    if (reps < 1) throw InvalidInput("experiment: reps must be at least 1");
    if (d < 2) throw InvalidInput("experiment: d counts the intercept and must be at least 2");
    if (n <= d) throw InvalidInput("experiment: need n > d");
    if (!(theta_radius >= 0)) throw InvalidInput("experiment: theta radius must be non-negative");
    static const std::vector<std::string> known = {"oracle", "asm", "asm-cf", "alt", "1s", "lad", "ols"};
    for (const auto& e : estimators)
        if (std::find(known.begin(), known.end(), e) == known.end())
            throw InvalidInput("experiment: unknown estimator '" + e + "'");
    config.validate();
}

PilotSpec default_pilot_for(const std::string& noise)
{
    return noise.rfind("location_mix", 0) == 0 ? PilotSpec::ols() : PilotSpec::lad();
}

VectorXd draw_on_sphere(std::size_t dim, double radius, Rng& rng)
{
    VectorXd v(static_cast<Eigen::Index>(dim));
    do {
        for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
    } while (v.norm() == 0);
    return radius * v / v.norm();
}

VectorXd batch_theta(const ExperimentSpec& spec)
{
    Rng rng(splitmix64(spec.seed ^ 0x7468657461ULL));
    return draw_on_sphere(spec.d - 1, spec.theta_radius, rng);
}

SimulatedData simulate(const ExperimentSpec& spec, const ReferenceDensity& noise, std::size_t rep,
                       const VectorXd& theta0)
{
    Rng rng(stream_seed(spec.seed, rep));
    const auto n = static_cast<Eigen::Index>(spec.n);
    const auto p = static_cast<Eigen::Index>(spec.d - 1);
    SimulatedData s;
    s.theta0 = spec.redraw_theta ? draw_on_sphere(spec.d - 1, spec.theta_radius, rng) : theta0;
    s.mu0 = spec.mu0;
    s.design.resize(n, p + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) s.design(i, j) = 1.0 + rng.normal();
        s.design(i, p) = 1.0;
    }
    s.response.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
        s.response(i) = s.design.row(i).head(p).dot(s.theta0) + s.mu0 + noise.draw(rng);
    return s;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!err) err = std::current_exception();
                next = count;
                return;
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (err) std::rethrow_exception(err);
}

VectorXd run_estimator(const std::string& name, const RegressionData& data, const FitConfig& config,
                       const MonotoneScore* oracle_score)
{
    if (name == "asm") {
        FitConfig c = config;
        c.folds = Folds::none;
        return asm_fit(data, c).beta;
    }
    if (name == "asm-cf") {
        FitConfig c = config;
        c.folds = Folds::three;
        return asm_fit_crossfit(data, c).beta;
    }
    if (name == "alt") return alternating_fit(data, config).beta;
    if (name == "1s") return one_step_fit(data, config).beta;
    if (name == "lad") return fit_pilot(data, PilotSpec::lad(), config.solver).beta;
    if (name == "ols") return fit_pilot(data, PilotSpec::ols(), config.solver).beta;
    if (name == "oracle") {
        if (!oracle_score) throw InvalidInput("run_estimator: oracle needs the population score");
        return oracle_fit(data, config, *oracle_score).beta;
    }
    throw InvalidInput("run_estimator: unknown estimator '" + name + "'");
}

namespace {

double median_of(std::vector<double> v)
{
    if (v.empty()) return std::nan("");
    std::sort(v.begin(), v.end());
    std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace

std::vector<EstimatorSummary> mse_compare(const ExperimentSpec& spec)
{
    spec.validate();
    DensityPtr noise = make_density(spec.noise);
    std::optional<MonotoneScore> oracle;
    if (std::find(spec.estimators.begin(), spec.estimators.end(), "oracle") != spec.estimators.end())
        oracle = projected_score(*noise).score;
    const VectorXd theta0 = batch_theta(spec);
    const std::size_t E = spec.estimators.size();
    const auto p = static_cast<Eigen::Index>(spec.d - 1);

    std::vector<std::vector<double>> err(E, std::vector<double>(spec.reps));
    std::vector<std::vector<double>> secs(E, std::vector<double>(spec.reps));
    parallel_for(spec.reps, spec.threads, [&](std::size_t rep) {
        SimulatedData s = simulate(spec, *noise, rep, theta0);
        RegressionData data(s.design, s.response);
        FitConfig cfg = spec.config;
        cfg.seed = stream_seed(spec.config.seed, rep);
        for (std::size_t e = 0; e < E; ++e) {
            auto t0 = std::chrono::steady_clock::now();
            double v;
            try {
                VectorXd b = run_estimator(spec.estimators[e], data, cfg, oracle ? &*oracle : nullptr);
                v = (b.head(p) - s.theta0).squaredNorm();
                if (!std::isfinite(v)) v = std::nan("");
            } catch (const Error&) {
                v = std::nan("");
            }
            secs[e][rep] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            err[e][rep] = v;
        }
    });

    std::vector<EstimatorSummary> out;
    for (std::size_t e = 0; e < E; ++e) {
        EstimatorSummary s;
        s.name = spec.estimators[e];
        s.errors = err[e];
        std::vector<double> good;
        for (double v : err[e])
            if (std::isnan(v)) ++s.failures;
            else good.push_back(v);
        s.ok = good.size();
        if (!good.empty()) {
            s.mse = mean(good);
            s.se = good.size() > 1 ? sample_sd(good) / std::sqrt(static_cast<double>(good.size())) : 0.0;
        } else {
            s.mse = s.se = std::nan("");
        }
        s.mean_time = mean(secs[e]);
        s.median_time = median_of(secs[e]);
        out.push_back(std::move(s));
    }
    return out;
}

CoverageSummary coverage_experiment(const ExperimentSpec& spec, const std::vector<double>& alphas)
{
    spec.validate();
    if (alphas.empty()) throw InvalidInput("coverage: no levels given");
    for (double a : alphas)
        if (!(a > 0 && a < 1)) throw InvalidInput("coverage: alpha must lie in (0, 1)");
    DensityPtr noise = make_density(spec.noise);
    const double i_true = projected_score(*noise).i_star;
    const VectorXd theta0 = batch_theta(spec);
    const auto p = static_cast<Eigen::Index>(spec.d - 1);
    const std::size_t A = alphas.size();

    struct Rep {
        bool ok = false;
        std::vector<std::vector<char>> hit;  // [alpha][coord]
        std::vector<char> ell;
        double log_ratio = 0;
        double i_hat = 0;
    };
    std::vector<Rep> reps(spec.reps);
    parallel_for(spec.reps, spec.threads, [&](std::size_t rep) {
        SimulatedData s = simulate(spec, *noise, rep, theta0);
        RegressionData data(s.design, s.response);
        FitConfig cfg = spec.config;
        cfg.mode = Mode::intercept;
        cfg.folds = Folds::none;
        cfg.seed = stream_seed(spec.config.seed, rep);
        Rep r;
        try {
            FitResult fit = asm_fit(data, cfg);
            if (!(fit.i_star_hat > 0) || !std::isfinite(fit.i_star_hat)) throw DegenerateSample("no information");
            const MatrixXd S = centred_covariance(s.design.leftCols(p));
            const VectorXd theta = fit.beta.head(p);
            const MatrixXd info = fit.i_star_hat * S;
            const MatrixXd cov = info.inverse();

            FitResult ols = fit_pilot(data, PilotSpec::ols());
            VectorXd res = Eigen::Map<const VectorXd>(ols.residuals.data(), static_cast<Eigen::Index>(spec.n));
            double sigma2 = res.squaredNorm() / static_cast<double>(spec.n - spec.d);
            const MatrixXd info_ols = S / sigma2;

            r.hit.resize(A);
            r.ell.resize(A);
            for (std::size_t a = 0; a < A; ++a) {
                auto ci = confidence_intervals(theta, cov, spec.n, alphas[a]);
                for (Eigen::Index j = 0; j < p; ++j)
                    r.hit[a].push_back(ci[static_cast<std::size_t>(j)].lo <= s.theta0(j) &&
                                       s.theta0(j) <= ci[static_cast<std::size_t>(j)].hi);
                Ellipsoid e = confidence_ellipsoid(theta, info, spec.n, alphas[a]);
                r.ell[a] = e.contains(s.theta0);
                if (a == 0) {
                    Ellipsoid eo = confidence_ellipsoid(ols.beta.head(p), info_ols, spec.n, alphas[a]);
                    r.log_ratio = e.log_volume - eo.log_volume;
                }
            }
            r.i_hat = fit.i_star_hat;
            r.ok = true;
        } catch (const Error&) {
            r.ok = false;
        }
        reps[rep] = std::move(r);
    });

    CoverageSummary c;
    c.alphas = alphas;
    c.i_star_true = i_true;
    c.coverage.assign(A, std::vector<double>(static_cast<std::size_t>(p), 0.0));
    c.ellipsoid_coverage.assign(A, 0.0);
    double ratio = 0, sq = 0;
    for (const Rep& r : reps) {
        if (!r.ok) {
            ++c.failures;
            continue;
        }
        ++c.ok;
        for (std::size_t a = 0; a < A; ++a) {
            for (std::size_t j = 0; j < static_cast<std::size_t>(p); ++j) c.coverage[a][j] += r.hit[a][j];
            c.ellipsoid_coverage[a] += r.ell[a];
        }
        ratio += std::exp(r.log_ratio);
        sq += (r.i_hat - i_true) * (r.i_hat - i_true);
    }
    if (c.ok) {
        const double k = static_cast<double>(c.ok);
        for (std::size_t a = 0; a < A; ++a) {
            for (double& v : c.coverage[a]) v /= k;
            c.ellipsoid_coverage[a] /= k;
        }
        c.mean_volume_ratio = ratio / k;
        c.i_star_rmse = std::sqrt(sq / k);
    }
    return c;
}

std::string format_mse_table(const std::vector<EstimatorSummary>& rows)
{
    std::ostringstream os;
    os << "estimator,mse,mse_x1e3,se,ok,failures,mean_time_s,median_time_s\n";
    for (const auto& r : rows)
        os << r.name << ',' << format_double(r.mse) << ',' << format_double(r.mse * 1e3) << ',' << format_double(r.se)
           << ',' << r.ok << ',' << r.failures << ',' << format_double(r.mean_time) << ','
           << format_double(r.median_time) << '\n';
    return os.str();
}

std::string format_coverage_table(const CoverageSummary& c)
{
    std::ostringstream os;
    os << "alpha,target,coordinate,coverage\n";
    for (std::size_t a = 0; a < c.alphas.size(); ++a) {
        for (std::size_t j = 0; j < c.coverage[a].size(); ++j)
            os << format_double(c.alphas[a]) << ',' << format_double(1 - c.alphas[a]) << ",theta" << j + 1 << ','
               << format_double(c.coverage[a][j]) << '\n';
        os << format_double(c.alphas[a]) << ',' << format_double(1 - c.alphas[a]) << ",ellipsoid,"
           << format_double(c.ellipsoid_coverage[a]) << '\n';
    }
    os << "summary,,volume_ratio_asm_ols," << format_double(c.mean_volume_ratio) << '\n';
    os << "summary,,i_star_true," << format_double(c.i_star_true) << '\n';
    os << "summary,,i_star_rmse," << format_double(c.i_star_rmse) << '\n';
    os << "summary,,ok," << c.ok << '\n';
    os << "summary,,failures," << c.failures << '\n';
    return os.str();
}

} // namespace antitonic
