#include "antitonic/csv.hpp"
#include "antitonic/densities.hpp"
#include "antitonic/error.hpp"
#include "antitonic/experiment.hpp"
#include "antitonic/projection.hpp"
#include "antitonic/regression.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace antitonic;

namespace {

enum Exit { ok = 0, usage = 2, data_error = 3, numeric_failure = 4 };

struct Shared {
    std::string mode = "intercept";
    std::string folds = "none";
    std::string crossfit = "avg";
    std::string pilot;  // empty: LAD, or OLS for the location mixture in experiments
    std::string zeta = "mean";
    std::string kernel = "gaussian";
    std::string bandwidth = "silverman";
    int grid = 2049;
    double alpha = std::numeric_limits<double>::infinity();
    double gamma = std::numeric_limits<double>::min();
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string out;
    bool redraw_theta = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::pair<std::string, std::string> split_colon(const std::string& s)
{
    auto k = s.find(':');
    if (k == std::string::npos) return {s, ""};
    return {s.substr(0, k), s.substr(k + 1)};
}

double to_number(const std::string& s, const std::string& what)
{
    try {
        return parse_double(s);
    } catch (const DataError&) {
        throw UsageError("invalid value '" + s + "' for " + what);
    }
}

PilotSpec parse_pilot(const std::string& s)
{
    auto [k, v] = split_colon(s);
    if (k == "ols") return PilotSpec::ols();
    if (k == "lad") return PilotSpec::lad();
    if (k == "huber") return PilotSpec::huber(v.empty() ? 1.345 : to_number(v, "--pilot huber:K"));
    throw UsageError("--pilot must be ols, lad or huber:K");
}

FitConfig make_config(const Shared& o, const std::string& noise = "")
{
    FitConfig c;
    if (o.mode == "plain") c.mode = Mode::plain;
    else if (o.mode == "symmetric") c.mode = Mode::symmetric;
    else if (o.mode == "intercept") c.mode = Mode::intercept;
    else throw UsageError("--mode must be plain, symmetric or intercept");

    if (o.folds == "none") c.folds = Folds::none;
    else if (o.folds == "three") c.folds = Folds::three;
    else throw UsageError("--folds must be none or three");

    if (o.crossfit == "avg") c.crossfit = CrossfitKind::average;
    else if (o.crossfit == "pooled") c.crossfit = CrossfitKind::pooled;
    else throw UsageError("--crossfit must be avg or pooled");

    c.pilot = o.pilot.empty() ? default_pilot_for(noise) : parse_pilot(o.pilot);

    auto [zk, zv] = split_colon(o.zeta);
    if (zk == "mean") c.zeta = Zeta::mean();
    else if (zk == "quantile") {
        double tau = zv.empty() ? 0.5 : to_number(zv, "--zeta quantile:tau");
        if (!(tau > 0 && tau < 1)) throw UsageError("--zeta quantile:tau needs tau in (0, 1)");
        c.zeta = Zeta::quantile(tau);
    } else throw UsageError("--zeta must be mean or quantile:tau");

    if (o.kernel == "gaussian") c.kernel = Kernel::gaussian;
    else if (o.kernel == "quartic") c.kernel = Kernel::compact;
    else throw UsageError("--kernel must be gaussian or quartic");

    if (o.bandwidth == "silverman") c.bandwidth = 0;
    else {
        c.bandwidth = to_number(o.bandwidth, "--bandwidth");
        if (!(c.bandwidth > 0)) throw UsageError("--bandwidth must be positive");
    }
    if (o.grid < 64) throw UsageError("--grid must be at least 64");
    c.grid = o.grid;
    if (!(o.alpha > 0) || !(o.gamma > 0)) throw UsageError("--alpha and --gamma must be positive");
    c.trunc = TruncationParams(o.alpha, o.gamma);
    c.seed = o.seed;
    return c;
}

// Writes to --out when given, stdout otherwise.
void emit(const Shared& o, const std::string& text)
{
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out, std::ios::binary);
    if (!f || !(f << text)) throw DataError("cannot write " + o.out);
}

std::string fmt(double x, int prec = 6)
{
    std::ostringstream os;
    os << std::setprecision(prec) << x;
    return os.str();
}

int cmd_fit(const Shared& o, const std::string& path, bool no_intercept, double level)
{
    FitConfig cfg = make_config(o);
    if (!(level > 0 && level < 1)) throw UsageError("--level must lie in (0, 1)");
    Table t = read_csv_file(path);
    RegressionTable rt = regression_from_table(t, !no_intercept);
    std::optional<RegressionData> data;
    try {
        data.emplace(rt.design, rt.response);
    } catch (const InvalidInput& e) {
        throw DataError(e.what());
    }
    FitResult res = fit(*data, cfg);

    std::vector<std::string> names;
    for (std::size_t j = 0; j + 1 < t.header.size(); ++j) names.push_back(t.header[j]);
    if (!no_intercept) names.push_back("(intercept)");

    const std::size_t n = data->n();
    const double alpha = 1 - level;
    std::vector<double> se(names.size(), 0.0);
    std::vector<Interval> ci;
    bool exact = !std::isfinite(res.i_star_hat);
    if (exact) {
        for (std::size_t j = 0; j < names.size(); ++j) ci.push_back({res.beta(j), res.beta(j)});
    } else {
        InferenceResult inf = infer(*data, res, cfg, alpha);
        for (std::size_t j = 0; j < names.size(); ++j)
            se[j] = std::sqrt(inf.cov_matrix(j, j) / static_cast<double>(n));
        ci = inf.intervals;
    }

    std::ostringstream os;
    os << "Antitonic score matching fit (" << o.mode << " mode, " << (cfg.folds == Folds::three ? "cross-fitted" : "no split")
       << ")\n";
    os << "n = " << n << ", coefficients = " << names.size() << "\n\n";
    os << std::left << std::setw(14) << "term" << std::right << std::setw(14) << "estimate" << std::setw(14)
       << "std.error" << std::setw(12) << "z" << std::setw(14) << "lower" << std::setw(14) << "upper" << '\n';
    for (std::size_t j = 0; j < names.size(); ++j) {
        double z = se[j] > 0 ? res.beta(j) / se[j] : std::numeric_limits<double>::infinity();
        os << std::left << std::setw(14) << names[j] << std::right << std::setw(14) << fmt(res.beta(j))
           << std::setw(14) << fmt(se[j]) << std::setw(12) << fmt(z, 4) << std::setw(14) << fmt(ci[j].lo)
           << std::setw(14) << fmt(ci[j].hi) << '\n';
    }
    os << "\nconfidence level: " << level << '\n';
    os << "antitonic information estimate: " << fmt(res.i_star_hat) << '\n';
    if (res.upsilon_hat) os << "intercept variance factor: " << fmt(*res.upsilon_hat) << '\n';
    os << "converged: " << (res.converged ? "yes" : "no") << ", iterations: " << res.iterations << '\n';
    if (!res.note.empty()) os << "note: " << res.note << '\n';
    std::cout << os.str();

    if (!o.out.empty()) {
        std::ostringstream csv;
        csv << "term,estimate,std_error,lower,upper\n";
        for (std::size_t j = 0; j < names.size(); ++j)
            csv << names[j] << ',' << format_double(res.beta(j)) << ',' << format_double(se[j]) << ','
                << format_double(ci[j].lo) << ',' << format_double(ci[j].hi) << '\n';
        emit(o, csv.str());
    }
    return res.converged ? ok : numeric_failure;
}

ExperimentSpec make_spec(const Shared& o, const std::string& noise, std::size_t n, std::size_t d, std::size_t reps)
{
    ExperimentSpec s;
    s.noise = noise;
    s.n = n;
    s.d = d;
    s.reps = reps;
    s.seed = o.seed;
    s.threads = o.threads;
    s.redraw_theta = o.redraw_theta;
    s.config = make_config(o, noise);
    make_density(noise);  // validate the name early
    return s;
}

int cmd_simulate(const Shared& o, const std::string& noise, std::size_t n, std::size_t d)
{
    ExperimentSpec s = make_spec(o, noise, n, d, 1);
    s.validate();
    DensityPtr p = make_density(noise);
    Eigen::VectorXd theta = batch_theta(s);
    SimulatedData sim = simulate(s, *p, 0, theta);
    Table t = table_from_regression(sim.design.leftCols(static_cast<Eigen::Index>(d - 1)), sim.response);
    std::ostringstream os;
    write_csv(os, t);
    emit(o, os.str());
    if (!o.out.empty()) {
        std::cout << "theta0";
        for (Eigen::Index j = 0; j < sim.theta0.size(); ++j) std::cout << ' ' << format_double(sim.theta0(j));
        std::cout << "\nmu0 " << format_double(sim.mu0) << '\n';
    }
    return ok;
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int cmd_mse(const Shared& o, const std::string& noise, std::size_t n, std::size_t d, std::size_t reps,
            const std::string& estimators)
{
    ExperimentSpec s = make_spec(o, noise, n, d, reps);
    s.estimators = split_list(estimators);
    try {
        s.validate();
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
    emit(o, format_mse_table(mse_compare(s)));
    return ok;
}

int cmd_coverage(const Shared& o, const std::string& noise, std::size_t n, std::size_t d, std::size_t reps,
                 const std::string& levels)
{
    ExperimentSpec s = make_spec(o, noise, n, d, reps);
    std::vector<double> alphas;
    for (const auto& l : split_list(levels)) {
        double v = to_number(l, "--levels");
        if (!(v > 0 && v < 1)) throw UsageError("--levels entries must lie in (0, 1)");
        alphas.push_back(1 - v);
    }
    try {
        s.validate();
    } catch (const InvalidInput& e) {
        throw UsageError(e.what());
    }
    emit(o, format_coverage_table(coverage_experiment(s, alphas)));
    return ok;
}

int cmd_oracle(const Shared& o, const std::string& name, const std::string& curves, double zmax, int points)
{
    DensityPtr p = make_density(name);
    ProjectedScore ps = projected_score(*p, o.grid < 64 ? 8193 : std::max(o.grid, 8193));
    double pmax = 0;
    for (int k = 1; k < 4000; ++k) pmax = std::max(pmax, p->pdf(p->quantile(k / 4000.0)));
    std::ostringstream os;
    os << "density: " << p->name() << '\n';
    os << "log-concave: " << (p->log_concave() ? "yes" : "no") << '\n';
    os << "fisher information i: " << (ps.fisher_infinite ? std::string("inf") : fmt(ps.fisher_info, 8)) << '\n';
    os << "antitonic information i*: " << fmt(ps.i_star, 8) << '\n';
    os << "1/i*: " << fmt(1 / ps.i_star, 8) << '\n';
    os << "ARE*: " << fmt(ps.are_star, 8) << '\n';
    if (!ps.fisher_infinite) os << "ARE lower bound 4 max(p)^2 / i: " << fmt(4 * pmax * pmax / ps.fisher_info, 8) << '\n';
    try {
        os << "V_CQ: " << fmt(v_cq(*p), 8) << '\n';
    } catch (const Error& e) {
        os << "V_CQ: unavailable (" << e.what() << ")\n";
    }
    os << "two-sided hazard at F^-1(1e-8): " << fmt(two_sided_hazard(*p, p->quantile(1e-8))) << '\n';
    os << "two-sided hazard at F^-1(1-1e-8): " << fmt(two_sided_hazard(*p, p->quantile(1 - 1e-8))) << '\n';
    std::cout << os.str();

    if (!curves.empty()) {
        auto proj = fisher_divergence_projection(ps, *p);
        ConvexLoss loss(ps.score);
        Table t;
        t.header = {"z", "psi0", "psi0_star", "loss_star", "p0", "p0_star"};
        for (int k = 0; k < points; ++k) {
            double z = -zmax + 2 * zmax * k / (points - 1);
            auto s = p->score(z);
            t.rows.push_back({z, s ? *s : std::nan(""), ps.score(z), loss.value(z), p->pdf(z), proj->pdf(z)});
        }
        write_csv_file(curves, t);
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Antitonic score matching for linear regression"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");
    Shared o;
    app.add_option("--mode", o.mode, "plain, symmetric or intercept");
    app.add_option("--folds", o.folds, "none or three");
    app.add_option("--crossfit", o.crossfit, "avg or pooled");
    app.add_option("--pilot", o.pilot, "ols, lad or huber:K");
    app.add_option("--zeta", o.zeta, "mean or quantile:tau");
    app.add_option("--kernel", o.kernel, "gaussian or quartic");
    app.add_option("--bandwidth", o.bandwidth, "silverman or a positive number");
    app.add_option("--grid", o.grid, "u-grid size for the projected score");
    app.add_option("--alpha", o.alpha, "truncation level for |p'|");
    app.add_option("--gamma", o.gamma, "truncation level for p");
    app.add_option("--seed", o.seed, "random seed");
    app.add_option("--threads", o.threads, "worker threads (0: all cores)");
    app.add_option("--out", o.out, "output path");
    app.add_flag("--redraw-theta", o.redraw_theta, "draw a new theta0 for every replication");

    std::string data_path, noise = "gaussian", estimators = "oracle,asm,alt,1s,lad,ols", levels = "0.9,0.95,0.99";
    std::string density, curves;
    std::size_t n = 600, d = 6, reps = 200;
    bool no_intercept = false;
    double level = 0.95, zmax = 6;
    int points = 601;

    auto* fit_cmd = app.add_subcommand("fit", "fit a linear model from a CSV file")->fallthrough();
    fit_cmd->add_option("data", data_path, "CSV with columns x1..x{d-1}, y")->required();
    fit_cmd->add_flag("--no-intercept", no_intercept, "do not append a column of ones");
    fit_cmd->add_option("--level", level, "confidence level");

    auto add_design = [&](CLI::App* c) {
        c->add_option("--noise", noise, "noise density, e.g. cauchy or gaussian_mix:...");
        c->add_option("--n", n, "observations");
        c->add_option("--d", d, "coefficients including the intercept");
    };
    auto* sim_cmd = app.add_subcommand("simulate", "draw a data set from the linear model")->fallthrough();
    add_design(sim_cmd);
    auto* mse_cmd = app.add_subcommand("mse-compare", "squared estimation error of several estimators")->fallthrough();
    add_design(mse_cmd);
    mse_cmd->add_option("--reps", reps, "replications");
    mse_cmd->add_option("--estimators", estimators, "comma-separated subset of oracle,asm,asm-cf,alt,1s,lad,ols");
    auto* cov_cmd = app.add_subcommand("coverage", "coverage of confidence sets")->fallthrough();
    add_design(cov_cmd);
    cov_cmd->add_option("--reps", reps, "replications");
    cov_cmd->add_option("--levels", levels, "comma-separated confidence levels");
    auto* orc_cmd = app.add_subcommand("oracle", "population quantities for a reference density")->fallthrough();
    orc_cmd->add_option("density", density, "density name")->required();
    orc_cmd->add_option("--curves", curves, "write z, psi0, psi0*, loss*, p0, p0* to this CSV");
    orc_cmd->add_option("--zmax", zmax, "half-width of the curve range");
    orc_cmd->add_option("--points", points, "number of curve points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return usage;
    }

    try {
        if (*fit_cmd) return cmd_fit(o, data_path, no_intercept, level);
        if (*sim_cmd) return cmd_simulate(o, noise, n, d);
        if (*mse_cmd) return cmd_mse(o, noise, n, d, reps, estimators);
        if (*cov_cmd) return cmd_coverage(o, noise, n, d, reps, levels);
        if (*orc_cmd) {
            if (points < 2) throw UsageError("--points must be at least 2");
            return cmd_oracle(o, density, curves, zmax, points);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage;
    } catch (const Error& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return numeric_failure;
    }
    return usage;
}
