#include "antitonic/monotone.hpp"

#include "antitonic/error.hpp"

#include <algorithm>
#include <cmath>

namespace antitonic {

namespace {

void check_knots(const std::vector<double>& knots, const char* who)
{
    for (std::size_t i = 0; i < knots.size(); ++i) {
        if (!std::isfinite(knots[i])) throw InvalidInput(std::string(who) + ": non-finite knot");
        if (i > 0 && !(knots[i] > knots[i - 1]))
            throw InvalidInput(std::string(who) + ": knots must be strictly increasing");
    }
}

} // namespace

GridFunction::GridFunction(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values))
{
    if (knots_.size() < 2 || knots_.size() != values_.size())
        throw InvalidInput("GridFunction: need at least two knots and matching values");
    check_knots(knots_, "GridFunction");
    for (double v : values_)
        if (!std::isfinite(v)) throw InvalidInput("GridFunction: non-finite value");
}

double GridFunction::operator()(double x) const
{
    if (x <= knots_.front()) return values_.front();
    if (x >= knots_.back()) return values_.back();
    auto j = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin());
    double t = (x - knots_[j - 1]) / (knots_[j] - knots_[j - 1]);
    return values_[j - 1] + t * (values_[j] - values_[j - 1]);
}

MonotoneScore::MonotoneScore(std::vector<double> knots, std::vector<double> levels, ScoreMode mode)
    : knots_(std::move(knots)), levels_(std::move(levels)), mode_(mode)
{
    if (knots_.empty() || knots_.size() != levels_.size())
        throw InvalidInput("MonotoneScore: need matching non-empty knots and levels");
    check_knots(knots_, "MonotoneScore");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (!std::isfinite(levels_[i])) throw InvalidInput("MonotoneScore: non-finite level");
        if (i > 0 && levels_[i] > levels_[i - 1]) {
            double slack = 1e-9 * (1 + std::abs(levels_[i - 1]));
            if (levels_[i] - levels_[i - 1] > slack)
                throw InvalidInput("MonotoneScore: levels must be non-increasing");
            levels_[i] = levels_[i - 1];
        }
    }
}

MonotoneScore MonotoneScore::constant(double c)
{
    return MonotoneScore({0.0}, {c}, ScoreMode::linear);
}

double MonotoneScore::operator()(double z) const
{
    if (z <= knots_.front()) return levels_.front();
    if (z >= knots_.back()) return levels_.back();
    auto j = static_cast<std::size_t>(std::upper_bound(knots_.begin(), knots_.end(), z) - knots_.begin());
    if (mode_ == ScoreMode::step) return levels_[j - 1];
    double t = (z - knots_[j - 1]) / (knots_[j] - knots_[j - 1]);
    return levels_[j - 1] + t * (levels_[j] - levels_[j - 1]);
}

double MonotoneScore::derivative(double z) const
{
    if (mode_ == ScoreMode::step)
        throw InvalidInput("MonotoneScore::derivative: not defined in step mode");
    auto j = static_cast<std::size_t>(std::lower_bound(knots_.begin(), knots_.end(), z) - knots_.begin());
    if (j == 0 || j == knots_.size()) return 0.0;
    return (levels_[j] - levels_[j - 1]) / (knots_[j] - knots_[j - 1]);
}

double MonotoneScore::max_jump() const
{
    if (mode_ == ScoreMode::linear) return 0.0;
    double m = 0;
    for (std::size_t i = 1; i < levels_.size(); ++i) m = std::max(m, levels_[i - 1] - levels_[i]);
    return m;
}

ConvexLoss::ConvexLoss(MonotoneScore score, double anchor) : score_(std::move(score)), offset_(0)
{
    const auto& k = score_.knots();
    const auto& l = score_.levels();
    cumulative_.assign(k.size(), 0.0);
    for (std::size_t i = 1; i < k.size(); ++i) {
        double h = k[i] - k[i - 1];
        double piece = score_.mode() == ScoreMode::step ? l[i - 1] * h : 0.5 * (l[i - 1] + l[i]) * h;
        cumulative_[i] = cumulative_[i - 1] + piece;
    }
    offset_ = primitive(anchor);
}

double ConvexLoss::primitive(double z) const
{
    const auto& k = score_.knots();
    const auto& l = score_.levels();
    if (z <= k.front()) return l.front() * (z - k.front());
    if (z >= k.back()) return cumulative_.back() + l.back() * (z - k.back());
    auto j = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), z) - k.begin()) - 1;
    double dz = z - k[j];
    if (score_.mode() == ScoreMode::step) return cumulative_[j] + l[j] * dz;
    double slope = (l[j + 1] - l[j]) / (k[j + 1] - k[j]);
    return cumulative_[j] + l[j] * dz + 0.5 * slope * dz * dz;
}

double ConvexLoss::value(double z) const { return offset_ - primitive(z); }

double ConvexLoss::second_derivative(double z) const
{
    double v, d1, d2;
    evaluate(z, v, d1, d2);
    return d2;
}

void ConvexLoss::evaluate(double z, double& v, double& d1, double& d2) const
{
    const auto& k = score_.knots();
    const auto& l = score_.levels();
    if (z <= k.front()) {
        v = offset_ - l.front() * (z - k.front());
        d1 = -l.front();
        d2 = 0;
        return;
    }
    if (z >= k.back()) {
        v = offset_ - (cumulative_.back() + l.back() * (z - k.back()));
        d1 = -l.back();
        d2 = 0;
        return;
    }
    auto j = static_cast<std::size_t>(std::upper_bound(k.begin(), k.end(), z) - k.begin()) - 1;
    double dz = z - k[j];
    if (score_.mode() == ScoreMode::step) {
        v = offset_ - (cumulative_[j] + l[j] * dz);
        d1 = -l[j];
        d2 = 0;
        return;
    }
    double slope = (l[j + 1] - l[j]) / (k[j + 1] - k[j]);
    v = offset_ - (cumulative_[j] + l[j] * dz + 0.5 * slope * dz * dz);
    d1 = -(l[j] + slope * dz);
    d2 = -slope;
}

ConvexLoss negative_antiderivative(const MonotoneScore& score, double anchor)
{
    return ConvexLoss(score, anchor);
}

LcmResult lcm(std::span<const double> xs, std::span<const double> ys)
{
    const std::size_t m = xs.size();
    if (m < 2 || ys.size() != m) throw InvalidInput("lcm: need at least two points of matching length");
    for (std::size_t i = 0; i < m; ++i) {
        if (std::isnan(xs[i]) || std::isnan(ys[i]) || !std::isfinite(xs[i]) || !std::isfinite(ys[i]))
            throw InvalidInput("lcm: non-finite input");
        if (i > 0 && !(xs[i] > xs[i - 1])) throw InvalidInput("lcm: xs must be strictly increasing");
    }

    // Upper hull scan.
    std::vector<std::size_t> hull;
    hull.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2], b = hull.back();
            double cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if (cross >= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(i);
    }

    std::vector<double> values(m), slopes(m);
    std::vector<bool> touch(m, false);
    for (std::size_t s = 0; s + 1 < hull.size(); ++s) {
        std::size_t a = hull[s], b = hull[s + 1];
        double slope = (ys[b] - ys[a]) / (xs[b] - xs[a]);
        for (std::size_t k = a; k < b; ++k) {
            values[k] = k == a ? ys[a] : ys[a] + slope * (xs[k] - xs[a]);
            if (values[k] < ys[k]) values[k] = ys[k];
            slopes[k] = slope;
        }
    }
    values[m - 1] = ys[m - 1];
    slopes[m - 1] = slopes[m - 2];
    for (std::size_t k = 1; k < m; ++k) slopes[k] = std::min(slopes[k], slopes[k - 1]);
    for (std::size_t k = 0; k < m; ++k) {
        double scale = 1 + std::abs(ys[k]);
        touch[k] = values[k] - ys[k] <= 1e-13 * scale;
    }
    return LcmResult{GridFunction(std::vector<double>(xs.begin(), xs.end()), std::move(values)),
                     std::move(slopes), std::move(touch)};
}

std::vector<double> pava_decreasing(std::span<const double> ys, std::span<const double> weights)
{
    if (ys.size() != weights.size()) throw InvalidInput("pava_decreasing: length mismatch");
    struct Block {
        double wy, w;
        std::size_t count;
    };
    std::vector<Block> stack;
    stack.reserve(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!(weights[i] > 0) || !std::isfinite(weights[i]))
            throw InvalidInput("pava_decreasing: weights must be positive");
        if (!std::isfinite(ys[i])) throw InvalidInput("pava_decreasing: non-finite value");
        stack.push_back({weights[i] * ys[i], weights[i], 1});
        while (stack.size() >= 2) {
            Block& top = stack.back();
            Block& prev = stack[stack.size() - 2];
            if (prev.wy / prev.w >= top.wy / top.w) break;
            prev.wy += top.wy;
            prev.w += top.w;
            prev.count += top.count;
            stack.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(ys.size());
    for (const Block& b : stack) out.insert(out.end(), b.count, b.wy / b.w);
    return out;
}

MonotoneScore antitonic_project(std::vector<WeightedPoint> points)
{
    if (points.empty()) throw InvalidInput("antitonic_project: empty input");
    std::stable_sort(points.begin(), points.end(),
                     [](const WeightedPoint& a, const WeightedPoint& b) { return a.x < b.x; });
    std::vector<double> xs, ys, ws;
    for (const auto& p : points) {
        if (!(p.w > 0)) throw InvalidInput("antitonic_project: weights must be positive");
        if (!xs.empty() && p.x == xs.back()) {
            double w = ws.back() + p.w;
            ys.back() = (ys.back() * ws.back() + p.y * p.w) / w;
            ws.back() = w;
        } else {
            xs.push_back(p.x);
            ys.push_back(p.y);
            ws.push_back(p.w);
        }
    }
    return MonotoneScore(xs, pava_decreasing(ys, ws), ScoreMode::step);
}

} // namespace antitonic
