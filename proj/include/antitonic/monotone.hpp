#pragma once

#include <span>
#include <vector>

namespace antitonic {

// Piecewise-linear interpolant through (knots, values), constant outside.
class GridFunction {
public:
    GridFunction(std::vector<double> knots, std::vector<double> values);

    double operator()(double x) const;
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return knots_.size(); }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

enum class ScoreMode { step, linear };

// Non-increasing function of one variable. In step mode the value on
// [knot_k, knot_{k+1}) is level_k; in linear mode levels are interpolated.
// Both modes extend by the first/last level outside the knots.
class MonotoneScore {
public:
    MonotoneScore(std::vector<double> knots, std::vector<double> levels, ScoreMode mode);

    static MonotoneScore constant(double c);

    double operator()(double z) const;
    // Slope of the interval to the left of z (linear mode only); 0 outside
    // the knot range.
    double derivative(double z) const;

    double left_limit() const { return levels_.front(); }
    double right_limit() const { return levels_.back(); }
    // Largest drop between consecutive levels in step mode, 0 in linear mode.
    double max_jump() const;

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& levels() const { return levels_; }
    ScoreMode mode() const { return mode_; }
    std::size_t size() const { return knots_.size(); }

private:
    std::vector<double> knots_;
    std::vector<double> levels_;
    ScoreMode mode_;
};

// l(z) = -int_anchor^z psi. Convex because psi is non-increasing.
class ConvexLoss {
public:
    ConvexLoss(MonotoneScore score, double anchor = 0.0);

    double value(double z) const;
    double derivative(double z) const { return -score_(z); }
    double second_derivative(double z) const;
    // Value, first and second derivative with a single knot lookup.
    void evaluate(double z, double& v, double& d1, double& d2) const;

    const MonotoneScore& score() const { return score_; }

private:
    // Integral of psi from the first knot up to z.
    double primitive(double z) const;

    MonotoneScore score_;
    std::vector<double> cumulative_;
    double offset_;
};

struct LcmResult {
    GridFunction majorant;
    std::vector<double> right_derivative;
    std::vector<bool> touch_set;
};

LcmResult lcm(std::span<const double> xs, std::span<const double> ys);

std::vector<double> pava_decreasing(std::span<const double> ys, std::span<const double> weights);

struct WeightedPoint {
    double x;
    double y;
    double w = 1.0;
};

MonotoneScore antitonic_project(std::vector<WeightedPoint> points);

ConvexLoss negative_antiderivative(const MonotoneScore& score, double anchor = 0.0);

} // namespace antitonic
