#pragma once

// Slow reference implementations used to check the fast algorithms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace oracle {

// Upper hull by gift wrapping: from the current hull point, the next one is
// the point to the right with the largest slope (farthest on ties). O(m^2).
inline std::vector<double> lcm_values(std::span<const double> xs, std::span<const double> ys)
{
    const std::size_t m = xs.size();
    std::vector<std::size_t> hull = {0};
    while (hull.back() != m - 1) {
        std::size_t c = hull.back(), best = c + 1;
        double bs = (ys[best] - ys[c]) / (xs[best] - xs[c]);
        for (std::size_t k = c + 2; k < m; ++k) {
            double s = (ys[k] - ys[c]) / (xs[k] - xs[c]);
            if (s >= bs - 1e-15 * (1 + std::abs(bs))) {
                bs = s;
                best = k;
            }
        }
        hull.push_back(best);
    }
    std::vector<double> out(m);
    for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
        std::size_t a = hull[h], b = hull[h + 1];
        for (std::size_t i = a; i <= b; ++i) {
            double t = (xs[i] - xs[a]) / (xs[b] - xs[a]);
            out[i] = ys[a] + t * (ys[b] - ys[a]);
        }
    }
    return out;
}

// Min-max formula for the non-increasing weighted projection:
// fit_i = min_{j <= i} max_{k >= i} avg(j..k). O(m^2) with a running
// suffix maximum per j.
inline std::vector<double> pava_minmax(std::span<const double> y, std::span<const double> w)
{
    const std::size_t m = y.size();
    std::vector<double> sw(m + 1, 0), swy(m + 1, 0);
    for (std::size_t i = 0; i < m; ++i) {
        sw[i + 1] = sw[i] + w[i];
        swy[i + 1] = swy[i] + w[i] * y[i];
    }
    std::vector<double> out(m, std::numeric_limits<double>::infinity());
    std::vector<double> suffix(m);
    for (std::size_t j = 0; j < m; ++j) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t k = m; k-- > j;) {
            mx = std::max(mx, (swy[k + 1] - swy[j]) / (sw[k + 1] - sw[j]));
            suffix[k] = mx;
        }
        for (std::size_t i = j; i < m; ++i) out[i] = std::min(out[i], suffix[i]);
    }
    return out;
}

// Enumerates every partition into consecutive blocks; among those whose block
// means are non-increasing, returns the one with least weighted error.
inline std::vector<double> pava_exhaustive(std::span<const double> y, std::span<const double> w)
{
    const std::size_t m = y.size();
    double best_err = std::numeric_limits<double>::infinity();
    std::vector<double> best;
    for (unsigned long mask = 0; mask < (1UL << (m - 1)); ++mask) {
        std::vector<double> fit(m);
        std::size_t start = 0;
        double prev = std::numeric_limits<double>::infinity();
        bool ok = true;
        for (std::size_t i = 0; i < m && ok; ++i) {
            bool cut = i == m - 1 || (mask >> i) & 1UL;
            if (!cut) continue;
            double s = 0, sy = 0;
            for (std::size_t k = start; k <= i; ++k) {
                s += w[k];
                sy += w[k] * y[k];
            }
            double mean = sy / s;
            if (mean > prev + 1e-12) ok = false;
            for (std::size_t k = start; k <= i; ++k) fit[k] = mean;
            prev = mean;
            start = i + 1;
        }
        if (!ok) continue;
        double err = 0;
        for (std::size_t i = 0; i < m; ++i) err += w[i] * (y[i] - fit[i]) * (y[i] - fit[i]);
        if (err < best_err) {
            best_err = err;
            best = fit;
        }
    }
    return best;
}

} // namespace oracle
