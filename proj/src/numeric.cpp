#include "antitonic/numeric.hpp"

#include "antitonic/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace antitonic {

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double norm_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw DomainError("norm_quantile: probability outside [0, 1]");
    }
    // Acklam's rational approximation, relative error 1.15e-9.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00, 2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    } else if (p <= 1 - plow) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    } else {
        double q = std::sqrt(-2 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    // One Halley step on the cdf (upper tail through the survival function).
    double e = x <= 0 ? norm_cdf(x) - p : (1 - p) - norm_sf(x);
    double u = e * std::sqrt(2 * kPi) * std::exp(0.5 * x * x);
    x = x - u / (1 + 0.5 * x * u);
    return x;
}

namespace {

double gamma_series(double a, double x)
{
    double sum = 1.0 / a, term = sum, ap = a;
    for (int n = 0; n < 1000; ++n) {
        ap += 1;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by Lentz's continued fraction.
double gamma_cf(double a, double x)
{
    const double tiny = 1e-300;
    double b = x + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
    for (int i = 1; i < 1000; ++i) {
        double an = -i * (i - a);
        b += 2;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double gamma_p(double a, double x)
{
    if (a <= 0 || x < 0) throw DomainError("gamma_p: invalid arguments");
    if (x == 0) return 0;
    if (x < a + 1) return gamma_series(a, x);
    return 1 - gamma_cf(a, x);
}

double chi2_cdf(double x, double k)
{
    if (x <= 0) return 0;
    return gamma_p(0.5 * k, 0.5 * x);
}

double chi2_quantile_upper(double alpha, double k)
{
    if (!(alpha > 0 && alpha < 1) || !(k > 0)) throw DomainError("chi2_quantile_upper: bad arguments");
    double z = norm_quantile(1 - alpha);
    double w = 2.0 / (9.0 * k);
    double x = k * std::pow(std::max(1 - w + z * std::sqrt(w), 1e-3), 3);
    double target = 1 - alpha;
    for (int it = 0; it < 50; ++it) {
        double f = chi2_cdf(x, k) - target;
        double logpdf = (0.5 * k - 1) * std::log(x) - 0.5 * x - 0.5 * k * std::log(2.0) -
                        std::lgamma(0.5 * k);
        double step = f / std::exp(logpdf);
        double next = x - step;
        if (next <= 0) next = 0.5 * x;
        if (std::abs(next - x) <= 1e-14 * std::max(1.0, x)) {
            x = next;
            break;
        }
        x = next;
    }
    return x;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iter)
{
    double flo = f(lo), fhi = f(hi);
    if (flo == 0) return lo;
    if (fhi == 0) return hi;
    if ((flo > 0) == (fhi > 0)) throw NumericError("bisect: root not bracketed");
    for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double simpson(std::span<const double> v, double h)
{
    if (v.size() < 3 || v.size() % 2 == 0) throw InvalidInput("simpson: need an odd number >= 3 of values");
    double s = v.front() + v.back();
    for (std::size_t i = 1; i + 1 < v.size(); ++i) s += (i % 2 ? 4.0 : 2.0) * v[i];
    return s * h / 3.0;
}

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth)
{
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6 * (fa + 4 * flm + fm);
    double right = (b - m) / 6 * (fm + 4 * frm + fb);
    double diff = left + right - whole;
    if (depth <= 0 || std::abs(diff) <= 15 * tol) return left + right + diff / 15;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth)
{
    // A fixed first split avoids accepting a coarse estimate on symmetric
    // integrands that vanish at the probe points.
    const int pieces = 16;
    double total = 0, h = (b - a) / pieces;
    for (int i = 0; i < pieces; ++i) {
        double lo = a + i * h, hi = lo + h, mid = 0.5 * (lo + hi);
        double flo = f(lo), fm = f(mid), fhi = f(hi);
        double whole = h / 6 * (flo + 4 * fm + fhi);
        total += simpson_rec(f, lo, hi, flo, fm, fhi, whole, tol / pieces, max_depth);
    }
    return total;
}

double integrate_real_line(const std::function<double(double)>& f, double tol)
{
    auto g = [&](double t) {
        if (std::abs(t) >= 1) return 0.0;
        double s = 1 - t * t;
        double z = t / s;
        double v = f(z) * (1 + t * t) / (s * s);
        return std::isfinite(v) ? v : 0.0;
    };
    return adaptive_simpson(g, -1, 1, tol, 50);
}

double Rng::uniform()
{
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() { return norm_quantile(uniform()); }

std::size_t Rng::below(std::size_t n)
{
    // Lemire-free rejection keeps this portable and unbiased.
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t r;
    do {
        r = next();
    } while (r >= limit);
    return static_cast<std::size_t>(r % n);
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index)
{
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    return idx;
}

double mean(std::span<const double> x)
{
    if (x.empty()) throw InvalidInput("mean of empty sample");
    double s = 0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double sample_sd(std::span<const double> x)
{
    if (x.size() < 2) throw InvalidInput("sd needs at least two values");
    double m = mean(x), s = 0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size() - 1));
}

double quantile_type7(std::vector<double> x, double p)
{
    if (x.empty()) throw InvalidInput("quantile of empty sample");
    std::sort(x.begin(), x.end());
    double h = (static_cast<double>(x.size()) - 1) * p;
    auto lo = static_cast<std::size_t>(std::floor(h));
    std::size_t hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

} // namespace antitonic
