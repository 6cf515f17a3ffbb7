#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace antitonic {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double norm_pdf(double x);
double norm_cdf(double x);
double norm_sf(double x);
// Inverse standard normal cdf, accurate to ~1e-15 after refinement.
double norm_quantile(double p);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
double chi2_cdf(double x, double k);
// Upper-tail quantile: returns q with P(chi2_k > q) = alpha.
double chi2_quantile_upper(double alpha, double k);

// Root of a monotone-bracketed function by bisection. f(lo) and f(hi) must
// have opposite signs.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12,
              int max_iter = 300);

// Composite Simpson over equally spaced values (odd count >= 3).
double simpson(std::span<const double> values, double step);

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 40);

// Integral over the whole line via z = t / (1 - t^2).
double integrate_real_line(const std::function<double(double)>& f, double tol = 1e-10);

// Uniform/normal draws with fixed algorithms so streams are identical across
// standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    std::uint64_t next() { return eng_(); }
    double uniform();           // in (0, 1)
    double normal();            // standard normal by inversion
    std::size_t below(std::size_t n);

private:
    std::mt19937_64 eng_;
};

std::uint64_t splitmix64(std::uint64_t x);
// Seed for replication `index` of a run seeded with `seed`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng);

double mean(std::span<const double> x);
double sample_sd(std::span<const double> x);
// Type-7 sample quantile of unsorted data.
double quantile_type7(std::vector<double> x, double p);

} // namespace antitonic
