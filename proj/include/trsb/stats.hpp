#ifndef TRSB_STATS_HPP
#define TRSB_STATS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace trsb {

/// Standard normal CDF and its inverse (Acklam's rational approximation,
/// relative error below 1.2e-9 — ample for confidence machinery).
double normal_cdf(double x);
double normal_quantile(double p);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z);

/// Derive an independent stream seed from a base seed (splitmix64 step).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Deterministic uniform doubles in [0, 1) from a seeded mt19937_64.
/// (generate_canonical is implementation-defined; this is not.)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t raw() { return engine_(); }

    /// One multinomial draw from the cumulative distribution (inverse CDF).
    std::size_t sample(const std::vector<double>& cumulative);

private:
    std::mt19937_64 engine_;
};

/// Golden-section minimization of a unimodal function on [lo, hi].
double golden_section_minimize(const std::function<double(double)>& f, double lo, double hi,
                               double rel_tol = 1e-6, int max_iter = 200);

/// Nelder-Mead simplex minimization. Returns the best point found.
struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> start, double step, double tol = 1e-12,
                             int max_evals = 4000);

}  // namespace trsb

#endif
