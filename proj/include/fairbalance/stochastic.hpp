#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace fairbalance {

/// Seeded 64-bit random source.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the standard, and
/// derives every variate from raw 64-bit words so that draws replay bit-exactly
/// on any conforming platform. Each method documents how many words it consumes.
class RandomSource {
  public:
    explicit RandomSource(std::uint64_t seed = 0) : seed_{seed}, engine_{seed} {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// One raw word.
    std::uint64_t next_u64() noexcept { return engine_(); }

    /// Uniform double in [0, 1) from the top 53 bits of one word.
    double uniform() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). Consumes one word, plus one per rejection.
    std::uint64_t uniform_index(std::uint64_t n);

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Rates of the two Poisson processes whose difference gives the net
/// occupancy change of a service area over an interval of length t.
struct SkellamParams {
    double lambda_a = 0.0; ///< expected arrivals per period
    double lambda_d = 0.0; ///< expected departures per period
    double t = 1.0;        ///< elapsed time in periods

    /// Throws DomainError unless lambda_a >= 0, lambda_d >= 0 and t > 0.
    void validate() const;
};

/// Modified Bessel function of the first kind I_n(x) for integer n.
///
/// Power series for x <= 30, Miller's downward recurrence normalised by
/// e^x = I_0(x) + 2 sum_k I_k(x) above. Throws DomainError for x < 0 or
/// |n| > 1000 and OverflowError when the result exceeds the double range.
double bessel_i(int n, double x);

/// Exponentially scaled e^{-x} I_n(x); finite for every x >= 0.
double bessel_i_scaled(int n, double x);

/// Skellam probability mass P[A - D = n] for A ~ Poisson(t lambda_a),
/// D ~ Poisson(t lambda_d). Degenerate rates reduce to one-sided Poisson.
double skellam_pmf(long n, const SkellamParams& params);

/// Left-censored one-interval transition probability from occupancy m to n.
///
/// n > 0 is the plain Skellam mass at n - m; n = 0 collects all mass at or
/// below -m. The censored sum stops once a log-concavity tail bound drops
/// below 1e-17 of the accumulated mass.
double censored_transition(long m, long n, const SkellamParams& params);

/// Row of censored_transition over n in [0, cap]; mass above cap is folded
/// into the last entry, so the row sums to one.
std::vector<double> censored_transition_row(long m, long cap, const SkellamParams& params);

/// Poisson sampler with per-rate constants precomputed.
///
/// Rates below 10 use inversion by sequential search (one word per draw).
/// Larger rates use Hormann's transformed rejection (PTRS, two words per trial).
class PoissonSampler {
  public:
    explicit PoissonSampler(double rate = 0.0);

    double rate() const noexcept { return rate_; }

    std::uint64_t operator()(RandomSource& rng) const;

  private:
    std::uint64_t sample_inversion(RandomSource& rng) const;
    std::uint64_t sample_ptrs(RandomSource& rng) const;

    double rate_ = 0.0;
    double exp_neg_rate_ = 1.0;
    // PTRS constants
    double sqrt_rate_ = 0.0;
    double log_rate_ = 0.0;
    double b_ = 0.0;
    double a_ = 0.0;
    double inv_alpha_ = 0.0;
    double v_r_ = 0.0;
};

/// Independent stream seed derived from a base seed (splitmix64 finaliser).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// One Poisson(rate) draw. Rate 0 returns 0 without consuming a word.
/// Throws DomainError for negative, non-finite or > 1e6 rates.
std::uint64_t sample_poisson(double rate, RandomSource& rng);

} // namespace fairbalance
