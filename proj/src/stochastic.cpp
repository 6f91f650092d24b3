#include "fairbalance/stochastic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fairbalance/error.hpp"

namespace fairbalance {

namespace {

__extension__ typedef unsigned __int128 uint128;

constexpr double kSeriesLimit = 30.0;
constexpr double kTailTolerance = 1e-17; // relative to the running sum
constexpr int kMaxBesselOrder = 1000;
constexpr double kMaxPoissonRate = 1e6;

/// Log of I_n(x) by the power series sum_k (x/2)^(2k+n) / (k! (k+n)!).
double log_bessel_series(int n, double x) {
    if (x == 0.0) {
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    const double half = 0.5 * x;
    const double quarter_sq = half * half;
    // Terms relative to the k = 0 term.
    double term = 1.0;
    double sum = 1.0;
    for (int k = 0; k < 10000; ++k) {
        term *= quarter_sq / ((k + 1.0) * (k + n + 1.0));
        sum += term;
        if (term < 1e-17 * sum) {
            break;
        }
    }
    return n * std::log(half) - std::lgamma(n + 1.0) + std::log(sum);
}

/// Log of e^{-x} I_n(x) by Miller's downward recurrence
/// I_{k-1} = I_{k+1} + (2k/x) I_k, normalised with e^x = I_0 + 2 sum_{k>=1} I_k.
double log_bessel_scaled_miller(int n, double x) {
    constexpr double kRescale = 1e-200;
    const double log_rescale = std::log(kRescale);
    const double order = std::max(static_cast<double>(n), x);
    const int start = 2 * (static_cast<int>(order) + static_cast<int>(std::sqrt(40.0 * order))) + 16;

    double f_above = 0.0;
    double f = 1.0;
    double sum = 2.0 * f;
    double result = (start == n) ? f : 0.0;
    bool result_set = (start == n);
    int rescales_after_result = 0;

    for (int j = start; j >= 1; --j) {
        const double f_below = f_above + (2.0 * j / x) * f;
        f_above = f;
        f = f_below;
        const int k = j - 1;
        if (k == n) {
            result = f;
            result_set = true;
        }
        sum += (k == 0) ? f : 2.0 * f;
        if (f > 1e200) {
            f *= kRescale;
            f_above *= kRescale;
            sum *= kRescale;
            if (result_set && k != n) {
                ++rescales_after_result;
            } else if (result_set) {
                result *= kRescale;
            }
        }
    }
    if (result == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    return std::log(result) + rescales_after_result * log_rescale - std::log(sum);
}

/// Log of e^{-x} I_n(x) without the public order cap.
double log_bessel_i_scaled(int n, double x) {
    n = std::abs(n);
    if (x <= kSeriesLimit) {
        return log_bessel_series(n, x) - x;
    }
    return log_bessel_scaled_miller(n, x);
}

void check_bessel_args(int n, double x) {
    if (!(x >= 0.0) || std::isinf(x)) {
        throw DomainError("bessel_i: x must be finite and nonnegative, got " + std::to_string(x));
    }
    if (std::abs(n) > kMaxBesselOrder) {
        throw DomainError("bessel_i: |n| must not exceed 1000, got " + std::to_string(n));
    }
}

double poisson_pmf(long k, double mean) {
    if (k < 0) {
        return 0.0;
    }
    if (mean == 0.0) {
        return k == 0 ? 1.0 : 0.0;
    }
    const double kd = static_cast<double>(k);
    return std::exp(kd * std::log(mean) - mean - std::lgamma(kd + 1.0));
}

/// Sum of skellam_pmf(k) for k = first, first + step, ... (step = +1 or -1)
/// until the remaining mass is provably below kTailTolerance of the sum. The Skellam pmf
/// is log-concave, so once successive ratios fall below one the rest of the
/// tail is bounded by a geometric series.
double skellam_tail(long first, int step, const SkellamParams& params) {
    const double mean = params.t * (params.lambda_a - params.lambda_d);
    double sum = 0.0;
    long k = first;
    double term = skellam_pmf(k, params);
    for (long iter = 0; iter < 100'000'000L; ++iter) {
        sum += term;
        const long next_k = k + step;
        const double next = skellam_pmf(next_k, params);
        const bool past_mean = step > 0 ? static_cast<double>(k) >= mean : static_cast<double>(k) <= mean;
        if (term == 0.0) {
            if (next == 0.0 && past_mean) {
                break;
            }
        } else {
            const double ratio = next / term;
            if (ratio < 1.0 && next / (1.0 - ratio) <= kTailTolerance * sum) {
                break;
            }
        }
        k = next_k;
        term = next;
    }
    return sum;
}

} // namespace

std::uint64_t RandomSource::uniform_index(std::uint64_t n) {
    if (n == 0) {
        throw DomainError("uniform_index: empty range");
    }
    // Lemire's nearly divisionless bounded draw.
    uint128 product = static_cast<uint128>(engine_()) * n;
    auto low = static_cast<std::uint64_t>(product);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            product = static_cast<uint128>(engine_()) * n;
            low = static_cast<std::uint64_t>(product);
        }
    }
    return static_cast<std::uint64_t>(product >> 64);
}

void SkellamParams::validate() const {
    if (!(lambda_a >= 0.0) || !(lambda_d >= 0.0) || !std::isfinite(lambda_a) || !std::isfinite(lambda_d)) {
        throw DomainError("Skellam rates must be finite and nonnegative");
    }
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw DomainError("Skellam interval t must be positive");
    }
}

double bessel_i_scaled(int n, double x) {
    check_bessel_args(n, x);
    return std::exp(log_bessel_i_scaled(n, x));
}

double bessel_i(int n, double x) {
    check_bessel_args(n, x);
    const double log_value = log_bessel_i_scaled(n, x) + x;
    if (log_value > std::log(std::numeric_limits<double>::max())) {
        throw OverflowError("bessel_i: I_" + std::to_string(n) + "(" + std::to_string(x) + ") exceeds double range");
    }
    return std::exp(log_value);
}

double skellam_pmf(long n, const SkellamParams& params) {
    params.validate();
    const double mean_a = params.t * params.lambda_a;
    const double mean_d = params.t * params.lambda_d;
    if (mean_d == 0.0) {
        return poisson_pmf(n, mean_a);
    }
    if (mean_a == 0.0) {
        return poisson_pmf(-n, mean_d);
    }
    const double root_gap = std::sqrt(mean_a) - std::sqrt(mean_d);
    const double x = 2.0 * std::sqrt(mean_a * mean_d);
    const double log_p = -root_gap * root_gap + 0.5 * static_cast<double>(n) * (std::log(mean_a) - std::log(mean_d)) +
                         log_bessel_i_scaled(static_cast<int>(std::min<long>(std::labs(n), std::numeric_limits<int>::max())), x);
    return std::min(1.0, std::exp(log_p));
}

double censored_transition(long m, long n, const SkellamParams& params) {
    params.validate();
    if (m < 0 || n < 0) {
        throw DomainError("censored_transition: occupancies must be nonnegative");
    }
    if (n > 0) {
        return skellam_pmf(n - m, params);
    }
    return std::min(1.0, skellam_tail(-m, -1, params));
}

std::vector<double> censored_transition_row(long m, long cap, const SkellamParams& params) {
    params.validate();
    if (m < 0 || cap < 0 || m > cap) {
        throw DomainError("censored_transition_row: need 0 <= m <= cap");
    }
    std::vector<double> row(static_cast<std::size_t>(cap) + 1, 0.0);
    if (cap == 0) {
        row[0] = 1.0;
        return row;
    }
    row[0] = censored_transition(m, 0, params);
    for (long n = 1; n < cap; ++n) {
        row[static_cast<std::size_t>(n)] = skellam_pmf(n - m, params);
    }
    row[static_cast<std::size_t>(cap)] = skellam_tail(cap - m, +1, params);
    return row;
}

PoissonSampler::PoissonSampler(double rate) : rate_{rate} {
    if (!(rate >= 0.0) || !std::isfinite(rate) || rate > kMaxPoissonRate) {
        throw DomainError("Poisson rate must lie in [0, 1e6], got " + std::to_string(rate));
    }
    exp_neg_rate_ = std::exp(-rate);
    if (rate >= 10.0) {
        sqrt_rate_ = std::sqrt(rate);
        log_rate_ = std::log(rate);
        b_ = 0.931 + 2.53 * sqrt_rate_;
        a_ = -0.059 + 0.02483 * b_;
        inv_alpha_ = 1.1239 + 1.1328 / (b_ - 3.4);
        v_r_ = 0.9277 - 3.6224 / (b_ - 2.0);
    }
}

std::uint64_t PoissonSampler::operator()(RandomSource& rng) const {
    if (rate_ == 0.0) {
        return 0;
    }
    return rate_ < 10.0 ? sample_inversion(rng) : sample_ptrs(rng);
}

std::uint64_t PoissonSampler::sample_inversion(RandomSource& rng) const {
    const double u = rng.uniform();
    std::uint64_t k = 0;
    double p = exp_neg_rate_;
    double cdf = p;
    // Cap guards against cdf saturating below u through rounding.
    const double cap = rate_ + 40.0 * std::sqrt(rate_) + 40.0;
    while (u >= cdf && static_cast<double>(k) < cap) {
        ++k;
        p *= rate_ / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

std::uint64_t PoissonSampler::sample_ptrs(RandomSource& rng) const {
    for (;;) {
        const double u = rng.uniform() - 0.5;
        const double v = rng.uniform();
        const double us = 0.5 - std::fabs(u);
        const double kd = std::floor((2.0 * a_ / us + b_) * u + rate_ + 0.43);
        if (us >= 0.07 && v <= v_r_) {
            return static_cast<std::uint64_t>(kd);
        }
        if (kd < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(inv_alpha_) - std::log(a_ / (us * us) + b_) <=
            -rate_ + kd * log_rate_ - std::lgamma(kd + 1.0)) {
            return static_cast<std::uint64_t>(kd);
        }
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t sample_poisson(double rate, RandomSource& rng) {
    return PoissonSampler{rate}(rng);
}

} // namespace fairbalance
