#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "ssml/common.hpp"

namespace ssml {

/// State of the counter-based generator. A (seed, stream_id) pair names an
/// independent stream; the counter indexes positions within it. Copying the
/// state and replaying it reproduces the exact same variates, so consumers
/// can jump ahead or split work across threads by handing out distinct
/// stream ids. No shared mutable state anywhere.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
    std::uint64_t counter = 0;
};

namespace detail {

// Stafford variant 13 finalizer (the splitmix64 output function).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_key(const RngState& s) {
    return mix64(s.seed ^ 0x53534d4c2d6b6579ULL) ^ mix64(s.stream_id ^ 0x73747265616d2d31ULL);
}

// AS241 (Wichura), double-precision branch. Maps p in (0,1) to the standard
// normal quantile with relative error below 1e-15 away from the extreme tails.
inline double horner8(double r, const double (&c)[8]) {
    double v = c[7];
    for (int i = 6; i >= 0; --i) v = v * r + c[i];
    return v;
}

inline double inverse_normal_cdf(double p) {
    // Coefficients listed lowest order first.
    static constexpr double kA[8] = {3.3871328727963666080e0,  1.3314166789178437745e2,
                                     1.9715909503065514427e3,  1.3731693765509461125e4,
                                     4.5921953931549871457e4,  6.7265770927008700853e4,
                                     3.3430575583588128105e4,  2.5090809287301226727e3};
    static constexpr double kB[8] = {1.0,                      4.2313330701600911252e1,
                                     6.8718700749205790830e2,  5.3941960214247511077e3,
                                     2.1213794301586595867e4,  3.9307895800092710610e4,
                                     2.8729085735721942674e4,  5.2264952788528545610e3};
    static constexpr double kC[8] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                     5.76949722146069140550e0, 3.64784832476320460504e0,
                                     1.27045825245236838258e0, 2.41780725177450611770e-1,
                                     2.27238449892691845833e-2, 7.74545014278341407640e-4};
    static constexpr double kD[8] = {1.0,                      2.05319162663775882187e0,
                                     1.67638483018380384940e0, 6.89767334985100004550e-1,
                                     1.48103976427480074590e-1, 1.51986665636164571966e-2,
                                     5.47593808499534494600e-4, 1.05075007164441684324e-9};
    static constexpr double kE[8] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                     1.78482653991729133580e0, 2.96560571828504891230e-1,
                                     2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                     2.71155556874348757815e-5, 2.01033439929228813265e-7};
    static constexpr double kF[8] = {1.0,                      5.99832206555887937690e-1,
                                     1.36929880922735805310e-1, 1.48753612908506148525e-2,
                                     7.86869131145613259100e-4, 1.84631831751005468180e-5,
                                     1.42151175831644588870e-7, 2.04426310338993978564e-15};
    const double q = p - 0.5;
    if (q > -0.425 && q < 0.425) {
        const double r = 0.180625 - q * q;
        return q * horner8(r, kA) / horner8(r, kB);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = horner8(r, kC) / horner8(r, kD);
    } else {
        r -= 5.0;
        val = horner8(r, kE) / horner8(r, kF);
    }
    return (q < 0.0) ? -val : val;
}

inline std::uint64_t draw_u64(std::uint64_t key, std::uint64_t counter) {
    return mix64(key ^ mix64(counter));
}

}  // namespace detail

inline std::uint64_t next_u64(RngState& state) {
    return detail::draw_u64(detail::stream_key(state), state.counter++);
}

/// Uniform double in the open interval (0, 1); 53 significant bits.
inline double next_u01(RngState& state) {
    return static_cast<double>(next_u64(state) >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

/// Standard normal via the inverse-CDF transform (AS241). One uniform per
/// variate, so the stream position advances by exactly `count`.
inline double next_gaussian(RngState& state) {
    return detail::inverse_normal_cdf(next_u01(state));
}

inline std::vector<double> gaussian(RngState& state, index_t count) {
    std::vector<double> out(count);
    const std::uint64_t key = detail::stream_key(state);
    for (index_t i = 0; i < count; ++i) {
        const double u =
            static_cast<double>(detail::draw_u64(key, state.counter++) >> 11) * 0x1.0p-53 +
            0x1.0p-54;
        out[i] = detail::inverse_normal_cdf(u);
    }
    return out;
}

/// Uniform signs in {-1, +1}, one draw per element.
inline std::vector<double> rademacher(RngState& state, index_t count) {
    std::vector<double> out(count);
    const std::uint64_t key = detail::stream_key(state);
    for (index_t i = 0; i < count; ++i)
        out[i] = (detail::draw_u64(key, state.counter++) >> 63) ? 1.0 : -1.0;
    return out;
}

/// Unbiased uniform integer in [0, bound) by rejection.
inline std::uint64_t next_bounded(RngState& state, std::uint64_t bound) {
    require(bound > 0, "next_bounded: bound must be positive");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
    std::uint64_t x = next_u64(state);
    while (x > limit) x = next_u64(state);
    return x % bound;
}

/// m distinct indices uniform over m-subsets of [0, n), returned ascending.
/// Partial Fisher-Yates over an index table.
inline std::vector<index_t> sample_without_replacement(RngState& state, index_t m, index_t n) {
    if (m > n) detail::failf("subset larger than ground set (m=", m, ", n=", n, ")");
    std::vector<index_t> pool(n);
    for (index_t i = 0; i < n; ++i) pool[i] = i;
    for (index_t i = 0; i < m; ++i) {
        const index_t j = i + static_cast<index_t>(next_bounded(state, n - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<index_t> out(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(out.begin(), out.end());
    return out;
}

/// Deterministic child seed for consumer `index` of a run-level seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return detail::mix64(detail::mix64(seed ^ 0x6465726976656421ULL) ^ index);
}

}  // namespace ssml
