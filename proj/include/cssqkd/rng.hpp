#ifndef CSSQKD_RNG_HPP
#define CSSQKD_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace cssqkd {

/// Deterministic splitmix64 generator with labelled sub-streams.
///
/// One master seed feeds a whole run; every independent purpose (basis bits,
/// channel noise, permutations, ...) derives its own stream via a label so
/// that adding draws to one purpose never shifts another.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    /// Derived stream for a named purpose.
    Rng stream(std::string_view label) const;
    /// Derived stream for an indexed purpose (e.g. trial number).
    Rng stream(uint64_t index) const;

    uint64_t next_u64();

    /// Uniform value in [0, bound), bound >= 1. Rejection sampled, unbiased.
    uint64_t below(uint64_t bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double unit();

    /// Bernoulli(p).
    bool bernoulli(double p) { return unit() < p; }

    /// Sample an index from a cumulative distribution (last entry ~ 1).
    size_t from_cdf(const std::vector<double>& cdf);

private:
    uint64_t state_;
};

}  // namespace cssqkd

#endif
