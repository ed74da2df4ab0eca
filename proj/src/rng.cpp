#include "cssqkd/rng.hpp"

namespace cssqkd {
namespace {

constexpr uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

uint64_t mix(uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

uint64_t fnv1a(std::string_view s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

Rng Rng::stream(std::string_view label) const {
    return Rng(mix(state_ ^ fnv1a(label)));
}

Rng Rng::stream(uint64_t index) const {
    return Rng(mix(state_ ^ mix(index + 0x5851f42d4c957f2dULL)));
}

uint64_t Rng::next_u64() {
    state_ += kGamma;
    return mix(state_);
}

uint64_t Rng::below(uint64_t bound) {
    // rejection below the largest multiple of bound
    const uint64_t limit = bound * ((~uint64_t{0}) / bound);
    uint64_t v;
    do {
        v = next_u64();
    } while (v >= limit);
    return v % bound;
}

double Rng::unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

size_t Rng::from_cdf(const std::vector<double>& cdf) {
    const double u = unit();
    for (size_t i = 0; i + 1 < cdf.size(); ++i) {
        if (u < cdf[i]) return i;
    }
    return cdf.size() - 1;
}

}  // namespace cssqkd
