#include "cssqkd/typesys.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace cssqkd {

namespace {

constexpr double kSumTol = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_probs(const std::vector<double>& p) {
    if (p.empty()) throw usage_error("empty distribution");
    double s = 0.0;
    for (double x : p) {
        if (!(x >= 0.0)) throw usage_error("negative probability");
        s += x;
    }
    if (std::abs(s - 1.0) > kSumTol) throw usage_error("probabilities do not sum to 1");
}

double log_base(double x, int base) { return std::log(x) / std::log(static_cast<double>(base)); }

}  // namespace

Dist::Dist(std::vector<double> probs) : p(std::move(probs)) { check_probs(p); }

Dist Dist::uniform(int s) { return Dist(std::vector<double>(s, 1.0 / s)); }

Dist Dist::point_mass(int s, int at) {
    std::vector<double> v(s, 0.0);
    v.at(at) = 1.0;
    return Dist(std::move(v));
}

TypeDist::TypeDist(long long n_, std::vector<long long> counts_) : n(n_), counts(std::move(counts_)) {
    if (n < 1) throw usage_error("type denominator must be >= 1");
    long long s = 0;
    for (long long c : counts) {
        if (c < 0) throw usage_error("negative count");
        s += c;
    }
    if (s != n) throw usage_error("type counts do not sum to n");
}

Dist TypeDist::as_dist() const {
    std::vector<double> v(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) v[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
    return Dist(std::move(v));
}

JointDist::JointDist(int s_, std::vector<double> probs) : s(s_), p(std::move(probs)) {
    if (s < 1 || p.size() != static_cast<size_t>(s) * s) throw usage_error("joint table shape mismatch");
    check_probs(p);
}

JointDist JointDist::point_mass(int s, int i, int j) {
    std::vector<double> v(static_cast<size_t>(s) * s, 0.0);
    v.at(static_cast<size_t>(i) * s + j) = 1.0;
    return JointDist(s, std::move(v));
}

Dist JointDist::bar() const {
    std::vector<double> v(s, 0.0);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) v[i] += at(i, j);
    return Dist(std::move(v));
}

Dist JointDist::dbar() const {
    std::vector<double> v(s, 0.0);
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) v[i] += at(j, i);
    return Dist(std::move(v));
}

TypeDist type_of(const Word& w) {
    std::vector<long long> counts(w.d, 0);
    for (uint8_t x : w.digits) ++counts[x];
    return TypeDist(w.n(), std::move(counts));
}

double entropy(const Dist& p, int base) {
    double h = 0.0;
    for (double x : p.p) {
        if (x > 0.0) h -= x * log_base(x, base);
    }
    return h < 0.0 ? 0.0 : h;
}

double entropy(const JointDist& p, int base) {
    double h = 0.0;
    for (double x : p.p) {
        if (x > 0.0) h -= x * log_base(x, base);
    }
    return h < 0.0 ? 0.0 : h;
}

double binary_entropy(double x) {
    if (x < 0.0 || x > 1.0) throw usage_error("binary entropy argument outside [0,1]");
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

namespace {

double kl_impl(const std::vector<double>& q, const std::vector<double>& p, int base) {
    if (q.size() != p.size()) throw usage_error("alphabet mismatch in divergence");
    double s = 0.0;
    for (size_t i = 0; i < q.size(); ++i) {
        if (q[i] == 0.0) continue;
        if (p[i] == 0.0) return kInf;
        s += q[i] * log_base(q[i] / p[i], base);
    }
    return s < 0.0 ? 0.0 : s;
}

}  // namespace

double kl(const Dist& q, const Dist& p, int base) { return kl_impl(q.p, p.p, base); }
double kl(const JointDist& q, const JointDist& p, int base) { return kl_impl(q.p, p.p, base); }

std::vector<TypeDist> enumerate_types(long long n, int s) {
    if (n < 1 || s < 1) throw usage_error("enumerate_types requires n >= 1, s >= 1");
    num_types(n, s);  // overflow guard
    std::vector<TypeDist> out;
    std::vector<long long> cur(s, 0);
    // recursive composition enumeration, lexicographic in counts
    auto rec = [&](auto&& self, int pos, long long rem) -> void {
        if (pos == s - 1) {
            cur[pos] = rem;
            out.emplace_back(n, cur);
            return;
        }
        for (long long c = 0; c <= rem; ++c) {
            cur[pos] = c;
            self(self, pos + 1, rem - c);
        }
    };
    rec(rec, 0, n);
    return out;
}

uint64_t num_types(long long n, int s) {
    // C(n+s-1, s-1) with checked arithmetic
    uint64_t r = 1;
    for (int i = 1; i <= s - 1; ++i) {
        const uint64_t num = static_cast<uint64_t>(n + i);
        if (r > (~uint64_t{0}) / num) throw resource_error("type count overflows u64");
        r = r * num / static_cast<uint64_t>(i);
    }
    return r;
}

uint64_t type_class_size(const TypeDist& q) {
    // multinomial(n; counts) via incremental binomials, checked
    uint64_t r = 1;
    long long placed = 0;
    for (long long c : q.counts) {
        for (long long i = 1; i <= c; ++i) {
            const uint64_t num = static_cast<uint64_t>(placed + i);
            if (r > (~uint64_t{0}) / num) throw resource_error("type class size overflows u64");
            r = r * num / static_cast<uint64_t>(i);
        }
        placed += c;
    }
    return r;
}

double log_type_class_size(const TypeDist& q, int base) {
    double lg = std::lgamma(static_cast<double>(q.n) + 1.0);
    for (long long c : q.counts) lg -= std::lgamma(static_cast<double>(c) + 1.0);
    return lg / std::log(static_cast<double>(base));
}

double prob_of_type_class(const TypeDist& q, const Dist& p) {
    if (q.size() != p.size()) throw usage_error("alphabet mismatch");
    double prod = 1.0;
    for (int i = 0; i < q.size(); ++i) {
        for (long long c = 0; c < q.counts[i]; ++c) prod *= p[i];
    }
    if (prod == 0.0) return 0.0;
    return static_cast<double>(type_class_size(q)) * prod;
}

Dist flip(const Dist& q) {
    const int s = q.size();
    std::vector<double> v(s);
    for (int t = 0; t < s; ++t) v[t] = q[(s - t) % s];
    return Dist(std::move(v));
}

std::pair<Dist, Dist> marginals(const JointDist& j) { return {j.bar(), j.dbar()}; }

JointDist switched(const JointDist& pa) {
    const int s = pa.s;
    JointDist out = pa;
    for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) out.at(i, j) = pa.at(j, (s - i) % s);
    return out;
}

JointDist mixture_channel(const JointDist& pa, double r) {
    if (!(r >= 0.0 && r <= 1.0)) throw usage_error("mixture weight outside [0,1]");
    const JointDist sw = switched(pa);
    JointDist out = pa;
    for (size_t i = 0; i < out.p.size(); ++i) out.p[i] = (1.0 - r) * pa.p[i] + r * sw.p[i];
    return out;
}

namespace {

double l1_impl(const std::vector<double>& q, const std::vector<double>& p) {
    if (q.size() != p.size()) throw usage_error("alphabet mismatch in l1 distance");
    double s = 0.0;
    for (size_t i = 0; i < q.size(); ++i) s += std::abs(q[i] - p[i]);
    return s;
}

}  // namespace

double l1_distance(const Dist& q, const Dist& p) { return l1_impl(q.p, p.p); }
double l1_distance(const JointDist& q, const JointDist& p) { return l1_impl(q.p, p.p); }

double pinsker_constant(int d) { return 2.0 * std::log(static_cast<double>(d)); }

std::pair<double, bool> l1_and_pinsker(const Dist& q, const Dist& p, int base) {
    const double l1 = l1_distance(q, p);
    const double lhs = kl(q, p, base);
    const double rhs = l1 * l1 / pinsker_constant(base);
    return {l1, lhs >= rhs - 1e-12};
}

}  // namespace cssqkd
