#ifndef CSSQKD_TYPESYS_HPP
#define CSSQKD_TYPESYS_HPP

#include <cstdint>
#include <vector>

#include "cssqkd/errors.hpp"
#include "cssqkd/gfvec.hpp"

namespace cssqkd {

/// Probability distribution on a finite alphabet {0..s-1}.
struct Dist {
    std::vector<double> p;

    Dist() = default;
    explicit Dist(std::vector<double> probs);
    static Dist uniform(int s);
    static Dist point_mass(int s, int at);

    int size() const { return static_cast<int>(p.size()); }
    double operator[](int i) const { return p[i]; }

    bool operator==(const Dist&) const = default;
};

/// Empirical type with denominator n: counts sum to n.
struct TypeDist {
    long long n = 0;
    std::vector<long long> counts;

    TypeDist() = default;
    TypeDist(long long n_, std::vector<long long> counts_);

    int size() const { return static_cast<int>(counts.size()); }
    Dist as_dist() const;

    bool operator==(const TypeDist&) const = default;
    bool operator<(const TypeDist& o) const { return counts < o.counts; }
};

/// Distribution on {0..s-1} x {0..s-1}, stored row-major: at(i,j) = P(i,j).
struct JointDist {
    int s = 0;
    std::vector<double> p;

    JointDist() = default;
    JointDist(int s_, std::vector<double> probs);
    static JointDist point_mass(int s, int i, int j);

    double at(int i, int j) const { return p[static_cast<size_t>(i) * s + j]; }
    double& at(int i, int j) { return p[static_cast<size_t>(i) * s + j]; }

    /// Row marginal: bar(i) = sum_j P(i,j).
    Dist bar() const;
    /// Column marginal: dbar(i) = sum_j P(j,i).
    Dist dbar() const;

    bool operator==(const JointDist&) const = default;
};

TypeDist type_of(const Word& w);

/// Entropy -sum p log_base p, 0 log 0 = 0.
double entropy(const Dist& p, int base);
double entropy(const JointDist& p, int base);
/// Base-two binary entropy h2(x).
double binary_entropy(double x);

/// Kullback-Leibler divergence sum q log_base(q/p); +infinity if supp(q) is
/// not contained in supp(p).
double kl(const Dist& q, const Dist& p, int base);
double kl(const JointDist& q, const JointDist& p, int base);

/// All types with denominator n on an s-letter alphabet (compositions of n).
std::vector<TypeDist> enumerate_types(long long n, int s);
/// Number of such types, C(n+s-1, s-1); throws resource_error on overflow.
uint64_t num_types(long long n, int s);
/// |T_Q| = multinomial(n; counts); throws resource_error on overflow.
uint64_t type_class_size(const TypeDist& q);
/// log_base |T_Q| computed with lgamma (safe for large n).
double log_type_class_size(const TypeDist& q, int base);

/// Exact probability that an i.i.d. p-string has type Q:
/// |T_Q| prod_i p(i)^counts[i].
double prob_of_type_class(const TypeDist& q, const Dist& p);

/// Flip map f(q)(t) = q(-t mod s).
Dist flip(const Dist& q);

/// Pair of marginals (bar, dbar).
std::pair<Dist, Dist> marginals(const JointDist& j);

/// Fourier-switched channel distribution P'(s,t) = P(t, -s mod d).
JointDist switched(const JointDist& pa);

/// Mixture (1-r) P_A + r P_A' with P_A'(s,t) = P_A(t, -s mod d).
JointDist mixture_channel(const JointDist& pa, double r);

double l1_distance(const Dist& q, const Dist& p);
double l1_distance(const JointDist& q, const JointDist& p);

/// Pinsker constant K_d = 2 ln d for divergences in log base d.
double pinsker_constant(int d);

/// (||q-p||_1, whether kl(q,p) >= ||q-p||_1^2 / K_d) with K_d = 2 ln d.
std::pair<double, bool> l1_and_pinsker(const Dist& q, const Dist& p, int base);

}  // namespace cssqkd

#endif
