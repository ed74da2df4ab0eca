#ifndef CSSQKD_ORACLE_HPP
#define CSSQKD_ORACLE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "cssqkd/csscode.hpp"
#include "cssqkd/rng.hpp"
#include "cssqkd/typesys.hpp"

namespace cssqkd {

/// Which self-orthogonal ensemble to enumerate.
enum class EnsembleVariant {
    Plain,     ///< all C with C in C-perp, dim kappa (d >= 3)
    WithOnes,  ///< d = 2, even n: additionally 1^n in C
};

/// Exhaustive census of the ensemble: every code, and |A_x| = #{C : x in
/// C-perp} for every word x.
struct EnsembleCensus {
    int d = 2;
    int n = 0;
    int kappa = 0;
    EnsembleVariant variant = EnsembleVariant::Plain;
    std::vector<LinearCode> codes;
    std::vector<uint64_t> containment;  // indexed by pack_word(x)

    uint64_t size() const { return codes.size(); }
};

EnsembleCensus enumerate_self_orthogonal(int d, int n, int kappa,
                                         EnsembleVariant variant = EnsembleVariant::Plain,
                                         uint64_t cap = kDefaultEnumCap);

/// Per-class constancy of |A_x| and the ratio bound d^(-kappa+d-1).
struct SymmetryReport {
    bool constancy_ok = false;
    bool ratio_ok = false;
    bool zero_class_ok = false;  // d=2 variant: |A_x| = 0 whenever x.x = 1
    bool double_count_ok = false;
    std::map<int, uint64_t> class_constant;  // u -> N_u (only classes with members)
    double worst_ratio = 0.0;
    double ratio_bound = 0.0;
};

SymmetryReport verify_group_symmetry(const EnsembleCensus& census);

/// Exact failure probabilities of a code on an i.i.d. Pauli-model channel.
struct FailureProbs {
    double joint = -1.0;  // P^n(K(Gamma')^c); negative if skipped (cap)
    double marginal_x = 0.0;  // Pbar^n(Gamma'^c)
    double marginal_z = 0.0;  // Pdbar^n(Gamma'^c)
    bool joint_exact = false;
};

FailureProbs exact_failure_probability(const CssCode& css, const JointDist& p,
                                       uint64_t joint_cap = uint64_t{1} << 20,
                                       uint64_t marginal_cap = uint64_t{1} << 20);

/// Exact marginal failure q^n(Gamma'^c) for a single-digit error distribution.
double marginal_failure_exact(const CssCode& css, const Dist& q, uint64_t cap = uint64_t{1} << 20);

/// Monte Carlo failure estimate over `trials` samples of (e_x, e_z) pairs.
double mc_failure_probability(const CssCode& css, const JointDist& p, long long trials, Rng rng);

/// Monte Carlo of the actual key-transmission loop (uniform code string,
/// syndrome announcement, decode) against the exact channel-level error
/// probability; they must agree within `z_halfwidths` Wilson half-widths.
struct IdentityCheckReport {
    double exact = 0.0;
    double mc_freq = 0.0;
    double halfwidth = 0.0;
    long long trials = 0;
    bool ok = false;
};

IdentityCheckReport decoding_error_identity_check(const CssCode& css, const Dist& pbar,
                                                  long long trials, Rng rng,
                                                  double z_halfwidths = 4.0);

/// Empirical tails of ||type(Y') - type(Y'')||_1 under uniform n-of-N
/// sampling versus the bound 2 |P_N|^2 d^(-N (g(alpha) eps)^2 / K_d),
/// alpha = (N-n)/N. One-sided: a violation is counted only when the bound
/// falls below the 99% Wilson lower edge.
struct TailCheckRow {
    double eps = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    bool ok = true;
};

struct TailCheckReport {
    std::vector<TailCheckRow> rows;
    bool all_ok = true;
};

/// `source`: fixed string of length N, or empty to sample i.i.d. from `dist`.
TailCheckReport sampling_tail_check(int alphabet, int big_n, int small_n,
                                    const std::vector<uint8_t>& source, const Dist& dist,
                                    long long trials, const std::vector<double>& eps_grid, Rng rng);

}  // namespace cssqkd

#endif
