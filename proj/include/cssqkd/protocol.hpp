#ifndef CSSQKD_PROTOCOL_HPP
#define CSSQKD_PROTOCOL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cssqkd/csscode.hpp"
#include "cssqkd/exponents.hpp"
#include "cssqkd/qudit.hpp"
#include "cssqkd/typesys.hpp"

namespace cssqkd {

enum class Mode { BB84, Modified };

struct ProtocolConfig {
    int d = 2;
    long long m = 6000;  // total transmitted digits
    double pa = 0.5;
    double pb = 0.5;
    double pc = 0.5;  // unused in Modified mode
    Mode mode = Mode::BB84;
    double eps = 0.02;      // BB84 rate-selection ball
    double gamma = 0.05;    // Modified rate margin
    double e_target = 0.01;
    uint64_t seed = 0;
    const CodeBank* bank = nullptr;
    void validate() const;
};

/// Attack resolved to a per-digit distribution on (xi, zeta) pairs.
/// Grammar: identity | dephasing:q | flip:q | depolarizing:q | dist:FILE |
/// kraus:FILE.
struct AttackModel {
    JointDist dist;
    std::string spec;
};

AttackModel parse_attack(const std::string& spec, int d);

/// dist file format: first line d, then d rows of d entries P(s,t).
JointDist load_dist_file(const std::string& path);

enum class SessionOutcome {
    Ok,
    AbortRate,       // selected rate fell to zero (or below)
    AbortEstimate,   // no estimation digits of one kind
    AbortPartition,  // Modified step (vi): n <= 0 or n = M_s
};
std::string to_string(SessionOutcome o);

struct SessionReport {
    SessionOutcome outcome = SessionOutcome::Ok;
    long long m = 0;
    long long discarded = 0;  // mismatched bases (plus the odd-size drop)
    long long sift_size = 0;  // matched-basis digits kept (M_s)
    int n = 0;                // code length used (Modified: the step-(vi) value, possibly <= 0)
    int k = 0;                // key length
    long long lambda = 0;        // Z-difference estimation samples
    long long lambda_prime = 0;  // X-difference estimation samples
    long long moved = 0;         // digits diverted from the code pool to estimation
    TypeDist p_u, p_w;           // channel estimates
    double alpha_hat = 0.0;
    double selected_rate = 0.0;
    double failure_exponent = 0.0;  // BB84 only
    double rate_step = 0.0;         // grid certification steps (BB84 only)
    double ball_step = 0.0;
    std::vector<uint8_t> announced_syndrome;
    std::vector<uint8_t> key_alice, key_bob;
    bool agree = false;
    bool residual_correctable = false;  // effective error in Gamma' (exact)
    // attached bounds at the code rate actually used
    double exponent = 0.0;       // E(k/n, ...) for BB84; E1(gamma, alpha) for Modified
    double bound_fidelity = 0.0;
    double bound_leakage = 0.0;
    bool leakage_clamped = false;
};

/// One protocol session. Throws codebank_miss when the bank lacks a fitting
/// code. A shared RateSolver keeps the rate cache warm across sessions.
SessionReport run_bb84(const ProtocolConfig& cfg, const AttackModel& attack,
                       RateSolver* solver = nullptr);
SessionReport run_modified_bb84(const ProtocolConfig& cfg, const AttackModel& attack);

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
    double halfwidth() const { return (hi - lo) / 2; }
};
/// Wilson score interval at normal quantile z.
WilsonInterval wilson(long long successes, long long trials, double z);

struct MonteCarloStats {
    long long trials = 0;
    long long completed = 0;
    long long disagreements = 0;
    long long aborts_rate = 0;
    long long aborts_estimate = 0;
    long long aborts_partition = 0;
    long long bank_misses = 0;
    double disagree_freq = 0.0;  // among completed sessions
    WilsonInterval disagree_wilson;
    double abort_freq = 0.0;
    double mean_selected_rate = 0.0;   // over completed sessions
    double mean_code_rate = 0.0;       // k/n actually used, over completed sessions
    double mean_bound_fidelity = 0.0;  // over completed sessions
    double mean_failure_exponent = 0.0;
    std::vector<SessionReport> sessions;
};

/// Seeded batch: trial t runs with seed cfg.seed + t, so trials = 1
/// reproduces run_bb84 exactly. Deterministic for fixed (config, trials).
MonteCarloStats monte_carlo(const ProtocolConfig& cfg, const AttackModel& attack, long long trials);

}  // namespace cssqkd

#endif
