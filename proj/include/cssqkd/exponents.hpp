#ifndef CSSQKD_EXPONENTS_HPP
#define CSSQKD_EXPONENTS_HPP

#include <functional>
#include <map>
#include <vector>

#include "cssqkd/typesys.hpp"

namespace cssqkd {

/// Result of a variational exponent evaluation.
struct ExponentResult {
    double value = 0.0;
    std::vector<Dist> argmin;  // one entry per minimized distribution
    double resolution = 0.0;   // final grid step of the search
};

/// Deterministic minimization over the probability simplex: composition grid
/// of step 1/grid followed by mass-move descent with halving steps. The
/// objective may return +infinity to mark infeasible points.
struct SimplexMinParams {
    int grid = 512;    // d = 2 default; use 64 per coordinate for d = 3
    int passes = 12;   // halvings after the initial grid sweep
};

ExponentResult minimize_simplex(int s, const SimplexMinParams& params,
                                const std::function<double(const std::vector<double>&)>& f);
ExponentResult minimize_two_simplices(int s0, int s1, const SimplexMinParams& params,
                                      const std::function<double(const std::vector<double>&,
                                                                 const std::vector<double>&)>& f);

SimplexMinParams default_simplex_params(int d);

/// Random-coding exponent E*(R,p) = min_Q [ D(Q||p) + |1 - 2H(Q) - R|^+ / 2 ]
/// over distributions Q on F_d, logs base d. Zero exactly when
/// R >= 1 - 2 H(p).
ExponentResult estar(double rate, const Dist& p, int d);
ExponentResult estar(double rate, const Dist& p, int d, const SimplexMinParams& params);

/// Joint exponent min{ E*(R, Pbar), E*(R, Pdbar) }.
ExponentResult e_joint(double rate, const Dist& pbar, const Dist& pdbar, int d);

/// The explicit o(n) term: 3(d-1) log_d(n+1) + log_d 2 + d.
double o_n(int n, int d);

/// d^(-n E + o(n)) = 2 d^d (n+1)^(3(d-1)) d^(-n E).
double fidelity_bound(int n, double exponent, int d);

/// Leakage bound 2 d^(-nE+o(n)) [n(E+R) - o(n)], clamped at the largest
/// possible information content nR (and at zero from below).
struct LeakageBound {
    double value = 0.0;
    bool clamped = false;    // the formula exceeded the nR cap (or E <= 0)
    bool vanishing = false;  // E > 0, so the bound decays with n
};
LeakageBound leakage_bound(int n, double exponent, double rate, int d);

/// Gilbert-Varshamov-style exponent (d = 2 only):
/// min D(Q||P_M) over joints Q with 1 - 2 h2(Qbar(1)+Qdbar(1)) <= R or
/// Qbar(1)+Qdbar(1) >= 1.
ExponentResult e_gv(double rate, const JointDist& pm);

/// Conditional-pair exponent of the split-decoder bound:
/// Estar(R,p0,p1) = min_(Q0,Q1) [D(Q0||p0)+D(Q1||p1)+|1-H(Q0)-H(Q1)-R|^+]/2,
/// then E_c = min over the (bar, bar) and (dbar, dbar) marginal pairs.
ExponentResult e_cond_pair(double rate, const Dist& p0, const Dist& p1, int d);
ExponentResult e_cond(double rate, const JointDist& p0, const JointDist& p1, int d);

/// Entropy-continuity modulus: theta(0) = 0, -x log_d(x/d) on (0, 1/2], 1 above.
double theta(double x, int d);
/// g(alpha) = sqrt(alpha(1-alpha)) / (sqrt(alpha) + sqrt(1-alpha)).
double g_alpha(double alpha);
/// E1(gamma, alpha) = min_(0<=eps<=2) (1-alpha)^(-1)(g(alpha) eps)^2/K_d
///                    + |gamma - theta(eps)|^+.
double sampling_e1(double gamma, double alpha, int d);
/// E2(gamma, r0, r1) with the worst coefficient over alpha in [r0, r1].
double sampling_e2(double gamma, double r0, double r1, int d);

/// Achievable-rate report for an attack distribution P_A.
struct RateReport {
    int d = 2;
    double r = 0.0;          // expected matched-basis X fraction
    double rate_qkd = 0.0;   // sifting-adjusted mixture rate
    double rate_mixture = 0.0;  // [1 - 2H(common marginal)]/4 at all-half parameters (d=2; NaN otherwise)
    double rate_cond = 0.0;      // split-decoder rate, sifting adjusted
    double rate_cond_raw = 0.0;  // split-decoder rate with only the (1-p_c) prefactor
    double rate_modified = 0.0;  // (1-p_a-p_b)[1 - 2 max{H(Pbar), H(Pdbar)}]
    Dist mix_bar;   // (1-r) Pbar + r f(Pdbar)
    Dist mix_dbar;  // (1-r) Pdbar + r Pbar
};

RateReport achievable_rates(double pa, double pb, double pc, const JointDist& pa_dist);

/// Robust rate selection over the eps-ball of estimate triples.
struct SelectRateParams {
    double rate_step = 1.0 / 256;  // rate grid
    int alpha_steps = 64;          // steps across the ball in alpha
    int ball_divisions = 16;       // offset-lattice step is eps / ball_divisions
    int quant = 4096;              // cache quantization of marginals
    SimplexMinParams fail_grid{64, 10};  // failure-exponent search
};

struct RateSelection {
    double rate = 0.0;  // largest grid-certified rate; 0 means abort
    bool abort = false;
    double failure_exponent = 0.0;  // nu * min_(||Q-pi||_1 >= eps) D(Q||pi)
    double rate_step = 0.0;
    double ball_step = 0.0;  // grid step used to cover the ball
};

/// Caches the per-marginal largest feasible rate so repeated sessions stay
/// cheap. Deterministic for fixed parameters.
class RateSolver {
public:
    RateSolver(int d, double e_target, SelectRateParams params = {});

    RateSelection select(double eps, const TypeDist& p_u, const TypeDist& p_w, long long lambda,
                         long long lambda_prime);

    /// Largest grid rate R with estar(R, marginal) >= E_target; negative if none.
    double rmax_for(const Dist& marginal);

private:
    int d_;
    double e_target_;
    SelectRateParams params_;
    std::map<std::vector<int>, double> cache_;
};

/// Rate rule of the permuted-code protocol:
/// R = 1 - 2 max{H(est_x), H(est_z)} - 2 gamma; abort when R <= 0.
struct ChosenRate {
    double rate = 0.0;
    bool abort = false;
};
ChosenRate chosen_rate_modified(double gamma, const TypeDist& est_x, const TypeDist& est_z, int d);

/// Smallest key size k in `available` (sorted ascending) with k/n >= rate;
/// -1 if none.
int min_feasible_key_size(double rate, int n, const std::vector<int>& available);

}  // namespace cssqkd

#endif
