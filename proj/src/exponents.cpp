#include "cssqkd/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cssqkd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void for_each_composition(int total, int parts, std::vector<int>& cur, int pos,
                          const std::function<void(const std::vector<int>&)>& fn) {
    if (pos == parts - 1) {
        cur[pos] = total;
        fn(cur);
        return;
    }
    for (int c = 0; c <= total; ++c) {
        cur[pos] = c;
        for_each_composition(total - c, parts, cur, pos + 1, fn);
    }
}

// one mass-move descent sweep at a fixed step; returns true if improved
bool descend_once(std::vector<double>& x, double& best, double step,
                  const std::function<double(const std::vector<double>&)>& f) {
    const int s = static_cast<int>(x.size());
    bool improved = false;
    for (;;) {
        int bi = -1, bj = -1;
        double bv = best;
        for (int i = 0; i < s; ++i) {
            if (x[i] < step - 1e-15) continue;
            for (int j = 0; j < s; ++j) {
                if (j == i) continue;
                std::vector<double> y = x;
                y[i] -= step;
                y[j] += step;
                const double v = f(y);
                if (v < bv - 1e-15) {
                    bv = v;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi < 0) return improved;
        x[bi] -= step;
        x[bj] += step;
        best = bv;
        improved = true;
    }
}

}  // namespace

SimplexMinParams default_simplex_params(int d) {
    SimplexMinParams p;
    p.grid = d == 2 ? 512 : 64;
    return p;
}

ExponentResult minimize_simplex(int s, const SimplexMinParams& params,
                                const std::function<double(const std::vector<double>&)>& f) {
    std::vector<int> cur(s, 0);
    std::vector<double> best_x;
    double best = kInf;
    std::vector<double> x(s);
    for_each_composition(params.grid, s, cur, 0, [&](const std::vector<int>& c) {
        for (int i = 0; i < s; ++i) x[i] = static_cast<double>(c[i]) / params.grid;
        const double v = f(x);
        if (v < best) {
            best = v;
            best_x = x;
        }
    });
    if (best_x.empty()) return {kInf, {}, 1.0 / params.grid};
    double step = 1.0 / params.grid;
    for (int pass = 0; pass < params.passes; ++pass) {
        step *= 0.5;
        descend_once(best_x, best, step, f);
    }
    return {best, {Dist(best_x)}, step};
}

ExponentResult minimize_two_simplices(
    int s0, int s1, const SimplexMinParams& params,
    const std::function<double(const std::vector<double>&, const std::vector<double>&)>& f) {
    // joint grid sweep
    std::vector<int> c0(s0, 0), c1(s1, 0);
    std::vector<double> x0(s0), x1(s1), b0, b1;
    double best = kInf;
    for_each_composition(params.grid, s0, c0, 0, [&](const std::vector<int>& a0) {
        for (int i = 0; i < s0; ++i) x0[i] = static_cast<double>(a0[i]) / params.grid;
        for_each_composition(params.grid, s1, c1, 0, [&](const std::vector<int>& a1) {
            for (int i = 0; i < s1; ++i) x1[i] = static_cast<double>(a1[i]) / params.grid;
            const double v = f(x0, x1);
            if (v < best) {
                best = v;
                b0 = x0;
                b1 = x1;
            }
        });
    });
    if (b0.empty()) return {kInf, {}, 1.0 / params.grid};
    // descent over combined moves: mass moves in either block or in both at
    // once (the hinge couples the blocks, so block-only descent can stall)
    const auto moves = [](int s) {
        std::vector<std::pair<int, int>> out = {{-1, -1}};  // no move
        for (int i = 0; i < s; ++i)
            for (int j = 0; j < s; ++j)
                if (i != j) out.push_back({i, j});
        return out;
    };
    const auto mv0 = moves(s0), mv1 = moves(s1);
    double step = 1.0 / params.grid;
    for (int pass = 0; pass < params.passes; ++pass) {
        step *= 0.5;
        for (;;) {
            double bv = best;
            int best_m0 = -1, best_m1 = -1;
            for (size_t m0 = 0; m0 < mv0.size(); ++m0) {
                if (mv0[m0].first >= 0 && b0[mv0[m0].first] < step - 1e-15) continue;
                for (size_t m1 = 0; m1 < mv1.size(); ++m1) {
                    if (m0 == 0 && m1 == 0) continue;
                    if (mv1[m1].first >= 0 && b1[mv1[m1].first] < step - 1e-15) continue;
                    std::vector<double> y0 = b0, y1 = b1;
                    if (mv0[m0].first >= 0) {
                        y0[mv0[m0].first] -= step;
                        y0[mv0[m0].second] += step;
                    }
                    if (mv1[m1].first >= 0) {
                        y1[mv1[m1].first] -= step;
                        y1[mv1[m1].second] += step;
                    }
                    const double v = f(y0, y1);
                    if (v < bv - 1e-15) {
                        bv = v;
                        best_m0 = static_cast<int>(m0);
                        best_m1 = static_cast<int>(m1);
                    }
                }
            }
            if (best_m0 < 0) break;
            if (mv0[best_m0].first >= 0) {
                b0[mv0[best_m0].first] -= step;
                b0[mv0[best_m0].second] += step;
            }
            if (mv1[best_m1].first >= 0) {
                b1[mv1[best_m1].first] -= step;
                b1[mv1[best_m1].second] += step;
            }
            best = bv;
        }
    }
    return {best, {Dist(b0), Dist(b1)}, step};
}

ExponentResult estar(double rate, const Dist& p, int d) {
    return estar(rate, p, d, default_simplex_params(d));
}

ExponentResult estar(double rate, const Dist& p, int d, const SimplexMinParams& params) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw usage_error("rate outside [0,1]");
    if (p.size() != d) throw usage_error("distribution size does not match d");
    if (rate >= 1.0 - 2.0 * entropy(p, d)) return {0.0, {p}, 0.0};
    const auto f = [&](const std::vector<double>& q) {
        double div = 0.0, h = 0.0;
        for (int i = 0; i < d; ++i) {
            if (q[i] == 0.0) continue;
            if (p[i] == 0.0) return kInf;
            div += q[i] * std::log(q[i] / p[i]);
            h -= q[i] * std::log(q[i]);
        }
        const double logd = std::log(static_cast<double>(d));
        const double hinge = std::max(1.0 - 2.0 * h / logd - rate, 0.0);
        return div / logd + 0.5 * hinge;
    };
    ExponentResult res = minimize_simplex(d, params, f);
    res.value = std::max(res.value, 0.0);
    return res;
}

ExponentResult e_joint(double rate, const Dist& pbar, const Dist& pdbar, int d) {
    ExponentResult a = estar(rate, pbar, d);
    ExponentResult b = estar(rate, pdbar, d);
    return a.value <= b.value ? a : b;
}

double o_n(int n, int d) {
    const double logd = std::log(static_cast<double>(d));
    return 3.0 * (d - 1) * std::log(n + 1.0) / logd + std::log(2.0) / logd + d;
}

double fidelity_bound(int n, double exponent, int d) {
    return std::pow(static_cast<double>(d), -static_cast<double>(n) * exponent + o_n(n, d));
}

LeakageBound leakage_bound(int n, double exponent, double rate, int d) {
    if (n < 1) throw usage_error("n must be >= 1");
    LeakageBound out;
    out.vanishing = exponent > 0.0;
    const double cap = n * rate;  // k digits, one log_d unit each
    const double on = o_n(n, d);
    const double raw = 2.0 * std::pow(static_cast<double>(d), -n * exponent + on) *
                       (n * (exponent + rate) - on);
    if (!out.vanishing || raw < 0.0 || !std::isfinite(raw)) {
        // degenerate: the formula carries no information beyond the key size
        out.clamped = true;
        out.value = cap;
    } else {
        out.value = raw;
    }
    return out;
}

namespace {

// h2(s) = y solved on [0, 1/2] by bisection
double h2_inverse_low(double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 0.5;
    double lo = 0.0, hi = 0.5;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (binary_entropy(mid) < y ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

ExponentResult e_gv(double rate, const JointDist& pm) {
    if (pm.s != 2) throw usage_error("the GV exponent is stated for d = 2 only");
    if (!(rate >= 0.0 && rate <= 1.0)) throw usage_error("rate outside [0,1]");
    const auto ssum = [](const std::vector<double>& q) {
        // Qbar(1) + Qdbar(1) with layout (q00, q01, q10, q11)
        return q[1] + q[2] + 2.0 * q[3];
    };
    const double s_lo = h2_inverse_low((1.0 - rate) / 2.0);
    const double s_hi = 1.0 - s_lo;
    const std::vector<double> pmv = pm.p;
    const double s_pm = ssum(pmv);
    if ((s_pm >= s_lo - 1e-15 && s_pm <= s_hi + 1e-15) || s_pm >= 1.0 - 1e-15)
        return {0.0, {Dist(pmv)}, 0.0};

    const auto div = [&](const std::vector<double>& q) {
        double v = 0.0;
        for (int i = 0; i < 4; ++i) {
            if (q[i] == 0.0) continue;
            if (pmv[i] == 0.0) return kInf;
            v += q[i] * std::log(q[i] / pmv[i]);
        }
        return v / std::log(2.0);
    };
    SimplexMinParams params;
    params.grid = 64;
    const auto in_band = [&](const std::vector<double>& q, double lo, double hi) {
        const double s = ssum(q);
        return s >= lo - 1e-12 && s <= hi + 1e-12;
    };
    ExponentResult r1 = minimize_simplex(4, params, [&](const std::vector<double>& q) {
        return in_band(q, s_lo, s_hi) ? div(q) : kInf;
    });
    ExponentResult r2 = minimize_simplex(4, params, [&](const std::vector<double>& q) {
        return in_band(q, 1.0, 2.0) ? div(q) : kInf;
    });
    ExponentResult best = r1.value <= r2.value ? r1 : r2;
    best.value = std::max(best.value, 0.0);
    return best;
}

ExponentResult e_cond_pair(double rate, const Dist& p0, const Dist& p1, int d) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw usage_error("rate outside [0,1]");
    if (rate >= 1.0 - entropy(p0, d) - entropy(p1, d)) return {0.0, {p0, p1}, 0.0};
    const double logd = std::log(static_cast<double>(d));
    const auto term = [&](const std::vector<double>& q, const Dist& p, double& div, double& h) {
        for (int i = 0; i < static_cast<int>(q.size()); ++i) {
            if (q[i] == 0.0) continue;
            if (p[i] == 0.0) {
                div = kInf;
                return;
            }
            div += q[i] * std::log(q[i] / p[i]);
            h -= q[i] * std::log(q[i]);
        }
    };
    SimplexMinParams params = default_simplex_params(d);
    if (d > 2) params.grid = 48;
    ExponentResult res = minimize_two_simplices(
        d, d, params, [&](const std::vector<double>& q0, const std::vector<double>& q1) {
            double d0 = 0.0, h0 = 0.0, d1 = 0.0, h1 = 0.0;
            term(q0, p0, d0, h0);
            term(q1, p1, d1, h1);
            if (d0 == kInf || d1 == kInf) return kInf;
            const double hinge = std::max(1.0 - (h0 + h1) / logd - rate, 0.0);
            return 0.5 * (d0 / logd + d1 / logd + hinge);
        });
    res.value = std::max(res.value, 0.0);
    return res;
}

ExponentResult e_cond(double rate, const JointDist& p0, const JointDist& p1, int d) {
    ExponentResult a = e_cond_pair(rate, p0.bar(), p1.bar(), d);
    ExponentResult b = e_cond_pair(rate, p0.dbar(), p1.dbar(), d);
    return a.value <= b.value ? a : b;
}

double theta(double x, int d) {
    if (x < 0.0) throw usage_error("theta argument must be nonnegative");
    if (x == 0.0) return 0.0;
    if (x > 0.5) return 1.0;
    return -x * std::log(x / d) / std::log(static_cast<double>(d));
}

double g_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw usage_error("alpha outside (0,1)");
    return std::sqrt(alpha * (1.0 - alpha)) / (std::sqrt(alpha) + std::sqrt(1.0 - alpha));
}

namespace {

double minimize_eps(const std::function<double(double)>& f) {
    // dense sweep over [0,2] plus two local refinements
    double best = kInf, arg = 0.0;
    const int steps = 20000;
    for (int i = 0; i <= steps; ++i) {
        const double e = 2.0 * i / steps;
        const double v = f(e);
        if (v < best) {
            best = v;
            arg = e;
        }
    }
    double h = 2.0 / steps;
    for (int pass = 0; pass < 2; ++pass) {
        const double lo = std::max(0.0, arg - h), hi = std::min(2.0, arg + h);
        for (int i = 0; i <= 200; ++i) {
            const double e = lo + (hi - lo) * i / 200;
            const double v = f(e);
            if (v < best) {
                best = v;
                arg = e;
            }
        }
        h /= 100.0;
    }
    return best;
}

}  // namespace

double sampling_e1(double gamma, double alpha, int d) {
    if (gamma < 0.0) throw usage_error("gamma must be >= 0");
    const double kd = pinsker_constant(d);
    const double g = g_alpha(alpha);
    const double coeff = (g * g) / ((1.0 - alpha) * kd);
    return minimize_eps([&](double e) { return coeff * e * e + std::max(gamma - theta(e, d), 0.0); });
}

double sampling_e2(double gamma, double r0, double r1, int d) {
    if (gamma < 0.0) throw usage_error("gamma must be >= 0");
    if (!(0.0 < r0 && r0 < r1 && r1 < 1.0)) throw usage_error("need 0 < r0 < r1 < 1");
    double gmin = kInf;
    const int steps = 4096;
    for (int i = 0; i <= steps; ++i) {
        const double a = r0 + (r1 - r0) * i / steps;
        const double g = g_alpha(a);
        gmin = std::min(gmin, g * g / (1.0 - a));
    }
    const double coeff = gmin / pinsker_constant(d);
    return minimize_eps([&](double e) { return coeff * e * e + std::max(gamma - theta(e, d), 0.0); });
}

RateReport achievable_rates(double pa, double pb, double pc, const JointDist& pa_dist) {
    for (double x : {pa, pb, pc}) {
        if (!(x > 0.0 && x < 1.0)) throw usage_error("protocol parameters must lie in (0,1)");
    }
    const int d = pa_dist.s;
    RateReport rep;
    rep.d = d;
    rep.r = pa * pb / (pa * pb + (1.0 - pa) * (1.0 - pb));
    const Dist bar = pa_dist.bar();
    const Dist dbar = pa_dist.dbar();
    const Dist fdbar = flip(dbar);
    std::vector<double> m1(d), m2(d);
    for (int i = 0; i < d; ++i) {
        m1[i] = (1.0 - rep.r) * bar[i] + rep.r * fdbar[i];
        m2[i] = (1.0 - rep.r) * dbar[i] + rep.r * bar[i];
    }
    rep.mix_bar = Dist(m1);
    rep.mix_dbar = Dist(m2);
    const double sift = 1.0 - pa - pb + 2.0 * pa * pb;
    rep.rate_qkd = (1.0 - pc) * sift *
                   (1.0 - 2.0 * std::max(entropy(rep.mix_bar, d), entropy(rep.mix_dbar, d)));
    if (d == 2) {
        // all-half parameters: the two mixture marginals coincide
        std::vector<double> mm(d);
        for (int i = 0; i < d; ++i) mm[i] = 0.5 * bar[i] + 0.5 * fdbar[i];
        rep.rate_mixture = (1.0 - 2.0 * entropy(Dist(mm), 2)) / 4.0;
    } else {
        rep.rate_mixture = std::numeric_limits<double>::quiet_NaN();
    }
    const double cond_core = (1.0 - entropy(bar, d) - entropy(dbar, d)) / 2.0;
    rep.rate_cond_raw = (1.0 - pc) * cond_core;
    rep.rate_cond = (1.0 - pc) * sift * cond_core;
    rep.rate_modified =
        (1.0 - pa - pb) * (1.0 - 2.0 * std::max(entropy(bar, d), entropy(dbar, d)));
    return rep;
}

RateSolver::RateSolver(int d, double e_target, SelectRateParams params)
    : d_(d), e_target_(e_target), params_(params) {
    if (e_target <= 0.0) throw usage_error("target exponent must be positive");
}

double RateSolver::rmax_for(const Dist& marginal) {
    std::vector<int> key(marginal.size());
    for (int i = 0; i < marginal.size(); ++i)
        key[i] = static_cast<int>(std::lround(marginal[i] * params_.quant));
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;

    // re-normalize the quantized point so cached results are well defined
    double sum = 0.0;
    for (int v : key) sum += v;
    std::vector<double> qv(key.size());
    for (size_t i = 0; i < key.size(); ++i) qv[i] = key[i] / sum;
    const Dist q(qv);

    const int top = static_cast<int>(std::floor(1.0 / params_.rate_step));
    double result = -1.0;
    if (estar(0.0, q, d_).value >= e_target_) {
        int lo = 0, hi = top;  // estar is non-increasing in R
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            const double r = std::min(1.0, mid * params_.rate_step);
            if (estar(r, q, d_).value >= e_target_)
                lo = mid;
            else
                hi = mid - 1;
        }
        result = lo * params_.rate_step;
    }
    cache_.emplace(std::move(key), result);
    return result;
}

RateSelection RateSolver::select(double eps, const TypeDist& p_u, const TypeDist& p_w,
                                 long long lambda, long long lambda_prime) {
    if (eps < 0.0) throw usage_error("eps must be >= 0");
    if (lambda <= 0 || lambda_prime <= 0) throw usage_error("need samples of both kinds");
    const long long nu = lambda + lambda_prime;
    const double alpha_hat = static_cast<double>(lambda_prime) / static_cast<double>(nu);
    const Dist p_hat = p_u.as_dist();
    const Dist q_hat = p_w.as_dist();

    RateSelection sel;
    sel.rate_step = params_.rate_step;

    // grid covering the eps-ball of triples (alpha, p, q)
    std::vector<double> alphas = {alpha_hat};
    for (int i = 1; i <= params_.alpha_steps / 2; ++i) {
        const double step = eps / params_.alpha_steps;  // |alpha - alpha_hat| <= eps/2
        for (int sgn : {-1, 1}) {
            const double a = alpha_hat + sgn * i * step;
            if (a >= 0.0 && a <= 1.0) alphas.push_back(a);
        }
    }
    // candidate grid centered on each estimate: zero-sum offset lattices with
    // step eps/ball_divisions, out to the superset radius 1.5 eps / weight
    // (the half's l1 share is at most eps + |a - alpha_hat| <= 1.5 eps over a
    // weight of at least 1 - alpha_hat - eps/2 resp. alpha_hat - eps/2)
    const double rel_step = eps / params_.ball_divisions;
    sel.ball_step = eps == 0.0 ? 0.0 : rel_step;
    const auto candidates = [&](const Dist& center, double weight) {
        std::vector<Dist> out = {center};
        if (eps == 0.0) return out;
        const double rad = weight > 1e-9 ? std::min(2.0, 1.5 * eps / weight) : 2.0;
        const int reach = static_cast<int>(std::ceil(rad / rel_step));
        std::vector<int> offs(d_, 0);
        std::vector<double> x(d_);
        const auto sweep = [&](auto&& self, int pos, int sum) -> void {
            if (pos == d_ - 1) {
                offs[pos] = -sum;
                double l1 = 0.0;
                bool valid = true;
                for (int i = 0; i < d_; ++i) {
                    x[i] = center[i] + offs[i] * rel_step;
                    if (x[i] < 0.0 || x[i] > 1.0) valid = false;
                    l1 += std::abs(x[i] - center[i]);
                }
                if (valid && l1 > 0.0 && l1 <= rad) out.push_back(Dist(x));
                return;
            }
            for (int o = -reach; o <= reach; ++o) {
                offs[pos] = o;
                self(self, pos + 1, sum + o);
            }
        };
        sweep(sweep, 0, 0);
        return out;
    };
    const std::vector<Dist> ps = candidates(p_hat, 1.0 - alpha_hat - eps / 2);
    const std::vector<Dist> qs = candidates(q_hat, alpha_hat - eps / 2);

    double worst = 2.0;  // rates never exceed 1
    for (double a : alphas) {
        for (const Dist& p : ps) {
            for (const Dist& q : qs) {
                // exact ball membership of the associated joint on {0,1} x F_d
                double l1 = 0.0;
                for (int i = 0; i < d_; ++i) {
                    l1 += std::abs((1.0 - a) * p[i] - (1.0 - alpha_hat) * p_hat[i]);
                    l1 += std::abs(a * q[i] - alpha_hat * q_hat[i]);
                }
                if (l1 > eps + 1e-12) continue;
                const Dist fq = flip(q);
                std::vector<double> m1(d_), m2(d_);
                for (int i = 0; i < d_; ++i) {
                    m1[i] = (1.0 - a) * p[i] + a * fq[i];
                    m2[i] = (1.0 - a) * q[i] + a * p[i];
                }
                worst = std::min(worst, rmax_for(Dist(m1)));
                worst = std::min(worst, rmax_for(Dist(m2)));
                if (worst < 0.0) break;
            }
            if (worst < 0.0) break;
        }
        if (worst < 0.0) break;
    }
    if (worst <= 0.0) {
        sel.rate = 0.0;
        sel.abort = true;
    } else {
        sel.rate = worst;
    }

    // estimation-failure exponent: nu * min D(Q || pi_hat) outside the ball
    if (eps == 0.0) {
        sel.failure_exponent = 0.0;
    } else {
        std::vector<double> pi_hat(2 * d_);
        for (int i = 0; i < d_; ++i) {
            pi_hat[i] = (1.0 - alpha_hat) * p_hat[i];
            pi_hat[d_ + i] = alpha_hat * q_hat[i];
        }
        const double logd = std::log(static_cast<double>(d_));
        ExponentResult fr = minimize_simplex(2 * d_, params_.fail_grid, [&](const std::vector<double>& q) {
            double l1 = 0.0;
            for (size_t i = 0; i < q.size(); ++i) l1 += std::abs(q[i] - pi_hat[i]);
            if (l1 < eps) return kInf;
            double div = 0.0;
            for (size_t i = 0; i < q.size(); ++i) {
                if (q[i] == 0.0) continue;
                if (pi_hat[i] == 0.0) return kInf;
                div += q[i] * std::log(q[i] / pi_hat[i]);
            }
            return div / logd;
        });
        sel.failure_exponent = static_cast<double>(nu) * fr.value;
    }
    return sel;
}

ChosenRate chosen_rate_modified(double gamma, const TypeDist& est_x, const TypeDist& est_z, int d) {
    if (gamma <= 0.0) throw usage_error("gamma must be positive");
    ChosenRate out;
    out.rate = 1.0 - 2.0 * std::max(entropy(est_x.as_dist(), d), entropy(est_z.as_dist(), d)) -
               2.0 * gamma;
    out.abort = out.rate <= 0.0;
    return out;
}

int min_feasible_key_size(double rate, int n, const std::vector<int>& available) {
    for (int k : available) {
        if (static_cast<double>(k) / n >= rate) return k;
    }
    return -1;
}

}  // namespace cssqkd
