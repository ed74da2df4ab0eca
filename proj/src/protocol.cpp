#include "cssqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace cssqkd {

void ProtocolConfig::validate() const {
    if (!is_prime(d)) throw usage_error("modulus must be prime");
    if (m < 1) throw usage_error("m must be >= 1");
    if (bank == nullptr) throw usage_error("a code bank is required");
    const double hi = mode == Mode::Modified ? 0.5 : 1.0;
    for (double x : {pa, pb}) {
        if (!(x > 0.0 && x < hi)) throw usage_error("pa, pb must lie in (0," + std::string(mode == Mode::Modified ? "1/2)" : "1)"));
    }
    if (mode == Mode::BB84 && !(pc > 0.0 && pc < 1.0)) throw usage_error("pc must lie in (0,1)");
    if (mode == Mode::BB84 && eps < 0.0) throw usage_error("eps must be >= 0");
    if (mode == Mode::Modified && gamma <= 0.0) throw usage_error("gamma must be positive");
}

AttackModel parse_attack(const std::string& spec, int d) {
    AttackModel out;
    out.spec = spec;
    const auto param = [&](const std::string& s) {
        const auto pos = s.find(':');
        if (pos == std::string::npos) throw usage_error("attack spec needs a parameter: " + s);
        return s.substr(pos + 1);
    };
    if (spec == "identity") {
        out.dist = JointDist::point_mass(d, 0, 0);
    } else if (spec.rfind("dephasing:", 0) == 0) {
        const double q = std::stod(param(spec));
        if (!(q >= 0.0 && q <= 1.0)) throw usage_error("channel parameter outside [0,1]");
        JointDist j = JointDist::point_mass(d, 0, 0);
        j.at(0, 0) = 1.0 - q;
        j.at(0, 1 % d) = q;
        if (d == 1) throw usage_error("bad modulus");
        out.dist = JointDist(d, j.p);
    } else if (spec.rfind("flip:", 0) == 0) {
        const double q = std::stod(param(spec));
        if (!(q >= 0.0 && q <= 1.0)) throw usage_error("channel parameter outside [0,1]");
        JointDist j = JointDist::point_mass(d, 0, 0);
        j.at(0, 0) = 1.0 - q;
        j.at(1 % d, 0) = q;
        out.dist = JointDist(d, j.p);
    } else if (spec.rfind("depolarizing:", 0) == 0) {
        const double q = std::stod(param(spec));
        if (!(q >= 0.0 && q <= 1.0)) throw usage_error("channel parameter outside [0,1]");
        std::vector<double> p(static_cast<size_t>(d) * d, q / (d * d - 1));
        p[0] = 1.0 - q;
        out.dist = JointDist(d, p);
    } else if (spec.rfind("dist:", 0) == 0) {
        out.dist = load_dist_file(param(spec));
        if (out.dist.s != d) throw usage_error("dist file modulus does not match --d");
    } else if (spec.rfind("kraus:", 0) == 0) {
        const KrausChannel ch = load_kraus_file(param(spec));
        if (ch.d != d) throw usage_error("kraus file modulus does not match --d");
        out.dist = channel_to_dist(ch);
    } else {
        throw usage_error("unknown attack spec: " + spec);
    }
    return out;
}

JointDist load_dist_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw usage_error("cannot open dist file: " + path);
    int d = 0;
    if (!(is >> d) || !is_prime(d)) throw usage_error("malformed dist file header");
    std::vector<double> p(static_cast<size_t>(d) * d);
    for (double& x : p) {
        if (!(is >> x)) throw usage_error("truncated dist file");
    }
    return JointDist(d, std::move(p));
}

std::string to_string(SessionOutcome o) {
    switch (o) {
        case SessionOutcome::Ok: return "ok";
        case SessionOutcome::AbortRate: return "abort-rate";
        case SessionOutcome::AbortEstimate: return "abort-estimate";
        case SessionOutcome::AbortPartition: return "abort-partition";
    }
    return "?";
}

namespace {

struct DigitRecord {
    uint8_t basis = 0;  // shared basis for sifted digits
    uint8_t sent = 0;
    uint8_t recv = 0;
    uint8_t xi = 0;
    uint8_t zeta = 0;
};

struct Transmission {
    std::vector<DigitRecord> sifted;
    long long discarded = 0;
};

std::vector<double> dist_cdf(const JointDist& j) {
    std::vector<double> cdf(j.p.size());
    double acc = 0.0;
    for (size_t i = 0; i < j.p.size(); ++i) {
        acc += j.p[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;
    return cdf;
}

// Steps (i)-(vi) common core: transmit m digits, keep the sifted ones.
Transmission transmit(const ProtocolConfig& cfg, const AttackModel& attack, Rng& rng) {
    Rng sa = rng.stream("alice-basis");
    Rng sb = rng.stream("bob-basis");
    Rng sd = rng.stream("alice-digit");
    Rng se = rng.stream("channel-noise");
    Rng sm = rng.stream("mismatch-outcome");
    const std::vector<double> cdf = dist_cdf(attack.dist);
    const int d = cfg.d;

    Transmission tr;
    for (long long i = 0; i < cfg.m; ++i) {
        const bool a = sa.bernoulli(cfg.pa);
        const bool b = sb.bernoulli(cfg.pb);
        const uint8_t sent = static_cast<uint8_t>(sd.below(d));
        const size_t pair = se.from_cdf(cdf);
        const uint8_t xi = static_cast<uint8_t>(pair / d);
        const uint8_t zeta = static_cast<uint8_t>(pair % d);
        if (a != b) {
            (void)sm.below(d);  // Bob's wrong-basis outcome, never used
            ++tr.discarded;
            continue;
        }
        DigitRecord rec;
        rec.basis = a ? 1 : 0;
        rec.sent = sent;
        rec.xi = xi;
        rec.zeta = zeta;
        // Z basis: received = sent - xi; X basis: received = sent + zeta
        rec.recv = a ? static_cast<uint8_t>((sent + zeta) % d)
                     : static_cast<uint8_t>((sent - xi + d) % d);
        tr.sifted.push_back(rec);
    }
    return tr;
}

TypeDist type_from_values(const std::vector<uint8_t>& values, int d) {
    std::vector<long long> counts(d, 0);
    for (uint8_t v : values) ++counts[v];
    return TypeDist(static_cast<long long>(values.size()), std::move(counts));
}

// decode path shared by both protocols: Alice string y, Bob string yb,
// effective error e (received = sent - e digitwise)
void finish_key_exchange(const CssCode& css, const Word& y, const Word& yb, const Word& e,
                         SessionReport& rep) {
    const int d = css.d();
    rep.announced_syndrome = css.syndrome_of(y);
    const Word x = css.coset_representative(rep.announced_syndrome);
    const Word w = sub(yb, x);
    std::vector<uint8_t> synd_e = css.syndrome_of(w);
    for (uint8_t& s : synd_e) s = static_cast<uint8_t>((d - s) % d);
    const Word e_hat = css.coset_representative(synd_e);
    const Word u = add(w, e_hat);
    rep.key_alice = css.key_decode(sub(y, x));
    rep.key_bob = css.key_decode(u);
    rep.agree = rep.key_alice == rep.key_bob;
    rep.residual_correctable = css.correctable_word(e);
}

}  // namespace

SessionReport run_bb84(const ProtocolConfig& cfg, const AttackModel& attack, RateSolver* solver) {
    cfg.validate();
    if (cfg.mode != Mode::BB84) throw usage_error("config mode is not bb84");
    const int d = cfg.d;
    Rng rng(cfg.seed);
    SessionReport rep;
    rep.m = cfg.m;

    Transmission tr = transmit(cfg, attack, rng);
    rep.discarded = tr.discarded;
    rep.sift_size = static_cast<long long>(tr.sifted.size());

    // step (vi): split the sifted digits by the code flag c
    Rng sc = rng.stream("code-flag");
    std::vector<size_t> code_pool;
    std::vector<uint8_t> est_u, est_w;  // observed differences by kind
    const auto to_estimation = [&](const DigitRecord& rec) {
        if (rec.basis == 0)
            est_u.push_back(static_cast<uint8_t>((rec.sent - rec.recv + d) % d));
        else
            est_w.push_back(static_cast<uint8_t>((rec.recv - rec.sent + d) % d));
    };
    for (size_t idx = 0; idx < tr.sifted.size(); ++idx) {
        if (sc.bernoulli(cfg.pc))
            to_estimation(tr.sifted[idx]);
        else
            code_pool.push_back(idx);
    }
    // d = 2 parity rule: divert one digit to estimation
    if (d == 2 && code_pool.size() % 2 == 1) {
        to_estimation(tr.sifted[code_pool.back()]);
        code_pool.pop_back();
        ++rep.moved;
    }
    // round the code pool down to the largest bank length, surplus estimates
    const std::vector<int> lengths = cfg.bank->lengths(d);
    int n = 0;
    for (int len : lengths) {
        if (static_cast<size_t>(len) <= code_pool.size()) n = std::max(n, len);
    }
    if (n == 0) throw codebank_miss("no bank code of length <= " + std::to_string(code_pool.size()));
    while (code_pool.size() > static_cast<size_t>(n)) {
        to_estimation(tr.sifted[code_pool.back()]);
        code_pool.pop_back();
        ++rep.moved;
    }
    rep.n = n;
    rep.lambda = static_cast<long long>(est_u.size());
    rep.lambda_prime = static_cast<long long>(est_w.size());
    if (rep.lambda == 0 || rep.lambda_prime == 0) {
        rep.outcome = SessionOutcome::AbortEstimate;
        return rep;
    }
    rep.p_u = type_from_values(est_u, d);
    rep.p_w = type_from_values(est_w, d);
    rep.alpha_hat =
        static_cast<double>(rep.lambda_prime) / static_cast<double>(rep.lambda + rep.lambda_prime);

    // step (vii): robust rate selection over the eps-ball
    RateSolver local(d, cfg.e_target);
    RateSolver& rs = solver ? *solver : local;
    const RateSelection sel = rs.select(cfg.eps, rep.p_u, rep.p_w, rep.lambda, rep.lambda_prime);
    rep.selected_rate = sel.rate;
    rep.failure_exponent = sel.failure_exponent;
    rep.rate_step = sel.rate_step;
    rep.ball_step = sel.ball_step;
    if (sel.abort) {
        rep.outcome = SessionOutcome::AbortRate;
        return rep;
    }
    // largest available key size whose rate stays within the certified R
    const std::vector<int> ks = cfg.bank->key_sizes(d, n);
    int k = -1;
    for (int cand : ks) {
        if (cand <= static_cast<double>(n) * sel.rate + 1e-9) k = std::max(k, cand);
    }
    if (k < 0) throw codebank_miss("no key size <= " + std::to_string(n * sel.rate) + " at n = " + std::to_string(n));
    rep.k = k;
    const auto css = cfg.bank->find(d, n, k);

    // bounds at the code rate actually used, from the estimated mixture
    const Dist pu = rep.p_u.as_dist();
    const Dist pw = rep.p_w.as_dist();
    const Dist fpw = flip(pw);
    std::vector<double> m1(d), m2(d);
    for (int i = 0; i < d; ++i) {
        m1[i] = (1.0 - rep.alpha_hat) * pu[i] + rep.alpha_hat * fpw[i];
        m2[i] = (1.0 - rep.alpha_hat) * pw[i] + rep.alpha_hat * pu[i];
    }
    const double rate_used = static_cast<double>(k) / n;
    rep.exponent = e_joint(rate_used, Dist(m1), Dist(m2), d).value;
    rep.bound_fidelity = fidelity_bound(n, rep.exponent, d);
    const LeakageBound lb = leakage_bound(n, rep.exponent, rate_used, d);
    rep.bound_leakage = lb.value;
    rep.leakage_clamped = lb.clamped;

    // steps (viii)-(x): key transmission over the n code digits
    Word y = Word::zero(d, n), yb = Word::zero(d, n), e = Word::zero(d, n);
    for (int i = 0; i < n; ++i) {
        const DigitRecord& rec = tr.sifted[code_pool[i]];
        y.digits[i] = rec.sent;
        yb.digits[i] = rec.recv;
        e.digits[i] = rec.basis == 0 ? rec.xi : static_cast<uint8_t>((d - rec.zeta) % d);
    }
    finish_key_exchange(*css, y, yb, e, rep);
    return rep;
}

SessionReport run_modified_bb84(const ProtocolConfig& cfg, const AttackModel& attack) {
    cfg.validate();
    if (cfg.mode != Mode::Modified) throw usage_error("config mode is not modified");
    const int d = cfg.d;
    Rng rng(cfg.seed);
    SessionReport rep;
    rep.m = cfg.m;

    Transmission tr = transmit(cfg, attack, rng);
    rep.discarded = tr.discarded;

    // step (vi): even sift size for d = 2, then the partition
    std::vector<size_t> sifted(tr.sifted.size());
    for (size_t i = 0; i < sifted.size(); ++i) sifted[i] = i;
    Rng sdrop = rng.stream("sift-discard");
    if (d == 2 && sifted.size() % 2 == 1) {
        const size_t at = static_cast<size_t>(sdrop.below(sifted.size()));
        sifted.erase(sifted.begin() + at);
        ++rep.discarded;
    }
    const long long ms = static_cast<long long>(sifted.size());
    rep.sift_size = ms;
    std::vector<size_t> t0, t1;
    for (size_t idx : sifted) {
        (tr.sifted[idx].basis == 0 ? t0 : t1).push_back(idx);
    }
    const long long n_ll = ms - 2 * static_cast<long long>(t1.size());
    rep.n = static_cast<int>(n_ll);
    if (n_ll <= 0 || n_ll == ms) {
        rep.outcome = SessionOutcome::AbortPartition;
        return rep;
    }
    const int n = static_cast<int>(n_ll);

    // Alice picks |T1| places among the Z-basis digits for X-error estimation
    Rng schoice = rng.stream("xest-choice");
    std::vector<size_t> pool = t0;
    std::vector<size_t> t_est;
    for (size_t pick = 0; pick < t1.size(); ++pick) {
        const size_t j = pick + static_cast<size_t>(schoice.below(pool.size() - pick));
        std::swap(pool[pick], pool[j]);
        t_est.push_back(pool[pick]);
    }
    std::vector<size_t> t_code(pool.begin() + t1.size(), pool.end());

    std::vector<uint8_t> est_x, est_z;
    for (size_t idx : t_est) {
        const DigitRecord& r = tr.sifted[idx];
        est_x.push_back(static_cast<uint8_t>((r.sent - r.recv + d) % d));
    }
    for (size_t idx : t1) {
        const DigitRecord& r = tr.sifted[idx];
        est_z.push_back(static_cast<uint8_t>((r.recv - r.sent + d) % d));
    }
    rep.lambda = static_cast<long long>(est_x.size());
    rep.lambda_prime = static_cast<long long>(est_z.size());
    rep.p_u = type_from_values(est_x, d);
    rep.p_w = type_from_values(est_z, d);
    rep.alpha_hat = static_cast<double>(ms - n) / static_cast<double>(ms + n);

    // step (vii): rate rule with the gamma margin, then the smallest feasible k
    const ChosenRate cr = chosen_rate_modified(cfg.gamma, rep.p_u, rep.p_w, d);
    rep.selected_rate = cr.rate;
    if (cr.abort) {
        rep.outcome = SessionOutcome::AbortRate;
        return rep;
    }
    const int k = min_feasible_key_size(cr.rate, n, cfg.bank->key_sizes(d, n));
    if (k < 0) throw codebank_miss("no key size with k/n >= " + std::to_string(cr.rate) +
                                   " at n = " + std::to_string(n));
    rep.k = k;
    const auto css = cfg.bank->find(d, n, k);

    // bounds: sampling exponent E1(gamma, alpha) at alpha = (M_s - n)/(M_s + n)
    rep.exponent = sampling_e1(cfg.gamma, rep.alpha_hat, d);
    const long long big_n = (ms + n) / 2;
    rep.bound_fidelity = 4.0 * std::pow(static_cast<double>(d), d) *
                         std::pow(n + 1.0, 3.0 * (d - 1)) * std::pow(big_n + 1.0, 3.0 * (d - 1)) *
                         std::pow(static_cast<double>(d), -static_cast<double>(n) * rep.exponent);
    const double logd = std::log(static_cast<double>(d));
    const double o_m = 3.0 * std::log(2.0) / logd + d +
                       6.0 * (d - 1) * std::log(static_cast<double>(cfg.m)) / logd +
                       std::log(cfg.m * (cfg.gamma + 1.0)) / logd;
    rep.bound_leakage =
        std::pow(static_cast<double>(d), -static_cast<double>(n) * rep.exponent + o_m);
    rep.leakage_clamped = false;

    // steps (viii)-(xi): random permutation pi, code pi(C); equivalently run
    // the unpermuted code on inversely permuted digit strings
    Rng sperm = rng.stream("permutation");
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(sperm.below(static_cast<uint64_t>(i) + 1));
        std::swap(perm[i], perm[j]);
    }
    Word y = Word::zero(d, n), yb = Word::zero(d, n), e = Word::zero(d, n);
    for (int i = 0; i < n; ++i) {
        // position i of the permuted-code view holds original digit perm[i]
        const DigitRecord& rec = tr.sifted[t_code[perm[i]]];
        y.digits[i] = rec.sent;
        yb.digits[i] = rec.recv;
        e.digits[i] = rec.basis == 0 ? rec.xi : static_cast<uint8_t>((d - rec.zeta) % d);
    }
    finish_key_exchange(*css, y, yb, e, rep);
    return rep;
}

WilsonInterval wilson(long long successes, long long trials, double z) {
    WilsonInterval w;
    if (trials <= 0) return w;
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    w.lo = std::max(0.0, center - half);
    w.hi = std::min(1.0, center + half);
    return w;
}

MonteCarloStats monte_carlo(const ProtocolConfig& cfg, const AttackModel& attack, long long trials) {
    if (trials < 1) throw usage_error("trials must be >= 1");
    cfg.validate();
    MonteCarloStats st;
    st.trials = trials;
    RateSolver solver(cfg.d, cfg.e_target);
    double sel_sum = 0.0, rate_sum = 0.0, fid_sum = 0.0, fail_sum = 0.0;
    for (long long t = 0; t < trials; ++t) {
        ProtocolConfig tcfg = cfg;
        tcfg.seed = cfg.seed + static_cast<uint64_t>(t);
        SessionReport rep;
        try {
            rep = cfg.mode == Mode::BB84 ? run_bb84(tcfg, attack, &solver)
                                         : run_modified_bb84(tcfg, attack);
        } catch (const codebank_miss&) {
            ++st.bank_misses;
            continue;
        }
        switch (rep.outcome) {
            case SessionOutcome::Ok:
                ++st.completed;
                if (!rep.agree) ++st.disagreements;
                sel_sum += rep.selected_rate;
                rate_sum += static_cast<double>(rep.k) / rep.n;
                fid_sum += rep.bound_fidelity;
                fail_sum += rep.failure_exponent;
                break;
            case SessionOutcome::AbortRate: ++st.aborts_rate; break;
            case SessionOutcome::AbortEstimate: ++st.aborts_estimate; break;
            case SessionOutcome::AbortPartition: ++st.aborts_partition; break;
        }
        st.sessions.push_back(std::move(rep));
    }
    if (st.completed > 0) {
        st.disagree_freq = static_cast<double>(st.disagreements) / static_cast<double>(st.completed);
        st.disagree_wilson = wilson(st.disagreements, st.completed, 2.5758293035489004);  // 99%
        st.mean_selected_rate = sel_sum / static_cast<double>(st.completed);
        st.mean_code_rate = rate_sum / static_cast<double>(st.completed);
        st.mean_bound_fidelity = fid_sum / static_cast<double>(st.completed);
        st.mean_failure_exponent = fail_sum / static_cast<double>(st.completed);
    }
    st.abort_freq = static_cast<double>(st.aborts_rate + st.aborts_estimate + st.aborts_partition) /
                    static_cast<double>(trials);
    return st;
}

}  // namespace cssqkd
