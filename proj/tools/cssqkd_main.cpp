// cssqkd: CSS-code construction, error-exponent computation, and BB84-style
// key-distribution simulation against Pauli-model attacks.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cssqkd/csscode.hpp"
#include "cssqkd/exponents.hpp"
#include "cssqkd/oracle.hpp"
#include "cssqkd/protocol.hpp"
#include "cssqkd/qudit.hpp"

using json = nlohmann::ordered_json;
using namespace cssqkd;

namespace {

// all floats printed with 12 significant digits
std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round12(double v) { return std::strtod(fmt12(v).c_str(), nullptr); }

json jnum(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return round12(v);
}

struct Grid {
    double lo = 0.0, hi = 1.0, step = 0.01;
    std::vector<double> points() const {
        std::vector<double> out;
        const long long count = std::llround((hi - lo) / step);
        for (long long i = 0; i <= count; ++i) out.push_back(lo + static_cast<double>(i) * step);
        return out;
    }
};

Grid parse_grid(const std::string& s) {
    // "lo..hi:step"
    Grid g;
    const auto dots = s.find("..");
    const auto colon = s.find(':', dots == std::string::npos ? 0 : dots + 2);
    if (dots == std::string::npos || colon == std::string::npos)
        throw CLI::ValidationError("grid must look like lo..hi:step, got " + s);
    g.lo = std::stod(s.substr(0, dots));
    g.hi = std::stod(s.substr(dots + 2, colon - dots - 2));
    g.step = std::stod(s.substr(colon + 1));
    if (g.step <= 0 || g.hi < g.lo) throw CLI::ValidationError("bad grid: " + s);
    return g;
}

Dist parse_dist(const std::string& s) {
    std::vector<double> v;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ',')) v.push_back(std::stod(tok));
    return Dist(v);
}

JointDist parse_joint(const std::string& s, int d) {
    const Dist flat = parse_dist(s);
    if (flat.size() != d * d) throw usage_error("joint needs d*d entries");
    return JointDist(d, flat.p);
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw usage_error("cannot open output file: " + path);
    return file;
}

void echo_config(std::ostream& os, const CLI::App* cmd) {
    os << "# config:";
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->get_name().empty() || opt->count() == 0) continue;
        os << " " << opt->get_name() << "=" << opt->as<std::string>();
    }
    os << "\n";
}

json config_json(const CLI::App* cmd) {
    json j = json::object();
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->get_name().empty()) continue;
        if (opt->count() > 0 || !opt->get_default_str().empty())
            j[opt->get_name()] = opt->as<std::string>();
    }
    return j;
}

// ---------------------------------------------------------------- exponents

int run_exponents(const CLI::App* cmd, int d, const std::string& kind, const std::string& p_str,
                  const std::string& p2_str, const std::string& rgrid_str, const std::string& out_path) {
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    const Grid rg = parse_grid(rgrid_str);
    echo_config(os, cmd);
    if (kind == "estar") {
        const Dist p = parse_dist(p_str);
        os << "# E*(R,p) = min_Q [D(Q||p) + |1-2H(Q)-R|^+/2], logs base " << d << "\n";
        os << "R,E,argminQ\n";
        for (double r : rg.points()) {
            const ExponentResult e = estar(r, p, d);
            os << fmt12(r) << "," << fmt12(e.value);
            for (double q : e.argmin.at(0).p) os << "," << fmt12(q);
            os << "\n";
        }
    } else if (kind == "joint") {
        const Dist pb = parse_dist(p_str);
        const Dist pd = parse_dist(p2_str);
        os << "# E(R) = min{E*(R,Pbar), E*(R,Pdbar)}, logs base " << d << "\n";
        os << "R,E,argminQ\n";
        for (double r : rg.points()) {
            const ExponentResult e = e_joint(r, pb, pd, d);
            os << fmt12(r) << "," << fmt12(e.value);
            for (double q : e.argmin.at(0).p) os << "," << fmt12(q);
            os << "\n";
        }
    } else if (kind == "gv") {
        const JointDist pm = parse_joint(p_str, d);
        os << "# E_GV(R,PM) = min D(Q||PM) s.t. 1-2h2(Qbar(1)+Qdbar(1)) <= R or sum >= 1\n";
        os << "R,E,argminQ\n";
        for (double r : rg.points()) {
            const ExponentResult e = e_gv(r, pm);
            os << fmt12(r) << "," << fmt12(e.value);
            for (double q : e.argmin.at(0).p) os << "," << fmt12(q);
            os << "\n";
        }
    } else if (kind == "cond") {
        const JointDist p0 = parse_joint(p_str, d);
        const JointDist p1 = parse_joint(p2_str, d);
        os << "# E_c(R) = min over marginal pairs of min_(Q0,Q1)[D0+D1+|1-H0-H1-R|^+]/2, "
              "logs base " << d << "\n";
        os << "R,E,argminQ0...,argminQ1...\n";
        for (double r : rg.points()) {
            const ExponentResult e = e_cond(r, p0, p1, d);
            os << fmt12(r) << "," << fmt12(e.value);
            for (const Dist& a : e.argmin)
                for (double q : a.p) os << "," << fmt12(q);
            os << "\n";
        }
    } else {
        throw usage_error("unknown exponent kind: " + kind);
    }
    return 0;
}

// -------------------------------------------------------------------- rates

int run_rates(const CLI::App* cmd, int d, const std::string& channel, const std::string& qgrid_str,
              double pa, double pb, double pc, const std::string& out_path) {
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    const Grid qg = parse_grid(qgrid_str);
    echo_config(os, cmd);
    os << "# rate_qkd = (1-pc)(1-pa-pb+2 pa pb)[1 - 2 max{H(mix_bar), H(mix_dbar)}], logs base "
       << d << "; rate_symmetric uses q directly as the common marginal error rate\n";
    os << "q,rate_qkd,rate_symmetric,rate_mixture,rate_cond,rate_cond_raw,rate_modified\n";
    const auto rate_at = [&](double q) {
        char spec[64];
        std::snprintf(spec, sizeof spec, "%s:%.17g", channel.c_str(), q);
        return achievable_rates(pa, pb, pc, parse_attack(spec, d).dist).rate_qkd;
    };
    // channel with both marginals exactly Bernoulli(q)
    const auto rate_sym_at = [&](double q) {
        JointDist corr = JointDist::point_mass(d, 0, 0);
        corr.at(0, 0) = 1.0 - q;
        corr.at(1 % d, 1 % d) = q;
        return achievable_rates(pa, pb, pc, JointDist(d, corr.p)).rate_qkd;
    };
    const auto locate = [&](double lo, double hi, const std::function<double(double)>& f) {
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (f(mid) > 0.0 ? lo : hi) = mid;
        }
        return 0.5 * (lo + hi);
    };
    double prev_q = qg.lo, prev_rate = 0.0, prev_sym = 0.0;
    bool first = true, have_qkd = false, have_sym = false;
    double cross_qkd = 0.0, cross_sym = 0.0;
    for (double q : qg.points()) {
        char spec[64];
        std::snprintf(spec, sizeof spec, "%s:%.17g", channel.c_str(), q);
        const RateReport r = achievable_rates(pa, pb, pc, parse_attack(spec, d).dist);
        const double sym = rate_sym_at(q);
        os << fmt12(q) << "," << fmt12(r.rate_qkd) << "," << fmt12(sym) << ","
           << fmt12(r.rate_mixture) << "," << fmt12(r.rate_cond) << "," << fmt12(r.rate_cond_raw)
           << "," << fmt12(r.rate_modified) << "\n";
        if (!first && !have_qkd && prev_rate > 0.0 && r.rate_qkd <= 0.0) {
            cross_qkd = locate(prev_q, q, rate_at);
            have_qkd = true;
        }
        if (!first && !have_sym && prev_sym > 0.0 && sym <= 0.0) {
            cross_sym = locate(prev_q, q, rate_sym_at);
            have_sym = true;
        }
        prev_q = q;
        prev_rate = r.rate_qkd;
        prev_sym = sym;
        first = false;
    }
    if (have_qkd) os << "# rate_qkd zero crossing: q* = " << fmt12(cross_qkd) << "\n";
    if (have_sym) os << "# rate_symmetric zero crossing: q* = " << fmt12(cross_sym) << "\n";
    return 0;
}

// ------------------------------------------------------------------ codegen

int run_codegen(int d, const std::vector<int>& lengths, std::vector<int> kappas, int max_dual_exp,
                uint64_t seed, int tries, const std::string& rule_str, const std::string& out_path) {
    const DecodeRule rule = decode_rule_from_string(rule_str);
    CodeBank bank;
    Rng rng(seed);
    for (int n : lengths) {
        std::vector<int> ks = kappas;
        if (ks.empty()) {
            for (int kappa = 1; 2 * kappa <= n - 2; ++kappa) ks.push_back(kappa);
        }
        for (int kappa : ks) {
            if (2 * kappa > n) continue;
            if (n - kappa > max_dual_exp) continue;  // keep coset enumerations affordable
            try {
                bank.add(std::make_shared<CssCode>(
                    search_balanced(d, n, kappa, rng.stream(static_cast<uint64_t>(n) * 1000 + kappa),
                                    tries, rule)));
                std::cerr << "found d=" << d << " n=" << n << " kappa=" << kappa << "\n";
            } catch (const search_failure& e) {
                std::cerr << "skip d=" << d << " n=" << n << " kappa=" << kappa << ": " << e.what()
                          << "\n";
            }
        }
    }
    if (bank.empty()) {
        std::cerr << "no codes found\n";
        return 1;
    }
    bank.save_file(out_path);
    std::cerr << "wrote " << bank.size() << " codes to " << out_path << "\n";
    return 0;
}

// ----------------------------------------------------------------- simulate

json type_json(const TypeDist& t) {
    json j = json::object();
    j["n"] = t.n;
    j["counts"] = t.counts;
    return j;
}

json session_json(const SessionReport& r) {
    json j = json::object();
    j["outcome"] = to_string(r.outcome);
    j["m"] = r.m;
    j["discarded"] = r.discarded;
    j["sift_size"] = r.sift_size;
    j["n"] = r.n;
    j["k"] = r.k;
    j["lambda"] = r.lambda;
    j["lambda_prime"] = r.lambda_prime;
    j["moved"] = r.moved;
    if (r.lambda > 0) j["p_u"] = type_json(r.p_u);
    if (r.lambda_prime > 0) j["p_w"] = type_json(r.p_w);
    j["alpha_hat"] = jnum(r.alpha_hat);
    j["selected_rate"] = jnum(r.selected_rate);
    j["failure_exponent"] = jnum(r.failure_exponent);
    if (r.outcome == SessionOutcome::Ok) {
        j["announced_syndrome"] = r.announced_syndrome;
        j["key_alice"] = r.key_alice;
        j["key_bob"] = r.key_bob;
        j["agree"] = r.agree;
        j["residual_correctable"] = r.residual_correctable;
        j["rate_certification"] = "grid";
        j["rate_step"] = jnum(r.rate_step);
        j["ball_step"] = jnum(r.ball_step);
        j["exponent"] = jnum(r.exponent);
        j["bound_fidelity"] = jnum(r.bound_fidelity);
        j["bound_leakage"] = jnum(r.bound_leakage);
        j["leakage_clamped"] = r.leakage_clamped;
    }
    return j;
}

int run_simulate(const CLI::App* cmd, const std::string& mode_str, int d, long long m, double pa,
                 double pb, double pc, const std::string& attack_str, double eps, double e_target,
                 double gamma, long long trials, uint64_t seed, const std::string& bank_path,
                 const std::string& out_path) {
    if (bank_path.empty())
        throw usage_error("no code bank: pass --codebank or set CSSQKD_CODEBANK");
    const CodeBank bank = CodeBank::load_file(bank_path);
    ProtocolConfig cfg;
    cfg.d = d;
    cfg.m = m;
    cfg.pa = pa;
    cfg.pb = pb;
    cfg.pc = pc;
    cfg.mode = mode_str == "modified" ? Mode::Modified : Mode::BB84;
    cfg.eps = eps;
    cfg.e_target = e_target;
    cfg.gamma = gamma;
    cfg.seed = seed;
    cfg.bank = &bank;
    const AttackModel attack = parse_attack(attack_str, d);
    const MonteCarloStats st = monte_carlo(cfg, attack, trials);

    json rep = json::object();
    rep["config"] = config_json(cmd);
    rep["trials"] = json::array();
    for (const SessionReport& s : st.sessions) rep["trials"].push_back(session_json(s));
    json agg = json::object();
    agg["trials"] = st.trials;
    agg["completed"] = st.completed;
    agg["disagreements"] = st.disagreements;
    agg["aborts_rate"] = st.aborts_rate;
    agg["aborts_estimate"] = st.aborts_estimate;
    agg["aborts_partition"] = st.aborts_partition;
    agg["bank_misses"] = st.bank_misses;
    agg["disagree_freq"] = jnum(st.disagree_freq);
    agg["disagree_wilson_lo"] = jnum(st.disagree_wilson.lo);
    agg["disagree_wilson_hi"] = jnum(st.disagree_wilson.hi);
    agg["abort_freq"] = jnum(st.abort_freq);
    agg["mean_selected_rate"] = jnum(st.mean_selected_rate);
    agg["mean_code_rate"] = jnum(st.mean_code_rate);
    agg["mean_bound_fidelity"] = jnum(st.mean_bound_fidelity);
    agg["mean_failure_exponent"] = jnum(st.mean_failure_exponent);
    rep["aggregates"] = agg;

    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << rep.dump(2) << "\n";
    std::cerr << "completed " << st.completed << "/" << st.trials
              << " sessions, disagree_freq = " << fmt12(st.disagree_freq) << "\n";
    return 0;
}

// ------------------------------------------------------------------- verify

struct VerifyRow {
    std::string name;
    bool ok = false;
    std::string detail;
};

int run_verify(bool quick, const std::string& json_path) {
    std::vector<VerifyRow> rows;
    const auto add = [&](const std::string& name, bool ok, const std::string& detail) {
        rows.push_back({name, ok, detail});
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << (detail.empty() ? "" : "  (" + detail + ")")
                  << "\n";
    };

    // ensemble symmetry censuses
    {
        bool ok = true;
        std::string detail;
        for (auto [dd, n, kappa] : {std::tuple{3, 3, 1}, std::tuple{3, 4, 1}}) {
            const SymmetryReport r = verify_group_symmetry(enumerate_self_orthogonal(dd, n, kappa));
            ok = ok && r.constancy_ok && r.ratio_ok && r.double_count_ok;
        }
        for (auto [n, kappa] : {std::pair{4, 1}, std::pair{6, 1}, std::pair{6, 2}}) {
            const SymmetryReport r = verify_group_symmetry(
                enumerate_self_orthogonal(2, n, kappa, EnsembleVariant::WithOnes));
            ok = ok && r.constancy_ok && r.ratio_ok && r.zero_class_ok && r.double_count_ok;
        }
        add("ensemble-symmetry", ok, "plain d=3 and all-ones d=2 censuses");
    }
    // Fourier switch identity and representation invariance
    {
        Rng rng(424242);
        double worst = 0.0;
        const int reps = quick ? 20 : 100;
        for (int dd : {2, 3}) {
            for (int i = 0; i < reps; ++i) {
                KrausChannel ch = random_channel(dd, 1 + static_cast<int>(rng.below(3)), rng);
                worst = std::max(worst, switch3_deviation(ch));
                const KrausChannel mixed = random_kraus_mix(ch, rng);
                worst = std::max(worst, l1_distance(channel_to_dist(ch), channel_to_dist(mixed)));
            }
        }
        add("fourier-switch", worst < 1e-10, "max deviation " + fmt12(worst));
    }
    // encoded-state mixture identity
    {
        const double dev =
            spmixed_deviation(LinearCode(2, 4, {Word::ones(2, 4)}), Word::zero(2, 4), Word::zero(2, 4));
        add("state-mixture", dev <= 1e-10, "max entry deviation " + fmt12(dev));
    }
    // failure probabilities: union bound and the exponent bound
    {
        const CssCode css = search_balanced(2, 8, 3, Rng(4242));
        bool ok = true;
        double worst_margin = 1e300;
        for (double q : {0.01, 0.03, 0.05}) {
            const JointDist p(2, {1 - q, q, 0.0, 0.0});
            const FailureProbs f = exact_failure_probability(css, p);
            ok = ok && f.joint_exact && f.joint <= f.marginal_x + f.marginal_z + 1e-15;
            const double e = e_joint(static_cast<double>(css.k()) / css.n(), p.bar(), p.dbar(), 2).value;
            const double bound = fidelity_bound(css.n(), e, 2);
            ok = ok && f.joint <= bound;
            worst_margin = std::min(worst_margin, bound - f.joint);
        }
        add("failure-bounds", ok, "smallest bound margin " + fmt12(worst_margin));
    }
    // key-transmission error identity
    {
        const CssCode css = search_balanced(2, 8, 2, Rng(2));
        const long long trials = quick ? 20000 : 100000;
        const IdentityCheckReport r =
            decoding_error_identity_check(css, Dist({0.95, 0.05}), trials, Rng(3));
        add("decoding-identity", r.ok,
            "exact " + fmt12(r.exact) + " vs mc " + fmt12(r.mc_freq) + " +- " + fmt12(r.halfwidth));
    }
    // random-sampling tail bound
    {
        std::vector<uint8_t> src(40);
        for (int i = 20; i < 40; ++i) src[i] = 1;
        const long long trials = quick ? 4000 : 20000;
        const TailCheckReport fixed = sampling_tail_check(2, 40, 20, src, Dist::uniform(2), trials,
                                                          {0.1, 0.3, 0.5, 0.8}, Rng(5));
        const TailCheckReport rnd = sampling_tail_check(3, 30, 10, {}, Dist({0.5, 0.3, 0.2}), trials,
                                                        {0.2, 0.4, 0.8}, Rng(6));
        add("sampling-tails", fixed.all_ok && rnd.all_ok, "fixed and random sources");
    }
    // Pinsker inequality, randomized
    {
        Rng rng(99);
        bool ok = true;
        const int reps = quick ? 2000 : 10000;
        for (int dd : {2, 3}) {
            for (int i = 0; i < reps; ++i) {
                std::vector<double> q(dd), p(dd);
                double sq = 0.0, sp = 0.0;
                for (int a = 0; a < dd; ++a) {
                    q[a] = -std::log(std::max(rng.unit(), 1e-12));
                    p[a] = -std::log(std::max(rng.unit(), 1e-12));
                    sq += q[a];
                    sp += p[a];
                }
                for (int a = 0; a < dd; ++a) {
                    q[a] /= sq;
                    p[a] /= sp;
                }
                ok = ok && l1_and_pinsker(Dist(q), Dist(p), dd).second;
            }
        }
        add("pinsker", ok, "randomized pairs at d=2,3");
    }
    // type-class partition of unity
    {
        bool ok = true;
        for (int dd : {2, 3}) {
            const Dist p = dd == 2 ? Dist({0.8, 0.2}) : Dist({0.5, 0.3, 0.2});
            double total = 0.0;
            for (const TypeDist& q : enumerate_types(6, dd)) total += prob_of_type_class(q, p);
            ok = ok && std::abs(total - 1.0) < 1e-12;
        }
        add("type-partition", ok, "sum over P_6 equals 1");
    }

    bool all_ok = true;
    for (const VerifyRow& r : rows) all_ok = all_ok && r.ok;
    std::cout << (all_ok ? "verification passed" : "verification FAILED") << " (" << rows.size()
              << " checks)\n";
    if (!json_path.empty()) {
        json j = json::array();
        for (const VerifyRow& r : rows) {
            json row;
            row["name"] = r.name;
            row["ok"] = r.ok;
            row["detail"] = r.detail;
            j.push_back(row);
        }
        std::ofstream f(json_path, std::ios::binary);
        f << j.dump(2) << "\n";
    }
    return all_ok ? 0 : 1;
}

// -------------------------------------------------------------- sample-bound

int run_sample_bound(int alphabet, int big_n, int small_n, long long trials,
                     const std::string& source_str, const std::string& dist_str,
                     const std::string& eps_str, uint64_t seed, const std::string& out_path) {
    std::vector<uint8_t> source;
    Dist dist = Dist::uniform(alphabet);
    if (source_str == "random") {
        if (!dist_str.empty()) dist = parse_dist(dist_str);
    } else if (source_str == "half") {
        source.assign(big_n, 0);
        for (int i = big_n / 2; i < big_n; ++i) source[i] = static_cast<uint8_t>(1 % alphabet);
    } else {
        for (char c : source_str) {
            if (c < '0' || c >= '0' + alphabet) throw usage_error("bad source digit string");
            source.push_back(static_cast<uint8_t>(c - '0'));
        }
    }
    std::vector<double> eps_grid;
    {
        std::istringstream is(eps_str);
        std::string tok;
        while (std::getline(is, tok, ',')) eps_grid.push_back(std::stod(tok));
    }
    const TailCheckReport rep =
        sampling_tail_check(alphabet, big_n, small_n, source, dist, trials, eps_grid, Rng(seed));
    std::ofstream file;
    std::ostream& os = open_out(file, out_path);
    os << "# tail bound 2 |P_N|^2 d^(-N (g(alpha) eps)^2 / K_d), alpha = (N-n)/N\n";
    os << "eps,empirical,bound,ok\n";
    for (const TailCheckRow& r : rep.rows)
        os << fmt12(r.eps) << "," << fmt12(r.empirical) << "," << fmt12(r.bound) << ","
           << (r.ok ? 1 : 0) << "\n";
    return rep.all_ok ? 0 : 1;
}

}  // namespace

// Flat key = value config files: values become --key arguments unless the
// flag was given explicitly, so command-line flags always win.
static std::vector<std::string> merge_config(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    std::string path;
    for (size_t i = 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream is(path);
    if (!is) throw usage_error("cannot open config file: " + path);
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string v) {
            const auto b = v.find_first_not_of(" \t");
            const auto e = v.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        const std::string flag = "--" + key;
        bool given = false;
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) given = true;
        if (!given) {
            args.push_back(flag);
            args.push_back(value);
        }
    }
    return args;
}

int main(int argc, char** argv) {
    CLI::App app{"CSS-code and BB84 key-distribution workbench"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    // exponents
    auto* cmd_exp = app.add_subcommand("exponents", "sweep error exponents to CSV");
    int exp_d = 2;
    std::string exp_kind = "estar", exp_p, exp_p2, exp_rgrid = "0..1:0.01", exp_out;
    std::string exp_cfg;
    cmd_exp->add_option("--config", exp_cfg, "flat key=value config file");
    cmd_exp->add_option("--d", exp_d, "prime modulus");
    cmd_exp->add_option("--kind", exp_kind, "estar|joint|gv|cond");
    cmd_exp->add_option("--p", exp_p, "distribution (estar) or joint table (gv/cond)")->required();
    cmd_exp->add_option("--p2", exp_p2, "second distribution/table (joint/cond)");
    cmd_exp->add_option("--Rgrid", exp_rgrid, "rate grid lo..hi:step");
    cmd_exp->add_option("--out", exp_out, "output CSV (default stdout)");

    // rates
    auto* cmd_rates = app.add_subcommand("rates", "achievable-rate threshold curves to CSV");
    int rates_d = 2;
    std::string rates_channel = "depolarizing", rates_qgrid = "0..0.2:0.005", rates_out;
    double rates_pa = 0.5, rates_pb = 0.5, rates_pc = 0.5;
    std::string rates_cfg;
    cmd_rates->add_option("--config", rates_cfg, "flat key=value config file");
    cmd_rates->add_option("--d", rates_d, "prime modulus");
    cmd_rates->add_option("--channel", rates_channel, "dephasing|flip|depolarizing");
    cmd_rates->add_option("--qgrid", rates_qgrid, "channel parameter grid lo..hi:step");
    cmd_rates->add_option("--pa", rates_pa, "basis probability of Alice");
    cmd_rates->add_option("--pb", rates_pb, "basis probability of Bob");
    cmd_rates->add_option("--pc", rates_pc, "estimation-flag probability");
    cmd_rates->add_option("--out", rates_out, "output CSV (default stdout)");

    // codegen
    auto* cmd_gen = app.add_subcommand("codegen", "search balanced codes and write a bank");
    int gen_d = 2, gen_tries = 200, gen_max_dual = 18;
    std::vector<int> gen_lengths, gen_kappas;
    uint64_t gen_seed = 1;
    std::string gen_out = "codebank.txt", gen_rule = "min-entropy";
    std::string gen_cfg;
    cmd_gen->add_option("--config", gen_cfg, "flat key=value config file");
    cmd_gen->add_option("--d", gen_d, "prime modulus");
    cmd_gen->add_option("--lengths", gen_lengths, "code lengths")->required()->delimiter(',');
    cmd_gen->add_option("--kappas", gen_kappas, "kappa values (default: all feasible)")->delimiter(',');
    cmd_gen->add_option("--max-dual-exp", gen_max_dual, "skip codes with n - kappa above this");
    cmd_gen->add_option("--tries", gen_tries, "search attempts per code");
    cmd_gen->add_option("--seed", gen_seed, "search seed");
    cmd_gen->add_option("--rule", gen_rule, "min-entropy|min-cond-entropy|min-hamming");
    cmd_gen->add_option("--out", gen_out, "bank file");

    // simulate
    auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo protocol sessions to JSON");
    std::string sim_mode = "bb84", sim_attack = "identity", sim_bank, sim_out;
    int sim_d = 2;
    long long sim_m = 6000, sim_trials = 100;
    double sim_pa = 0.5, sim_pb = 0.5, sim_pc = 0.5, sim_eps = 0.02, sim_etarget = 0.01,
           sim_gamma = 0.05;
    uint64_t sim_seed = 0;
    if (const char* env = std::getenv("CSSQKD_CODEBANK")) sim_bank = env;
    std::string sim_cfg;
    cmd_sim->add_option("--config", sim_cfg, "flat key=value config file");
    cmd_sim->add_option("--mode", sim_mode, "bb84|modified");
    cmd_sim->add_option("--d", sim_d, "prime modulus");
    cmd_sim->add_option("--m", sim_m, "total transmitted digits");
    cmd_sim->add_option("--pa", sim_pa, "P(Alice X basis)");
    cmd_sim->add_option("--pb", sim_pb, "P(Bob X basis)");
    cmd_sim->add_option("--pc", sim_pc, "P(estimation flag), bb84 only");
    cmd_sim->add_option("--attack", sim_attack,
                        "identity | dephasing:q | flip:q | depolarizing:q | dist:FILE | kraus:FILE");
    cmd_sim->add_option("--eps", sim_eps, "rate-selection ball radius (bb84)");
    cmd_sim->add_option("--Etarget", sim_etarget, "target exponent (bb84)");
    cmd_sim->add_option("--gamma", sim_gamma, "rate margin (modified)");
    cmd_sim->add_option("--trials", sim_trials, "number of sessions");
    cmd_sim->add_option("--seed", sim_seed, "master seed")->required();
    cmd_sim->add_option("--codebank", sim_bank, "bank file (default $CSSQKD_CODEBANK)");
    cmd_sim->add_option("--out", sim_out, "report JSON (default stdout)");

    // verify
    auto* cmd_ver = app.add_subcommand("verify", "run the brute-force verification suite");
    bool ver_quick = false;
    std::string ver_json;
    cmd_ver->add_flag("--quick", ver_quick, "smaller Monte Carlo sizes");
    cmd_ver->add_option("--json", ver_json, "also write results as JSON");

    // sample-bound
    auto* cmd_sb = app.add_subcommand("sample-bound", "random-sampling tail bound check");
    int sb_alpha = 2, sb_bign = 40, sb_smalln = 20;
    long long sb_trials = 20000;
    std::string sb_source = "half", sb_dist, sb_eps = "0.1,0.3,0.5,0.8", sb_out;
    uint64_t sb_seed = 1;
    std::string sb_cfg;
    cmd_sb->add_option("--config", sb_cfg, "flat key=value config file");
    cmd_sb->add_option("--alphabet", sb_alpha, "alphabet size");
    cmd_sb->add_option("--N", sb_bign, "source length");
    cmd_sb->add_option("--n", sb_smalln, "sample size");
    cmd_sb->add_option("--trials", sb_trials, "Monte Carlo trials");
    cmd_sb->add_option("--source", sb_source, "half | random | explicit digit string");
    cmd_sb->add_option("--dist", sb_dist, "distribution for random source");
    cmd_sb->add_option("--eps", sb_eps, "comma-separated eps grid");
    cmd_sb->add_option("--seed", sb_seed, "seed");
    cmd_sb->add_option("--out", sb_out, "output CSV (default stdout)");

    try {
        std::vector<std::string> args = merge_config(argc, argv);
        std::vector<const char*> cargs;
        for (const std::string& a : args) cargs.push_back(a.c_str());
        app.parse(static_cast<int>(cargs.size()), cargs.data());
        if (cmd_exp->parsed())
            return run_exponents(cmd_exp, exp_d, exp_kind, exp_p, exp_p2, exp_rgrid, exp_out);
        if (cmd_rates->parsed())
            return run_rates(cmd_rates, rates_d, rates_channel, rates_qgrid, rates_pa, rates_pb,
                             rates_pc, rates_out);
        if (cmd_gen->parsed())
            return run_codegen(gen_d, gen_lengths, gen_kappas, gen_max_dual, gen_seed, gen_tries,
                               gen_rule, gen_out);
        if (cmd_sim->parsed())
            return run_simulate(cmd_sim, sim_mode, sim_d, sim_m, sim_pa, sim_pb, sim_pc, sim_attack,
                                sim_eps, sim_etarget, sim_gamma, sim_trials, sim_seed, sim_bank,
                                sim_out);
        if (cmd_ver->parsed()) return run_verify(ver_quick, ver_json);
        if (cmd_sb->parsed())
            return run_sample_bound(sb_alpha, sb_bign, sb_smalln, sb_trials, sb_source, sb_dist,
                                    sb_eps, sb_seed, sb_out);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
