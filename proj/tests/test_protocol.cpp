#include <doctest.h>

#include <cmath>
#include <map>

#include "cssqkd/oracle.hpp"
#include "cssqkd/protocol.hpp"

using namespace cssqkd;
using doctest::Approx;

namespace {

// shared desk-scale bank: d=2 even lengths, key sizes bounded so coset
// enumerations stay small
const CodeBank& test_bank() {
    static const CodeBank bank = [] {
        CodeBank b;
        Rng rng(20240915);
        for (int n = 4; n <= 16; n += 2) {
            for (int kappa = 1; 2 * kappa <= n - 2; ++kappa) {
                b.add(std::make_shared<CssCode>(search_balanced(2, n, kappa, rng.stream(n * 100 + kappa))));
            }
        }
        return b;
    }();
    return bank;
}

ProtocolConfig base_config() {
    ProtocolConfig cfg;
    cfg.d = 2;
    cfg.m = 800;
    cfg.mode = Mode::BB84;
    cfg.eps = 0.02;
    cfg.e_target = 0.01;
    cfg.seed = 5;
    cfg.bank = &test_bank();
    return cfg;
}

long long estimation_total(const SessionReport& r) { return r.lambda + r.lambda_prime; }

}  // namespace

TEST_CASE("attack parsing") {
    CHECK(parse_attack("identity", 3).dist == JointDist::point_mass(3, 0, 0));
    const AttackModel deph = parse_attack("dephasing:0.25", 2);
    CHECK(deph.dist.at(0, 0) == Approx(0.75));
    CHECK(deph.dist.at(0, 1) == Approx(0.25));
    const AttackModel flip = parse_attack("flip:0.1", 2);
    CHECK(flip.dist.at(1, 0) == Approx(0.1));
    const AttackModel depol = parse_attack("depolarizing:0.3", 2);
    CHECK(depol.dist.at(0, 0) == Approx(0.7));
    CHECK(depol.dist.at(1, 1) == Approx(0.1));
    CHECK_THROWS_AS(parse_attack("nonsense", 2), usage_error);
    CHECK_THROWS_AS(parse_attack("dephasing:1.5", 2), usage_error);
}

TEST_CASE("noiseless bb84 session") {
    ProtocolConfig cfg = base_config();
    const AttackModel id = parse_attack("identity", 2);
    const SessionReport rep = run_bb84(cfg, id);
    REQUIRE(rep.outcome == SessionOutcome::Ok);
    CHECK(rep.agree);
    CHECK(rep.residual_correctable);
    CHECK(rep.p_u.counts[1] == 0);
    CHECK(rep.p_w.counts[1] == 0);
    // accounting: every transmitted digit lands in exactly one bucket
    CHECK(rep.discarded + rep.n + estimation_total(rep) == rep.m);
    // noiseless estimates, but the eps-ball still reserves margin for noise
    CHECK(rep.selected_rate > 0.7);
    CHECK(rep.selected_rate < 1.0);
    CHECK(rep.k >= 2);
    CHECK(rep.key_alice.size() == static_cast<size_t>(rep.k));
}

TEST_CASE("sift fraction concentrates") {
    ProtocolConfig cfg = base_config();
    cfg.m = 4000;
    cfg.pa = 0.3;
    cfg.pb = 0.6;
    const AttackModel id = parse_attack("identity", 2);
    const double p_keep = 0.3 * 0.6 + 0.7 * 0.4;  // matched bases
    double total = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        cfg.seed = 100 + s;
        const SessionReport rep = run_bb84(cfg, id);
        total += static_cast<double>(rep.m - rep.discarded);
    }
    const double mean_kept = total / seeds;
    const double sigma = std::sqrt(cfg.m * p_keep * (1 - p_keep) / seeds);
    CHECK(std::abs(mean_kept - cfg.m * p_keep) < 3.0 * sigma);
}

TEST_CASE("sessions are reproducible") {
    ProtocolConfig cfg = base_config();
    const AttackModel atk = parse_attack("dephasing:0.05", 2);
    const SessionReport a = run_bb84(cfg, atk);
    const SessionReport b = run_bb84(cfg, atk);
    CHECK(a.key_alice == b.key_alice);
    CHECK(a.key_bob == b.key_bob);
    CHECK(a.announced_syndrome == b.announced_syndrome);
    CHECK(a.selected_rate == b.selected_rate);
    CHECK(a.n == b.n);
    // different seed, different transcript (overwhelmingly)
    cfg.seed = 6;
    const SessionReport c = run_bb84(cfg, atk);
    CHECK(a.announced_syndrome != c.announced_syndrome);
}

TEST_CASE("agreement coincides with the correctable-residual criterion") {
    ProtocolConfig cfg = base_config();
    cfg.m = 600;
    cfg.eps = 0.005;
    const AttackModel atk = parse_attack("depolarizing:0.04", 2);
    int disagreements = 0;
    for (int s = 0; s < 40; ++s) {
        cfg.seed = 1000 + s;
        SessionReport rep;
        try {
            rep = run_bb84(cfg, atk);
        } catch (const codebank_miss&) {
            continue;
        }
        if (rep.outcome != SessionOutcome::Ok) continue;
        CHECK(rep.agree == rep.residual_correctable);
        if (!rep.agree) ++disagreements;
        CHECK(rep.discarded + rep.n + estimation_total(rep) == rep.m);
    }
    CHECK(disagreements > 0);  // this noise level must produce some failures
}

TEST_CASE("channel estimates concentrate") {
    ProtocolConfig cfg = base_config();
    cfg.m = 6000;
    cfg.eps = 0.01;
    const double q = 0.05;
    const AttackModel atk = parse_attack("dephasing:" + std::to_string(q), 2);
    cfg.seed = 77;
    const SessionReport rep = run_bb84(cfg, atk);
    // dephasing: xi identically zero, zeta Bernoulli(q)
    CHECK(rep.p_u.counts[1] == 0);
    const double freq = static_cast<double>(rep.p_w.counts[1]) / rep.lambda_prime;
    CHECK(std::abs(freq - q) < 3.0 * std::sqrt(q * (1 - q) / rep.lambda_prime));

    // X-flip channel: every Z-basis digit flips, no X-basis error
    const SessionReport flipped = run_bb84(cfg, parse_attack("flip:1.0", 2));
    CHECK(flipped.p_u.counts[1] == flipped.lambda);
    CHECK(flipped.p_w.counts[1] == 0);
    CHECK(flipped.outcome == SessionOutcome::AbortRate);  // hopeless rate
}

TEST_CASE("heavy noise aborts") {
    ProtocolConfig cfg = base_config();
    cfg.m = 2000;
    const AttackModel atk = parse_attack("dephasing:0.30", 2);  // mixture marginal ~ 0.15
    int aborts = 0, total = 0;
    for (int s = 0; s < 20; ++s) {
        cfg.seed = 300 + s;
        const SessionReport rep = run_bb84(cfg, atk);
        ++total;
        if (rep.outcome == SessionOutcome::AbortRate) ++aborts;
    }
    CHECK(aborts >= total * 95 / 100);
}

TEST_CASE("alice keys are uniform") {
    // pin the bank to a single n = 4, k = 2 code and count key values
    CodeBank small;
    small.add(std::make_shared<CssCode>(CssCode::build(LinearCode(2, 4, {Word::ones(2, 4)}))));
    ProtocolConfig cfg = base_config();
    cfg.bank = &small;
    cfg.m = 60;
    const AttackModel id = parse_attack("identity", 2);
    std::map<std::vector<uint8_t>, int> counts;
    int completed = 0;
    for (int s = 0; s < 400; ++s) {
        cfg.seed = 50000 + s;
        SessionReport rep;
        try {
            rep = run_bb84(cfg, id);
        } catch (const codebank_miss&) {
            continue;
        }
        if (rep.outcome != SessionOutcome::Ok) continue;
        ++completed;
        ++counts[rep.key_alice];
    }
    REQUIRE(completed > 300);
    double chi2 = 0.0;
    const double expect = completed / 4.0;
    for (const auto& [key, c] : counts) chi2 += (c - expect) * (c - expect) / expect;
    CHECK(counts.size() == 4);
    CHECK(chi2 < 25.0);  // 99.9% quantile of chi^2(3) is 16.3
}

TEST_CASE("monte carlo determinism and aggregation") {
    ProtocolConfig cfg = base_config();
    cfg.m = 500;
    const AttackModel atk = parse_attack("dephasing:0.04", 2);
    const MonteCarloStats a = monte_carlo(cfg, atk, 10);
    const MonteCarloStats b = monte_carlo(cfg, atk, 10);
    CHECK(a.completed == b.completed);
    CHECK(a.disagreements == b.disagreements);
    CHECK(a.mean_selected_rate == b.mean_selected_rate);
    CHECK(a.mean_code_rate == b.mean_code_rate);
    REQUIRE(a.sessions.size() == b.sessions.size());
    for (size_t i = 0; i < a.sessions.size(); ++i)
        CHECK(a.sessions[i].key_alice == b.sessions[i].key_alice);
    // trials = 1 reproduces the single session
    const MonteCarloStats one = monte_carlo(cfg, atk, 1);
    const SessionReport single = run_bb84(cfg, atk);
    CHECK(one.sessions[0].key_alice == single.key_alice);
    CHECK(one.sessions[0].agree == single.agree);
}

TEST_CASE("disagreement frequency grows with dephasing noise") {
    ProtocolConfig cfg = base_config();
    cfg.m = 700;
    std::vector<double> freq, halfw;
    for (double q : {0.01, 0.06, 0.12}) {
        const MonteCarloStats st = monte_carlo(cfg, parse_attack("dephasing:" + std::to_string(q), 2), 60);
        REQUIRE(st.completed > 0);
        freq.push_back(st.disagree_freq);
        halfw.push_back(st.disagree_wilson.halfwidth());
    }
    for (size_t i = 0; i + 1 < freq.size(); ++i)
        CHECK(freq[i + 1] >= freq[i] - (halfw[i] + halfw[i + 1]));
}

TEST_CASE("modified protocol: noiseless agreement and partition accounting") {
    ProtocolConfig cfg = base_config();
    cfg.mode = Mode::Modified;
    cfg.pa = 0.4;
    cfg.pb = 0.4;
    cfg.m = 36;
    cfg.gamma = 0.3;  // desk-scale margin so small codes stay feasible
    const AttackModel id = parse_attack("identity", 2);
    int ok = 0, aborted = 0, missed = 0;
    double ratio_sum = 0.0;
    int ratio_count = 0;
    for (int s = 0; s < 120; ++s) {
        cfg.seed = 9000 + s;
        SessionReport rep;
        try {
            rep = run_modified_bb84(cfg, id);
        } catch (const codebank_miss&) {
            ++missed;
            continue;
        }
        if (rep.outcome == SessionOutcome::Ok) {
            ++ok;
            CHECK(rep.agree);
            CHECK(rep.lambda == rep.lambda_prime);  // equal estimation halves
            CHECK(rep.discarded + rep.n + estimation_total(rep) == rep.m);
            const long long ms = rep.n + 2 * rep.lambda;
            ratio_sum += static_cast<double>(rep.n) / ms;
            ++ratio_count;
        } else {
            ++aborted;
        }
    }
    CHECK(ok > 50);
    // n / M_s concentrates near 1 - 2r with r = papb/(papb+(1-pa)(1-pb)) ~ 0.3077
    CHECK(std::abs(ratio_sum / ratio_count - (1.0 - 2.0 * 0.16 / 0.52)) < 0.06);
    CHECK(missed + aborted + ok == 120);
}

TEST_CASE("modified protocol aborts when the partition degenerates") {
    ProtocolConfig cfg = base_config();
    cfg.mode = Mode::Modified;
    cfg.pa = 0.49;
    cfg.pb = 0.49;
    cfg.m = 16;
    const AttackModel id = parse_attack("identity", 2);
    int partition_aborts = 0;
    for (int s = 0; s < 100; ++s) {
        cfg.seed = 40000 + s;
        try {
            const SessionReport rep = run_modified_bb84(cfg, id);
            if (rep.outcome == SessionOutcome::AbortPartition) ++partition_aborts;
        } catch (const codebank_miss&) {
        }
    }
    CHECK(partition_aborts > 0);
}

TEST_CASE("ternary sessions run end to end") {
    CodeBank bank3;
    Rng rng(31);
    for (int n = 3; n <= 7; ++n) {
        for (int kappa = 1; 2 * kappa <= n - 1; ++kappa) {
            try {
                bank3.add(std::make_shared<CssCode>(search_balanced(3, n, kappa, rng.stream(n * 10 + kappa))));
            } catch (const search_failure&) {
            }
        }
    }
    REQUIRE_FALSE(bank3.empty());
    ProtocolConfig cfg;
    cfg.d = 3;
    cfg.m = 400;
    cfg.eps = 0.02;
    cfg.e_target = 0.01;
    cfg.bank = &bank3;
    const AttackModel id = parse_attack("identity", 3);
    int ok = 0;
    for (int s = 0; s < 10; ++s) {
        cfg.seed = 600 + s;
        try {
            const SessionReport rep = run_bb84(cfg, id);
            if (rep.outcome == SessionOutcome::Ok) {
                ++ok;
                CHECK(rep.agree);
                CHECK(rep.discarded + rep.n + estimation_total(rep) == rep.m);
            }
        } catch (const codebank_miss&) {
        }
    }
    CHECK(ok > 0);
    // a noisy ternary attack still produces consistent sessions
    const AttackModel atk = parse_attack("depolarizing:0.05", 3);
    cfg.seed = 1234;
    try {
        const SessionReport rep = run_bb84(cfg, atk);
        if (rep.outcome == SessionOutcome::Ok) CHECK(rep.agree == rep.residual_correctable);
    } catch (const codebank_miss&) {
    }
}

TEST_CASE("config validation") {
    ProtocolConfig cfg = base_config();
    cfg.pa = 0.0;
    CHECK_THROWS_AS(run_bb84(cfg, parse_attack("identity", 2)), usage_error);
    cfg = base_config();
    cfg.mode = Mode::Modified;
    cfg.pa = 0.6;  // must be below 1/2 in modified mode
    CHECK_THROWS_AS(run_modified_bb84(cfg, parse_attack("identity", 2)), usage_error);
    cfg = base_config();
    cfg.bank = nullptr;
    CHECK_THROWS_AS(run_bb84(cfg, parse_attack("identity", 2)), usage_error);
}
