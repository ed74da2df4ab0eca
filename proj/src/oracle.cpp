#include "cssqkd/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "cssqkd/exponents.hpp"
#include "cssqkd/protocol.hpp"

namespace cssqkd {

namespace {

uint64_t pow_u64(int base, int exp, uint64_t cap) {
    uint64_t v = 1;
    for (int i = 0; i < exp; ++i) {
        v *= static_cast<uint64_t>(base);
        if (v > cap) throw resource_error("enumeration exceeds cap of " + std::to_string(cap));
    }
    return v;
}

}  // namespace

EnsembleCensus enumerate_self_orthogonal(int d, int n, int kappa, EnsembleVariant variant,
                                         uint64_t cap) {
    if (!is_prime(d)) throw usage_error("modulus must be prime");
    if (kappa < 1 || kappa > n) throw usage_error("need 1 <= kappa <= n");
    if (variant == EnsembleVariant::WithOnes && (d != 2 || n % 2 != 0))
        throw usage_error("the all-ones variant requires d = 2 and even n");
    EnsembleCensus census;
    census.d = d;
    census.n = n;
    census.kappa = kappa;
    census.variant = variant;
    census.containment.assign(pow_u64(d, n, cap), 0);

    const Word ones = Word::ones(d, n);

    // enumerate subspaces once each via their reduced-echelon generator
    // matrices: choose pivot columns, then sweep the free entries row by row
    // (row i: a one at its pivot, arbitrary entries at later non-pivot
    // columns, zeros elsewhere)
    std::vector<int> pivots(kappa);
    std::vector<Word> rows(kappa, Word::zero(d, n));
    const auto fill_rows = [&](auto&& self, int row) -> void {
        if (row == kappa) {
            for (int i = 0; i < kappa; ++i)
                for (int j = i; j < kappa; ++j)
                    if (dot(rows[i], rows[j]) != 0) return;
            if (variant == EnsembleVariant::WithOnes && !rref(d, n, rows).contains(ones)) return;
            const LinearCode code(d, n, rows);
            census.codes.push_back(code);
            for_each_coset_word(code, Word::zero(d, n),
                                [&](const Word& w) { ++census.containment[pack_word(w)]; }, cap);
            return;
        }
        std::vector<int> free_cols;
        for (int c = pivots[row] + 1; c < n; ++c) {
            if (std::find(pivots.begin(), pivots.end(), c) == pivots.end()) free_cols.push_back(c);
        }
        rows[row] = Word::zero(d, n);
        rows[row].digits[pivots[row]] = 1;
        const auto sweep = [&](auto&& go, size_t at) -> void {
            if (at == free_cols.size()) {
                self(self, row + 1);
                return;
            }
            for (int v = 0; v < d; ++v) {
                rows[row].digits[free_cols[at]] = static_cast<uint8_t>(v);
                go(go, at + 1);
            }
            rows[row].digits[free_cols[at]] = 0;
        };
        sweep(sweep, 0);
    };

    // choose pivot column combinations
    const auto choose = [&](auto&& self, int from, int idx) -> void {
        if (idx == kappa) {
            fill_rows(fill_rows, 0);
            return;
        }
        for (int c = from; c < n - (kappa - idx - 1); ++c) {
            pivots[idx] = c;
            self(self, c + 1, idx + 1);
        }
    };
    choose(choose, 0, 0);
    return census;
}

SymmetryReport verify_group_symmetry(const EnsembleCensus& census) {
    const int d = census.d, n = census.n;
    SymmetryReport rep;
    rep.ratio_bound = std::pow(static_cast<double>(d), static_cast<double>(-census.kappa + d - 1));
    if (census.codes.empty()) throw usage_error("empty census");
    const double total = static_cast<double>(census.size());
    const Word zero = Word::zero(d, n);
    const Word ones = Word::ones(d, n);
    const bool with_ones = census.variant == EnsembleVariant::WithOnes;

    std::map<int, std::vector<uint64_t>> class_values;
    rep.zero_class_ok = true;
    rep.ratio_ok = true;
    uint64_t applicable_sum = 0;
    for_each_word(d, n, [&](const Word& x) {
        if (x == zero) return;
        if (with_ones && x == ones) return;
        const uint64_t count = census.containment[pack_word(x)];
        const int u = dot(x, x);
        applicable_sum += count;
        const double ratio = static_cast<double>(count) / total;
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
        if (ratio > rep.ratio_bound + 1e-12) rep.ratio_ok = false;
        if (with_ones) {
            if (u == 0) {
                class_values[0].push_back(count);
            } else if (count != 0) {
                rep.zero_class_ok = false;  // x.x = 1 forces |A_x| = 0
            }
        } else {
            class_values[u].push_back(count);
        }
    });
    rep.constancy_ok = true;
    for (auto& [u, values] : class_values) {
        const uint64_t first = values.front();
        for (uint64_t v : values) {
            if (v != first) rep.constancy_ok = false;
        }
        rep.class_constant[u] = first;
    }
    // double counting: each code contributes every applicable dual word once
    const uint64_t dual_size = pow_u64(d, n - census.kappa, ~uint64_t{0});
    const uint64_t per_code = dual_size - (with_ones ? 2 : 1);
    rep.double_count_ok = applicable_sum == census.size() * per_code;
    return rep;
}

double marginal_failure_exact(const CssCode& css, const Dist& q, uint64_t cap) {
    const int d = css.d(), n = css.n();
    pow_u64(d, n, cap);
    if (q.size() != d) throw usage_error("distribution size does not match d");
    double fail = 0.0;
    for_each_word(d, n, [&](const Word& e) {
        if (css.correctable_word(e)) return;
        double w = 1.0;
        for (int i = 0; i < n; ++i) w *= q[e.digits[i]];
        fail += w;
    });
    return fail;
}

FailureProbs exact_failure_probability(const CssCode& css, const JointDist& p, uint64_t joint_cap,
                                       uint64_t marginal_cap) {
    const int d = css.d(), n = css.n();
    if (p.s != d) throw usage_error("joint distribution size does not match d");
    FailureProbs out;
    out.marginal_x = marginal_failure_exact(css, p.bar(), marginal_cap);
    out.marginal_z = marginal_failure_exact(css, p.dbar(), marginal_cap);

    bool joint_feasible = true;
    uint64_t sq = 1;
    for (int i = 0; i < 2 * n; ++i) {
        sq *= static_cast<uint64_t>(d);
        if (sq > joint_cap) {
            joint_feasible = false;
            break;
        }
    }
    if (joint_feasible) {
        // success mass sits on pairs of correctable words; Gamma + C holds
        // d^(2 kappa) of them
        std::vector<Word> good;
        for_each_word(d, n, [&](const Word& e) {
            if (css.correctable_word(e)) good.push_back(e);
        });
        double success = 0.0;
        for (const Word& ex : good) {
            for (const Word& ez : good) {
                double w = 1.0;
                for (int i = 0; i < n; ++i) w *= p.at(ex.digits[i], ez.digits[i]);
                success += w;
            }
        }
        out.joint = 1.0 - success;
        out.joint_exact = true;
    }
    return out;
}

double mc_failure_probability(const CssCode& css, const JointDist& p, long long trials, Rng rng) {
    if (trials < 1) throw usage_error("trials must be >= 1");
    const int d = css.d(), n = css.n();
    std::vector<double> cdf(p.p.size());
    double acc = 0.0;
    for (size_t i = 0; i < p.p.size(); ++i) {
        acc += p.p[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;
    long long failures = 0;
    Word ex = Word::zero(d, n), ez = Word::zero(d, n);
    for (long long t = 0; t < trials; ++t) {
        for (int i = 0; i < n; ++i) {
            const size_t pair = rng.from_cdf(cdf);
            ex.digits[i] = static_cast<uint8_t>(pair / d);
            ez.digits[i] = static_cast<uint8_t>(pair % d);
        }
        if (!css.correctable(ex, ez)) ++failures;
    }
    return static_cast<double>(failures) / static_cast<double>(trials);
}

IdentityCheckReport decoding_error_identity_check(const CssCode& css, const Dist& pbar,
                                                  long long trials, Rng rng, double z_halfwidths) {
    IdentityCheckReport rep;
    rep.trials = trials;
    rep.exact = marginal_failure_exact(css, pbar);
    const int d = css.d(), n = css.n();
    std::vector<double> cdf(pbar.p.size());
    double acc = 0.0;
    for (size_t i = 0; i < pbar.p.size(); ++i) {
        acc += pbar.p[i];
        cdf[i] = acc;
    }
    cdf.back() = 1.0;

    long long disagreements = 0;
    Word y = Word::zero(d, n), e = Word::zero(d, n);
    for (long long t = 0; t < trials; ++t) {
        for (int i = 0; i < n; ++i) {
            y.digits[i] = static_cast<uint8_t>(rng.below(d));
            e.digits[i] = static_cast<uint8_t>(rng.from_cdf(cdf));
        }
        // announcement and decode, exactly as in the key-transmission step
        const Word x = css.coset_representative(css.syndrome_of(y));
        const Word w = sub(sub(y, e), x);
        std::vector<uint8_t> se = css.syndrome_of(w);
        for (uint8_t& s : se) s = static_cast<uint8_t>((d - s) % d);
        const Word u = add(w, css.coset_representative(se));
        if (css.key_decode(u) != css.key_decode(sub(y, x))) ++disagreements;
    }
    rep.mc_freq = static_cast<double>(disagreements) / static_cast<double>(trials);
    // 99% Wilson interval around the Monte Carlo frequency
    const WilsonInterval wi = wilson(disagreements, trials, 2.5758293035489004);
    rep.halfwidth = wi.halfwidth();
    rep.ok = std::abs(rep.mc_freq - rep.exact) <= z_halfwidths * rep.halfwidth + 1e-12;
    return rep;
}

TailCheckReport sampling_tail_check(int alphabet, int big_n, int small_n,
                                    const std::vector<uint8_t>& source, const Dist& dist,
                                    long long trials, const std::vector<double>& eps_grid,
                                    Rng rng) {
    if (!(small_n > 0 && small_n < big_n)) throw usage_error("need 0 < n < N");
    if (!source.empty() && static_cast<int>(source.size()) != big_n)
        throw usage_error("fixed source must have length N");
    const double alpha = static_cast<double>(big_n - small_n) / static_cast<double>(big_n);
    const double g = g_alpha(alpha);
    const double kd = pinsker_constant(alphabet);
    const double types_sq = std::pow(static_cast<double>(num_types(big_n, alphabet)), 2.0);

    std::vector<double> cdf;
    if (source.empty()) {
        if (dist.size() != alphabet) throw usage_error("distribution size mismatch");
        cdf.resize(alphabet);
        double acc = 0.0;
        for (int i = 0; i < alphabet; ++i) {
            acc += dist[i];
            cdf[i] = acc;
        }
        cdf.back() = 1.0;
    }

    std::vector<uint8_t> y(big_n);
    std::vector<int> order(big_n);
    std::vector<long long> tail(eps_grid.size(), 0);
    for (long long t = 0; t < trials; ++t) {
        if (source.empty()) {
            for (int i = 0; i < big_n; ++i) y[i] = static_cast<uint8_t>(rng.from_cdf(cdf));
        } else {
            y = source;
        }
        for (int i = 0; i < big_n; ++i) order[i] = i;
        std::vector<long long> c_in(alphabet, 0), c_out(alphabet, 0);
        for (int pick = 0; pick < small_n; ++pick) {
            const int j = pick + static_cast<int>(rng.below(static_cast<uint64_t>(big_n - pick)));
            std::swap(order[pick], order[j]);
            ++c_in[y[order[pick]]];
        }
        for (int i = small_n; i < big_n; ++i) ++c_out[y[order[i]]];
        double l1 = 0.0;
        for (int a = 0; a < alphabet; ++a) {
            l1 += std::abs(static_cast<double>(c_in[a]) / small_n -
                           static_cast<double>(c_out[a]) / (big_n - small_n));
        }
        for (size_t gi = 0; gi < eps_grid.size(); ++gi) {
            if (l1 >= eps_grid[gi]) ++tail[gi];
        }
    }

    TailCheckReport rep;
    const double z = 2.5758293035489004;
    for (size_t gi = 0; gi < eps_grid.size(); ++gi) {
        TailCheckRow row;
        row.eps = eps_grid[gi];
        row.empirical = static_cast<double>(tail[gi]) / static_cast<double>(trials);
        const double expo = -static_cast<double>(big_n) * (g * row.eps) * (g * row.eps) / kd;
        row.bound = 2.0 * types_sq * std::pow(static_cast<double>(alphabet), expo);
        const WilsonInterval wi = wilson(tail[gi], trials, z);
        row.ok = wi.lo <= row.bound + 1e-12;
        rep.rows.push_back(row);
        rep.all_ok = rep.all_ok && row.ok;
    }
    return rep;
}

}  // namespace cssqkd
