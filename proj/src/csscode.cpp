#include "cssqkd/csscode.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cssqkd {

std::string to_string(DecodeRule rule) {
    switch (rule) {
        case DecodeRule::MinEntropy: return "min-entropy";
        case DecodeRule::MinCondEntropy: return "min-cond-entropy";
        case DecodeRule::MinHamming: return "min-hamming";
    }
    return "?";
}

DecodeRule decode_rule_from_string(const std::string& s) {
    if (s == "min-entropy") return DecodeRule::MinEntropy;
    if (s == "min-cond-entropy") return DecodeRule::MinCondEntropy;
    if (s == "min-hamming") return DecodeRule::MinHamming;
    throw usage_error("unknown decode rule: " + s);
}

namespace {

// rref of `rows` with the row transform tracked: result.second * rows = rref rows.
// All pivots land in the first n columns because the rows are independent.
std::pair<Rref, std::vector<std::vector<uint8_t>>> rref_with_transform(int d, int n,
                                                                       const std::vector<Word>& rows) {
    const int m = static_cast<int>(rows.size());
    std::vector<Word> aug;
    aug.reserve(rows.size());
    for (int i = 0; i < m; ++i) {
        Word w = Word::zero(d, n + m);
        std::copy(rows[i].digits.begin(), rows[i].digits.end(), w.digits.begin());
        w.digits[n + i] = 1;
        aug.push_back(std::move(w));
    }
    const Rref ra = rref(d, n + m, aug);
    Rref out;
    out.d = d;
    out.n = n;
    std::vector<std::vector<uint8_t>> transform;
    for (int i = 0; i < ra.rank(); ++i) {
        if (ra.pivots[i] >= n) throw usage_error("basis rows are linearly dependent");
        Word w = Word::zero(d, n);
        std::copy(ra.rows[i].digits.begin(), ra.rows[i].digits.begin() + n, w.digits.begin());
        out.rows.push_back(std::move(w));
        out.pivots.push_back(ra.pivots[i]);
        transform.emplace_back(ra.rows[i].digits.begin() + n, ra.rows[i].digits.end());
    }
    return {std::move(out), std::move(transform)};
}

}  // namespace

CssCode::CssCode(LinearCode c, std::vector<Word> h_rows, DecodeRule rule, uint64_t enum_cap)
    : c_(std::move(c)), h_(std::move(h_rows)), rule_(rule), enum_cap_(enum_cap) {
    const int d = c_.d, n = c_.n;
    for (const Word& g1 : c_.basis) {
        for (const Word& g2 : c_.basis) {
            if (dot(g1, g2) != 0) throw usage_error("NOT_SELF_ORTHOGONAL: generator rows are not pairwise orthogonal");
        }
    }
    if (d == 2) {
        if (n % 2 != 0) throw usage_error("D2_RULE_VIOLATION: length must be even when d = 2");
        if (!rref(d, n, c_.basis).contains(Word::ones(d, n)))
            throw usage_error("D2_RULE_VIOLATION: the all-ones word must lie in C when d = 2");
    }
    if (static_cast<int>(h_.size()) != n - 2 * c_.dim())
        throw usage_error("h basis must have k = n - 2 kappa rows");
    std::vector<Word> stacked = c_.basis;
    stacked.insert(stacked.end(), h_.begin(), h_.end());
    dual_ = LinearCode(d, n, stacked);  // validates independence
    for (const Word& row : dual_.basis) {
        for (const Word& g : c_.basis) {
            if (dot(row, g) != 0) throw usage_error("h rows must be orthogonal to C");
        }
    }

    rref_c_ = rref(d, n, c_.basis);
    auto [rd, td] = rref_with_transform(d, n, dual_.basis);
    rref_dual_ = std::move(rd);
    key_transform_ = std::move(td);
    if (kappa() > 0) {
        auto [rc, tc] = rref_with_transform(d, n, c_.basis);
        synd_pivots_ = rc.pivots;
        synd_transform_ = std::move(tc);
    }

    const LinearCode dual_space = dual_basis(c_);  // n - kappa rows spanning C-perp
    coset_prefix_.clear();
    for (int j = 0; j < dual_space.dim(); ++j) {
        Word w = dual_space.basis[j];
        if (j > 0) w = add(w, coset_prefix_.back());
        coset_prefix_.push_back(std::move(w));
    }

    clogc_.resize(n + 1);
    clogc_[0] = 0.0;
    for (int cnum = 1; cnum <= n; ++cnum) clogc_[cnum] = cnum * std::log(static_cast<double>(cnum));
}

CssCode CssCode::build(LinearCode c, DecodeRule rule, uint64_t enum_cap) {
    const int d = c.d, n = c.n;
    const LinearCode dual = dual_basis(c);
    // keep dual rows independent of C to complete the basis
    std::vector<Word> stacked = c.basis;
    std::vector<Word> h;
    const int k = n - 2 * c.dim();
    for (const Word& row : dual.basis) {
        if (static_cast<int>(h.size()) == k) break;
        std::vector<Word> trial = stacked;
        trial.push_back(row);
        if (rref(d, n, trial).rank() == static_cast<int>(trial.size())) {
            stacked.push_back(row);
            h.push_back(row);
        }
    }
    if (static_cast<int>(h.size()) != k)
        throw usage_error("NOT_SELF_ORTHOGONAL: C is not contained in its dual");
    return CssCode(std::move(c), std::move(h), rule, enum_cap);
}

bool CssCode::in_c(const Word& w) const { return rref_c_.contains(w); }
bool CssCode::in_dual(const Word& w) const { return rref_dual_.contains(w); }

Word CssCode::solve_syndrome(const std::vector<uint8_t>& synd) const {
    const int d = this->d();
    Word x = Word::zero(d, n());
    for (size_t i = 0; i < synd_pivots_.size(); ++i) {
        long long acc = 0;
        for (size_t j = 0; j < synd.size(); ++j)
            acc += static_cast<long long>(synd_transform_[i][j]) * synd[j];
        x.digits[synd_pivots_[i]] = static_cast<uint8_t>(acc % d);
    }
    return x;
}

double CssCode::objective(const Word& w) const {
    const int d = this->d(), n = this->n();
    switch (rule_) {
        case DecodeRule::MinHamming: {
            int wt = 0;
            for (uint8_t x : w.digits) wt += (x != 0);
            return static_cast<double>(wt);
        }
        case DecodeRule::MinEntropy: {
            // H(type(w)) = [n ln n - sum_c c ln c] / (n ln d), table driven
            int counts[8] = {0};
            for (uint8_t x : w.digits) ++counts[x];
            double s = clogc_[n];
            for (int i = 0; i < d; ++i) s -= clogc_[counts[i]];
            return s;
        }
        case DecodeRule::MinCondEntropy: {
            const int half = n / 2;
            int c0[8] = {0}, c1[8] = {0};
            for (int i = 0; i < half; ++i) ++c0[w.digits[i]];
            for (int i = half; i < n; ++i) ++c1[w.digits[i]];
            double s0 = clogc_[half], s1 = clogc_[n - half];
            for (int i = 0; i < d; ++i) {
                s0 -= clogc_[c0[i]];
                s1 -= clogc_[c1[i]];
            }
            // average of the two half entropies, up to a common positive scale
            return s0 / (half > 0 ? half : 1) + s1 / (n - half > 0 ? n - half : 1);
        }
    }
    return 0.0;
}

void CssCode::for_each_in_coset(const Word& member, const std::function<void(const Word&)>& fn) const {
    const int d = this->d();
    const int m = static_cast<int>(coset_prefix_.size());
    uint64_t total = 1;
    for (int i = 0; i < m; ++i) {
        total *= static_cast<uint64_t>(d);
        if (total > enum_cap_)
            throw resource_error("coset enumeration exceeds cap of " + std::to_string(enum_cap_) + " words");
    }
    std::vector<int> a(m, 0);
    Word cur = member;
    for (;;) {
        fn(cur);
        int j = 0;
        while (j < m && a[j] == d - 1) {
            a[j] = 0;
            ++j;
        }
        if (j == m) break;
        ++a[j];
        cur = add(cur, coset_prefix_[j]);
    }
}

Word CssCode::coset_representative(const std::vector<uint8_t>& synd) const {
    if (synd.size() != static_cast<size_t>(kappa())) throw usage_error("syndrome length mismatch");
    {
        std::lock_guard<std::mutex> lock(memo_->mutex);
        auto it = memo_->map.find(synd);
        if (it != memo_->map.end()) return it->second;
    }
    const Word start = solve_syndrome(synd);
    bool have = false;
    double best_obj = 0.0;
    Word best;
    for_each_in_coset(start, [&](const Word& w) {
        const double obj = objective(w);
        if (!have || obj < best_obj - 1e-12) {
            have = true;
            best_obj = obj;
            best = w;
        } else if (obj <= best_obj + 1e-12 && w < best) {
            best = w;
        }
    });
    {
        std::lock_guard<std::mutex> lock(memo_->mutex);
        memo_->map.emplace(synd, best);
    }
    return best;
}

bool CssCode::correctable_word(const Word& e) const {
    const Word rep = coset_representative(syndrome_of(e));
    return in_c(sub(e, rep));
}

bool CssCode::correctable(const Word& e_x, const Word& e_z) const {
    return correctable_word(e_x) && correctable_word(e_z);
}

Word CssCode::key_encode(const std::vector<uint8_t>& sigma) const {
    if (sigma.size() != static_cast<size_t>(k())) throw usage_error("key length mismatch");
    Word w = Word::zero(d(), n());
    for (size_t i = 0; i < sigma.size(); ++i) {
        if (sigma[i] >= d()) throw usage_error("key digit out of range");
        if (sigma[i] != 0) w = add(w, scale(h_[i], sigma[i]));
    }
    return w;
}

std::vector<uint8_t> CssCode::key_decode(const Word& w) const {
    if (w.d != d() || w.n() != n()) throw usage_error("word/code shape mismatch");
    // coefficients against rref(dual): c_i = w[pivot_i]; then map back through
    // the tracked transform to coordinates in the (g; h) basis
    Word res = w;
    const int m = rref_dual_.rank();
    std::vector<int> coeff(m);
    for (int i = 0; i < m; ++i) {
        coeff[i] = res.digits[rref_dual_.pivots[i]];
        if (coeff[i] != 0) res = sub(res, scale(rref_dual_.rows[i], coeff[i]));
    }
    if (!res.is_zero()) throw usage_error("word is not in C-perp");
    std::vector<uint8_t> sigma(k());
    for (int j = 0; j < k(); ++j) {
        long long acc = 0;
        for (int i = 0; i < m; ++i) acc += static_cast<long long>(coeff[i]) * key_transform_[i][kappa() + j];
        sigma[j] = static_cast<uint8_t>(acc % d());
    }
    return sigma;
}

uint64_t TypeSpectrum::count(const TypeDist& q) const {
    auto it = counts.find(q.counts);
    return it == counts.end() ? 0 : it->second;
}

uint64_t TypeSpectrum::total() const {
    uint64_t t = 0;
    for (const auto& [_, c] : counts) t += c;
    return t;
}

TypeSpectrum type_spectrum(const CssCode& css) {
    TypeSpectrum sp;
    sp.n = css.n();
    sp.d = css.d();
    css.for_each_in_coset(Word::zero(css.d(), css.n()), [&](const Word& w) {
        ++sp.counts[type_of(w).counts];
    });
    return sp;
}

BalanceReport is_balanced(const CssCode& css) {
    const int d = css.d(), n = css.n();
    const TypeSpectrum sp = type_spectrum(css);
    BalanceReport rep;
    rep.threshold = static_cast<double>(num_types(n, d)) *
                    std::pow(static_cast<double>(d), static_cast<double>(-css.kappa() + d - 1));
    rep.balanced = true;
    std::vector<long long> zero_type(d, 0), ones_type(d, 0);
    zero_type[0] = n;
    if (d == 2) ones_type[1] = n;
    for (const auto& [counts, lambda] : sp.counts) {
        if (counts == zero_type) continue;
        if (d == 2 && counts == ones_type) continue;
        const TypeDist q(n, counts);
        const double ratio = static_cast<double>(lambda) / static_cast<double>(type_class_size(q));
        if (ratio > rep.worst_ratio) rep.worst_ratio = ratio;
        if (ratio > rep.threshold && !rep.has_witness) {
            rep.balanced = false;
            rep.has_witness = true;
            rep.witness = q;
        }
    }
    return rep;
}

CssCode search_balanced(int d, int n, int kappa, Rng rng, int max_tries, DecodeRule rule, uint64_t cap) {
    if (!is_prime(d)) throw usage_error("modulus must be prime");
    if (kappa < 0 || 2 * kappa > n) throw usage_error("kappa must satisfy 0 <= kappa <= n/2");
    if (d == 2 && n % 2 != 0) throw usage_error("D2_RULE_VIOLATION: length must be even when d = 2");

    const bool exhaustive_ok = n * std::log2(static_cast<double>(d)) <= 20.0;
    const int inner_draws = 256 + 32 * n;

    for (int attempt = 1; attempt <= max_tries; ++attempt) {
        std::vector<Word> basis;
        int forced = 0;
        if (d == 2 && kappa >= 1) {
            basis.push_back(Word::ones(d, n));
            forced = 1;
        }
        bool stuck_forever = false;
        while (static_cast<int>(basis.size()) < kappa) {
            const Rref span = rref(d, n, basis);
            auto admissible = [&](const Word& x) {
                if (span.contains(x)) return false;
                if (dot(x, x) != 0) return false;
                for (const Word& b : basis)
                    if (dot(x, b) != 0) return false;
                return true;
            };
            bool extended = false;
            for (int t = 0; t < inner_draws; ++t) {
                Word x = Word::zero(d, n);
                for (int i = 0; i < n; ++i) x.digits[i] = static_cast<uint8_t>(rng.below(d));
                if (admissible(x)) {
                    basis.push_back(std::move(x));
                    extended = true;
                    break;
                }
            }
            if (!extended && exhaustive_ok) {
                bool any = false;
                for_each_word(d, n, [&](const Word& x) {
                    if (!any && admissible(x)) any = true;
                });
                if (!any) {
                    // no admissible extension exists; if the prefix was forced
                    // no retry can help
                    if (static_cast<int>(basis.size()) <= forced) stuck_forever = true;
                    break;
                }
                continue;  // candidates exist, keep drawing
            }
            if (!extended) break;
        }
        if (stuck_forever)
            throw search_failure("NOT_FOUND: no self-orthogonal extension exists (after " +
                                     std::to_string(attempt) + " tries)",
                                 attempt);
        if (static_cast<int>(basis.size()) != kappa) continue;
        CssCode css = CssCode::build(LinearCode(d, n, basis), rule, cap);
        if (is_balanced(css).balanced) return css;
    }
    throw search_failure("NOT_FOUND: no balanced code after " + std::to_string(max_tries) + " tries",
                         max_tries);
}

void CodeBank::add(std::shared_ptr<const CssCode> code) {
    const auto key = std::make_tuple(code->d(), code->n(), code->k());
    codes_[key] = std::move(code);
}

std::shared_ptr<const CssCode> CodeBank::find(int d, int n, int k) const {
    auto it = codes_.find(std::make_tuple(d, n, k));
    return it == codes_.end() ? nullptr : it->second;
}

std::vector<int> CodeBank::lengths(int d) const {
    std::vector<int> out;
    for (const auto& [key, _] : codes_) {
        if (std::get<0>(key) == d && (out.empty() || out.back() != std::get<1>(key)))
            out.push_back(std::get<1>(key));
    }
    return out;
}

std::vector<int> CodeBank::key_sizes(int d, int n) const {
    std::vector<int> out;
    for (const auto& [key, _] : codes_) {
        if (std::get<0>(key) == d && std::get<1>(key) == n) out.push_back(std::get<2>(key));
    }
    return out;
}

namespace {

void write_row(std::ostream& os, const Word& w) {
    for (uint8_t x : w.digits) os << static_cast<char>('0' + x);
    os << '\n';
}

Word read_row(std::istream& is, int d, int n) {
    std::string line;
    if (!std::getline(is, line)) throw usage_error("truncated code bank record");
    if (static_cast<int>(line.size()) != n) throw usage_error("code bank row has wrong length");
    Word w = Word::zero(d, n);
    for (int i = 0; i < n; ++i) {
        const char c = line[i];
        if (c < '0' || c >= '0' + d) throw usage_error("code bank digit out of range");
        w.digits[i] = static_cast<uint8_t>(c - '0');
    }
    return w;
}

}  // namespace

void CodeBank::save(std::ostream& os) const {
    for (const auto& [key, code] : codes_) {
        os << code->d() << ' ' << code->n() << ' ' << code->kappa() << ' ' << code->k() << '\n';
        for (const Word& g : code->code().basis) write_row(os, g);
        for (const Word& h : code->h_basis()) write_row(os, h);
    }
}

void CodeBank::save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw usage_error("cannot open code bank file for writing: " + path);
    save(os);
}

CodeBank CodeBank::load(std::istream& is, DecodeRule rule) {
    CodeBank bank;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream hs(line);
        int d = 0, n = 0, kappa = 0, k = 0;
        if (!(hs >> d >> n >> kappa >> k)) throw usage_error("malformed code bank header: " + line);
        if (k != n - 2 * kappa) throw usage_error("code bank header violates k = n - 2 kappa");
        std::vector<Word> g_rows, h_rows;
        for (int i = 0; i < kappa; ++i) g_rows.push_back(read_row(is, d, n));
        for (int i = 0; i < k; ++i) h_rows.push_back(read_row(is, d, n));
        bank.add(std::make_shared<CssCode>(LinearCode(d, n, std::move(g_rows)), std::move(h_rows), rule));
    }
    return bank;
}

CodeBank CodeBank::load_file(const std::string& path, DecodeRule rule) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw usage_error("cannot open code bank file: " + path);
    return CodeBank::load(is, rule);
}

}  // namespace cssqkd
