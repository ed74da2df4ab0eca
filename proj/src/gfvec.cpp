#include "cssqkd/gfvec.hpp"

#include <algorithm>
#include <string>

namespace cssqkd {

namespace {

void check_same_shape(const Word& u, const Word& v) {
    if (u.d != v.d) throw usage_error("word modulus mismatch");
    if (u.digits.size() != v.digits.size()) throw usage_error("word length mismatch");
}

}  // namespace

Word::Word(int d_, std::vector<uint8_t> digits_) : d(d_), digits(std::move(digits_)) {
    if (!is_prime(d)) throw usage_error("modulus must be a prime >= 2");
    if (digits.empty()) throw usage_error("word length must be >= 1");
    for (uint8_t x : digits) {
        if (x >= d) throw usage_error("digit out of range for modulus");
    }
}

bool Word::is_zero() const {
    return std::all_of(digits.begin(), digits.end(), [](uint8_t x) { return x == 0; });
}

int dot(const Word& u, const Word& v) {
    check_same_shape(u, v);
    long long s = 0;
    for (size_t i = 0; i < u.digits.size(); ++i) s += static_cast<long long>(u.digits[i]) * v.digits[i];
    return static_cast<int>(s % u.d);
}

Word add(const Word& u, const Word& v) {
    check_same_shape(u, v);
    Word w = u;
    for (size_t i = 0; i < w.digits.size(); ++i) w.digits[i] = static_cast<uint8_t>((w.digits[i] + v.digits[i]) % u.d);
    return w;
}

Word sub(const Word& u, const Word& v) {
    check_same_shape(u, v);
    Word w = u;
    for (size_t i = 0; i < w.digits.size(); ++i)
        w.digits[i] = static_cast<uint8_t>((w.digits[i] + u.d - v.digits[i]) % u.d);
    return w;
}

Word neg(const Word& u) {
    Word w = u;
    for (auto& x : w.digits) x = static_cast<uint8_t>((u.d - x) % u.d);
    return w;
}

Word scale(const Word& u, int c) {
    c %= u.d;
    if (c < 0) c += u.d;
    Word w = u;
    for (auto& x : w.digits) x = static_cast<uint8_t>((x * c) % u.d);
    return w;
}

bool is_prime(int d) {
    if (d < 2) return false;
    for (int p = 2; p * p <= d; ++p)
        if (d % p == 0) return false;
    return true;
}

int inv_mod(int a, int d) {
    a %= d;
    if (a < 0) a += d;
    if (a == 0) throw usage_error("zero has no inverse");
    // Fermat: a^(d-2) mod d, d prime and tiny
    int r = 1;
    for (int e = 0; e < d - 2; ++e) r = (r * a) % d;
    return r;
}

LinearCode::LinearCode(int d_, int n_, std::vector<Word> basis_) : d(d_), n(n_), basis(std::move(basis_)) {
    if (!is_prime(d)) throw usage_error("modulus must be a prime >= 2");
    if (n < 1) throw usage_error("code length must be >= 1");
    for (const Word& w : basis) {
        if (w.d != d || w.n() != n) throw usage_error("basis row shape mismatch");
    }
    if (static_cast<int>(basis.size()) > n) throw usage_error("too many basis rows");
    if (rref(d, n, basis).rank() != static_cast<int>(basis.size()))
        throw usage_error("basis rows are linearly dependent");
}

uint64_t LinearCode::size() const {
    uint64_t s = 1;
    for (int i = 0; i < dim(); ++i) {
        if (s > (~uint64_t{0}) / static_cast<uint64_t>(d)) throw resource_error("code size overflows u64");
        s *= static_cast<uint64_t>(d);
    }
    return s;
}

Rref rref(int d, int n, const std::vector<Word>& rows_in) {
    Rref out;
    out.d = d;
    out.n = n;
    std::vector<Word> rows = rows_in;
    int r = 0;
    for (int col = 0; col < n && r < static_cast<int>(rows.size()); ++col) {
        int piv = -1;
        for (int i = r; i < static_cast<int>(rows.size()); ++i) {
            if (rows[i].digits[col] != 0) {
                piv = i;
                break;
            }
        }
        if (piv < 0) continue;
        std::swap(rows[r], rows[piv]);
        const int s = inv_mod(rows[r].digits[col], d);
        rows[r] = scale(rows[r], s);
        for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
            if (i == r) continue;
            const int c = rows[i].digits[col];
            if (c != 0) rows[i] = sub(rows[i], scale(rows[r], c));
        }
        out.pivots.push_back(col);
        ++r;
    }
    out.rows.assign(rows.begin(), rows.begin() + r);
    return out;
}

Word Rref::residual(const Word& w) const {
    Word res = w;
    for (size_t i = 0; i < rows.size(); ++i) {
        const int c = res.digits[pivots[i]];
        if (c != 0) res = sub(res, scale(rows[i], c));
    }
    return res;
}

LinearCode dual_basis(const LinearCode& code) {
    const int d = code.d, n = code.n;
    const Rref R = rref(d, n, code.basis);
    // Free columns parameterize the kernel: for each free column f, the word
    // with 1 at f and -R[i][f] at pivot column p_i is orthogonal to all rows.
    std::vector<bool> is_pivot(n, false);
    for (int p : R.pivots) is_pivot[p] = true;
    std::vector<Word> basis;
    for (int f = 0; f < n; ++f) {
        if (is_pivot[f]) continue;
        Word w = Word::zero(d, n);
        w.digits[f] = 1;
        for (size_t i = 0; i < R.rows.size(); ++i) {
            const int c = R.rows[i].digits[f];
            w.digits[R.pivots[i]] = static_cast<uint8_t>((d - c) % d);
        }
        basis.push_back(std::move(w));
    }
    return LinearCode(d, n, std::move(basis));
}

std::vector<uint8_t> syndrome(const Word& w, const LinearCode& code) {
    if (w.d != code.d || w.n() != code.n) throw usage_error("word/code shape mismatch");
    std::vector<uint8_t> s(code.basis.size());
    for (size_t j = 0; j < code.basis.size(); ++j) s[j] = static_cast<uint8_t>(dot(w, code.basis[j]));
    return s;
}

void for_each_coset_word(const LinearCode& code, const Word& rep,
                         const std::function<void(const Word&)>& fn, uint64_t cap) {
    if (rep.d != code.d || rep.n() != code.n) throw usage_error("word/code shape mismatch");
    const LinearCode dual = dual_basis(code);
    const int d = code.d;
    const int m = dual.dim();
    uint64_t total = 1;
    for (int i = 0; i < m; ++i) {
        total *= static_cast<uint64_t>(d);
        if (total > cap) throw resource_error("coset enumeration exceeds cap of " + std::to_string(cap) + " words");
    }
    // Odometer over coefficients: incrementing position j adds basis row j and
    // wraps positions < j from d-1 back to 0, i.e. adds prefix_sum(j) overall.
    std::vector<Word> prefix(m, Word::zero(d, code.n));
    for (int j = 0; j < m; ++j) {
        prefix[j] = dual.basis[j];
        if (j > 0) prefix[j] = add(prefix[j], prefix[j - 1]);
    }
    std::vector<int> a(m, 0);
    Word cur = rep;
    for (uint64_t step = 0;; ++step) {
        fn(cur);
        int j = 0;
        while (j < m && a[j] == d - 1) {
            a[j] = 0;
            ++j;
        }
        if (j == m) break;
        ++a[j];
        cur = add(cur, prefix[j]);
    }
}

std::vector<Word> enumerate_coset(const LinearCode& code, const Word& rep, uint64_t cap) {
    std::vector<Word> out;
    for_each_coset_word(code, rep, [&](const Word& w) { out.push_back(w); }, cap);
    return out;
}

void for_each_word(int d, int n, const std::function<void(const Word&)>& fn, uint64_t cap) {
    uint64_t total = 1;
    for (int i = 0; i < n; ++i) {
        total *= static_cast<uint64_t>(d);
        if (total > cap) throw resource_error("word enumeration exceeds cap of " + std::to_string(cap) + " words");
    }
    Word w = Word::zero(d, n);
    for (;;) {
        fn(w);
        int j = n - 1;  // last position least significant: lexicographic order
        while (j >= 0 && w.digits[j] == d - 1) {
            w.digits[j] = 0;
            --j;
        }
        if (j < 0) break;
        ++w.digits[j];
    }
}

uint64_t pack_word(const Word& w) {
    uint64_t v = 0;
    uint64_t base = 1;
    for (int i = 0; i < w.n(); ++i) {
        if (i > 0) {
            if (base > (~uint64_t{0}) / static_cast<uint64_t>(w.d)) throw resource_error("word too long to pack");
            base *= static_cast<uint64_t>(w.d);
        }
        v += base * w.digits[i];
    }
    return v;
}

Word unpack_word(int d, int n, uint64_t v) {
    Word w = Word::zero(d, n);
    for (int i = 0; i < n; ++i) {
        w.digits[i] = static_cast<uint8_t>(v % d);
        v /= d;
    }
    return w;
}

}  // namespace cssqkd
