#ifndef CSSQKD_GFVEC_HPP
#define CSSQKD_GFVEC_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "cssqkd/errors.hpp"

namespace cssqkd {

/// Default cap on coset/word enumerations (number of words).
inline constexpr uint64_t kDefaultEnumCap = uint64_t{1} << 24;

/// A word over F_d = Z/dZ, d prime, stored as one residue per digit.
struct Word {
    int d = 2;
    std::vector<uint8_t> digits;

    Word() = default;
    Word(int d_, std::vector<uint8_t> digits_);
    static Word zero(int d, int n) { return Word(d, std::vector<uint8_t>(n, 0)); }
    static Word ones(int d, int n) { return Word(d, std::vector<uint8_t>(n, 1)); }

    int n() const { return static_cast<int>(digits.size()); }
    bool is_zero() const;

    bool operator==(const Word&) const = default;
    /// Lexicographic, digit order 0 < 1 < ... < d-1, first position most significant.
    bool operator<(const Word& o) const { return digits < o.digits; }
};

int dot(const Word& u, const Word& v);
Word add(const Word& u, const Word& v);
Word sub(const Word& u, const Word& v);
Word neg(const Word& u);
Word scale(const Word& u, int c);

/// Multiplicative inverse mod prime d.
int inv_mod(int a, int d);
bool is_prime(int d);

/// A linear code given by a generator basis (rows linearly independent).
struct LinearCode {
    int d = 2;
    int n = 0;
    std::vector<Word> basis;

    LinearCode() = default;
    /// Validates row independence; throws usage_error otherwise.
    LinearCode(int d_, int n_, std::vector<Word> basis_);

    int dim() const { return static_cast<int>(basis.size()); }
    uint64_t size() const;  // d^dim, throws resource_error on overflow
};

/// Row-reduced echelon form mod d. Returns the nonzero reduced rows and the
/// pivot column of each; pivot choice is the first nonzero column, so the
/// result is deterministic.
struct Rref {
    int d = 2;
    int n = 0;
    std::vector<Word> rows;
    std::vector<int> pivots;

    int rank() const { return static_cast<int>(rows.size()); }
    /// Reduce w against the rows; returns the residual (zero iff w in span).
    Word residual(const Word& w) const;
    bool contains(const Word& w) const { return residual(w).is_zero(); }
};

Rref rref(int d, int n, const std::vector<Word>& rows);

/// Basis of the dual code C-perp = { y : x.y = 0 for all x in C }.
LinearCode dual_basis(const LinearCode& code);

/// Syndrome (w.g_1, ..., w.g_kappa) against the code's basis rows.
std::vector<uint8_t> syndrome(const Word& w, const LinearCode& code);

/// Visit every word of rep + C-perp exactly once, where C-perp is the dual of
/// `code`. Throws resource_error if d^(n-kappa) exceeds `cap`.
void for_each_coset_word(const LinearCode& code, const Word& rep,
                         const std::function<void(const Word&)>& fn,
                         uint64_t cap = kDefaultEnumCap);

/// Materialized coset (same contract as for_each_coset_word).
std::vector<Word> enumerate_coset(const LinearCode& code, const Word& rep,
                                  uint64_t cap = kDefaultEnumCap);

/// Visit all d^n words of F_d^n in lexicographic order (cap-guarded).
void for_each_word(int d, int n, const std::function<void(const Word&)>& fn,
                   uint64_t cap = kDefaultEnumCap);

/// Pack a word into a u64 index (base-d digits, position 0 least significant).
/// Requires d^n to fit; throws resource_error otherwise.
uint64_t pack_word(const Word& w);
Word unpack_word(int d, int n, uint64_t v);

}  // namespace cssqkd

#endif
