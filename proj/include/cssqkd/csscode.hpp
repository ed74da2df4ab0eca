#ifndef CSSQKD_CSSCODE_HPP
#define CSSQKD_CSSCODE_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "cssqkd/gfvec.hpp"
#include "cssqkd/rng.hpp"
#include "cssqkd/typesys.hpp"

namespace cssqkd {

/// Rule used to pick the representative of each coset of C-perp.
enum class DecodeRule {
    MinEntropy,      ///< least H(type(word)), the universal default
    MinCondEntropy,  ///< least (H(type(first half)) + H(type(second half))) / 2
    MinHamming,      ///< least Hamming weight
};

std::string to_string(DecodeRule rule);
DecodeRule decode_rule_from_string(const std::string& s);

/// CSS code built from a self-orthogonal C: generator rows g_1..g_kappa,
/// completion rows h_1..h_k extending them to a basis of C-perp, and a
/// decoding rule that defines the transversal Gamma pointwise.
///
/// Representatives are computed on demand (one coset enumeration per distinct
/// syndrome) and memoized; ties are broken by the lexicographically smallest
/// word with digit order 0 < 1 < ... < d-1 and the first position most
/// significant.
class CssCode {
public:
    /// Uses the h rows as given (needed for bit-exact bank round trips).
    CssCode(LinearCode c, std::vector<Word> h_rows, DecodeRule rule = DecodeRule::MinEntropy,
            uint64_t enum_cap = kDefaultEnumCap);

    /// Completes C to a basis of C-perp deterministically.
    static CssCode build(LinearCode c, DecodeRule rule = DecodeRule::MinEntropy,
                         uint64_t enum_cap = kDefaultEnumCap);

    int d() const { return c_.d; }
    int n() const { return c_.n; }
    int kappa() const { return c_.dim(); }
    int k() const { return static_cast<int>(h_.size()); }
    DecodeRule rule() const { return rule_; }
    const LinearCode& code() const { return c_; }
    const std::vector<Word>& h_basis() const { return h_; }
    /// Basis of C-perp: the g rows followed by the h rows.
    const LinearCode& dual() const { return dual_; }

    std::vector<uint8_t> syndrome_of(const Word& w) const { return syndrome(w, c_); }
    bool in_c(const Word& w) const;
    bool in_dual(const Word& w) const;

    /// The unique word minimizing the rule's objective in the coset of C-perp
    /// with the given syndrome.
    Word coset_representative(const std::vector<uint8_t>& synd) const;

    /// Whether e lies in Gamma' = Gamma + C, i.e. e is correctable up to
    /// degeneracy: coset_representative(syndrome(e)) == e modulo C.
    bool correctable_word(const Word& e) const;
    bool correctable(const Word& e_x, const Word& e_z) const;

    /// Key map f: sigma -> sum_i sigma_i h_i (representative of the coset
    /// C + sum sigma_i h_i).
    Word key_encode(const std::vector<uint8_t>& sigma) const;
    /// Inverse: the unique sigma with w - sum sigma_i h_i in C. Requires
    /// w in C-perp.
    std::vector<uint8_t> key_decode(const Word& w) const;

    /// Visit the coset of C-perp containing `member` (cap-guarded).
    void for_each_in_coset(const Word& member, const std::function<void(const Word&)>& fn) const;

private:
    LinearCode c_;
    std::vector<Word> h_;
    LinearCode dual_;
    DecodeRule rule_;
    uint64_t enum_cap_;

    Rref rref_c_;
    Rref rref_dual_;
    std::vector<Word> coset_prefix_;  // odometer prefix sums over dual basis
    // syndrome solve: x[pivot_i] = (T s)_i gives a word with syndrome s
    std::vector<std::vector<uint8_t>> synd_transform_;
    std::vector<int> synd_pivots_;
    // key decode: coefficients in rref(dual) basis -> coefficients in (g; h)
    std::vector<std::vector<uint8_t>> key_transform_;
    std::vector<double> clogc_;  // c * ln c table for objective evaluation

    // memoized representatives; tolerates concurrent lookups and idempotent
    // inserts (the rule is deterministic, so duplicates agree)
    struct RepMemo {
        std::map<std::vector<uint8_t>, Word> map;
        std::mutex mutex;
    };
    std::unique_ptr<RepMemo> memo_ = std::make_unique<RepMemo>();

    double objective(const Word& w) const;
    Word solve_syndrome(const std::vector<uint8_t>& synd) const;
};

/// Exact counts Lambda(Q, C-perp) of dual words per type.
struct TypeSpectrum {
    long long n = 0;
    int d = 2;
    std::map<std::vector<long long>, uint64_t> counts;

    uint64_t count(const TypeDist& q) const;
    uint64_t total() const;
};

TypeSpectrum type_spectrum(const CssCode& css);

/// Balanced-spectrum verdict: Lambda(Q, C-perp) / |T_Q| <= |P_n| d^(-kappa+d-1)
/// for every type except type(0^n) (and type(1^n) when d = 2). The witness is
/// the first violating type, if any.
struct BalanceReport {
    bool balanced = false;
    double worst_ratio = 0.0;
    double threshold = 0.0;
    bool has_witness = false;
    TypeDist witness;
};

BalanceReport is_balanced(const CssCode& css);

/// Random search for a balanced code: repeatedly grow a self-orthogonal basis
/// (seeded with 1^n when d = 2) and keep the first candidate passing
/// is_balanced. Throws search_failure after max_tries attempts, or immediately
/// when no admissible extension exists at a forced prefix.
struct search_failure : std::runtime_error {
    int tries = 0;
    explicit search_failure(const std::string& msg, int tries_) : std::runtime_error(msg), tries(tries_) {}
};

CssCode search_balanced(int d, int n, int kappa, Rng rng, int max_tries = 200,
                        DecodeRule rule = DecodeRule::MinEntropy, uint64_t cap = kDefaultEnumCap);

/// Bank of codes keyed by (d, n, k). The text format is line oriented, one
/// record per code: header "d n kappa k", then kappa generator rows and k
/// h-rows with digits as characters. Round trips are byte exact.
class CodeBank {
public:
    void add(std::shared_ptr<const CssCode> code);
    std::shared_ptr<const CssCode> find(int d, int n, int k) const;
    /// Sorted lengths available for modulus d.
    std::vector<int> lengths(int d) const;
    /// Sorted key sizes available for (d, n).
    std::vector<int> key_sizes(int d, int n) const;
    size_t size() const { return codes_.size(); }
    bool empty() const { return codes_.empty(); }

    void save(std::ostream& os) const;
    void save_file(const std::string& path) const;
    static CodeBank load(std::istream& is, DecodeRule rule = DecodeRule::MinEntropy);
    static CodeBank load_file(const std::string& path, DecodeRule rule = DecodeRule::MinEntropy);

private:
    std::map<std::tuple<int, int, int>, std::shared_ptr<const CssCode>> codes_;
};

}  // namespace cssqkd

#endif
