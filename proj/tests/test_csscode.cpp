#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "cssqkd/csscode.hpp"

using namespace cssqkd;
using doctest::Approx;

namespace {

Word w2(std::initializer_list<int> digits) {
    std::vector<uint8_t> v;
    for (int x : digits) v.push_back(static_cast<uint8_t>(x));
    return Word(2, v);
}

CssCode four_repetition(DecodeRule rule = DecodeRule::MinEntropy) {
    return CssCode::build(LinearCode(2, 4, {w2({1, 1, 1, 1})}), rule);
}

}  // namespace

TEST_CASE("build_css dimensions") {
    const CssCode css = four_repetition();
    CHECK(css.kappa() == 1);
    CHECK(css.k() == 2);
    CHECK(css.dual().dim() == 3);

    const CssCode css3 = CssCode::build(LinearCode(3, 3, {Word(3, {1, 1, 1})}));
    CHECK(css3.kappa() == 1);
    CHECK(css3.k() == 1);
}

TEST_CASE("build_css rejections") {
    CHECK_THROWS_WITH_AS(CssCode::build(LinearCode(2, 4, {w2({1, 0, 0, 0})})),
                         doctest::Contains("NOT_SELF_ORTHOGONAL"), usage_error);
    // d=2 odd length (110 is self-orthogonal, so only the length rule fires)
    CHECK_THROWS_WITH_AS(CssCode::build(LinearCode(2, 3, {Word(2, {1, 1, 0})})),
                         doctest::Contains("D2_RULE_VIOLATION"), usage_error);
    // d=2 without the all-ones word
    CHECK_THROWS_WITH_AS(CssCode::build(LinearCode(2, 4, {w2({1, 1, 0, 0})})),
                         doctest::Contains("D2_RULE_VIOLATION"), usage_error);
}

TEST_CASE("coset representative: zero syndrome and min-entropy tie break") {
    const CssCode css = four_repetition();
    CHECK(css.coset_representative({0}) == Word::zero(2, 4));
    // all odd-weight words tie on entropy; lexicographic minimum is 0001
    CHECK(css.coset_representative({1}) == w2({0, 0, 0, 1}));
}

TEST_CASE("min-entropy rule is optimal in every coset") {
    for (int d : {2, 3}) {
        const CssCode css = d == 2 ? four_repetition() : CssCode::build(LinearCode(3, 3, {Word(3, {1, 1, 1})}));
        std::set<std::vector<uint8_t>> synds;
        for_each_word(d, css.n(), [&](const Word& w) { synds.insert(css.syndrome_of(w)); });
        for (const auto& s : synds) {
            const Word rep = css.coset_representative(s);
            CHECK(css.syndrome_of(rep) == s);  // round trip
            const double h_rep = entropy(type_of(rep).as_dist(), d);
            css.for_each_in_coset(rep, [&](const Word& u) {
                CHECK(h_rep <= entropy(type_of(u).as_dist(), d) + 1e-12);
            });
        }
    }
}

TEST_CASE("min hamming rule") {
    const CssCode css = four_repetition(DecodeRule::MinHamming);
    CHECK(css.coset_representative({0}) == Word::zero(2, 4));
    // weight-1 words beat weight-3 ones; 0001 is the lexicographic least
    CHECK(css.coset_representative({1}) == w2({0, 0, 0, 1}));
    std::set<std::vector<uint8_t>> synds;
    for_each_word(2, 4, [&](const Word& w) { synds.insert(css.syndrome_of(w)); });
    for (const auto& s : synds) {
        const Word rep = css.coset_representative(s);
        const auto weight = [](const Word& w) {
            int wt = 0;
            for (uint8_t x : w.digits) wt += (x != 0);
            return wt;
        };
        css.for_each_in_coset(rep, [&](const Word& u) { CHECK(weight(rep) <= weight(u)); });
    }
}

TEST_CASE("min conditional entropy representative matches enumeration oracle") {
    const CssCode css = four_repetition(DecodeRule::MinCondEntropy);
    std::set<std::vector<uint8_t>> synds;
    for_each_word(2, 4, [&](const Word& w) { synds.insert(css.syndrome_of(w)); });
    for (const auto& s : synds) {
        const Word rep = css.coset_representative(s);
        // oracle: enumerate the coset, apply the averaged half-entropy rule
        bool found = false;
        double best = 0.0;
        Word best_w;
        css.for_each_in_coset(rep, [&](const Word& u) {
            const Word lo(2, {u.digits[0], u.digits[1]});
            const Word hi(2, {u.digits[2], u.digits[3]});
            const double obj =
                (entropy(type_of(lo).as_dist(), 2) + entropy(type_of(hi).as_dist(), 2)) / 2.0;
            if (!found || obj < best - 1e-12 || (obj <= best + 1e-12 && u < best_w)) {
                found = true;
                best = obj;
                best_w = u;
            }
        });
        CHECK(rep == best_w);
    }
}

TEST_CASE("type spectrum") {
    const CssCode css = four_repetition();
    const TypeSpectrum sp = type_spectrum(css);
    CHECK(sp.total() == 8);  // d^(n-kappa)
    CHECK(sp.count(TypeDist(4, {2, 2})) == 6);
    CHECK(sp.count(TypeDist(4, {4, 0})) == 1);
    CHECK(sp.count(TypeDist(4, {0, 4})) == 1);

    // C-perp = F_d^n: every type count equals |T_Q|
    const CssCode full = CssCode::build(LinearCode(3, 2, std::vector<Word>{}));
    const TypeSpectrum spf = type_spectrum(full);
    for (const TypeDist& q : enumerate_types(2, 3)) CHECK(spf.count(q) == type_class_size(q));
}

TEST_CASE("is_balanced") {
    // kappa = 0: ratio 1 is far below the threshold
    CHECK(is_balanced(CssCode::build(LinearCode(3, 2, std::vector<Word>{}))).balanced);
    CHECK(is_balanced(four_repetition()).balanced);

    // repetition-heavy self-dual code at n=20: the ten weight-2 pair words
    // concentrate one type above the threshold
    std::vector<Word> rows;
    for (int i = 0; i < 9; ++i) {
        Word w = Word::zero(2, 20);
        w.digits[2 * i] = 1;
        w.digits[2 * i + 1] = 1;
        rows.push_back(w);
    }
    rows.push_back(Word::ones(2, 20));
    const CssCode skew = CssCode::build(LinearCode(2, 20, rows));
    const BalanceReport rep = is_balanced(skew);
    CHECK_FALSE(rep.balanced);
    CHECK(rep.has_witness);
    // both the ten weight-2 pair words and their weight-18 complements violate
    const bool w2_witness = rep.witness.counts == std::vector<long long>{18, 2};
    const bool w18_witness = rep.witness.counts == std::vector<long long>{2, 18};
    CHECK((w2_witness || w18_witness));
    const TypeSpectrum sp = type_spectrum(skew);
    CHECK(static_cast<double>(sp.count(TypeDist(20, {18, 2}))) /
              static_cast<double>(type_class_size(TypeDist(20, {18, 2}))) >
          rep.threshold);
}

TEST_CASE("search_balanced") {
    const CssCode css = search_balanced(2, 8, 2, Rng(42));
    CHECK(css.n() == 8);
    CHECK(css.kappa() == 2);
    CHECK(css.in_c(Word::ones(2, 8)));
    CHECK(is_balanced(css).balanced);
    // self-orthogonality of the found basis
    for (const Word& a : css.code().basis)
        for (const Word& b : css.code().basis) CHECK(dot(a, b) == 0);

    CHECK_THROWS_AS(search_balanced(2, 8, 5, Rng(1)), usage_error);  // kappa > n/2
    CHECK_THROWS_AS(search_balanced(3, 2, 1, Rng(1)), search_failure);
}

TEST_CASE("key map") {
    const CssCode css(LinearCode(2, 4, {w2({1, 1, 1, 1})}), {w2({1, 1, 0, 0}), w2({1, 0, 1, 0})});
    CHECK(css.key_encode({0, 0}) == Word::zero(2, 4));
    CHECK(css.key_decode(w2({0, 1, 1, 0})) == std::vector<uint8_t>{1, 1});
    CHECK_THROWS_AS(css.key_decode(w2({1, 0, 0, 0})), usage_error);  // not in C-perp

    Rng rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<uint8_t> sigma(css.k());
        for (auto& s : sigma) s = static_cast<uint8_t>(rng.below(2));
        Word w = css.key_encode(sigma);
        if (rng.bernoulli(0.5)) w = add(w, css.code().basis[0]);  // random c in C
        CHECK(css.key_decode(w) == sigma);
    }
}

TEST_CASE("correctable") {
    const CssCode css = four_repetition();
    CHECK(css.correctable(Word::zero(2, 4), Word::zero(2, 4)));
    // degenerate error: e_x in C
    CHECK(css.correctable(w2({1, 1, 1, 1}), Word::zero(2, 4)));
    // weight-2 error: its coset representative has weight 2 as well but is a
    // different word, so membership of the difference in C decides
    for_each_word(2, 4, [&](const Word& e) {
        const Word rep = css.coset_representative(css.syndrome_of(e));
        CHECK(css.correctable_word(e) == css.in_c(sub(e, rep)));
    });
    // degeneracy invariance: adding codewords of C never changes the verdict
    const Word c = w2({1, 1, 1, 1});
    for_each_word(2, 4, [&](const Word& e) {
        CHECK(css.correctable_word(e) == css.correctable_word(add(e, c)));
    });
}

TEST_CASE("gamma-prime partition is injective on correctable words") {
    const CssCode css = four_repetition();
    std::set<std::pair<std::vector<uint8_t>, std::vector<uint8_t>>> seen;
    int correctable_count = 0;
    for_each_word(2, 4, [&](const Word& e) {
        if (!css.correctable_word(e)) return;
        ++correctable_count;
        const Word rep = css.coset_representative(css.syndrome_of(e));
        seen.insert({css.syndrome_of(e), sub(e, rep).digits});
    });
    CHECK(static_cast<int>(seen.size()) == correctable_count);
    CHECK(correctable_count == 4);  // d^(2 kappa) words in Gamma + C
}

TEST_CASE("code bank round trip is byte exact") {
    CodeBank bank;
    bank.add(std::make_shared<CssCode>(four_repetition()));
    bank.add(std::make_shared<CssCode>(CssCode::build(LinearCode(3, 3, {Word(3, {1, 1, 1})}))));
    std::ostringstream first;
    bank.save(first);
    std::istringstream in(first.str());
    const CodeBank reloaded = CodeBank::load(in);
    std::ostringstream second;
    reloaded.save(second);
    CHECK(first.str() == second.str());
    CHECK(reloaded.find(2, 4, 2) != nullptr);
    CHECK(reloaded.find(3, 3, 1) != nullptr);
    CHECK(reloaded.find(2, 8, 2) == nullptr);
    CHECK(reloaded.lengths(2) == std::vector<int>{4});
    CHECK(reloaded.key_sizes(2, 4) == std::vector<int>{2});
}
