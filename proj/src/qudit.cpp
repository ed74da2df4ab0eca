#include "cssqkd/qudit.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace cssqkd {

CMat CMat::identity(int n) {
    CMat m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

CMat mul(const CMat& x, const CMat& y) {
    if (x.cols != y.rows) throw usage_error("matrix shape mismatch");
    CMat out(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i) {
        for (int k = 0; k < x.cols; ++k) {
            const cplx v = x.at(i, k);
            if (v == cplx{}) continue;
            for (int j = 0; j < y.cols; ++j) out.at(i, j) += v * y.at(k, j);
        }
    }
    return out;
}

CMat adjoint(const CMat& x) {
    CMat out(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) out.at(j, i) = std::conj(x.at(i, j));
    return out;
}

CMat add(const CMat& x, const CMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw usage_error("matrix shape mismatch");
    CMat out = x;
    for (size_t i = 0; i < out.a.size(); ++i) out.a[i] += y.a[i];
    return out;
}

CMat scale(const CMat& x, cplx c) {
    CMat out = x;
    for (auto& v : out.a) v *= c;
    return out;
}

cplx trace(const CMat& x) {
    cplx t = 0.0;
    for (int i = 0; i < std::min(x.rows, x.cols); ++i) t += x.at(i, i);
    return t;
}

double max_abs_diff(const CMat& x, const CMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw usage_error("matrix shape mismatch");
    double m = 0.0;
    for (size_t i = 0; i < x.a.size(); ++i) m = std::max(m, std::abs(x.a[i] - y.a[i]));
    return m;
}

WeylOps weyl_ops(int d) {
    if (!is_prime(d)) throw usage_error("modulus must be prime");
    WeylOps w;
    w.d = d;
    w.omega = std::exp(cplx(0.0, 2.0 * std::numbers::pi / d));
    w.x = CMat(d, d);
    w.z = CMat(d, d);
    w.fourier = CMat(d, d);
    for (int j = 0; j < d; ++j) {
        w.x.at((j - 1 + d) % d, j) = 1.0;  // X|j> = |j-1>
        w.z.at(j, j) = std::pow(w.omega, j);
        for (int l = 0; l < d; ++l) w.fourier.at(j, l) = std::pow(w.omega, j * l) / std::sqrt(static_cast<double>(d));
    }
    return w;
}

CMat weyl_op(const WeylOps& w, int s, int t) {
    CMat m = CMat::identity(w.d);
    for (int i = 0; i < s; ++i) m = mul(w.x, m);
    for (int i = 0; i < t; ++i) m = mul(m, w.z);
    return m;
}

void check_trace_preserving(const KrausChannel& ch, double tol) {
    if (ch.ops.empty()) throw usage_error("channel has no Kraus operators");
    CMat s(ch.d, ch.d);
    for (const CMat& a : ch.ops) {
        if (a.rows != ch.d || a.cols != ch.d) throw usage_error("Kraus operator shape mismatch");
        s = add(s, mul(adjoint(a), a));
    }
    if (max_abs_diff(s, CMat::identity(ch.d)) > tol)
        throw usage_error("channel is not trace-preserving");
}

JointDist channel_to_dist(const KrausChannel& ch) {
    check_trace_preserving(ch);
    const int d = ch.d;
    const WeylOps w = weyl_ops(d);
    std::vector<double> p(static_cast<size_t>(d) * d, 0.0);
    for (int s = 0; s < d; ++s) {
        for (int t = 0; t < d; ++t) {
            const CMat nst = weyl_op(w, s, t);
            double v = 0.0;
            for (const CMat& a : ch.ops) {
                const cplx tr = trace(mul(adjoint(a), nst));
                v += std::norm(tr / static_cast<double>(d));
            }
            p[static_cast<size_t>(s) * d + t] = v;
        }
    }
    double sum = 0.0;
    for (double& v : p) {
        if (v < -1e-12) throw usage_error("channel distribution has a negative entry");
        if (v < 0.0) v = 0.0;
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-10) throw usage_error("channel distribution does not sum to 1");
    for (double& v : p) v /= sum;
    return JointDist(d, std::move(p));
}

KrausChannel fourier_conjugate(const KrausChannel& ch) {
    const WeylOps w = weyl_ops(ch.d);
    const CMat udag = adjoint(w.fourier);
    KrausChannel out;
    out.d = ch.d;
    for (const CMat& a : ch.ops) out.ops.push_back(mul(udag, mul(a, w.fourier)));
    return out;
}

double switch3_deviation(const KrausChannel& ch) {
    const int d = ch.d;
    const JointDist pa = channel_to_dist(ch);
    const JointDist pap = channel_to_dist(fourier_conjugate(ch));
    double dev = 0.0;
    for (int s = 0; s < d; ++s)
        for (int t = 0; t < d; ++t) dev = std::max(dev, std::abs(pap.at(s, t) - pa.at(t, (d - s) % d)));
    return dev;
}

namespace {

cplx gaussian(Rng& rng) {
    // Box-Muller, one complex draw
    const double u1 = std::max(rng.unit(), 1e-300);
    const double u2 = rng.unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * std::numbers::pi * u2), r * std::sin(2.0 * std::numbers::pi * u2)};
}

// Cholesky factor L (lower) of a Hermitian positive definite matrix.
CMat cholesky(const CMat& s) {
    const int n = s.rows;
    CMat l(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            cplx acc = s.at(i, j);
            for (int k = 0; k < j; ++k) acc -= l.at(i, k) * std::conj(l.at(j, k));
            if (i == j) {
                const double re = acc.real();
                if (re <= 0.0) throw usage_error("matrix is not positive definite");
                l.at(i, j) = std::sqrt(re);
            } else {
                l.at(i, j) = acc / l.at(j, j);
            }
        }
    }
    return l;
}

// Inverse of an upper-triangular matrix by back substitution.
CMat inv_upper(const CMat& u) {
    const int n = u.rows;
    CMat inv(n, n);
    for (int col = 0; col < n; ++col) {
        std::vector<cplx> x(n);
        for (int i = n - 1; i >= 0; --i) {
            cplx acc = (i == col) ? cplx{1.0} : cplx{0.0};
            for (int j = i + 1; j < n; ++j) acc -= u.at(i, j) * x[j];
            x[i] = acc / u.at(i, i);
        }
        for (int i = 0; i < n; ++i) inv.at(i, col) = x[i];
    }
    return inv;
}

}  // namespace

KrausChannel random_kraus_mix(const KrausChannel& ch, Rng& rng) {
    const int m = static_cast<int>(ch.ops.size());
    // random unitary on the operator index via Gram-Schmidt of a Gaussian matrix
    CMat g(m, m);
    for (auto& v : g.a) v = gaussian(rng);
    for (int c = 0; c < m; ++c) {
        for (int prev = 0; prev < c; ++prev) {
            cplx ip = 0.0;
            for (int r = 0; r < m; ++r) ip += std::conj(g.at(r, prev)) * g.at(r, c);
            for (int r = 0; r < m; ++r) g.at(r, c) -= ip * g.at(r, prev);
        }
        double norm = 0.0;
        for (int r = 0; r < m; ++r) norm += std::norm(g.at(r, c));
        norm = std::sqrt(norm);
        for (int r = 0; r < m; ++r) g.at(r, c) /= norm;
    }
    KrausChannel out;
    out.d = ch.d;
    for (int j = 0; j < m; ++j) {
        CMat b(ch.d, ch.d);
        for (int i = 0; i < m; ++i) b = add(b, scale(ch.ops[i], g.at(j, i)));
        out.ops.push_back(std::move(b));
    }
    return out;
}

KrausChannel random_channel(int d, int num_ops, Rng& rng) {
    if (num_ops < 1) throw usage_error("need at least one Kraus operator");
    KrausChannel ch;
    ch.d = d;
    std::vector<CMat> g(num_ops, CMat(d, d));
    CMat s(d, d);
    for (CMat& m : g) {
        for (auto& v : m.a) v = gaussian(rng);
        s = add(s, mul(adjoint(m), m));
    }
    const CMat l = cholesky(s);
    const CMat m = inv_upper(adjoint(l));  // (L^dag)^(-1)
    for (const CMat& gi : g) ch.ops.push_back(mul(gi, m));
    return ch;
}

KrausChannel identity_channel(int d) {
    KrausChannel ch;
    ch.d = d;
    ch.ops.push_back(CMat::identity(d));
    return ch;
}

namespace {

KrausChannel two_term_channel(int d, double q, const CMat& noisy) {
    if (!(q >= 0.0 && q <= 1.0)) throw usage_error("channel parameter outside [0,1]");
    KrausChannel ch;
    ch.d = d;
    ch.ops.push_back(scale(CMat::identity(d), std::sqrt(1.0 - q)));
    ch.ops.push_back(scale(noisy, std::sqrt(q)));
    return ch;
}

}  // namespace

KrausChannel dephasing_channel(int d, double q) { return two_term_channel(d, q, weyl_ops(d).z); }
KrausChannel flip_channel(int d, double q) { return two_term_channel(d, q, weyl_ops(d).x); }

KrausChannel depolarizing_channel(int d, double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw usage_error("channel parameter outside [0,1]");
    const WeylOps w = weyl_ops(d);
    KrausChannel ch;
    ch.d = d;
    ch.ops.push_back(scale(CMat::identity(d), std::sqrt(1.0 - q)));
    const double share = q / (d * d - 1);
    for (int s = 0; s < d; ++s) {
        for (int t = 0; t < d; ++t) {
            if (s == 0 && t == 0) continue;
            ch.ops.push_back(scale(weyl_op(w, s, t), std::sqrt(share)));
        }
    }
    return ch;
}

KrausChannel load_kraus(std::istream& is) {
    int d = 0, count = 0;
    if (!(is >> d >> count)) throw usage_error("malformed Kraus file header");
    if (!is_prime(d) || count < 1) throw usage_error("bad Kraus file dimensions");
    KrausChannel ch;
    ch.d = d;
    for (int o = 0; o < count; ++o) {
        CMat m(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                double re = 0.0, im = 0.0;
                if (!(is >> re >> im)) throw usage_error("truncated Kraus file");
                m.at(i, j) = {re, im};
            }
        }
        ch.ops.push_back(std::move(m));
    }
    check_trace_preserving(ch);
    return ch;
}

KrausChannel load_kraus_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw usage_error("cannot open Kraus file: " + path);
    return load_kraus(is);
}

double spmixed_deviation(const LinearCode& c, const Word& x, const Word& v) {
    const int d = c.d, n = c.n;
    uint64_t dim = 1;
    for (int i = 0; i < n; ++i) {
        dim *= static_cast<uint64_t>(d);
        if (dim > 16) throw resource_error("state dimension exceeds 16");
    }
    const int dd = static_cast<int>(dim);
    for (const Word& g1 : c.basis)
        for (const Word& g2 : c.basis)
            if (dot(g1, g2) != 0) throw usage_error("NOT_SELF_ORTHOGONAL");

    const cplx omega = std::exp(cplx(0.0, 2.0 * std::numbers::pi / d));
    // walk the span of C's basis by odometer
    std::vector<Word> c_words;
    {
        std::vector<int> a(c.dim(), 0);
        Word cur = Word::zero(d, n);
        for (;;) {
            c_words.push_back(cur);
            int j = 0;
            while (j < c.dim() && a[j] == d - 1) {
                a[j] = 0;
                ++j;
            }
            if (j == c.dim()) break;
            ++a[j];
            cur = add(cur, c.basis[j]);
            for (int i = 0; i < j; ++i) cur = add(cur, c.basis[i]);  // wrapped positions
        }
    }
    // one transversal word of F^n / C-perp per syndrome against C's basis
    std::vector<Word> transversal;
    {
        std::map<std::vector<uint8_t>, Word> by_synd;
        for_each_word(d, n, [&](const Word& w) { by_synd.try_emplace(syndrome(w, c), w); });
        for (const auto& [_, w] : by_synd) transversal.push_back(w);
    }

    CMat lhs(dd, dd), rhs(dd, dd);
    const double inv_c = 1.0 / static_cast<double>(c_words.size());
    for (const Word& z : transversal) {
        std::vector<cplx> phi(dd, cplx{});
        for (const Word& w : c_words) {
            const Word ket = add(add(w, v), x);
            phi[pack_word(ket)] += std::pow(omega, dot(z, w)) / std::sqrt(static_cast<double>(c_words.size()));
        }
        for (int i = 0; i < dd; ++i)
            for (int j = 0; j < dd; ++j) lhs.at(i, j) += inv_c * phi[i] * std::conj(phi[j]);
    }
    for (const Word& w : c_words) {
        const uint64_t idx = pack_word(add(add(w, v), x));
        rhs.at(static_cast<int>(idx), static_cast<int>(idx)) += inv_c;
    }
    return max_abs_diff(lhs, rhs);
}

double entangled_basis_gram_deviation(int d) {
    const WeylOps w = weyl_ops(d);
    const int dim = d * d;
    std::vector<std::vector<cplx>> psi;
    for (int s = 0; s < d; ++s) {
        for (int t = 0; t < d; ++t) {
            const CMat nst = weyl_op(w, s, t);
            std::vector<cplx> v(dim, cplx{});
            for (int a = 0; a < d; ++a) {
                for (int b = 0; b < d; ++b) {
                    // |a> tensor N|a>, component (a, b) of the second factor
                    v[a * d + b] += nst.at(b, a) / std::sqrt(static_cast<double>(d));
                }
            }
            psi.push_back(std::move(v));
        }
    }
    double dev = 0.0;
    for (size_t i = 0; i < psi.size(); ++i) {
        for (size_t j = 0; j < psi.size(); ++j) {
            cplx ip = 0.0;
            for (int k = 0; k < dim; ++k) ip += std::conj(psi[i][k]) * psi[j][k];
            dev = std::max(dev, std::abs(ip - (i == j ? cplx{1.0} : cplx{})));
        }
    }
    return dev;
}

}  // namespace cssqkd
