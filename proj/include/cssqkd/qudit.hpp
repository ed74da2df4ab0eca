#ifndef CSSQKD_QUDIT_HPP
#define CSSQKD_QUDIT_HPP

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

#include "cssqkd/gfvec.hpp"
#include "cssqkd/rng.hpp"
#include "cssqkd/typesys.hpp"

namespace cssqkd {

using cplx = std::complex<double>;

/// Dense complex matrix, row-major. Sized for single digits (d <= 7) and the
/// tiny multi-digit state checks (dimension <= 16).
struct CMat {
    int rows = 0;
    int cols = 0;
    std::vector<cplx> a;

    CMat() = default;
    CMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
    static CMat identity(int n);

    cplx& at(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    cplx at(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

CMat mul(const CMat& x, const CMat& y);
CMat adjoint(const CMat& x);
CMat add(const CMat& x, const CMat& y);
CMat scale(const CMat& x, cplx c);
cplx trace(const CMat& x);
double max_abs_diff(const CMat& x, const CMat& y);

/// Weyl pair on C^d: X|j> = |j-1>, Z|j> = omega^j |j>, omega = e^(2 pi i / d).
struct WeylOps {
    int d;
    cplx omega;
    CMat x;
    CMat z;
    CMat fourier;  // U = d^(-1/2) sum omega^(jl) |j><l|
};

WeylOps weyl_ops(int d);

/// X^s Z^t on C^d.
CMat weyl_op(const WeylOps& w, int s, int t);

/// Completely positive trace-preserving map as Kraus operators A_i.
struct KrausChannel {
    int d = 0;
    std::vector<CMat> ops;
};

/// Verifies sum A_i^dag A_i = I within tol. Throws usage_error otherwise.
void check_trace_preserving(const KrausChannel& ch, double tol = 1e-10);

/// P_A(s,t) = sum_i |Tr(A_i^dag X^s Z^t) / d|^2. Entries are clamped at zero
/// (within -1e-12 slack) and renormalized.
JointDist channel_to_dist(const KrausChannel& ch);

/// A' = U^(-1) A U, Kraus operators U^dag A_i U.
KrausChannel fourier_conjugate(const KrausChannel& ch);

/// max_(s,t) |P_(A')(s,t) - P_A(t, -s)|: the Fourier switch identity residual.
double switch3_deviation(const KrausChannel& ch);

/// Replace the Kraus list A_i by B_j = sum_i V_(ji) A_i for a random unitary V
/// (same channel, different representation).
KrausChannel random_kraus_mix(const KrausChannel& ch, Rng& rng);

/// Random CPTP channel with `num_ops` Kraus operators (Gaussian + whitening).
KrausChannel random_channel(int d, int num_ops, Rng& rng);

/// Named single-digit Pauli-model channels.
KrausChannel identity_channel(int d);
KrausChannel dephasing_channel(int d, double q);   // rho -> (1-q) rho + q Z rho Z^dag
KrausChannel flip_channel(int d, double q);        // rho -> (1-q) rho + q X rho X^dag
KrausChannel depolarizing_channel(int d, double q);  // q spread over the d^2-1 non-identity Weyls

/// Text format: first line "d count", then for each operator d lines of d
/// "re im" pairs.
KrausChannel load_kraus(std::istream& is);
KrausChannel load_kraus_file(const std::string& path);

/// Max entry deviation between the z-averaged projector onto the encoded
/// states |phi_(xzv)> and the classical mixture (1/|C|) sum_(w in C)
/// |w+v+x><w+v+x|. Requires d^n <= 16.
double spmixed_deviation(const LinearCode& c, const Word& x, const Word& v);

/// Gram-matrix deviation from orthonormality of the d^2 entangled basis
/// vectors |Psi_(s,t)> at n = 1.
double entangled_basis_gram_deviation(int d);

}  // namespace cssqkd

#endif
