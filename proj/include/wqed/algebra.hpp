#ifndef WQED_ALGEBRA_HPP
#define WQED_ALGEBRA_HPP

#include "wqed/types.hpp"

namespace wqed {

// Column-stacking vectorization: vec(A X B) = (B^T (x) A) vec(X).

inline Vec16 vectorize(const Mat4& m) {
    Vec16 v;
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) v(4 * c + r) = m(r, c);
    return v;
}

inline Mat4 unvectorize(const Vec16& v) {
    Mat4 m;
    for (int c = 0; c < 4; ++c)
        for (int r = 0; r < 4; ++r) m(r, c) = v(4 * c + r);
    return m;
}

inline Mat16 kron(const Mat4& a, const Mat4& b) {
    Mat16 out;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) out.block<4, 4>(4 * i, 4 * j) = a(i, j) * b;
    return out;
}

/// vec(A X) = (I (x) A) vec X
inline Mat16 spre(const Mat4& a) { return kron(Mat4::Identity(), a); }

/// vec(X A) = (A^T (x) I) vec X
inline Mat16 spost(const Mat4& a) { return kron(a.transpose(), Mat4::Identity()); }

/// vec(A X B) = (B^T (x) A) vec X
inline Mat16 ssandwich(const Mat4& a, const Mat4& b) { return kron(b.transpose(), a); }

/// (gamma/2) (2 A X B - BA X - X BA) with jump pair (A, B = A2^dagger) folded in
/// by the caller; used for both decay and dephasing terms.
inline Mat16 lindblad_term(double rate, const Mat4& a, const Mat4& b) {
    const Mat4 ba = b * a;
    return (rate / 2.0) * (2.0 * ssandwich(a, b) - spre(ba) - spost(ba));
}

/// tr(M X) as an inner product on vectorized X.
inline cplx trace_of_product(const Mat4& m, const Vec16& vx) {
    return vectorize(m.adjoint().eval()).dot(vx);  // Eigen dot conjugates lhs
}

}  // namespace wqed

#endif
