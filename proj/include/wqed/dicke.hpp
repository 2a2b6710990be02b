#ifndef WQED_DICKE_HPP
#define WQED_DICKE_HPP

#include "wqed/algebra.hpp"
#include "wqed/types.hpp"

namespace wqed {

// Bare basis ordering: |1> = g1 g2, |2> = e1 e2, |3> = g1 e2, |4> = e1 g2.
// Dicke basis ordering: |g>, |e>, |s>, |a> with
//   |s> = (|e1 g2> + |g1 e2>)/sqrt(2),  |a> = (|e1 g2> - |g1 e2>)/sqrt(2).

/// The eight single-emitter operators as 4x4 matrices in the bare basis.
struct AtomicOps {
    Mat4 ge1, eg1, ge2, eg2, ee1, ee2, gg1, gg2;
};

const AtomicOps& atomic_ops();

/// Unitary B whose columns are the Dicke states in bare coordinates.
const Mat4& dicke_basis();

Mat4 dicke_transform(const Mat4& m, Basis target);
Mat16 dicke_transform(const Mat16& superop, Basis target);
DensityMatrix dicke_transform(const DensityMatrix& rho, Basis target);

/// H = -sum_i Delta_i ee_i - J12 (eg1 ge2 + eg2 ge1)
///     - sum_i (conj(Omega_i) ge_i + Omega_i eg_i),   units hbar = 1.
Mat4 build_hamiltonian(const EmitterParams& e1, const EmitterParams& e2,
                       const DriveParams& drive, const CouplingParams& coupling);

/// Collective decay (Gamma_ij) plus pure dephasing with
/// Gamma_{i,gg} = Gamma_{i,ee} = gamma_deph_i.
Mat16 build_lindblad_dissipator(const EmitterParams& e1, const EmitterParams& e2,
                                const CouplingParams& coupling);

Liouvillian build_liouvillian(const EmitterParams& e1, const EmitterParams& e2,
                              const DriveParams& drive, const CouplingParams& coupling);

}  // namespace wqed

#endif
