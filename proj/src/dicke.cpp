#include "wqed/dicke.hpp"

#include <cmath>

namespace wqed {

namespace {

AtomicOps make_atomic_ops() {
    AtomicOps o;
    o.ge1 = Mat4::Zero();
    o.ge1(0, 3) = 1.0;  // <g1 g2| ge1 |e1 g2>
    o.ge1(2, 1) = 1.0;  // <g1 e2| ge1 |e1 e2>
    o.ge2 = Mat4::Zero();
    o.ge2(0, 2) = 1.0;  // <g1 g2| ge2 |g1 e2>
    o.ge2(3, 1) = 1.0;  // <e1 g2| ge2 |e1 e2>
    o.eg1 = o.ge1.adjoint();
    o.eg2 = o.ge2.adjoint();
    o.ee1 = o.eg1 * o.ge1;
    o.ee2 = o.eg2 * o.ge2;
    o.gg1 = Mat4::Identity() - o.ee1;
    o.gg2 = Mat4::Identity() - o.ee2;
    return o;
}

Mat4 make_dicke_basis() {
    const double s = 1.0 / std::sqrt(2.0);
    Mat4 b = Mat4::Zero();
    b(0, 0) = 1.0;               // |g>
    b(1, 1) = 1.0;               // |e>
    b(3, 2) = s; b(2, 2) = s;    // |s> = (|4> + |3>)/sqrt(2)
    b(3, 3) = s; b(2, 3) = -s;   // |a> = (|4> - |3>)/sqrt(2)
    return b;
}

}  // namespace

const AtomicOps& atomic_ops() {
    static const AtomicOps ops = make_atomic_ops();
    return ops;
}

const Mat4& dicke_basis() {
    static const Mat4 b = make_dicke_basis();
    return b;
}

Mat4 dicke_transform(const Mat4& m, Basis target) {
    const Mat4& b = dicke_basis();
    if (target == Basis::dicke) return b.adjoint() * m * b;
    return b * m * b.adjoint();
}

Mat16 dicke_transform(const Mat16& superop, Basis target) {
    // vec(B^-1 X B) = (B^T (x) B^-1) vec(X); B is unitary so B^-1 = B^dagger.
    const Mat4& b = dicke_basis();
    const Mat16 t = kron(b.transpose(), b.adjoint().eval());
    const Mat16 tinv = kron(b.conjugate().eval(), b);
    if (target == Basis::dicke) return t * superop * tinv;
    return tinv * superop * t;
}

DensityMatrix dicke_transform(const DensityMatrix& rho, Basis target) {
    if (rho.basis == target) return rho;
    return DensityMatrix{dicke_transform(rho.rho, target), target};
}

Mat4 build_hamiltonian(const EmitterParams& e1, const EmitterParams& e2,
                       const DriveParams& drive, const CouplingParams& coupling) {
    e1.validate();
    e2.validate();
    drive.validate();
    coupling.validate(e1.gamma0, e2.gamma0);
    const AtomicOps& o = atomic_ops();

    // Identical resonance frequencies: Delta_1 = Delta_2 = delta. omega0 is the
    // shared detuning reference and never enters the rotating frame directly.
    Mat4 h = Mat4::Zero();
    h -= drive.detuning * (o.ee1 + o.ee2);
    // J_ii absorbed into omega0; only the cross term remains.
    h -= coupling.j12 * (o.eg1 * o.ge2 + o.eg2 * o.ge1);
    h -= std::conj(drive.rabi1) * o.ge1 + drive.rabi1 * o.eg1;
    h -= std::conj(drive.rabi2) * o.ge2 + drive.rabi2 * o.eg2;
    return h;
}

Mat16 build_lindblad_dissipator(const EmitterParams& e1, const EmitterParams& e2,
                                const CouplingParams& coupling) {
    e1.validate();
    e2.validate();
    coupling.validate(e1.gamma0, e2.gamma0);
    const AtomicOps& o = atomic_ops();

    const Mat4 ge[2] = {o.ge1, o.ge2};
    const Mat4 eg[2] = {o.eg1, o.eg2};
    const double g[2][2] = {{e1.gamma0, coupling.gamma12}, {coupling.gamma12, e2.gamma0}};

    Mat16 d = Mat16::Zero();
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            d += lindblad_term(g[i][j], ge[i], eg[j]);

    // Pure dephasing: Gamma_{i,gg} = Gamma_{i,ee} = gamma_deph.
    const Mat4 gg[2] = {o.gg1, o.gg2};
    const Mat4 ee[2] = {o.ee1, o.ee2};
    const double gd[2] = {e1.gamma_deph, e2.gamma_deph};
    for (int i = 0; i < 2; ++i) {
        d += lindblad_term(gd[i], gg[i], gg[i]);
        d += lindblad_term(gd[i], ee[i], ee[i]);
    }
    return d;
}

Liouvillian build_liouvillian(const EmitterParams& e1, const EmitterParams& e2,
                              const DriveParams& drive, const CouplingParams& coupling) {
    const Mat4 h = build_hamiltonian(e1, e2, drive, coupling);
    Liouvillian L;
    L.matrix = -iu * (spre(h) - spost(h)) + build_lindblad_dissipator(e1, e2, coupling);
    L.basis = Basis::bare;
    return L;
}

void validate_rt_phase_lock(const DriveParams& drive, double k, double z1, double z2,
                            double tol) {
    if (drive.mode != DriveMode::RT && drive.mode != DriveMode::RR) return;
    if (std::abs(drive.rabi1) == 0.0 || std::abs(drive.rabi2) == 0.0) return;
    const double want = k * (z2 - z1);
    const double have = std::arg(drive.rabi2 / drive.rabi1);
    const double diff = std::remainder(have - want, 2.0 * M_PI);
    if (std::abs(diff) > tol)
        throw ConfigError("RT drive phases are not locked to k*dz");
}

}  // namespace wqed
