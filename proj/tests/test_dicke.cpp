#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wqed/dicke.hpp"
#include "wqed/dynamics.hpp"
#include "wqed/green.hpp"

using namespace wqed;

namespace {

EmitterParams emitter(double beta = 1.0, double gdeph = 0.0, double z = 0.0) {
    return {0.0, 1.0, beta, gdeph, z};
}

Mat4 random_density(std::mt19937& rng) {
    std::normal_distribution<double> n;
    Mat4 a;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) a(r, c) = cplx(n(rng), n(rng));
    Mat4 rho = a * a.adjoint();
    return rho / rho.trace();
}

// Independent 2x2 single-emitter machinery for the decoupled-limit check.
using Mat2 = Eigen::Matrix2cd;
using SuperOp2 = Eigen::Matrix<cplx, 4, 4>;

SuperOp2 kron2(const Mat2& a, const Mat2& b) {
    SuperOp2 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

SuperOp2 single_emitter_liouvillian(double gamma, double gdeph, cplx rabi, double delta) {
    Mat2 ge = Mat2::Zero(), ee = Mat2::Zero();
    ge(0, 1) = 1.0;
    ee(1, 1) = 1.0;
    const Mat2 eg = ge.adjoint();
    const Mat2 gg = Mat2::Identity() - ee;
    const Mat2 h = -delta * ee - std::conj(rabi) * ge - rabi * eg;
    const Mat2 id = Mat2::Identity();
    auto lind = [&](double rate, const Mat2& a, const Mat2& b) {
        const Mat2 ba = b * a;
        return (rate / 2.0) *
               (2.0 * kron2(b.transpose(), a) - kron2(id, ba) - kron2(ba.transpose(), id));
    };
    SuperOp2 L = -iu * (kron2(id, h) - kron2(h.transpose(), id));
    L += lind(gamma, ge, eg);
    L += lind(gdeph, gg, gg);
    L += lind(gdeph, ee, ee);
    return L;
}

Mat4 antisym_projector() {
    const Vec4 a_state = dicke_basis().col(3);
    return a_state * a_state.adjoint();
}

}  // namespace

TEST_CASE("atomic operators match the printed matrices") {
    const AtomicOps& o = atomic_ops();
    Mat4 ge1 = Mat4::Zero();
    ge1(0, 3) = 1.0;
    ge1(2, 1) = 1.0;
    CHECK((o.ge1 - ge1).norm() == 0.0);

    Mat4 ge2 = Mat4::Zero();
    ge2(0, 2) = 1.0;
    ge2(3, 1) = 1.0;
    CHECK((o.ge2 - ge2).norm() == 0.0);

    CHECK((o.eg1 - o.ge1.adjoint()).norm() == 0.0);
    CHECK((o.eg2 - o.ge2.adjoint()).norm() == 0.0);
    CHECK((o.eg1 * o.ge1 - o.ee1).norm() == 0.0);
    CHECK((o.ee2 + o.gg2 - Mat4::Identity()).norm() == 0.0);
    CHECK((o.ee1 + o.gg1 - Mat4::Identity()).norm() == 0.0);
}

TEST_CASE("hamiltonian limits and hermiticity") {
    const EmitterParams e1 = emitter(), e2 = emitter();

    SUBCASE("all couplings off gives H = 0") {
        DriveParams d;
        const Mat4 h = build_hamiltonian(e1, e2, d, {0.0, 0.0});
        CHECK(h.norm() == 0.0);
    }

    SUBCASE("dispersive coupling splits the single-excitation block by +-J12") {
        DriveParams d;
        const Mat4 h = build_hamiltonian(e1, e2, d, {0.5, 0.0});
        Eigen::SelfAdjointEigenSolver<Mat4> es(h);
        const auto ev = es.eigenvalues();
        CHECK(ev(0) == doctest::Approx(-0.5).epsilon(1e-14));
        CHECK(std::abs(ev(1)) < 1e-14);
        CHECK(std::abs(ev(2)) < 1e-14);
        CHECK(ev(3) == doctest::Approx(0.5).epsilon(1e-14));
        const Mat4 hd = dicke_transform(h, Basis::dicke);
        CHECK(hd(2, 2).real() == doctest::Approx(-0.5));
        CHECK(hd(3, 3).real() == doctest::Approx(0.5));
    }

    SUBCASE("hermitian for random valid parameters") {
        std::mt19937 rng(7);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            DriveParams d;
            d.rabi1 = cplx(u(rng), u(rng));
            d.rabi2 = cplx(u(rng), u(rng));
            d.detuning = 3.0 * u(rng);
            const Mat4 h = build_hamiltonian(e1, e2, d, {u(rng), u(rng)});
            CHECK((h - h.adjoint()).norm() == 0.0);
        }
    }

    SUBCASE("rejects non-finite input") {
        DriveParams d;
        d.rabi1 = cplx(std::nan(""), 0.0);
        CHECK_THROWS_AS(build_hamiltonian(e1, e2, d, {0.0, 0.0}), ConfigError);
        DriveParams d2;
        d2.detuning = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(build_hamiltonian(e1, e2, d2, {0.0, 0.0}), ConfigError);
    }
}

TEST_CASE("lindblad dissipator structure") {
    const EmitterParams e1 = emitter(), e2 = emitter();

    SUBCASE("decoupled limit is the sum of two independent decay channels") {
        const Mat16 d = build_lindblad_dissipator(e1, e2, {0.0, 0.0});
        const AtomicOps& o = atomic_ops();
        const Mat16 expected = lindblad_term(1.0, o.ge1, o.eg1) + lindblad_term(1.0, o.ge2, o.eg2);
        CHECK((d - expected).norm() < 1e-15);
    }

    SUBCASE("ideal dissipative coupling leaves |a><a| dark") {
        const Mat16 d = build_lindblad_dissipator(e1, e2, {0.0, 1.0});
        CHECK((d * vectorize(antisym_projector())).norm() < 1e-14);
    }

    SUBCASE("annihilates the trace for random rates") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        const Vec16 id_vec = vectorize(Mat4::Identity());
        for (int trial = 0; trial < 30; ++trial) {
            const EmitterParams a = emitter(u(rng), 0.5 * u(rng));
            const EmitterParams b = emitter(u(rng), 0.5 * u(rng));
            const double bound = std::sqrt(a.gamma0 * b.gamma0 * a.beta * b.beta);
            const Mat16 d = build_lindblad_dissipator(a, b, {0.0, bound * (2.0 * u(rng) - 1.0)});
            CHECK((d.adjoint() * id_vec).norm() < 1e-12);
        }
    }

    SUBCASE("rejects a dissipator that loses complete positivity") {
        CHECK_THROWS_AS(build_lindblad_dissipator(e1, e2, {0.0, 1.0 + 1e-6}), ConfigError);
        const EmitterParams weak = emitter(0.25);
        CHECK_THROWS_AS(build_lindblad_dissipator(weak, weak, {0.0, 0.9}), ConfigError);
    }
}

TEST_CASE("liouvillian spectrum and trace preservation") {
    const EmitterParams e1 = emitter(), e2 = emitter();

    SUBCASE("undriven uncoupled system decays to the ground state") {
        DriveParams d;
        const Liouvillian L = build_liouvillian(e1, e2, d, {0.0, 0.0});
        CHECK((L.matrix * vectorize(DensityMatrix::ground().rho)).norm() < 1e-14);
    }

    SUBCASE("eigenvalues have non-positive real part and include zero") {
        std::mt19937 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            DriveParams d;
            d.rabi1 = cplx(0.3 * u(rng), 0.3 * u(rng));
            d.rabi2 = cplx(0.3 * u(rng), 0.3 * u(rng));
            d.detuning = 2.0 * (2.0 * u(rng) - 1.0);
            const EmitterParams a = emitter(u(rng), 0.3 * u(rng));
            const EmitterParams b = emitter(u(rng), 0.3 * u(rng));
            const double gmax = std::sqrt(a.beta * b.beta);
            const Liouvillian L =
                build_liouvillian(a, b, d, {0.5 * (2.0 * u(rng) - 1.0), gmax * u(rng)});
            Eigen::ComplexEigenSolver<Mat16> es(L.matrix);
            double max_re = -1e300;
            double min_abs = 1e300;
            for (int k = 0; k < 16; ++k) {
                max_re = std::max(max_re, es.eigenvalues()(k).real());
                min_abs = std::min(min_abs, std::abs(es.eigenvalues()(k)));
            }
            CHECK(max_re <= 1e-10);
            CHECK(min_abs < 1e-10);
        }
    }

    SUBCASE("trace of L[rho] vanishes for any state") {
        std::mt19937 rng(5);
        DriveParams d;
        d.rabi1 = cplx(0.2, 0.1);
        d.rabi2 = cplx(-0.1, 0.2);
        d.detuning = 0.7;
        const Liouvillian L = build_liouvillian(e1, e2, d, {0.3, 0.6});
        for (int trial = 0; trial < 20; ++trial) {
            const Mat4 rho = random_density(rng);
            CHECK(std::abs(unvectorize((L.matrix * vectorize(rho)).eval()).trace()) < 1e-12);
        }
    }

    SUBCASE("ideal dissipative coupling keeps |a><a| stationary and degenerate") {
        DriveParams d;  // no drive
        const Liouvillian L = build_liouvillian(e1, e2, d, {0.0, 1.0});
        CHECK((L.matrix * vectorize(antisym_projector())).norm() < 1e-14);
        CHECK((L.matrix * vectorize(DensityMatrix::ground().rho)).norm() < 1e-14);
        Eigen::JacobiSVD<Mat16> svd(L.matrix);
        CHECK(svd.singularValues()(14) < 1e-12);
    }
}

TEST_CASE("dicke transform") {
    const Mat4& B = dicke_basis();

    SUBCASE("unitary") { CHECK((B.adjoint() * B - Mat4::Identity()).norm() < 1e-14); }

    SUBCASE("|e1 g2><e1 g2| splits evenly over |s> and |a>") {
        Mat4 rho = Mat4::Zero();
        rho(3, 3) = 1.0;  // |4> = |e1 g2>
        const Mat4 rd = dicke_transform(rho, Basis::dicke);
        CHECK(rd(2, 2).real() == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(rd(3, 3).real() == doctest::Approx(0.5).epsilon(1e-14));
    }

    SUBCASE("round trip is the identity") {
        std::mt19937 rng(13);
        const Mat4 rho = random_density(rng);
        const Mat4 back = dicke_transform(dicke_transform(rho, Basis::dicke), Basis::bare);
        CHECK((back - rho).norm() < 1e-14);
    }

    SUBCASE("rejects nothing but transforms tagged states") {
        DensityMatrix rho = DensityMatrix::ground();
        const DensityMatrix rd = dicke_transform(rho, Basis::dicke);
        CHECK(rd.basis == Basis::dicke);
        CHECK((dicke_transform(rd, Basis::dicke).rho - rd.rho).norm() == 0.0);
    }

    SUBCASE("superoperator transform is consistent with the state transform") {
        DriveParams d;
        d.rabi1 = cplx(0.05, 0.0);
        d.rabi2 = cplx(0.05, 0.0);
        const EmitterParams e = emitter();
        const Liouvillian L = build_liouvillian(e, e, d, {0.2, -0.5});
        const Mat16 Ld = dicke_transform(L.matrix, Basis::dicke);
        std::mt19937 rng(17);
        const Mat4 rho = random_density(rng);
        const Mat4 lhs =
            dicke_transform(unvectorize((L.matrix * vectorize(rho)).eval()), Basis::dicke);
        const Mat4 rhs =
            unvectorize((Ld * vectorize(dicke_transform(rho, Basis::dicke))).eval());
        CHECK((lhs - rhs).norm() < 1e-12);
        CHECK((dicke_transform(Ld, Basis::bare) - L.matrix).norm() < 1e-12);
    }
}

TEST_CASE("decoupled two-emitter dynamics factorizes into single-emitter dynamics") {
    const EmitterParams a = emitter(0.8, 0.05);
    const EmitterParams b = emitter(0.6, 0.12);
    DriveParams d;
    d.rabi1 = cplx(0.11, 0.03);
    d.rabi2 = cplx(-0.07, 0.09);
    d.detuning = 0.4;
    const Liouvillian L = build_liouvillian(a, b, d, {0.0, 0.0});

    const SuperOp2 L1 = single_emitter_liouvillian(a.gamma0, a.gamma_deph, d.rabi1, d.detuning);
    const SuperOp2 L2 = single_emitter_liouvillian(b.gamma0, b.gamma_deph, d.rabi2, d.detuning);

    Mat2 r1, r2;
    r1 << 0.7, cplx(0.1, 0.05), cplx(0.1, -0.05), 0.3;
    r2 << 0.4, cplx(-0.2, 0.1), cplx(-0.2, -0.1), 0.6;

    // bare ordering |g1 g2>, |e1 e2>, |g1 e2>, |e1 g2>
    auto product_state = [](const Mat2& x, const Mat2& y) {
        Mat4 rho;
        const int at[2][2] = {{0, 2}, {3, 1}};  // (i1, i2) -> bare index
        for (int i1 = 0; i1 < 2; ++i1)
            for (int i2 = 0; i2 < 2; ++i2)
                for (int j1 = 0; j1 < 2; ++j1)
                    for (int j2 = 0; j2 < 2; ++j2)
                        rho(at[i1][i2], at[j1][j2]) = x(i1, j1) * y(i2, j2);
        return rho;
    };

    auto prop2 = [](const SuperOp2& Ls, const Mat2& r0, double t) {
        Eigen::Vector4cd v;
        for (int c = 0; c < 2; ++c)
            for (int rr = 0; rr < 2; ++rr) v(2 * c + rr) = r0(rr, c);
        v = ((Ls * t).exp() * v).eval();
        Mat2 out;
        for (int c = 0; c < 2; ++c)
            for (int rr = 0; rr < 2; ++rr) out(rr, c) = v(2 * c + rr);
        return out;
    };

    for (double t : {0.3, 1.7, 6.0}) {
        const Mat16 p = expm((L.matrix * t).eval());
        const Mat4 joint = unvectorize((p * vectorize(product_state(r1, r2))).eval());
        const Mat4 expected = product_state(prop2(L1, r1, t), prop2(L2, r2, t));
        CHECK((joint - expected).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("analytic 1D couplings satisfy the closed constraint at every separation") {
    const Waveguide1D wg = Waveguide1D::from_lambda(1.0);
    for (int i = 0; i <= 40; ++i) {
        const EmitterParams a = emitter(0.9);
        const EmitterParams b = emitter(0.7, 0.0, i * 0.05);
        const CouplingParams c = coupling_from_green(green_1d(wg, a, b));
        const double lhs = 4.0 * c.j12 * c.j12 + c.gamma12 * c.gamma12;
        CHECK(lhs == doctest::Approx(a.beta * b.beta).epsilon(1e-12));
    }
}

TEST_CASE("RT phase lock validation") {
    const Waveguide1D wg = Waveguide1D::from_lambda(1.0);
    DriveParams d;
    d.mode = DriveMode::RT;
    d.rabi1 = 0.1;
    d.rabi2 = 0.1 * std::exp(iu * (wg.k * 0.25));
    CHECK_NOTHROW(validate_rt_phase_lock(d, wg.k, 0.0, 0.25));
    d.rabi2 = 0.1;  // wrong phase for a quarter-wavelength separation
    CHECK_THROWS_AS(validate_rt_phase_lock(d, wg.k, 0.0, 0.25), ConfigError);
    d.mode = DriveMode::RF;  // RF phases are free
    CHECK_NOTHROW(validate_rt_phase_lock(d, wg.k, 0.0, 0.25));
}
