#ifndef WQED_TYPES_HPP
#define WQED_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace wqed {

using cplx = std::complex<double>;
using Mat4 = Eigen::Matrix4cd;
using Vec4 = Eigen::Vector4cd;
using Mat16 = Eigen::Matrix<cplx, 16, 16>;
using Vec16 = Eigen::Matrix<cplx, 16, 1>;

inline constexpr cplx iu{0.0, 1.0};

// All rates are in units of Gamma_0, times in 1/Gamma_0, hbar = 1.

enum class Basis { bare, dicke };
enum class DriveMode { RT, RF, RR };
enum class Direction { forward, backward };

struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DarkStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One two-level emitter. omega0 only serves as the detuning reference and
/// therefore never enters the rotating-frame equations directly.
struct EmitterParams {
    double omega0 = 0.0;
    double gamma0 = 1.0;      // total decay rate Gamma_i
    double beta = 1.0;        // waveguide coupling fraction in [0,1]
    double gamma_deph = 0.0;  // pure dephasing rate, >= 0
    double position_z = 0.0;  // position along the waveguide

    void validate() const {
        if (!std::isfinite(gamma0) || gamma0 <= 0.0)
            throw ConfigError("emitter: gamma0 must be finite and > 0");
        if (!std::isfinite(beta) || beta < 0.0 || beta > 1.0)
            throw ConfigError("emitter: beta must lie in [0, 1]");
        if (!std::isfinite(gamma_deph) || gamma_deph < 0.0)
            throw ConfigError("emitter: gamma_deph must be finite and >= 0");
        if (!std::isfinite(position_z) || !std::isfinite(omega0))
            throw ConfigError("emitter: non-finite parameter");
    }

    bool operator==(const EmitterParams&) const = default;
};

/// Drive seen by the two emitters in the frame rotating at the pump
/// frequency.  rabi1/rabi2 carry the relative phases; in RT/RR they are
/// derived from the pump amplitude and locked to exp(i k z_i).
struct DriveParams {
    cplx rabi1{0.0, 0.0};
    cplx rabi2{0.0, 0.0};
    double detuning = 0.0;  // delta = omega_p - omega_0
    DriveMode mode = DriveMode::RF;

    void validate() const {
        if (!std::isfinite(rabi1.real()) || !std::isfinite(rabi1.imag()) ||
            !std::isfinite(rabi2.real()) || !std::isfinite(rabi2.imag()) ||
            !std::isfinite(detuning))
            throw ConfigError("drive: non-finite parameter");
    }
};

/// Checks the RT phase lock: arg(rabi2/rabi1) == k (z2 - z1) mod 2pi.
void validate_rt_phase_lock(const DriveParams& drive, double k, double z1, double z2,
                            double tol = 1e-9);

struct CouplingParams {
    double j12 = 0.0;      // dispersive coupling J_12
    double gamma12 = 0.0;  // dissipative coupling Gamma_12

    void validate(double gamma1, double gamma2) const {
        if (!std::isfinite(j12) || !std::isfinite(gamma12))
            throw ConfigError("coupling: non-finite parameter");
        const double bound = std::sqrt(gamma1 * gamma2);
        if (std::abs(gamma12) > bound * (1.0 + 1e-12))
            throw ConfigError("coupling: |gamma12| > sqrt(gamma1*gamma2) loses complete positivity");
    }

    bool operator==(const CouplingParams&) const = default;
};

/// 4x4 density matrix over the two-emitter space with a basis tag.
struct DensityMatrix {
    Mat4 rho = Mat4::Zero();
    Basis basis = Basis::bare;

    static DensityMatrix ground(Basis b = Basis::bare) {
        DensityMatrix d;
        d.rho(0, 0) = 1.0;
        d.basis = b;
        return d;
    }

    double hermiticity_defect() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    double trace_real() const { return rho.trace().real(); }
    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Mat4> es((rho + rho.adjoint()) / 2.0);
        return es.eigenvalues().minCoeff();
    }
    void check(double herm_tol = 1e-12, double trace_tol = 1e-9, double pos_tol = 1e-9) const {
        if (hermiticity_defect() > herm_tol)
            throw NumericsError("density matrix lost Hermiticity");
        if (std::abs(trace_real() - 1.0) > trace_tol)
            throw NumericsError("density matrix trace deviates from 1");
        if (min_eigenvalue() < -pos_tol)
            throw NumericsError("density matrix lost positivity");
    }
};

/// 16x16 generator acting on the column-vectorized density matrix.
struct Liouvillian {
    Mat16 matrix = Mat16::Zero();
    Basis basis = Basis::bare;
};

struct Tolerances {
    double rk_rtol = 1e-9;
    double rk_atol = 1e-12;
    double steady_residual = 1e-10;
    double kernel_degeneracy = 1e-12;  // sigma_2/sigma_1 below this -> degenerate

    static Tolerances defaults() { return {}; }
    static Tolerances strict() { return {1e-11, 1e-14, 1e-11, 1e-13}; }
};

}  // namespace wqed

#endif
