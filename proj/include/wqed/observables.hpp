#ifndef WQED_OBSERVABLES_HPP
#define WQED_OBSERVABLES_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wqed/dicke.hpp"
#include "wqed/dynamics.hpp"
#include "wqed/green.hpp"
#include "wqed/types.hpp"

namespace wqed {

/// The two-emitter system; couplings derive from the 1D Green's function
/// unless an explicit override (e.g. from a PhCW coupling map) is set.
struct PairSystem {
    EmitterParams e1, e2;
    Waveguide1D wg = Waveguide1D::from_lambda(1.0);
    std::optional<CouplingParams> coupling_override;

    CouplingParams coupling() const {
        if (coupling_override) return *coupling_override;
        return coupling_from_green(green_1d(wg, e1, e2));
    }
    double phase_kdz() const { return wg.k * (e2.position_z - e1.position_z); }
};

/// Excitation configuration. RT/RR drive through the guided mode with pump
/// amplitude `pump` (per-emitter Rabi frequencies follow as
/// Omega_i = pump * sqrt(beta_i Gamma_i / 2) e^{i k z_i}); RF drives each
/// emitter directly with free complex amplitudes.
struct DriveSpec {
    DriveMode mode = DriveMode::RT;
    double pump = 1e-7;
    cplx rf_rabi1{1e-7, 0.0};
    cplx rf_rabi2{1e-7, 0.0};

    DriveParams at_detuning(const PairSystem& sys, double delta) const;
    double amplitude_scale(const PairSystem& sys) const;
};

/// Convenience: RF with the guided-mode phase lock of Fig-2-style probing.
DriveSpec phase_locked_rf(const PairSystem& sys, double amplitude);
DriveSpec in_phase_rf(double amplitude);

/// Detected-field prefactors. The detected operator is
///   pump_coeff * I + coeff1 * sigma_ge^1 + coeff2 * sigma_ge^2.
struct FieldOperatorSpec {
    Direction direction = Direction::forward;
    bool include_pump = false;
    cplx pump_coeff{0.0, 0.0};
    cplx coeff1{0.0, 0.0};
    cplx coeff2{0.0, 0.0};

    Mat4 matrix() const;
};

/// RT: forward with pump; RR: backward scattered field; RF: scattered field
/// with the drive's phases (detects the driven collective channel).
FieldOperatorSpec field_operator(const PairSystem& sys, const DriveSpec& drive,
                                 Direction direction);

struct SpectrumOptions {
    int refine_levels = 3;
    double refine_jump = 0.02;  // fraction of the intensity range
    int workers = 1;
    Tolerances tol = Tolerances::defaults();
};

struct SpectrumResult {
    DriveMode mode = DriveMode::RT;
    std::vector<double> detunings;
    std::vector<double> intensity;      // normalized per Eqs. 2a/2b conventions
    std::vector<double> raw_intensity;  // before RF max-normalization
    std::vector<std::string> warnings;
    double drive_scale = 0.0;
};

std::vector<double> linear_grid(double lo, double hi, int n);
std::vector<double> log_grid(double lo, double hi, int n);

SpectrumResult spectrum(const PairSystem& sys, const DriveSpec& drive,
                        std::vector<double> delta_grid, const SpectrumOptions& opts = {});

struct CorrelationResult {
    std::vector<double> tau;
    std::vector<double> g2;
    double steady_intensity = 0.0;
    std::optional<double> risetime;  // filled by fit_risetime when requested
};

CorrelationResult g2_correlation(const PairSystem& sys, const DriveSpec& drive, double delta,
                                 const std::vector<double>& tau_grid,
                                 const Tolerances& tol = Tolerances::defaults());

struct PopulationTraces {
    std::vector<double> times;
    std::vector<double> rho_sub, rho_sup;
    double steady_sub = 0.0, steady_sup = 0.0;
    bool sub_is_symmetric = false;  // Gamma_12 < 0 makes |s> the sub-radiant state
};

/// Starts from |g><g| with the drive on at t = 0.
PopulationTraces dicke_populations(const PairSystem& sys, const DriveSpec& drive,
                                   const std::vector<double>& times,
                                   const Tolerances& tol = Tolerances::defaults());

/// Steady-state (rho_sub, rho_sup) only; used by the (Gamma_deph, Omega) sweep.
std::pair<double, double> steady_dicke_populations(const PairSystem& sys, const DriveSpec& drive,
                                                   const Tolerances& tol = Tolerances::defaults());

struct SubradiantFeature {
    double delta_t_sub = 0.0;
    double peak_position = 0.0;
    double peak_width = 0.0;
    bool found = false;
};

struct FeatureInputs {
    double expected_position = 0.0;  // sgn(Gamma_12) * J_12
    double expected_width = 0.1;     // Gamma_0 - |Gamma_12| + 2 Gamma_deph
};

FeatureInputs feature_inputs(const PairSystem& sys);

/// Magnitude is apex minus the adjacent super-radiant dip floor; the optional
/// resampler supplies extra intensity samples when the grid is too coarse
/// (>= 20 points across the sub-radiant width are required).
SubradiantFeature extract_subradiant_feature(
    std::vector<double> deltas, std::vector<double> intensity, const FeatureInputs& expect,
    const std::function<double(double)>& resampler = nullptr);

struct RisetimeOptions {
    double band_lo = 0.3;  // fit the contiguous mid-rise band of g2
    double band_hi = 0.9;
    int max_iterations = 200;
    double gamma_tol = 1e-8;
};

struct RisetimeFit {
    double gamma = 0.0;  // f(tau) = 1 - (G e^{-tau G/2} - (G/2) e^{-tau G}) / (G/2)
    double rise_time = 0.0;
    double residual_rms = 0.0;
    int iterations = 0;
};

RisetimeFit fit_risetime(const std::vector<double>& tau, const std::vector<double>& g2,
                         const RisetimeOptions& opts = {});

}  // namespace wqed

#endif
