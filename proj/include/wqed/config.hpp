#ifndef WQED_CONFIG_HPP
#define WQED_CONFIG_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wqed/observables.hpp"
#include "wqed/types.hpp"

namespace wqed {

inline constexpr const char* kEngineVersion = "wqed 1.0.0";

struct SweepAxis {
    std::string parameter;       // e.g. gamma_deph, beta, rf_amplitude, pump, kdz
    std::vector<double> values;  // non-empty

    bool operator==(const SweepAxis&) const = default;
};

struct SpectrumJob {
    std::vector<DriveMode> modes = {DriveMode::RT};
    double delta_min = -6.0;
    double delta_max = 6.0;
    int points = 801;
    int refine_levels = 3;
    bool extract_feature = false;

    bool operator==(const SpectrumJob&) const = default;
};

struct G2Job {
    DriveMode mode = DriveMode::RF;
    double delta = 0.0;
    double tau_min = 1e-2;
    double tau_max = 1e3;
    int points = 400;
    bool tau_log = true;
    bool fit_risetime = false;

    bool operator==(const G2Job&) const = default;
};

struct PopulationsJob {
    double t_max = 3000.0;
    int points = 601;
    bool inset_sweep = false;  // (gamma_deph, omega) map of steady rho_sup

    bool operator==(const PopulationsJob&) const = default;
};

/// A full experiment: system, drive, requested observables and sweep axes.
struct ExperimentConfig {
    std::string figure_tag;  // e.g. fig2e; empty for ad-hoc runs

    EmitterParams emitter1, emitter2;
    double lambda_wg = 1.0;
    std::optional<double> phase_kdz;  // convenience: sets z2 = z1 + kdz/k
    std::optional<CouplingParams> coupling_override;

    DriveMode drive_mode = DriveMode::RT;
    double pump = 1e-7;
    double rf_amplitude1 = 1e-7, rf_phase1 = 0.0;
    double rf_amplitude2 = 1e-7, rf_phase2 = 0.0;
    bool rf_phase_lock = false;  // phases follow k z_i
    double detuning = 0.0;

    SpectrumJob spectrum_job;
    G2Job g2_job;
    PopulationsJob populations_job;

    std::vector<SweepAxis> sweep;  // at most two axes

    PairSystem system() const;
    DriveSpec drive(const PairSystem& sys) const;
    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// Applies one sweep-axis value; throws ConfigError for unknown names.
void apply_parameter(ExperimentConfig& cfg, const std::string& name, double value);

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

}  // namespace wqed

#endif
