#include "wqed/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace wqed {

PairSystem ExperimentConfig::system() const {
    PairSystem sys;
    sys.e1 = emitter1;
    sys.e2 = emitter2;
    sys.wg = Waveguide1D::from_lambda(lambda_wg);
    if (phase_kdz) sys.e2.position_z = sys.e1.position_z + *phase_kdz / sys.wg.k;
    sys.coupling_override = coupling_override;
    return sys;
}

DriveSpec ExperimentConfig::drive(const PairSystem& sys) const {
    DriveSpec d;
    d.mode = drive_mode;
    d.pump = pump;
    if (rf_phase_lock) {
        d.rf_rabi1 = rf_amplitude1 * std::exp(iu * (sys.wg.k * sys.e1.position_z));
        d.rf_rabi2 = rf_amplitude2 * std::exp(iu * (sys.wg.k * sys.e2.position_z));
    } else {
        d.rf_rabi1 = rf_amplitude1 * std::exp(iu * rf_phase1);
        d.rf_rabi2 = rf_amplitude2 * std::exp(iu * rf_phase2);
    }
    return d;
}

void ExperimentConfig::validate() const {
    emitter1.validate();
    emitter2.validate();
    if (!(lambda_wg > 0.0)) throw ConfigError("config: lambda_wg must be > 0");
    if (pump < 0.0 || rf_amplitude1 < 0.0 || rf_amplitude2 < 0.0)
        throw ConfigError("config: drive amplitudes must be >= 0");
    if (sweep.size() > 2) throw ConfigError("config: at most two sweep axes");
    for (const auto& ax : sweep) {
        if (ax.values.empty())
            throw ConfigError("config: sweep axis '" + ax.parameter + "' has no values");
        ExperimentConfig probe = *this;
        probe.sweep.clear();
        apply_parameter(probe, ax.parameter, ax.values.front());  // name check
    }
    if (spectrum_job.points < 2 || spectrum_job.delta_max <= spectrum_job.delta_min)
        throw ConfigError("config: bad spectrum grid");
    if (g2_job.points < 1 || g2_job.tau_max <= g2_job.tau_min)
        throw ConfigError("config: bad g2 grid");
    if (populations_job.points < 2 || populations_job.t_max <= 0.0)
        throw ConfigError("config: bad populations grid");
    const PairSystem sys = system();
    sys.coupling().validate(sys.e1.gamma0, sys.e2.gamma0);
}

void apply_parameter(ExperimentConfig& cfg, const std::string& name, double value) {
    static const std::map<std::string, std::function<void(ExperimentConfig&, double)>> setters = {
        {"gamma_deph",
         [](ExperimentConfig& c, double v) { c.emitter1.gamma_deph = c.emitter2.gamma_deph = v; }},
        {"gamma_deph1", [](ExperimentConfig& c, double v) { c.emitter1.gamma_deph = v; }},
        {"gamma_deph2", [](ExperimentConfig& c, double v) { c.emitter2.gamma_deph = v; }},
        {"beta", [](ExperimentConfig& c, double v) { c.emitter1.beta = c.emitter2.beta = v; }},
        {"beta1", [](ExperimentConfig& c, double v) { c.emitter1.beta = v; }},
        {"beta2", [](ExperimentConfig& c, double v) { c.emitter2.beta = v; }},
        {"pump", [](ExperimentConfig& c, double v) { c.pump = v; }},
        {"rf_amplitude",
         [](ExperimentConfig& c, double v) { c.rf_amplitude1 = c.rf_amplitude2 = v; }},
        {"detuning", [](ExperimentConfig& c, double v) { c.detuning = v; c.g2_job.delta = v; }},
        {"kdz", [](ExperimentConfig& c, double v) { c.phase_kdz = v; }},
    };
    const auto it = setters.find(name);
    if (it == setters.end())
        throw ConfigError("config: unknown sweep parameter '" + name + "'");
    it->second(cfg, value);
}

namespace {

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, const std::string& key, size_t line) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (...) {
        throw ConfigError("config line " + std::to_string(line) + ": field '" + key +
                          "' is not a number: '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& key, size_t line) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config line " + std::to_string(line) + ": field '" + key +
                      "' is not a boolean: '" + v + "'");
}

DriveMode to_mode(const std::string& v, size_t line) {
    if (v == "RT") return DriveMode::RT;
    if (v == "RR") return DriveMode::RR;
    if (v == "RF") return DriveMode::RF;
    throw ConfigError("config line " + std::to_string(line) + ": unknown mode '" + v +
                      "' (expected RT, RR or RF)");
}

std::string mode_name(DriveMode m) {
    switch (m) {
        case DriveMode::RT: return "RT";
        case DriveMode::RR: return "RR";
        case DriveMode::RF: return "RF";
    }
    return "RT";
}

std::vector<double> to_list(const std::string& v, const std::string& key, size_t line) {
    std::vector<double> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        out.push_back(to_double(item, key, line));
    }
    if (out.empty())
        throw ConfigError("config line " + std::to_string(line) + ": empty list for '" + key + "'");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string section;
    std::string line;
    size_t lineno = 0;
    SweepAxis ax1, ax2;
    std::optional<double> j12, gamma12;

    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) + ": unterminated section");
            section = trim(t.substr(1, t.size() - 2));
            static const char* known[] = {"emitter1", "emitter2", "waveguide", "coupling",
                                          "drive",    "spectrum", "g2",        "populations",
                                          "sweep"};
            if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
                    return section == k;
                }) == std::end(known))
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown section [" +
                                  section + "]");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));

        auto emitter_key = [&](EmitterParams& e) {
            if (key == "gamma0") e.gamma0 = to_double(val, key, lineno);
            else if (key == "beta") e.beta = to_double(val, key, lineno);
            else if (key == "gamma_deph") e.gamma_deph = to_double(val, key, lineno);
            else if (key == "position_z") e.position_z = to_double(val, key, lineno);
            else if (key == "omega0") e.omega0 = to_double(val, key, lineno);
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "' in [" + section + "]");
        };

        if (section.empty()) {
            if (key == "figure") cfg.figure_tag = val;
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown global key '" +
                                  key + "'");
        } else if (section == "emitter1") {
            emitter_key(cfg.emitter1);
        } else if (section == "emitter2") {
            emitter_key(cfg.emitter2);
        } else if (section == "waveguide") {
            if (key == "lambda_wg") cfg.lambda_wg = to_double(val, key, lineno);
            else if (key == "phase_kdz") cfg.phase_kdz = to_double(val, key, lineno);
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "' in [waveguide]");
        } else if (section == "coupling") {
            if (key == "j12") j12 = to_double(val, key, lineno);
            else if (key == "gamma12") gamma12 = to_double(val, key, lineno);
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "' in [coupling]");
        } else if (section == "drive") {
            if (key == "mode") cfg.drive_mode = to_mode(val, lineno);
            else if (key == "pump") cfg.pump = to_double(val, key, lineno);
            else if (key == "rf_amplitude1") cfg.rf_amplitude1 = to_double(val, key, lineno);
            else if (key == "rf_amplitude2") cfg.rf_amplitude2 = to_double(val, key, lineno);
            else if (key == "rf_phase1") cfg.rf_phase1 = to_double(val, key, lineno);
            else if (key == "rf_phase2") cfg.rf_phase2 = to_double(val, key, lineno);
            else if (key == "rf_phase_lock") cfg.rf_phase_lock = to_bool(val, key, lineno);
            else if (key == "detuning") cfg.detuning = to_double(val, key, lineno);
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "' in [drive]");
        } else if (section == "spectrum") {
            if (key == "modes") {
                cfg.spectrum_job.modes.clear();
                std::istringstream ss(val);
                std::string item;
                while (std::getline(ss, item, ','))
                    cfg.spectrum_job.modes.push_back(to_mode(trim(item), lineno));
            } else if (key == "delta_min") cfg.spectrum_job.delta_min = to_double(val, key, lineno);
            else if (key == "delta_max") cfg.spectrum_job.delta_max = to_double(val, key, lineno);
            else if (key == "points") cfg.spectrum_job.points = static_cast<int>(to_double(val, key, lineno));
            else if (key == "refine_levels") cfg.spectrum_job.refine_levels = static_cast<int>(to_double(val, key, lineno));
            else if (key == "extract_feature") cfg.spectrum_job.extract_feature = to_bool(val, key, lineno);
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "' in [spectrum]");
        } else if (section == "g2") {
            if (key == "mode") cfg.g2_job.mode = to_mode(val, lineno);
            else if (key == "delta") cfg.g2_job.delta = to_double(val, key, lineno);
            else if (key == "tau_min") cfg.g2_job.tau_min = to_double(val, key, lineno);
            else if (key == "tau_max") cfg.g2_job.tau_max = to_double(val, key, lineno);
            else if (key == "points") cfg.g2_job.points = static_cast<int>(to_double(val, key, lineno));
            else if (key == "tau_log") cfg.g2_job.tau_log = to_bool(val, key, lineno);
            else if (key == "fit_risetime") cfg.g2_job.fit_risetime = to_bool(val, key, lineno);
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "' in [g2]");
        } else if (section == "populations") {
            if (key == "t_max") cfg.populations_job.t_max = to_double(val, key, lineno);
            else if (key == "points") cfg.populations_job.points = static_cast<int>(to_double(val, key, lineno));
            else if (key == "inset_sweep") cfg.populations_job.inset_sweep = to_bool(val, key, lineno);
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "' in [populations]");
        } else if (section == "sweep") {
            if (key == "parameter") ax1.parameter = val;
            else if (key == "values") ax1.values = to_list(val, key, lineno);
            else if (key == "parameter2") ax2.parameter = val;
            else if (key == "values2") ax2.values = to_list(val, key, lineno);
            else
                throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" +
                                  key + "' in [sweep]");
        }
    }
    if (j12 || gamma12) {
        if (!(j12 && gamma12))
            throw ConfigError("config: [coupling] override needs both j12 and gamma12");
        cfg.coupling_override = CouplingParams{*j12, *gamma12};
    }
    if (!ax1.parameter.empty()) cfg.sweep.push_back(ax1);
    if (!ax2.parameter.empty()) cfg.sweep.push_back(ax2);
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open config file: " + path);
    return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    if (!cfg.figure_tag.empty()) out << "figure = " << cfg.figure_tag << "\n";
    auto emit_emitter = [&](const char* sec, const EmitterParams& e) {
        out << "[" << sec << "]\n"
            << "gamma0 = " << fmt(e.gamma0) << "\n"
            << "beta = " << fmt(e.beta) << "\n"
            << "gamma_deph = " << fmt(e.gamma_deph) << "\n"
            << "position_z = " << fmt(e.position_z) << "\n"
            << "omega0 = " << fmt(e.omega0) << "\n";
    };
    emit_emitter("emitter1", cfg.emitter1);
    emit_emitter("emitter2", cfg.emitter2);
    out << "[waveguide]\nlambda_wg = " << fmt(cfg.lambda_wg) << "\n";
    if (cfg.phase_kdz) out << "phase_kdz = " << fmt(*cfg.phase_kdz) << "\n";
    if (cfg.coupling_override)
        out << "[coupling]\nj12 = " << fmt(cfg.coupling_override->j12)
            << "\ngamma12 = " << fmt(cfg.coupling_override->gamma12) << "\n";
    out << "[drive]\nmode = " << mode_name(cfg.drive_mode) << "\n"
        << "pump = " << fmt(cfg.pump) << "\n"
        << "rf_amplitude1 = " << fmt(cfg.rf_amplitude1) << "\n"
        << "rf_phase1 = " << fmt(cfg.rf_phase1) << "\n"
        << "rf_amplitude2 = " << fmt(cfg.rf_amplitude2) << "\n"
        << "rf_phase2 = " << fmt(cfg.rf_phase2) << "\n"
        << "rf_phase_lock = " << (cfg.rf_phase_lock ? "true" : "false") << "\n"
        << "detuning = " << fmt(cfg.detuning) << "\n";
    out << "[spectrum]\nmodes = ";
    for (size_t i = 0; i < cfg.spectrum_job.modes.size(); ++i)
        out << (i ? "," : "") << mode_name(cfg.spectrum_job.modes[i]);
    out << "\ndelta_min = " << fmt(cfg.spectrum_job.delta_min)
        << "\ndelta_max = " << fmt(cfg.spectrum_job.delta_max)
        << "\npoints = " << cfg.spectrum_job.points
        << "\nrefine_levels = " << cfg.spectrum_job.refine_levels
        << "\nextract_feature = " << (cfg.spectrum_job.extract_feature ? "true" : "false") << "\n";
    out << "[g2]\nmode = " << mode_name(cfg.g2_job.mode) << "\ndelta = " << fmt(cfg.g2_job.delta)
        << "\ntau_min = " << fmt(cfg.g2_job.tau_min) << "\ntau_max = " << fmt(cfg.g2_job.tau_max)
        << "\npoints = " << cfg.g2_job.points
        << "\ntau_log = " << (cfg.g2_job.tau_log ? "true" : "false")
        << "\nfit_risetime = " << (cfg.g2_job.fit_risetime ? "true" : "false") << "\n";
    out << "[populations]\nt_max = " << fmt(cfg.populations_job.t_max)
        << "\npoints = " << cfg.populations_job.points
        << "\ninset_sweep = " << (cfg.populations_job.inset_sweep ? "true" : "false") << "\n";
    if (!cfg.sweep.empty()) {
        out << "[sweep]\nparameter = " << cfg.sweep[0].parameter << "\nvalues = ";
        for (size_t i = 0; i < cfg.sweep[0].values.size(); ++i)
            out << (i ? "," : "") << fmt(cfg.sweep[0].values[i]);
        out << "\n";
        if (cfg.sweep.size() > 1) {
            out << "parameter2 = " << cfg.sweep[1].parameter << "\nvalues2 = ";
            for (size_t i = 0; i < cfg.sweep[1].values.size(); ++i)
                out << (i ? "," : "") << fmt(cfg.sweep[1].values[i]);
            out << "\n";
        }
    }
    return out.str();
}

namespace {

ExperimentConfig base_two_emitter(double kdz, double gamma_deph = 0.0) {
    ExperimentConfig c;
    c.emitter1 = {0.0, 1.0, 1.0, gamma_deph, 0.0};
    c.emitter2 = {0.0, 1.0, 1.0, gamma_deph, 0.0};
    c.lambda_wg = 1.0;
    c.phase_kdz = kdz;
    return c;
}

ExperimentConfig single_emitter() {
    ExperimentConfig c;
    c.emitter1 = {0.0, 1.0, 1.0, 0.0, 0.0};
    c.emitter2 = {0.0, 1.0, 0.0, 0.0, 0.0};  // beta = 0: decoupled spectator
    c.lambda_wg = 1.0;
    c.phase_kdz = 2.0 * M_PI;
    c.rf_amplitude2 = 0.0;
    return c;
}

constexpr double kDzSub = 35.0 * M_PI / 18.0;

std::map<std::string, ExperimentConfig> build_presets() {
    std::map<std::string, ExperimentConfig> p;

    {  // single emitter: RF peak + RT dip
        ExperimentConfig c = single_emitter();
        c.figure_tag = "fig2a";
        c.pump = 1e-7;
        c.rf_amplitude1 = 1e-7;
        c.rf_phase_lock = true;
        c.spectrum_job.modes = {DriveMode::RT, DriveMode::RF};
        p["fig2a"] = c;
    }
    {
        ExperimentConfig c = single_emitter();
        c.figure_tag = "fig2b";
        c.drive_mode = DriveMode::RF;
        c.rf_amplitude1 = 1e-4;
        c.rf_phase_lock = true;
        c.g2_job.mode = DriveMode::RF;
        p["fig2b"] = c;
    }
    for (auto [tag, kdz] : {std::pair<const char*, double>{"fig2c", M_PI / 2.0},
                            {"fig2e", 2.0 * M_PI},
                            {"fig2g", kDzSub}}) {
        ExperimentConfig c = base_two_emitter(kdz);
        c.figure_tag = tag;
        c.pump = 1e-7;
        c.rf_amplitude1 = c.rf_amplitude2 = 1e-7;
        c.rf_phase_lock = true;
        c.spectrum_job.modes = {DriveMode::RT, DriveMode::RF};
        p[tag] = c;
    }
    for (auto [tag, kdz] : {std::pair<const char*, double>{"fig2d", M_PI / 2.0},
                            {"fig2f", 2.0 * M_PI},
                            {"fig2h", kDzSub}}) {
        ExperimentConfig c = base_two_emitter(kdz);
        c.figure_tag = tag;
        c.drive_mode = DriveMode::RF;
        c.rf_amplitude1 = c.rf_amplitude2 = 1e-4;
        c.rf_phase_lock = true;
        c.g2_job.mode = DriveMode::RF;
        p[tag] = c;
    }
    {  // RT spectra vs dephasing at the sub-radiant separation
        ExperimentConfig c = base_two_emitter(kDzSub);
        c.figure_tag = "fig3a";
        c.pump = 1e-7;
        c.spectrum_job.modes = {DriveMode::RT};
        c.sweep = {{"gamma_deph", {0.0, 0.016, 0.05, 0.1, 0.2, 0.5}}};
        p["fig3a"] = c;
    }
    {  // feature magnitude vs dephasing
        ExperimentConfig c = p["fig3a"];
        c.figure_tag = "fig3b";
        c.spectrum_job.extract_feature = true;
        p["fig3b"] = c;
    }
    {  // appendix: reflection spectra for the same series
        ExperimentConfig c = p["fig3a"];
        c.figure_tag = "fig3a-rr";
        c.spectrum_job.modes = {DriveMode::RR};
        p["fig3a-rr"] = c;
    }
    {  // rise-time 2D map over (gamma_deph, beta)
        ExperimentConfig c = base_two_emitter(M_PI);
        c.figure_tag = "fig3c";
        c.drive_mode = DriveMode::RF;
        c.rf_amplitude1 = c.rf_amplitude2 = 1e-4;
        c.rf_phase_lock = false;  // in-phase pumping of the symmetric state
        c.g2_job.fit_risetime = true;
        c.sweep = {{"gamma_deph", {0.0, 0.025, 0.05, 0.1, 0.2, 0.3}},
                   {"beta", {0.99, 0.9, 0.8, 0.7, 0.6, 0.5}}};
        p["fig3c"] = c;
    }
    {  // the five quoted rise-time rows
        ExperimentConfig c = base_two_emitter(M_PI);
        c.figure_tag = "risetimes";
        c.drive_mode = DriveMode::RF;
        c.rf_amplitude1 = c.rf_amplitude2 = 1e-4;
        c.rf_phase_lock = false;
        c.g2_job.fit_risetime = true;
        c.sweep = {{"beta", {0.99, 0.9, 0.7}}, {"gamma_deph", {0.0, 0.01, 0.1}}};
        p["risetimes"] = c;
    }
    {  // population dynamics, in-phase pumping
        ExperimentConfig c = base_two_emitter(M_PI);
        c.figure_tag = "fig4a";
        c.drive_mode = DriveMode::RF;
        c.rf_amplitude1 = c.rf_amplitude2 = 0.01;
        c.rf_phase_lock = false;
        p["fig4a"] = c;
    }
    {  // steady populations vs dephasing
        ExperimentConfig c = p["fig4a"];
        c.figure_tag = "fig4b";
        c.sweep = {{"gamma_deph", {0.0, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5}}};
        p["fig4b"] = c;
    }
    {  // inset: max steady rho_sup over (gamma_deph, omega)
        ExperimentConfig c = p["fig4a"];
        c.figure_tag = "fig4b-inset";
        c.populations_job.inset_sweep = true;
        c.sweep = {{"gamma_deph", {}}, {"rf_amplitude", {}}};
        for (int i = 0; i < 20; ++i) c.sweep[0].values.push_back(0.0125 + 0.05 * i);
        for (int i = 0; i < 20; ++i) c.sweep[1].values.push_back(0.005 + 0.005 * i);
        p["fig4b-inset"] = c;
    }
    {  // coupling-map pipeline demo on the synthetic 1D fixture
        ExperimentConfig c = base_two_emitter(2.0 * M_PI);
        c.figure_tag = "fig5d";
        p["fig5d"] = c;
    }
    return p;
}

}  // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    static const auto presets = build_presets();
    names.reserve(presets.size());
    for (const auto& [k, v] : presets) names.push_back(k);
    return names;
}

ExperimentConfig preset(const std::string& name) {
    static const auto presets = build_presets();
    const auto it = presets.find(name);
    if (it == presets.end()) throw ConfigError("unknown preset '" + name + "'");
    return it->second;
}

}  // namespace wqed
