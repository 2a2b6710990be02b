#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wqed/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerics = 3;
constexpr int kExitIo = 4;

wqed::ExperimentConfig load_config(const std::string& config_path, const std::string& preset_name) {
    if (!config_path.empty()) return wqed::parse_config_file(config_path);
    if (!preset_name.empty()) return wqed::preset(preset_name);
    throw wqed::ConfigError("either --config <path> or --preset <name> is required");
}

std::vector<wqed::CellPosition> parse_positions(const std::vector<std::string>& specs) {
    // Each entry: index:x:y (coordinates in units of the lattice constant).
    std::vector<wqed::CellPosition> out;
    for (const auto& s : specs) {
        wqed::CellPosition p;
        if (std::sscanf(s.c_str(), "%d:%lf:%lf", &p.index, &p.x_a, &p.y_a) != 3)
            throw wqed::ConfigError("bad --position '" + s + "', expected index:x:y");
        out.push_back(p);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-emitter waveguide QED simulator: spectra, photon correlations, Dicke-state "
                 "populations and Green's-tensor coupling maps"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, preset_name, out_dir = "out", tolerance_profile = "default";
    int workers = 1;
    app.add_option("--out", out_dir, "output directory for CSV tables and JSON sidecars");
    app.add_option("--workers", workers, "worker threads for sweep points")->check(CLI::PositiveNumber);
    app.add_option("--tolerance-profile", tolerance_profile, "default or strict")
        ->check(CLI::IsMember({"default", "strict"}));

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment configuration file");
        cmd->add_option("--preset", preset_name, "built-in preset name (see `presets list`)");
    };

    CLI::App* spectrum = app.add_subcommand("spectrum", "intensity spectra (RT/RR/RF)");
    add_config_opts(spectrum);
    CLI::App* g2 = app.add_subcommand("g2", "second-order correlation g2(tau)");
    add_config_opts(g2);
    CLI::App* populations = app.add_subcommand("populations", "Dicke-state population dynamics");
    add_config_opts(populations);

    CLI::App* coupling = app.add_subcommand("coupling-map", "couplings from dipole field maps");
    std::vector<std::string> field_files, position_specs;
    std::vector<double> local_rates;
    coupling->add_option("--field-map", field_files, "field map file(s)")->required();
    coupling->add_option("--position", position_specs,
                         "emitter-2 position as index:x:y (repeatable)");
    coupling->add_option("--local-rate", local_rates,
                         "local decay rate Gamma_2 per position (repeatable)");

    CLI::App* presets = app.add_subcommand("presets", "list or run built-in presets");
    CLI::App* presets_list = presets->add_subcommand("list", "list preset names");
    CLI::App* presets_run = presets->add_subcommand("run", "run one preset end to end");
    std::string run_name;
    presets_run->add_option("name", run_name, "preset name")->required();
    presets->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    wqed::RunOptions opts;
    opts.workers = workers;
    opts.tol = tolerance_profile == "strict" ? wqed::Tolerances::strict()
                                             : wqed::Tolerances::defaults();

    try {
        if (presets_list->parsed()) {
            for (const auto& n : wqed::preset_names()) std::cout << n << "\n";
            return kExitOk;
        }
        wqed::ResultBundle bundle;
        if (spectrum->parsed()) {
            bundle = wqed::cmd_spectrum(load_config(config_path, preset_name), opts);
        } else if (g2->parsed()) {
            bundle = wqed::cmd_g2(load_config(config_path, preset_name), opts);
        } else if (populations->parsed()) {
            bundle = wqed::cmd_populations(load_config(config_path, preset_name), opts);
        } else if (coupling->parsed()) {
            auto positions = parse_positions(position_specs);
            if (positions.empty())
                for (int i = 0; i < 12; ++i) {
                    positions.push_back({i + 1, 10.0 + i / 12.0, 0.0});
                    local_rates.push_back(1.0);
                }
            if (local_rates.size() != positions.size())
                throw wqed::ConfigError("--local-rate count must match --position count");
            bundle = wqed::cmd_coupling_map(field_files, positions, local_rates, opts);
        } else if (presets_run->parsed()) {
            bundle = wqed::run_preset(run_name, opts);
        }
        wqed::write_bundle(bundle, out_dir);
        std::cout << bundle.command << " done";
        if (!bundle.figure_tag.empty()) std::cout << " (" << bundle.figure_tag << ")";
        std::cout << ": " << bundle.tables.size() << " table(s) in " << out_dir << "\n";
        return kExitOk;
    } catch (const wqed::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const wqed::FieldMapError& e) {
        std::cerr << (e.kind == wqed::FieldMapErrorKind::io ? "i/o error: " : "field map error: ")
                  << e.what() << "\n";
        return e.kind == wqed::FieldMapErrorKind::io ? kExitIo : kExitConfig;
    } catch (const wqed::DarkStateError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerics;
    } catch (const wqed::NumericsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerics;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerics;
    }
}
