#include "wqed/runner.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace wqed {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Mode is encoded numerically in tables (0=RT, 1=RR, 2=RF) to keep rows float-only.
double mode_code(DriveMode m) { return m == DriveMode::RT ? 0.0 : m == DriveMode::RR ? 1.0 : 2.0; }

std::vector<std::string> axis_names(const ExperimentConfig& cfg) {
    std::vector<std::string> names;
    for (const auto& ax : cfg.sweep) names.push_back(ax.parameter);
    return names;
}

/// Runs `body(tuple_index, config)` over the expanded sweep with a bounded
/// worker pool; collation slots are pre-indexed so output order never depends
/// on scheduling.
void run_tuples(const std::vector<ExperimentConfig>& tuples, int workers,
                const std::function<void(size_t, const ExperimentConfig&)>& body) {
    workers = std::max(1, workers);
    if (workers == 1 || tuples.size() < 2) {
        for (size_t i = 0; i < tuples.size(); ++i) body(i, tuples[i]);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    std::mutex err_mutex;
    std::exception_ptr first_error;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next++; i < tuples.size(); i = next++) {
                try {
                    body(i, tuples[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> tuple_values(const ExperimentConfig& base, size_t index) {
    std::vector<double> vals;
    if (base.sweep.empty()) return vals;
    size_t rest = index;
    std::vector<size_t> idx(base.sweep.size());
    for (size_t a = base.sweep.size(); a-- > 0;) {
        idx[a] = rest % base.sweep[a].values.size();
        rest /= base.sweep[a].values.size();
    }
    for (size_t a = 0; a < base.sweep.size(); ++a) vals.push_back(base.sweep[a].values[idx[a]]);
    return vals;
}

}  // namespace

std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg) {
    std::vector<ExperimentConfig> out;
    if (cfg.sweep.empty()) {
        out.push_back(cfg);
        return out;
    }
    size_t total = 1;
    for (const auto& ax : cfg.sweep) total *= ax.values.size();
    out.reserve(total);
    for (size_t i = 0; i < total; ++i) {
        ExperimentConfig c = cfg;
        const std::vector<double> vals = tuple_values(cfg, i);
        for (size_t a = 0; a < cfg.sweep.size(); ++a)
            apply_parameter(c, cfg.sweep[a].parameter, vals[a]);
        c.sweep.clear();
        out.push_back(std::move(c));
    }
    return out;
}

ResultBundle cmd_spectrum(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    ResultBundle bundle;
    bundle.command = "spectrum";
    bundle.figure_tag = cfg.figure_tag;
    bundle.config_snapshot = serialize_config(cfg);

    const auto tuples = expand_sweep(cfg);
    const auto names = axis_names(cfg);

    Table trace;
    trace.name = "spectrum";
    trace.columns = names;
    trace.columns.insert(trace.columns.end(), {"mode", "delta", "intensity", "raw_intensity"});

    Table feats;
    feats.name = "subradiant_feature";
    feats.columns = names;
    feats.columns.insert(feats.columns.end(),
                         {"delta_t_sub", "peak_position", "peak_width", "found"});

    std::vector<std::vector<std::vector<double>>> slot_rows(tuples.size());
    std::vector<std::vector<std::vector<double>>> slot_feats(tuples.size());

    run_tuples(tuples, opts.workers, [&](size_t i, const ExperimentConfig& c) {
        const PairSystem sys = c.system();
        const std::vector<double> axes = tuple_values(cfg, i);
        for (DriveMode mode : c.spectrum_job.modes) {
            DriveSpec drive = c.drive(sys);
            drive.mode = mode;
            SpectrumOptions so;
            so.refine_levels = c.spectrum_job.refine_levels;
            so.workers = 1;  // parallelism lives at the tuple level here
            so.tol = opts.tol;
            const auto grid = linear_grid(c.spectrum_job.delta_min, c.spectrum_job.delta_max,
                                          c.spectrum_job.points);
            const SpectrumResult sr = spectrum(sys, drive, grid, so);
            for (size_t k = 0; k < sr.detunings.size(); ++k) {
                std::vector<double> row = axes;
                row.insert(row.end(), {mode_code(mode), sr.detunings[k], sr.intensity[k],
                                       sr.raw_intensity[k]});
                slot_rows[i].push_back(std::move(row));
            }
            if (c.spectrum_job.extract_feature && mode == DriveMode::RT) {
                const FeatureInputs fi = feature_inputs(sys);
                const SubradiantFeature f = extract_subradiant_feature(
                    sr.detunings, sr.raw_intensity, fi, [&](double d) {
                        DriveSpec ds = drive;
                        return spectrum(sys, ds, {d}, SpectrumOptions{0, 1.0, 1, opts.tol})
                            .raw_intensity.front();
                    });
                std::vector<double> row = axes;
                row.insert(row.end(),
                           {f.delta_t_sub, f.peak_position, f.peak_width, f.found ? 1.0 : 0.0});
                slot_feats[i].push_back(std::move(row));
            }
        }
    });
    for (auto& rows : slot_rows)
        for (auto& r : rows) trace.rows.push_back(std::move(r));
    for (auto& rows : slot_feats)
        for (auto& r : rows) feats.rows.push_back(std::move(r));

    bundle.notes.push_back("mode codes: 0=RT, 1=RR, 2=RF");
    bundle.tables.push_back(std::move(trace));
    if (cfg.spectrum_job.extract_feature) bundle.tables.push_back(std::move(feats));
    return bundle;
}

ResultBundle cmd_g2(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    ResultBundle bundle;
    bundle.command = "g2";
    bundle.figure_tag = cfg.figure_tag;
    bundle.config_snapshot = serialize_config(cfg);

    const auto tuples = expand_sweep(cfg);
    const auto names = axis_names(cfg);

    Table trace;
    trace.name = "g2";
    trace.columns = names;
    trace.columns.insert(trace.columns.end(), {"mode", "delta", "tau", "g2"});
    Table fits;
    fits.name = "risetime";
    fits.columns = names;
    fits.columns.insert(fits.columns.end(), {"gamma_fit", "rise_time", "residual_rms"});

    std::vector<std::vector<std::vector<double>>> slot_rows(tuples.size());
    std::vector<std::vector<double>> slot_fits(tuples.size());

    run_tuples(tuples, opts.workers, [&](size_t i, const ExperimentConfig& c) {
        const PairSystem sys = c.system();
        const std::vector<double> axes = tuple_values(cfg, i);
        DriveSpec drive = c.drive(sys);
        drive.mode = c.g2_job.mode;
        const std::vector<double> taus =
            c.g2_job.points == 1
                ? std::vector<double>{c.g2_job.tau_min}
                : (c.g2_job.tau_log
                       ? log_grid(c.g2_job.tau_min, c.g2_job.tau_max, c.g2_job.points)
                       : linear_grid(c.g2_job.tau_min, c.g2_job.tau_max, c.g2_job.points));
        const CorrelationResult cr = g2_correlation(sys, drive, c.g2_job.delta, taus, opts.tol);
        for (size_t k = 0; k < cr.tau.size(); ++k) {
            std::vector<double> row = axes;
            row.insert(row.end(), {mode_code(c.g2_job.mode), c.g2_job.delta, cr.tau[k], cr.g2[k]});
            slot_rows[i].push_back(std::move(row));
        }
        if (c.g2_job.fit_risetime) {
            const RisetimeFit fit = fit_risetime(cr.tau, cr.g2);
            std::vector<double> row = axes;
            row.insert(row.end(), {fit.gamma, fit.rise_time, fit.residual_rms});
            slot_fits[i] = std::move(row);
        }
    });
    for (auto& rows : slot_rows)
        for (auto& r : rows) trace.rows.push_back(std::move(r));
    for (auto& r : slot_fits)
        if (!r.empty()) fits.rows.push_back(std::move(r));

    bundle.notes.push_back("mode codes: 0=RT, 1=RR, 2=RF");
    bundle.tables.push_back(std::move(trace));
    if (cfg.g2_job.fit_risetime) bundle.tables.push_back(std::move(fits));
    return bundle;
}

ResultBundle cmd_populations(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    ResultBundle bundle;
    bundle.command = "populations";
    bundle.figure_tag = cfg.figure_tag;
    bundle.config_snapshot = serialize_config(cfg);

    const auto tuples = expand_sweep(cfg);
    const auto names = axis_names(cfg);

    if (cfg.populations_job.inset_sweep) {
        Table inset;
        inset.name = "steady_sup_map";
        inset.columns = names;
        inset.columns.insert(inset.columns.end(), {"steady_sub", "steady_sup"});
        std::vector<std::vector<double>> slots(tuples.size());
        run_tuples(tuples, opts.workers, [&](size_t i, const ExperimentConfig& c) {
            const PairSystem sys = c.system();
            const auto [sub, sup] = steady_dicke_populations(sys, c.drive(sys), opts.tol);
            std::vector<double> row = tuple_values(cfg, i);
            row.insert(row.end(), {sub, sup});
            slots[i] = std::move(row);
        });
        for (auto& r : slots) inset.rows.push_back(std::move(r));
        bundle.tables.push_back(std::move(inset));
        return bundle;
    }

    Table trace;
    trace.name = "populations";
    trace.columns = names;
    trace.columns.insert(trace.columns.end(), {"t", "rho_sub", "rho_sup"});
    Table steady;
    steady.name = "steady_populations";
    steady.columns = names;
    steady.columns.insert(steady.columns.end(), {"steady_sub", "steady_sup", "sub_is_symmetric"});

    std::vector<std::vector<std::vector<double>>> slot_rows(tuples.size());
    std::vector<std::vector<double>> slot_steady(tuples.size());

    run_tuples(tuples, opts.workers, [&](size_t i, const ExperimentConfig& c) {
        const PairSystem sys = c.system();
        const std::vector<double> axes = tuple_values(cfg, i);
        const auto times = linear_grid(c.populations_job.t_max / (c.populations_job.points - 1),
                                       c.populations_job.t_max, c.populations_job.points - 1);
        const PopulationTraces tr = dicke_populations(sys, c.drive(sys), times, opts.tol);
        {  // t = 0 row: both emitters in the ground state
            std::vector<double> row = axes;
            row.insert(row.end(), {0.0, 0.0, 0.0});
            slot_rows[i].push_back(std::move(row));
        }
        for (size_t k = 0; k < tr.times.size(); ++k) {
            std::vector<double> row = axes;
            row.insert(row.end(), {tr.times[k], tr.rho_sub[k], tr.rho_sup[k]});
            slot_rows[i].push_back(std::move(row));
        }
        std::vector<double> srow = axes;
        srow.insert(srow.end(), {tr.steady_sub, tr.steady_sup, tr.sub_is_symmetric ? 1.0 : 0.0});
        slot_steady[i] = std::move(srow);
    });
    for (auto& rows : slot_rows)
        for (auto& r : rows) trace.rows.push_back(std::move(r));
    for (auto& r : slot_steady) steady.rows.push_back(std::move(r));

    bundle.tables.push_back(std::move(trace));
    bundle.tables.push_back(std::move(steady));
    return bundle;
}

ResultBundle cmd_coupling_map(const std::vector<std::string>& field_files,
                              const std::vector<CellPosition>& positions,
                              const std::vector<double>& local_rates, const RunOptions&) {
    if (field_files.empty()) throw ConfigError("coupling-map: no field map files given");
    ResultBundle bundle;
    bundle.command = "coupling-map";
    bundle.figure_tag = "fig5d";

    Table table;
    table.name = "coupling_map";
    table.columns = {"file_index", "group_index", "emitter1_position", "position_index",
                     "x_a",        "y_a",         "gamma12_over_norm", "j12_over_norm"};
    for (size_t fi = 0; fi < field_files.size(); ++fi) {
        const GreenFieldMap map = ingest_field_map_file(field_files[fi]);
        const CouplingMap cm = coupling_map(map, positions, local_rates);
        for (size_t p = 0; p < cm.positions.size(); ++p)
            table.rows.push_back({static_cast<double>(fi), cm.group_index,
                                  static_cast<double>(cm.emitter1_position),
                                  static_cast<double>(cm.positions[p].index), cm.positions[p].x_a,
                                  cm.positions[p].y_a, cm.gamma12_over_norm[p],
                                  cm.j12_over_norm[p]});
    }
    bundle.tables.push_back(std::move(table));
    return bundle;
}

ResultBundle run_preset(const std::string& name, const RunOptions& opts) {
    const ExperimentConfig cfg = preset(name);
    if (name == "fig5d") {
        // Pipeline demo on the synthetic 1D fixture: positions across one
        // guided wavelength, all at unit local decay rate.
        Synthetic1DSpec spec;
        spec.wg = Waveguide1D::from_lambda(3.7);
        const auto tmp = std::filesystem::temp_directory_path() / "wqed_fig5d_field.txt";
        write_field_map_file(generate_synthetic_1d_field(spec), tmp.string());
        std::vector<CellPosition> positions;
        std::vector<double> rates;
        for (int i = 0; i < 12; ++i) {
            positions.push_back({i + 1, 10.0 + 3.7 * i / 12.0, 0.0});
            rates.push_back(1.0);
        }
        ResultBundle b = cmd_coupling_map({tmp.string()}, positions, rates, opts);
        b.figure_tag = cfg.figure_tag;
        b.config_snapshot = serialize_config(cfg);
        b.notes.push_back("synthetic 1D fixture; supply real PhCW field maps for Fig. 5 data");
        return b;
    }
    const bool wants_g2 = cfg.g2_job.fit_risetime || name == "fig2b" || name == "fig2d" ||
                          name == "fig2f" || name == "fig2h";
    if (wants_g2) return cmd_g2(cfg, opts);
    if (name.rfind("fig4", 0) == 0) return cmd_populations(cfg, opts);
    return cmd_spectrum(cfg, opts);
}

std::string to_csv(const Table& table) {
    std::ostringstream out;
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    };
    for (size_t c = 0; c < table.columns.size(); ++c)
        out << (c ? "," : "") << quote(table.columns[c]);
    out << "\r\n";
    for (const auto& row : table.rows) {
        for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt(row[c]);
        out << "\r\n";
    }
    return out.str();
}

void write_bundle(const ResultBundle& bundle, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::ios_base::failure("cannot create output directory: " + out_dir);

    const std::string stem =
        bundle.figure_tag.empty() ? bundle.command : bundle.figure_tag + "_" + bundle.command;
    nlohmann::json sidecar;
    sidecar["engine"] = kEngineVersion;
    sidecar["command"] = bundle.command;
    sidecar["figure"] = bundle.figure_tag;
    sidecar["config"] = bundle.config_snapshot;
    sidecar["notes"] = bundle.notes;
    sidecar["deterministic"] = true;
    sidecar["tolerances"] = {{"rk_rtol", 1e-9}, {"rk_atol", 1e-12}, {"steady_residual", 1e-10}};
    const auto now = std::chrono::system_clock::now();
    sidecar["written_unix_time"] =
        std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();

    std::vector<std::string> files;
    for (const Table& t : bundle.tables) {
        const std::string path = (fs::path(out_dir) / (stem + "_" + t.name + ".csv")).string();
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::ios_base::failure("cannot write " + path);
        f << to_csv(t);
        files.push_back(path);
    }
    sidecar["tables"] = files;
    const std::string jpath = (fs::path(out_dir) / (stem + ".json")).string();
    std::ofstream jf(jpath);
    if (!jf) throw std::ios_base::failure("cannot write " + jpath);
    jf << sidecar.dump(2) << "\n";
}

}  // namespace wqed
