#ifndef WQED_RUNNER_HPP
#define WQED_RUNNER_HPP

#include <string>
#include <vector>

#include "wqed/config.hpp"
#include "wqed/green.hpp"

namespace wqed {

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// One command's output: tables plus a provenance sidecar. Tables carry no
/// wall-clock data so identical configs produce byte-identical CSVs.
struct ResultBundle {
    std::string command;
    std::string figure_tag;
    std::string config_snapshot;
    std::vector<Table> tables;
    std::vector<std::string> notes;
};

struct RunOptions {
    int workers = 1;
    Tolerances tol = Tolerances::defaults();
};

ResultBundle cmd_spectrum(const ExperimentConfig& cfg, const RunOptions& opts = {});
ResultBundle cmd_g2(const ExperimentConfig& cfg, const RunOptions& opts = {});
ResultBundle cmd_populations(const ExperimentConfig& cfg, const RunOptions& opts = {});
ResultBundle cmd_coupling_map(const std::vector<std::string>& field_files,
                              const std::vector<CellPosition>& positions,
                              const std::vector<double>& local_rates,
                              const RunOptions& opts = {});
/// `presets run` dispatch: picks the right command for the preset's tag.
ResultBundle run_preset(const std::string& name, const RunOptions& opts = {});

std::string to_csv(const Table& table);  // RFC-4180
void write_bundle(const ResultBundle& bundle, const std::string& out_dir);

/// Cartesian sweep expansion; tuple index order is deterministic
/// (axis-0 major), independent of worker count.
std::vector<ExperimentConfig> expand_sweep(const ExperimentConfig& cfg);

}  // namespace wqed

#endif
