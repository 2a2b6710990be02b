#ifndef WQED_GREEN_HPP
#define WQED_GREEN_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wqed/types.hpp"

namespace wqed {

struct Waveguide1D {
    double lambda_wg = 1.0;  // effective guided wavelength
    double k = 2.0 * M_PI;   // 2 pi / lambda_wg

    static Waveguide1D from_lambda(double lambda) {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw ConfigError("waveguide: lambda_wg must be finite and > 0");
        return {lambda, 2.0 * M_PI / lambda};
    }
    static Waveguide1D from_k(double k) {
        if (!(k > 0.0) || !std::isfinite(k))
            throw ConfigError("waveguide: k must be finite and > 0");
        return {2.0 * M_PI / k, k};
    }
};

/// Rate-valued dipole-projected Green value: couplings follow as
/// J12 = Re, Gamma12 = 2 Im.  The dimensional prefactor hbar/(2 mu0 w^2) is
/// carried symbolically, i.e. never enters numerically.
cplx green_1d(const Waveguide1D& wg, const EmitterParams& e1, const EmitterParams& e2);

CouplingParams coupling_from_green(cplx green_rate);

/// Raw tensor-element route (Eq. 8 output): J12 = w^2 d1 d2 Re[Gyy], etc.,
/// in program units mu0 = hbar = 1.  Orientations other than y are rejected.
CouplingParams coupling_from_green(cplx g_yy, double dipole1, double dipole2, double omega_p,
                                   char orientation1 = 'y', char orientation2 = 'y');

enum class FieldMapErrorKind {
    malformed_header,
    missing_source,
    non_rectilinear_grid,
    non_finite_field,
    source_in_air_hole,
    analysis_region_uncovered,
    unsupported_orientation,
    unphysical_coupling,
    position_outside_grid,
    io,
};

struct FieldMapError : std::runtime_error {
    FieldMapErrorKind kind;
    FieldMapError(FieldMapErrorKind k, const std::string& msg)
        : std::runtime_error(msg), kind(k) {}
};

/// Gridded complex E_y of a dipole source on the membrane mid-plane,
/// lengths in units of the lattice constant a.
struct GreenFieldMap {
    double lattice_constant_nm = 240.0;
    double hole_diameter_nm = 160.0;
    double refractive_index = 3.5;
    double group_index = 5.0;
    double omega_p = 1.0;
    double dipole_moment = 1.0;
    double source_x_a = 0.0;
    double source_y_a = 0.0;
    int source_cell_position = 1;  // intra-cell index 1..12
    double gamma_local = 1.0;      // Gamma_1 at the source position
    char orientation = 'y';

    std::vector<double> xs, ys;   // sorted grid lines
    Eigen::MatrixXcd field_y;     // ys.size() x xs.size()

    bool contains(double x, double y) const;
    cplx interpolate_field(double x, double y) const;  // bilinear
    cplx green_yy(double x, double y) const;           // E_y / (w^2 d), mu = 1
};

GreenFieldMap ingest_field_map(std::istream& in);
GreenFieldMap ingest_field_map_file(const std::string& path);
void write_field_map(const GreenFieldMap& map, std::ostream& out);
void write_field_map_file(const GreenFieldMap& map, const std::string& path);

struct Synthetic1DSpec {
    Waveguide1D wg = Waveguide1D::from_lambda(3.7);  // in units of a
    double source_x_a = 0.0;
    double source_y_a = 0.0;
    double beta1 = 1.0, gamma1 = 1.0;  // source emitter
    double beta2 = 1.0, gamma2 = 1.0;  // uniform along the guide
    double x_min = -2.0, x_max = 12.0;
    int nx = 561;
    double y_min = -0.5, y_max = 0.5;
    int ny = 5;
    double global_phase = 0.0;
    double omega_p = 1.0;
    double dipole_moment = 1.0;
};

/// Test-fixture generator: inverts Eq. 8 with the analytic 1D Green function so
/// that ingestion + coupling_from_green reproduce Eqs. 6-7 exactly.
GreenFieldMap generate_synthetic_1d_field(const Synthetic1DSpec& spec);

struct CellPosition {
    int index = 1;  // 1..12 tag, coordinates are free
    double x_a = 0.0;
    double y_a = 0.0;
};

struct CouplingMap {
    std::vector<CellPosition> positions;
    std::vector<double> gamma12_over_norm;  // Gamma_12 / sqrt(G1 G2)
    std::vector<double> j12_over_norm;
    int emitter1_position = 1;
    double group_index = 1.0;
};

CouplingMap coupling_map(const GreenFieldMap& map, const std::vector<CellPosition>& positions2,
                         const std::vector<double>& local_rates2);

}  // namespace wqed

#endif
