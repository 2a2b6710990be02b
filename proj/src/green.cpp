#include "wqed/green.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace wqed {

cplx green_1d(const Waveguide1D& wg, const EmitterParams& e1, const EmitterParams& e2) {
    e1.validate();
    e2.validate();
    const double dz = std::abs(e2.position_z - e1.position_z);
    const double amp = 0.5 * std::sqrt(e1.gamma0 * e1.beta * e2.gamma0 * e2.beta);
    return iu * amp * std::exp(-iu * (wg.k * dz));
}

CouplingParams coupling_from_green(cplx green_rate) {
    return CouplingParams{green_rate.real(), 2.0 * green_rate.imag()};
}

CouplingParams coupling_from_green(cplx g_yy, double dipole1, double dipole2, double omega_p,
                                   char orientation1, char orientation2) {
    if (orientation1 != 'y' || orientation2 != 'y')
        throw FieldMapError(FieldMapErrorKind::unsupported_orientation,
                            "only y-oriented transition dipoles are supported");
    const cplx rate = omega_p * omega_p * dipole1 * dipole2 * g_yy;
    return coupling_from_green(rate);
}

bool GreenFieldMap::contains(double x, double y) const {
    return !xs.empty() && !ys.empty() && x >= xs.front() && x <= xs.back() &&
           y >= ys.front() && y <= ys.back();
}

cplx GreenFieldMap::interpolate_field(double x, double y) const {
    if (!contains(x, y))
        throw FieldMapError(FieldMapErrorKind::position_outside_grid,
                            "requested position lies outside the field map grid");
    auto bracket = [](const std::vector<double>& g, double v) {
        auto it = std::upper_bound(g.begin(), g.end(), v);
        size_t hi = std::min<size_t>(g.size() - 1, std::max<ptrdiff_t>(1, it - g.begin()));
        return std::pair<size_t, size_t>(hi - 1, hi);
    };
    auto [i0, i1] = bracket(xs, x);
    auto [j0, j1] = bracket(ys, y);
    const double tx = xs[i1] == xs[i0] ? 0.0 : (x - xs[i0]) / (xs[i1] - xs[i0]);
    const double ty = ys[j1] == ys[j0] ? 0.0 : (y - ys[j0]) / (ys[j1] - ys[j0]);
    return (1 - tx) * (1 - ty) * field_y(j0, i0) + tx * (1 - ty) * field_y(j0, i1) +
           (1 - tx) * ty * field_y(j1, i0) + tx * ty * field_y(j1, i1);
}

cplx GreenFieldMap::green_yy(double x, double y) const {
    return interpolate_field(x, y) / (omega_p * omega_p * dipole_moment);
}

namespace {

constexpr const char* kRequiredKeys[] = {
    "lattice_constant_nm", "hole_diameter_nm", "refractive_index", "group_index",
    "omega_p",             "dipole_moment",    "source_x_a",       "source_y_a",
    "source_cell_position", "gamma_local",
};
constexpr const char* kSourceKeys[] = {"source_x_a", "source_y_a", "source_cell_position",
                                       "gamma_local"};

bool parse_double(const std::string& s, double& out) {
    try {
        size_t pos = 0;
        out = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        return pos == s.size();
    } catch (...) {
        return false;
    }
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

/// Triangular-lattice W1: the y=0 hole row is removed; rows at m*sqrt(3)/2
/// with the odd rows shifted by a/2.
bool inside_air_hole(double x, double y, double hole_diameter_a) {
    if (hole_diameter_a <= 0.0) return false;
    const double row_pitch = std::sqrt(3.0) / 2.0;
    const double r = hole_diameter_a / 2.0;
    const int m_lo = static_cast<int>(std::floor(y / row_pitch)) - 1;
    for (int m = m_lo; m <= m_lo + 3; ++m) {
        if (m == 0) continue;  // removed row forms the waveguide core
        const double yc = m * row_pitch;
        const double offset = (std::abs(m) % 2 == 1) ? 0.5 : 0.0;
        const double n = std::round(x - offset);
        for (double xc : {n + offset - 1.0, n + offset, n + offset + 1.0}) {
            const double dx = x - xc, dy = y - yc;
            if (dx * dx + dy * dy < r * r) return true;
        }
    }
    return false;
}

void validate_map(const GreenFieldMap& m) {
    if (!m.field_y.allFinite())
        throw FieldMapError(FieldMapErrorKind::non_finite_field,
                            "field map contains non-finite E_y values");
    if (m.gamma_local <= 0.0 || !std::isfinite(m.gamma_local))
        throw FieldMapError(FieldMapErrorKind::malformed_header,
                            "gamma_local must be finite and > 0");
    if (m.omega_p <= 0.0 || m.dipole_moment == 0.0)
        throw FieldMapError(FieldMapErrorKind::malformed_header,
                            "omega_p must be > 0 and dipole_moment nonzero");
    if (m.source_cell_position < 1 || m.source_cell_position > 12)
        throw FieldMapError(FieldMapErrorKind::malformed_header,
                            "source_cell_position must lie in 1..12");
    const double hole_d_a =
        m.lattice_constant_nm > 0.0 ? m.hole_diameter_nm / m.lattice_constant_nm : 0.0;
    if (inside_air_hole(m.source_x_a, m.source_y_a, hole_d_a))
        throw FieldMapError(FieldMapErrorKind::source_in_air_hole,
                            "source position lies inside an air hole");
    // The emitter-2 analysis cell sits 10 unit cells from the source.
    const bool covered = (!m.xs.empty()) && (m.xs.back() >= m.source_x_a + 10.5 ||
                                             m.xs.front() <= m.source_x_a - 10.5);
    if (!covered)
        throw FieldMapError(FieldMapErrorKind::analysis_region_uncovered,
                            "grid does not reach the analysis cell 10 unit cells from the source");
}

}  // namespace

GreenFieldMap ingest_field_map(std::istream& in) {
    GreenFieldMap m;
    std::map<std::string, double> header;
    std::set<std::string> seen;
    std::string orientation_value = "y";

    struct Rec {
        double x, y;
        cplx e;
    };
    std::vector<Rec> recs;

    std::string line;
    size_t lineno = 0;
    bool in_records = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq != std::string::npos && !in_records) {
            const std::string key = trim(t.substr(0, eq));
            const std::string val = trim(t.substr(eq + 1));
            if (key == "dipole_orientation") {
                orientation_value = val;
                continue;
            }
            const bool known =
                std::any_of(std::begin(kRequiredKeys), std::end(kRequiredKeys),
                            [&](const char* k) { return key == k; });
            if (!known)
                throw FieldMapError(FieldMapErrorKind::malformed_header,
                                    "unknown header key '" + key + "' at line " +
                                        std::to_string(lineno));
            double v;
            if (!parse_double(val, v))
                throw FieldMapError(FieldMapErrorKind::malformed_header,
                                    "unparseable value for '" + key + "' at line " +
                                        std::to_string(lineno));
            header[key] = v;
            seen.insert(key);
            continue;
        }
        in_records = true;
        std::istringstream ss(t);
        std::string tok[5];
        int ntok = 0;
        while (ntok < 5 && (ss >> tok[ntok])) ++ntok;
        double vals[4];
        // std::stod-based parsing so that inf/nan tokens reach the finiteness check.
        if (ntok != 4 || !parse_double(tok[0], vals[0]) || !parse_double(tok[1], vals[1]) ||
            !parse_double(tok[2], vals[2]) || !parse_double(tok[3], vals[3]))
            throw FieldMapError(FieldMapErrorKind::malformed_header,
                                "record line " + std::to_string(lineno) +
                                    " is not 'x y ReEy ImEy'");
        recs.push_back({vals[0], vals[1], cplx(vals[2], vals[3])});
    }

    for (const char* k : kSourceKeys)
        if (!seen.count(k))
            throw FieldMapError(FieldMapErrorKind::missing_source,
                                std::string("missing source metadata key '") + k + "'");
    for (const char* k : kRequiredKeys)
        if (!seen.count(k))
            throw FieldMapError(FieldMapErrorKind::malformed_header,
                                std::string("missing header key '") + k + "'");

    m.lattice_constant_nm = header["lattice_constant_nm"];
    m.hole_diameter_nm = header["hole_diameter_nm"];
    m.refractive_index = header["refractive_index"];
    m.group_index = header["group_index"];
    m.omega_p = header["omega_p"];
    m.dipole_moment = header["dipole_moment"];
    m.source_x_a = header["source_x_a"];
    m.source_y_a = header["source_y_a"];
    m.source_cell_position = static_cast<int>(std::lround(header["source_cell_position"]));
    m.gamma_local = header["gamma_local"];
    if (orientation_value != "y")
        throw FieldMapError(FieldMapErrorKind::unsupported_orientation,
                            "dipole_orientation '" + orientation_value +
                                "' unsupported; only 'y' is implemented");

    if (recs.empty())
        throw FieldMapError(FieldMapErrorKind::non_rectilinear_grid, "field map has no records");

    std::set<double> xset, yset;
    for (const auto& r : recs) {
        xset.insert(r.x);
        yset.insert(r.y);
    }
    m.xs.assign(xset.begin(), xset.end());
    m.ys.assign(yset.begin(), yset.end());
    const size_t nx = m.xs.size(), ny = m.ys.size();
    if (recs.size() != nx * ny)
        throw FieldMapError(FieldMapErrorKind::non_rectilinear_grid,
                            "record count does not form a rectilinear nx*ny grid");
    // Row-major: y is the slow index, x the fast one.
    m.field_y.resize(static_cast<Eigen::Index>(ny), static_cast<Eigen::Index>(nx));
    for (size_t idx = 0; idx < recs.size(); ++idx) {
        const size_t j = idx / nx, i = idx % nx;
        if (recs[idx].x != m.xs[i] || recs[idx].y != m.ys[j])
            throw FieldMapError(FieldMapErrorKind::non_rectilinear_grid,
                                "records are not in row-major rectilinear order");
        m.field_y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = recs[idx].e;
    }

    validate_map(m);
    return m;
}

GreenFieldMap ingest_field_map_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FieldMapError(FieldMapErrorKind::io, "cannot open field map file: " + path);
    return ingest_field_map(in);
}

namespace {
std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void write_field_map(const GreenFieldMap& m, std::ostream& out) {
    out << "lattice_constant_nm = " << fmt17(m.lattice_constant_nm) << "\n"
        << "hole_diameter_nm = " << fmt17(m.hole_diameter_nm) << "\n"
        << "refractive_index = " << fmt17(m.refractive_index) << "\n"
        << "group_index = " << fmt17(m.group_index) << "\n"
        << "omega_p = " << fmt17(m.omega_p) << "\n"
        << "dipole_moment = " << fmt17(m.dipole_moment) << "\n"
        << "source_x_a = " << fmt17(m.source_x_a) << "\n"
        << "source_y_a = " << fmt17(m.source_y_a) << "\n"
        << "source_cell_position = " << m.source_cell_position << "\n"
        << "gamma_local = " << fmt17(m.gamma_local) << "\n";
    for (Eigen::Index j = 0; j < m.field_y.rows(); ++j)
        for (Eigen::Index i = 0; i < m.field_y.cols(); ++i)
            out << fmt17(m.xs[static_cast<size_t>(i)]) << " "
                << fmt17(m.ys[static_cast<size_t>(j)]) << " "
                << fmt17(m.field_y(j, i).real()) << " " << fmt17(m.field_y(j, i).imag())
                << "\n";
}

void write_field_map_file(const GreenFieldMap& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FieldMapError(FieldMapErrorKind::io, "cannot open for write: " + path);
    write_field_map(m, out);
}

GreenFieldMap generate_synthetic_1d_field(const Synthetic1DSpec& s) {
    if (s.nx < 2 || s.ny < 1 || s.x_max <= s.x_min)
        throw ConfigError("synthetic field: bad grid spec");
    GreenFieldMap m;
    m.lattice_constant_nm = 240.0;
    m.hole_diameter_nm = 0.0;  // plain nanobeam: no holes
    m.refractive_index = 3.5;
    m.group_index = 1.0;
    m.omega_p = s.omega_p;
    m.dipole_moment = s.dipole_moment;
    m.source_x_a = s.source_x_a;
    m.source_y_a = s.source_y_a;
    m.source_cell_position = 1;
    m.gamma_local = s.gamma1;

    m.xs.resize(static_cast<size_t>(s.nx));
    for (int i = 0; i < s.nx; ++i)
        m.xs[static_cast<size_t>(i)] = s.x_min + (s.x_max - s.x_min) * i / (s.nx - 1);
    m.ys.resize(static_cast<size_t>(s.ny));
    for (int j = 0; j < s.ny; ++j)
        m.ys[static_cast<size_t>(j)] =
            s.ny == 1 ? s.y_min : s.y_min + (s.y_max - s.y_min) * j / (s.ny - 1);

    const double amp = 0.5 * std::sqrt(s.beta1 * s.gamma1 * s.beta2 * s.gamma2);
    m.field_y.resize(s.ny, s.nx);
    for (int j = 0; j < s.ny; ++j)
        for (int i = 0; i < s.nx; ++i) {
            const double dz = std::abs(m.xs[static_cast<size_t>(i)] - s.source_x_a);
            const cplx rate = iu * amp * std::exp(-iu * (s.wg.k * dz)) *
                              std::exp(iu * s.global_phase);
            // Invert Eq. 8: E_y = w^2 d Gyy, with the rate-valued Gyy = rate/(w^2 d^2).
            m.field_y(j, i) = rate / s.dipole_moment;
        }
    validate_map(m);
    return m;
}

CouplingMap coupling_map(const GreenFieldMap& map, const std::vector<CellPosition>& positions2,
                         const std::vector<double>& local_rates2) {
    if (positions2.size() != local_rates2.size())
        throw ConfigError("coupling_map: positions and local rates differ in length");
    CouplingMap cm;
    cm.positions = positions2;
    cm.emitter1_position = map.source_cell_position;
    cm.group_index = map.group_index;
    cm.gamma12_over_norm.reserve(positions2.size());
    cm.j12_over_norm.reserve(positions2.size());

    for (size_t p = 0; p < positions2.size(); ++p) {
        const auto& pos = positions2[p];
        const double gamma2 = local_rates2[p];
        if (gamma2 <= 0.0 || !std::isfinite(gamma2))
            throw FieldMapError(FieldMapErrorKind::malformed_header,
                                "coupling_map: local decay rate must be finite and > 0");
        const cplx gyy = map.green_yy(pos.x_a, pos.y_a);  // throws if outside grid
        const CouplingParams c =
            coupling_from_green(gyy, map.dipole_moment, map.dipole_moment, map.omega_p);
        const double norm = std::sqrt(map.gamma_local * gamma2);
        const double gn = c.gamma12 / norm;
        if (std::abs(gn) > 1.0 + 1e-6)
            throw FieldMapError(
                FieldMapErrorKind::unphysical_coupling,
                "coupling_map: |Gamma_12| exceeds sqrt(Gamma_1 Gamma_2); field amplitude and "
                "gamma_local metadata are inconsistent");
        cm.gamma12_over_norm.push_back(gn);
        cm.j12_over_norm.push_back(c.j12 / norm);
    }
    return cm;
}

}  // namespace wqed
