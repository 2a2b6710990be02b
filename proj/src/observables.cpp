#include "wqed/observables.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <thread>

namespace wqed {

DriveParams DriveSpec::at_detuning(const PairSystem& sys, double delta) const {
    DriveParams d;
    d.detuning = delta;
    d.mode = mode;
    if (mode == DriveMode::RF) {
        d.rabi1 = rf_rabi1;
        d.rabi2 = rf_rabi2;
    } else {
        const double k = sys.wg.k;
        d.rabi1 = pump * std::sqrt(sys.e1.beta * sys.e1.gamma0 / 2.0) *
                  std::exp(iu * (k * sys.e1.position_z));
        d.rabi2 = pump * std::sqrt(sys.e2.beta * sys.e2.gamma0 / 2.0) *
                  std::exp(iu * (k * sys.e2.position_z));
    }
    d.validate();
    return d;
}

double DriveSpec::amplitude_scale(const PairSystem& sys) const {
    if (mode == DriveMode::RF) return std::max(std::abs(rf_rabi1), std::abs(rf_rabi2));
    (void)sys;
    return pump;
}

DriveSpec phase_locked_rf(const PairSystem& sys, double amplitude) {
    DriveSpec d;
    d.mode = DriveMode::RF;
    d.rf_rabi1 = amplitude * std::exp(iu * (sys.wg.k * sys.e1.position_z));
    d.rf_rabi2 = amplitude * std::exp(iu * (sys.wg.k * sys.e2.position_z));
    return d;
}

DriveSpec in_phase_rf(double amplitude) {
    DriveSpec d;
    d.mode = DriveMode::RF;
    d.rf_rabi1 = amplitude;
    d.rf_rabi2 = amplitude;
    return d;
}

Mat4 FieldOperatorSpec::matrix() const {
    const AtomicOps& o = atomic_ops();
    Mat4 m = coeff1 * o.ge1 + coeff2 * o.ge2;
    if (include_pump) m += pump_coeff * Mat4::Identity();
    return m;
}

FieldOperatorSpec field_operator(const PairSystem& sys, const DriveSpec& drive,
                                 Direction direction) {
    FieldOperatorSpec f;
    f.direction = direction;
    const double c1 = std::sqrt(sys.e1.beta * sys.e1.gamma0 / 2.0);
    const double c2 = std::sqrt(sys.e2.beta * sys.e2.gamma0 / 2.0);
    if (drive.mode == DriveMode::RF) {
        // Detect with the drive's relative phases: the collective channel that
        // is pumped is the one whose emission reaches the detector coherently.
        const cplx p1 = std::abs(drive.rf_rabi1) > 0.0
                            ? std::conj(drive.rf_rabi1) / std::abs(drive.rf_rabi1)
                            : cplx(1.0, 0.0);
        const cplx p2 = std::abs(drive.rf_rabi2) > 0.0
                            ? std::conj(drive.rf_rabi2) / std::abs(drive.rf_rabi2)
                            : cplx(1.0, 0.0);
        f.coeff1 = iu * c1 * p1;
        f.coeff2 = iu * c2 * p2;
        f.include_pump = false;
        return f;
    }
    const double k = sys.wg.k;
    const double sgn = direction == Direction::forward ? -1.0 : +1.0;
    f.coeff1 = iu * c1 * std::exp(iu * (sgn * k * sys.e1.position_z));
    f.coeff2 = iu * c2 * std::exp(iu * (sgn * k * sys.e2.position_z));
    f.include_pump = drive.mode == DriveMode::RT && direction == Direction::forward;
    f.pump_coeff = f.include_pump ? cplx(drive.pump, 0.0) : cplx(0.0, 0.0);
    return f;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
    if (n < 1 || hi < lo) throw ConfigError("grid: need n >= 1 and hi >= lo");
    std::vector<double> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        g[static_cast<size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return g;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || hi <= lo || n < 2) throw ConfigError("log grid: need 0 < lo < hi, n >= 2");
    std::vector<double> g(static_cast<size_t>(n));
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < n; ++i)
        g[static_cast<size_t>(i)] = std::exp(l0 + (l1 - l0) * i / (n - 1));
    return g;
}

namespace {

void parallel_for(size_t n, int workers, const std::function<void(size_t)>& body) {
    workers = std::max(1, workers);
    if (workers == 1 || n < 2) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    std::atomic<bool> failed{false};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i = next++; i < n; i = next++) {
                if (failed) return;
                try {
                    body(i);
                } catch (...) {
                    failed = true;
                    throw;  // terminates; numerical failures here are fatal anyway
                }
            }
        });
    for (auto& t : pool) t.join();
}

/// Drive-normalized intensity (Eqs. 2a/2b denominator is the pump power).
double intensity_at(const PairSystem& sys, const DriveSpec& drive, double delta,
                    const Tolerances& tol) {
    const DriveParams dp = drive.at_detuning(sys, delta);
    const Liouvillian L = build_liouvillian(sys.e1, sys.e2, dp, sys.coupling());
    const SteadyStateResult ss = steady_state(L, tol);
    const Mat4 det = field_operator(sys, drive,
                                    drive.mode == DriveMode::RR ? Direction::backward
                                                                : Direction::forward)
                         .matrix();
    const cplx val = (det.adjoint() * det * ss.rho.rho).trace();
    const double norm = drive.amplitude_scale(sys);
    if (norm <= 0.0) throw ConfigError("spectrum: zero drive amplitude");
    if (std::abs(val.imag()) > 1e-10 * std::max(norm * norm, std::abs(val.real())))
        throw NumericsError("spectrum: intensity has a non-negligible imaginary part");
    return val.real() / (norm * norm);
}

}  // namespace

SpectrumResult spectrum(const PairSystem& sys, const DriveSpec& drive,
                        std::vector<double> delta_grid, const SpectrumOptions& opts) {
    if (delta_grid.empty()) throw ConfigError("spectrum: empty detuning grid");
    std::sort(delta_grid.begin(), delta_grid.end());
    delta_grid.erase(std::unique(delta_grid.begin(), delta_grid.end()), delta_grid.end());

    SpectrumResult res;
    res.mode = drive.mode;
    res.drive_scale = drive.amplitude_scale(sys);
    if (res.drive_scale > 0.1)
        res.warnings.push_back("drive above the low-power threshold 0.1; spectra are not "
                               "linear-response");

    std::map<double, double> samples;
    auto eval_batch = [&](const std::vector<double>& pts) {
        std::vector<double> vals(pts.size());
        parallel_for(pts.size(), opts.workers, [&](size_t i) {
            vals[i] = intensity_at(sys, drive, pts[i], opts.tol);
        });
        for (size_t i = 0; i < pts.size(); ++i) samples[pts[i]] = vals[i];
    };
    eval_batch(delta_grid);

    for (int level = 0; level < opts.refine_levels; ++level) {
        double lo = samples.begin()->second, hi = lo;
        for (const auto& [d, v] : samples) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        const double jump = opts.refine_jump * std::max(hi - lo, 1e-12);
        std::vector<double> mids;
        for (auto it = samples.begin(), nx = std::next(it); nx != samples.end(); ++it, ++nx)
            if (std::abs(nx->second - it->second) > jump)
                mids.push_back((it->first + nx->first) / 2.0);
        if (mids.empty()) break;
        eval_batch(mids);
    }

    res.detunings.reserve(samples.size());
    res.raw_intensity.reserve(samples.size());
    for (const auto& [d, v] : samples) {
        res.detunings.push_back(d);
        // SVD noise at very weak drive can leave a tiny negative residue.
        res.raw_intensity.push_back(v < 0.0 && v > -1e-6 ? 0.0 : v);
        if (v <= -1e-6) throw NumericsError("spectrum: negative intensity beyond noise floor");
    }
    res.intensity = res.raw_intensity;
    if (drive.mode == DriveMode::RF) {
        const double peak = *std::max_element(res.intensity.begin(), res.intensity.end());
        if (peak > 0.0)
            for (double& v : res.intensity) v /= peak;
    }
    return res;
}

CorrelationResult g2_correlation(const PairSystem& sys, const DriveSpec& drive, double delta,
                                 const std::vector<double>& tau_grid, const Tolerances& tol) {
    const DriveParams dp = drive.at_detuning(sys, delta);
    const Liouvillian L = build_liouvillian(sys.e1, sys.e2, dp, sys.coupling());
    const SteadyStateResult ss = steady_state(L, tol);
    const Mat4 e = field_operator(sys, drive,
                                  drive.mode == DriveMode::RR ? Direction::backward
                                                              : Direction::forward)
                       .matrix();
    const Mat4 edag = e.adjoint();
    const Mat4 m = edag * e;

    const double i_ss = (m * ss.rho.rho).trace().real();
    const double scale = drive.amplitude_scale(sys);
    if (i_ss <= 1e-6 * scale * scale)
        throw DarkStateError("dark state: g2 undefined (steady-state intensity is zero)");

    const TwoTimeCorrelator corr = regression_correlator(L, ss.rho, edag, m, e, tau_grid, tol);

    CorrelationResult out;
    out.tau = tau_grid;
    out.steady_intensity = i_ss;
    out.g2.reserve(tau_grid.size());
    for (const cplx& v : corr.values) {
        if (std::abs(v.imag()) > 1e-10 * std::max(std::abs(v.real()), i_ss * i_ss))
            throw NumericsError("g2: correlator has a non-negligible imaginary part");
        double g = v.real() / (i_ss * i_ss);
        if (g < 0.0) {
            if (g < -1e-6) throw NumericsError("g2: negative value beyond noise floor");
            g = 0.0;
        }
        out.g2.push_back(g);
    }
    return out;
}

namespace {

int sub_state_index(double gamma12) { return gamma12 < 0.0 ? 2 : 3; }  // dicke: 2=|s>, 3=|a>

}  // namespace

PopulationTraces dicke_populations(const PairSystem& sys, const DriveSpec& drive,
                                   const std::vector<double>& times, const Tolerances& tol) {
    const CouplingParams c = sys.coupling();
    const DriveParams dp = drive.at_detuning(sys, 0.0);
    const Liouvillian L = build_liouvillian(sys.e1, sys.e2, dp, c);

    PopulationTraces out;
    out.sub_is_symmetric = c.gamma12 < 0.0;
    const int isub = sub_state_index(c.gamma12);
    const int isup = isub == 2 ? 3 : 2;

    const TimeEvolution ev = evolve(L, DensityMatrix::ground(), times, Propagator::adaptive_rk, tol);
    out.times = ev.times;
    out.rho_sub.reserve(times.size());
    out.rho_sup.reserve(times.size());
    for (const auto& st : ev.states) {
        const Mat4 rd = dicke_transform(st.rho, Basis::dicke);
        out.rho_sub.push_back(rd(isub, isub).real());
        out.rho_sup.push_back(rd(isup, isup).real());
    }
    const SteadyStateResult ss = steady_state(L, tol);
    const Mat4 rd = dicke_transform(ss.rho.rho, Basis::dicke);
    out.steady_sub = rd(isub, isub).real();
    out.steady_sup = rd(isup, isup).real();
    return out;
}

std::pair<double, double> steady_dicke_populations(const PairSystem& sys, const DriveSpec& drive,
                                                   const Tolerances& tol) {
    const CouplingParams c = sys.coupling();
    const Liouvillian L = build_liouvillian(sys.e1, sys.e2, drive.at_detuning(sys, 0.0), c);
    const SteadyStateResult ss = steady_state(L, tol);
    const Mat4 rd = dicke_transform(ss.rho.rho, Basis::dicke);
    const int isub = sub_state_index(c.gamma12);
    return {rd(isub, isub).real(), rd(isub == 2 ? 3 : 2, isub == 2 ? 3 : 2).real()};
}

FeatureInputs feature_inputs(const PairSystem& sys) {
    const CouplingParams c = sys.coupling();
    FeatureInputs f;
    f.expected_position = (c.gamma12 < 0.0 ? -1.0 : 1.0) * c.j12;
    f.expected_width = sys.e1.gamma0 - std::abs(c.gamma12) + sys.e1.gamma_deph + sys.e2.gamma_deph;
    return f;
}

SubradiantFeature extract_subradiant_feature(std::vector<double> deltas,
                                             std::vector<double> intensity,
                                             const FeatureInputs& expect,
                                             const std::function<double(double)>& resampler) {
    if (deltas.size() != intensity.size() || deltas.size() < 5)
        throw ConfigError("feature extraction: need matching delta/intensity arrays");

    const double pos = expect.expected_position;
    const double w_feat = std::max(expect.expected_width, 1e-4);
    const double window = std::clamp(10.0 * w_feat, 0.3, 1.2);

    auto count_across = [&] {
        size_t n = 0;
        for (size_t i = 0; i < deltas.size(); ++i)
            if (std::abs(deltas[i] - pos) < w_feat / 2.0) ++n;
        return n;
    };
    if (count_across() < 20) {
        if (!resampler)
            throw ConfigError("feature extraction: fewer than 20 samples across the sub-radiant "
                              "width and no resampler supplied");
        // Densify across the expected feature and its shoulders.
        std::vector<std::pair<double, double>> merged;
        for (size_t i = 0; i < deltas.size(); ++i) merged.emplace_back(deltas[i], intensity[i]);
        const int n_extra = 121;
        for (int i = 0; i < n_extra; ++i) {
            const double d = pos - 2.0 * w_feat + 4.0 * w_feat * i / (n_extra - 1);
            merged.emplace_back(d, resampler(d));
        }
        std::sort(merged.begin(), merged.end());
        deltas.clear();
        intensity.clear();
        for (const auto& [d, v] : merged)
            if (deltas.empty() || d != deltas.back()) {
                deltas.push_back(d);
                intensity.push_back(v);
            }
    }

    // Apex: the highest interior local maximum inside the search window.
    SubradiantFeature out;
    ptrdiff_t apex = -1;
    for (size_t k = 1; k + 1 < deltas.size(); ++k) {
        if (std::abs(deltas[k] - pos) >= window) continue;
        if (intensity[k] >= intensity[k - 1] && intensity[k] >= intensity[k + 1]) {
            if (apex < 0 || intensity[k] > intensity[static_cast<size_t>(apex)])
                apex = static_cast<ptrdiff_t>(k);
        }
    }
    if (apex < 0) return out;  // magnitude 0, found=false

    const size_t ka = static_cast<size_t>(apex);
    // Reference level: walk downhill toward the super-radiant dip centre.
    const double super_pos = -pos;
    const int step = super_pos > deltas[ka] ? 1 : -1;
    size_t kr = ka;
    while ((step > 0 ? kr + 1 < deltas.size() : kr > 0) &&
           intensity[static_cast<size_t>(static_cast<ptrdiff_t>(kr) + step)] <= intensity[kr])
        kr = static_cast<size_t>(static_cast<ptrdiff_t>(kr) + step);

    const double magnitude = intensity[ka] - intensity[kr];
    if (magnitude < 1e-4) return out;  // below the noise floor

    out.found = true;
    out.delta_t_sub = magnitude;

    // Parabolic refinement of the apex position.
    out.peak_position = deltas[ka];
    if (ka > 0 && ka + 1 < deltas.size()) {
        const double y0 = intensity[ka - 1], y1 = intensity[ka], y2 = intensity[ka + 1];
        const double denom = y0 - 2.0 * y1 + y2;
        if (std::abs(denom) > 0.0) {
            const double off = 0.5 * (y0 - y2) / denom;
            if (std::abs(off) <= 1.0)
                out.peak_position += off * (deltas[ka + 1] - deltas[ka - 1]) / 2.0;
        }
    }

    // FWHM above the reference floor.
    const double half = intensity[kr] + magnitude / 2.0;
    auto crossing = [&](int dir) -> double {
        size_t k = ka;
        while ((dir > 0 ? k + 1 < deltas.size() : k > 0)) {
            const size_t n = static_cast<size_t>(static_cast<ptrdiff_t>(k) + dir);
            if (intensity[n] <= half) {
                const double t = (intensity[k] - half) / (intensity[k] - intensity[n]);
                return deltas[k] + t * (deltas[n] - deltas[k]);
            }
            k = n;
        }
        return deltas[dir > 0 ? deltas.size() - 1 : 0];
    };
    out.peak_width = crossing(+1) - crossing(-1);
    return out;
}

RisetimeFit fit_risetime(const std::vector<double>& tau, const std::vector<double>& g2,
                         const RisetimeOptions& opts) {
    if (tau.size() != g2.size() || tau.size() < 4)
        throw ConfigError("risetime: need matching tau/g2 arrays");
    if (g2.front() >= 1.0)
        throw ConfigError("risetime: trace is not antibunched (g2 at tau_min >= 1)");

    // Fit the contiguous mid-rise band starting at the global minimum; the fast
    // transient before the dip does not follow the single-rate model.
    size_t kmin = 0;
    for (size_t k = 1; k < g2.size(); ++k)
        if (g2[k] < g2[kmin]) kmin = k;
    std::vector<double> ts, ys;
    for (size_t k = kmin; k < g2.size(); ++k) {
        if (g2[k] > opts.band_hi) break;
        if (g2[k] >= opts.band_lo) {
            ts.push_back(tau[k]);
            ys.push_back(g2[k]);
        }
    }
    if (ts.size() < 3) throw ConfigError("risetime: too few samples inside the fit band");

    auto model = [](double gamma, double t) {
        const double e = std::exp(-gamma * t / 2.0);
        return 1.0 - (gamma * e - (gamma / 2.0) * std::exp(-gamma * t)) / (gamma / 2.0);
    };

    // Initialize from the tau where g2 first reaches 1 - 1/e.
    const double thr = 1.0 - std::exp(-1.0);
    double tstar = ts.back();
    for (size_t k = 0; k < ys.size(); ++k)
        if (ys[k] >= thr) {
            tstar = ts[k];
            break;
        }
    double gamma = -2.0 * std::log(1.0 - std::sqrt(thr)) / tstar;

    // Levenberg-damped Gauss-Newton on the single rate parameter.
    double lambda = 1e-3;
    auto sq_residual = [&](double g) {
        double acc = 0.0;
        for (size_t k = 0; k < ts.size(); ++k) {
            const double r = model(g, ts[k]) - ys[k];
            acc += r * r;
        }
        return acc;
    };
    double best = sq_residual(gamma);
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        double jtj = 0.0, jtr = 0.0;
        for (size_t k = 0; k < ts.size(); ++k) {
            const double e = std::exp(-gamma * ts[k] / 2.0);
            const double f = (1.0 - e) * (1.0 - e);  // same model, factored form
            const double df = 2.0 * (1.0 - e) * (ts[k] / 2.0) * e;
            jtj += df * df;
            jtr += df * (f - ys[k]);
        }
        const double step = -jtr / (jtj + lambda * jtj);
        const double cand = gamma + step;
        if (!(cand > 0.0) || !std::isfinite(cand)) {
            lambda *= 5.0;
            continue;
        }
        const double r = sq_residual(cand);
        if (r <= best) {
            const double rel = std::abs(cand - gamma) / std::max(cand, 1e-300);
            gamma = cand;
            best = r;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < opts.gamma_tol) break;
        } else {
            lambda *= 5.0;
            if (lambda > 1e12) break;
        }
    }
    if (it >= opts.max_iterations)
        throw NumericsError("risetime: no convergence after " +
                            std::to_string(opts.max_iterations) +
                            " iterations (residual " + std::to_string(std::sqrt(best)) + ")");

    RisetimeFit out;
    out.gamma = gamma;
    out.rise_time = 1.0 / gamma;
    out.residual_rms = std::sqrt(best / static_cast<double>(ts.size()));
    out.iterations = it + 1;
    return out;
}

}  // namespace wqed
