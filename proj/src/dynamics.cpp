#include "wqed/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

#include "wqed/ode.hpp"

namespace wqed {

Mat16 expm(const Mat16& m) { return m.exp(); }

namespace {

double residual_of(const Liouvillian& L, const Mat4& rho) {
    return (L.matrix * vectorize(rho)).norm();
}

Mat4 hermitize_and_normalize(Mat4 rho) {
    rho = ((rho + rho.adjoint()) / 2.0).eval();
    const double tr = rho.trace().real();
    if (std::abs(tr) < 1e-300) throw NumericsError("steady state: traceless kernel vector");
    return rho / tr;
}

/// Long-time propagation from |g><g| by repeated squaring of exp(L T0).
Mat4 propagate_to_stationarity(const Liouvillian& L, double residual_goal) {
    Mat16 p = expm((L.matrix * 50.0).eval());
    Vec16 v = vectorize(DensityMatrix::ground().rho);
    Mat4 best = unvectorize(v);
    for (int doubling = 0; doubling < 24; ++doubling) {
        v = p * v;
        best = hermitize_and_normalize(unvectorize(v));
        if (residual_of(L, best) <= residual_goal) return best;
        p = (p * p).eval();  // horizon 50 * 2^n
    }
    return best;
}

}  // namespace

SteadyStateResult steady_state(const Liouvillian& L, const Tolerances& tol) {
    Eigen::JacobiSVD<Mat16> svd(L.matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double scale = std::max(sv(0), 1.0);

    SteadyStateResult out;
    out.rho.basis = L.basis;

    out.degenerate_kernel = sv(14) <= scale * tol.kernel_degeneracy;

    // Steady state as the kernel projection of |g><g|:
    //   rho = (I - pinv(L) L) e_gg = e_gg - pinv(L) (L e_gg).
    // The right-hand side L e_gg is O(drive), so the numerical error of the
    // weak-drive populations scales with the drive instead of with 1; the raw
    // SVD kernel vector is orders of magnitude noisier there. For a degenerate
    // kernel (dark state alongside the driven sector) the projection lands on
    // the state reachable from |g><g|, since the dark component has no
    // ground-state overlap; positivity guards against exotic kernels.
    const Vec16 e_gg = vectorize(DensityMatrix::ground().rho);
    const Vec16 b = L.matrix * e_gg;
    Vec16 w = svd.matrixU().adjoint() * b;
    for (int k = 0; k < 16; ++k)
        w(k) = sv(k) > scale * tol.kernel_degeneracy ? w(k) / sv(k) : cplx(0.0, 0.0);
    const Mat4 proj = unvectorize((e_gg - svd.matrixV() * w).eval());
    const double resid_limit = std::max(tol.steady_residual, 1e-12 * scale);
    if (std::abs(proj.trace()) > 1e-6) {
        out.rho.rho = hermitize_and_normalize(proj);
        out.residual = residual_of(L, out.rho.rho);
        if (out.residual <= resid_limit && out.rho.min_eigenvalue() >= -1e-8) return out;
    }
    if (!out.degenerate_kernel) {
        out.rho.rho = hermitize_and_normalize(unvectorize(svd.matrixV().col(15)));
        out.residual = residual_of(L, out.rho.rho);
        if (out.residual <= resid_limit && out.rho.min_eigenvalue() >= -1e-8) return out;
    }

    out.degenerate_kernel = true;
    out.rho.rho = propagate_to_stationarity(L, tol.steady_residual);
    out.residual = residual_of(L, out.rho.rho);
    if (out.residual > 1e3 * tol.steady_residual)
        throw NumericsError("steady state: propagation fallback did not converge");
    return out;
}

TimeEvolution evolve(const Liouvillian& L, const DensityMatrix& rho0,
                     const std::vector<double>& times, Propagator method,
                     const Tolerances& tol) {
    if (times.empty()) throw ConfigError("evolve: empty time grid");
    for (size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1]) throw ConfigError("evolve: times must be strictly increasing");
    if (times.front() < 0.0) throw ConfigError("evolve: negative time");
    if (rho0.basis != L.basis) throw ConfigError("evolve: basis mismatch between rho0 and L");
    rho0.check(1e-9, 1e-9, 1e-8);

    TimeEvolution ev;
    ev.times = times;
    ev.states.reserve(times.size());

    if (method == Propagator::matrix_exp) {
        // Uniform grids only: one exp(L dt), applied repeatedly.
        const double dt0 = times.size() > 1 ? times[1] - times[0] : times[0];
        for (size_t i = 1; i + 1 < times.size(); ++i)
            if (std::abs((times[i + 1] - times[i]) - dt0) > 1e-9 * std::max(1.0, dt0))
                throw ConfigError("evolve: matrix_exp propagator requires a uniform grid");
        Vec16 v = vectorize(rho0.rho);
        if (times.front() > 0.0) v = expm((L.matrix * times.front()).eval()) * v;
        ev.states.push_back({unvectorize(v), L.basis});
        const Mat16 p = expm((L.matrix * dt0).eval());
        for (size_t i = 1; i < times.size(); ++i) {
            v = p * v;
            ev.states.push_back({unvectorize(v), L.basis});
        }
        return ev;
    }

    const Mat16& Lm = L.matrix;
    auto rhs = [&Lm](const Vec16& y) -> Vec16 { return Lm * y; };
    Dopri5<Vec16, decltype(rhs)> stepper(rhs, OdeOptions{tol.rk_rtol, tol.rk_atol});
    Vec16 v = vectorize(rho0.rho);
    double t = 0.0;
    for (double target : times) {
        stepper.integrate(v, t, target);
        t = target;
        ev.states.push_back({unvectorize(v), L.basis});
    }
    return ev;
}

TwoTimeCorrelator regression_correlator(const Liouvillian& L, const DensityMatrix& rho_ss,
                                        const Mat4& post_op_a, const Mat4& mid_op_m,
                                        const Mat4& pre_op_c, const std::vector<double>& tau_grid,
                                        const Tolerances& tol) {
    if (tau_grid.empty()) throw ConfigError("regression: empty tau grid");
    for (size_t i = 1; i < tau_grid.size(); ++i)
        if (tau_grid[i] <= tau_grid[i - 1])
            throw ConfigError("regression: tau grid must be strictly increasing");
    if (tau_grid.front() < 0.0) throw ConfigError("regression: tau must be >= 0");
    if (rho_ss.basis != L.basis) throw ConfigError("regression: basis mismatch");

    TwoTimeCorrelator corr;
    corr.tau = tau_grid;
    corr.values.reserve(tau_grid.size());
    corr.nonsteady_input = residual_of(L, rho_ss.rho) > 1e-6;

    const Mat16& Lm = L.matrix;
    auto rhs = [&Lm](const Vec16& y) -> Vec16 { return Lm * y; };
    Dopri5<Vec16, decltype(rhs)> stepper(rhs, OdeOptions{tol.rk_rtol, tol.rk_atol});

    Vec16 x = vectorize((pre_op_c * rho_ss.rho * post_op_a).eval());
    double t = 0.0;
    for (double tau : tau_grid) {
        stepper.integrate(x, t, tau);
        t = tau;
        corr.values.push_back(trace_of_product(mid_op_m, x));
    }
    return corr;
}

}  // namespace wqed
