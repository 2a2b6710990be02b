#ifndef WQED_DYNAMICS_HPP
#define WQED_DYNAMICS_HPP

#include <vector>

#include "wqed/dicke.hpp"
#include "wqed/types.hpp"

namespace wqed {

struct SteadyStateResult {
    DensityMatrix rho;
    double residual = 0.0;        // ||L vec(rho)||
    bool degenerate_kernel = false;  // resolved via long-time propagation
};

/// Null-space extraction via SVD with trace normalization; falls back to
/// long-time propagation from |g><g| when the kernel is (numerically)
/// degenerate, e.g. a perfectly dark state with no mixing channel.
SteadyStateResult steady_state(const Liouvillian& L,
                               const Tolerances& tol = Tolerances::defaults());

enum class Propagator { adaptive_rk, matrix_exp };

struct TimeEvolution {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
};

/// Propagates vec(rho) under dvec/dt = L vec.  matrix_exp requires a uniform
/// grid and applies exp(L dt) repeatedly; adaptive_rk accepts any increasing grid.
TimeEvolution evolve(const Liouvillian& L, const DensityMatrix& rho0,
                     const std::vector<double>& times,
                     Propagator method = Propagator::adaptive_rk,
                     const Tolerances& tol = Tolerances::defaults());

struct TwoTimeCorrelator {
    std::vector<double> tau;
    std::vector<cplx> values;
    bool nonsteady_input = false;  // rho was not stationary; t->infinity limit only
};

/// <A(0) M(tau) C(0)>_ss = tr( M exp(L tau)[ C rho A ] ).
TwoTimeCorrelator regression_correlator(const Liouvillian& L, const DensityMatrix& rho_ss,
                                        const Mat4& post_op_a, const Mat4& mid_op_m,
                                        const Mat4& pre_op_c, const std::vector<double>& tau_grid,
                                        const Tolerances& tol = Tolerances::defaults());

/// exp(M) for the 16x16 generator (scaling-and-squaring).
Mat16 expm(const Mat16& m);

}  // namespace wqed

#endif
