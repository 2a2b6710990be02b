#ifndef WQED_ODE_HPP
#define WQED_ODE_HPP

#include <algorithm>
#include <cmath>

#include "wqed/types.hpp"

namespace wqed {

// Dormand-Prince 5(4) embedded pair with adaptive step control.
// The right-hand side is dy/dt = f(y); the Liouvillian case is f = L*y.

struct OdeOptions {
    double rtol = 1e-9;
    double atol = 1e-12;
    double safety = 0.9;
    double min_factor = 0.2;
    double max_factor = 5.0;
    long max_steps = 20'000'000;
};

template <typename Vec, typename Rhs>
class Dopri5 {
  public:
    Dopri5(Rhs rhs, OdeOptions opt = {}) : rhs_(std::move(rhs)), opt_(opt) {}

    /// Advances y from t to t_end, clamping internal steps to land on t_end.
    void integrate(Vec& y, double t, double t_end) {
        if (t_end <= t) return;
        Vec k1 = rhs_(y);
        double h = initial_step(y, k1, t_end - t);
        long steps = 0;
        while (t < t_end) {
            if (++steps > opt_.max_steps)
                throw NumericsError("ode: step budget exhausted (stiff regime?)");
            h = std::min(h, t_end - t);
            if (h < 1e-14 * std::max(1.0, std::abs(t)))
                throw NumericsError("ode: step size underflow (stiff parameter regime)");

            const Vec k2 = rhs_(y + h * (a21 * k1));
            const Vec k3 = rhs_(y + h * (a31 * k1 + a32 * k2));
            const Vec k4 = rhs_(y + h * (a41 * k1 + a42 * k2 + a43 * k3));
            const Vec k5 = rhs_(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
            const Vec k6 = rhs_(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            const Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
            const Vec k7 = rhs_(y5);
            const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

            const double enorm = error_norm(y, y5, err);
            if (enorm <= 1.0) {
                t += h;
                y = y5;
                k1 = k7;  // FSAL
            }
            const double factor =
                enorm > 0.0 ? opt_.safety * std::pow(enorm, -0.2) : opt_.max_factor;
            h *= std::clamp(factor, opt_.min_factor, opt_.max_factor);
        }
    }

  private:
    double error_norm(const Vec& y0, const Vec& y1, const Vec& err) const {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < err.size(); ++i) {
            const double sc =
                opt_.atol + opt_.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
            const double r = std::abs(err(i)) / sc;
            acc += r * r;
        }
        return std::sqrt(acc / static_cast<double>(err.size()));
    }

    double initial_step(const Vec& y, const Vec& f, double span) const {
        const double dy = f.norm();
        const double sy = std::max(y.norm(), 1e-8);
        double h = dy > 0.0 ? 0.01 * sy / dy : span / 100.0;
        return std::min(h, span);
    }

    Rhs rhs_;
    OdeOptions opt_;

    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600;
    static constexpr double e3 = 500.0 / 1113 - 7571.0 / 16695;
    static constexpr double e4 = 125.0 / 192 - 393.0 / 640;
    static constexpr double e5 = -2187.0 / 6784 + 92097.0 / 339200;
    static constexpr double e6 = 11.0 / 84 - 187.0 / 2100;
    static constexpr double e7 = -1.0 / 40;
};

}  // namespace wqed

#endif
