#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace multibump::ode {

/// (u, u') for a scalar second-order equation.
using State = std::array<double, 2>;

struct Tolerances {
    double rtol = 1e-10;
    double atol = 1e-12;
    double h_min = 1e-14;
    long max_steps = 2'000'000;
};

enum class Status { Completed, Stopped, StepUnderflow, TooManySteps };

struct Result {
    Status status = Status::Completed;
    double x = 0.0;
    State y{};
    long steps = 0;
};

/// Dormand-Prince 5(4) coefficients.
namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
}  // namespace dp5

/// One explicit step. k1 = f(x, y) on entry; on exit k7 = f(x + h, y_new)
/// (first-same-as-last). Returns the scaled error norm when tol is given.
template <class Rhs>
double dp5_step(const Rhs& f, double x, const State& y, double h, const State& k1, State& y_new, State& k7,
                const Tolerances* tol) {
    using namespace dp5;
    State t, k2, k3, k4, k5, k6;
    for (int i = 0; i < 2; ++i) t[i] = y[i] + h * a21 * k1[i];
    k2 = f(x + c2 * h, t);
    for (int i = 0; i < 2; ++i) t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    k3 = f(x + c3 * h, t);
    for (int i = 0; i < 2; ++i) t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    k4 = f(x + c4 * h, t);
    for (int i = 0; i < 2; ++i) t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    k5 = f(x + c5 * h, t);
    for (int i = 0; i < 2; ++i)
        t[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    k6 = f(x + h, t);
    for (int i = 0; i < 2; ++i) y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    k7 = f(x + h, y_new);
    if (!tol) return 0.0;
    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
        double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        double sc = tol->atol + tol->rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
        err += (e / sc) * (e / sc);
    }
    return std::sqrt(0.5 * err);
}

/// Adaptive integration from x0 to x1 (x1 > x0). Steps are clipped so that
/// every point of `stops` inside (x0, x1] is hit exactly. After each
/// accepted step `observe(x_prev, y_prev, x, y)` is called; returning false
/// stops the integration with Status::Stopped. If `mesh` is non-null the
/// accepted step endpoints are appended to it.
template <class Rhs, class Observer>
Result integrate(const Rhs& f, double x0, State y0, double x1, const Tolerances& tol, Observer&& observe,
                 std::span<const double> stops = {}, std::vector<double>* mesh = nullptr) {
    Result r;
    r.x = x0;
    r.y = y0;
    State k1 = f(x0, y0);
    double span = x1 - x0;
    double h = std::min(span, 1e-3 * span + 1e-6);
    {
        // Initial step from the derivative scale.
        double d0 = 0, d1 = 0;
        for (int i = 0; i < 2; ++i) {
            double sc = tol.atol + tol.rtol * std::abs(y0[i]);
            d0 += (y0[i] / sc) * (y0[i] / sc);
            d1 += (k1[i] / sc) * (k1[i] / sc);
        }
        if (d1 > 1e-20 && d0 > 1e-20) h = std::min(h, 0.01 * std::sqrt(d0 / d1));
        h = std::max(h, 1e-10 * span);
    }
    auto next_stop = std::upper_bound(stops.begin(), stops.end(), x0);
    if (mesh) mesh->push_back(x0);
    State y_new, k7;
    while (r.x < x1) {
        if (r.steps >= tol.max_steps) {
            r.status = Status::TooManySteps;
            return r;
        }
        while (next_stop != stops.end() && *next_stop <= r.x) ++next_stop;
        double target = x1;
        if (next_stop != stops.end() && *next_stop < x1) target = *next_stop;
        bool clipped = false;
        double step = h;
        if (r.x + step >= target) {
            step = target - r.x;
            clipped = true;
        }
        double err = dp5_step(f, r.x, r.y, step, k1, y_new, k7, &tol);
        if (!(err <= 1.0)) {
            double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h = step * fac;
            if (h < tol.h_min * std::max(1.0, std::abs(r.x))) {
                r.status = Status::StepUnderflow;
                return r;
            }
            continue;
        }
        double x_prev = r.x;
        State y_prev = r.y;
        r.x = clipped ? target : r.x + step;
        r.y = y_new;
        k1 = k7;
        ++r.steps;
        if (mesh) mesh->push_back(r.x);
        double fac = err > 0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
        // A clipped step says nothing about the natural size; keep h.
        if (!clipped || step * fac < h) h = step * fac;
        if (!observe(x_prev, y_prev, r.x, r.y)) {
            r.status = Status::Stopped;
            return r;
        }
    }
    r.status = Status::Completed;
    return r;
}

/// Fixed-mesh replay: one DP5 step per mesh interval, no error control.
/// Used where a result must depend smoothly on the initial data.
template <class Rhs, class Observer>
Result integrate_on_mesh(const Rhs& f, std::span<const double> mesh, State y0, Observer&& observe) {
    Result r;
    r.x = mesh.front();
    r.y = y0;
    State k1 = f(r.x, r.y), y_new, k7;
    for (std::size_t k = 1; k < mesh.size(); ++k) {
        double h = mesh[k] - mesh[k - 1];
        dp5_step(f, mesh[k - 1], r.y, h, k1, y_new, k7, nullptr);
        State y_prev = r.y;
        r.y = y_new;
        r.x = mesh[k];
        k1 = k7;
        ++r.steps;
        if (!observe(mesh[k - 1], y_prev, r.x, r.y)) {
            r.status = Status::Stopped;
            return r;
        }
    }
    r.status = Status::Completed;
    return r;
}

inline constexpr auto no_observer = [](double, const State&, double, const State&) { return true; };

}  // namespace multibump::ode
