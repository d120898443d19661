#pragma once

#include <string>
#include <vector>

namespace multibump {

enum class WeightKind { SinMultibump, PiecewisePower, Tabulated };

/// Description of a sign-changing weight a(x) on [0, L].
///
///   sin_multibump   a(x) = sin(m pi x / L), m odd; n = (m + 1) / 2 humps.
///   piecewise_power a(x) = c_i dist(x, {sigma_i, tau_i})^gamma_i on each
///                   positivity interval, -d sin(...) on the negativity
///                   intervals between them (half-sine at the domain ends).
///   tabulated       piecewise-linear interpolation of (x_k, a_k).
struct WeightSpec {
    WeightKind kind = WeightKind::SinMultibump;
    double length = 1.0;

    int frequency = 3;  // sin_multibump

    std::vector<double> sigma;  // piecewise_power
    std::vector<double> tau;
    std::vector<double> gamma;
    std::vector<double> coeff;  // c_i > 0
    std::vector<double> depth;  // d_j > 0, one per nonempty negativity interval

    std::vector<double> xs;  // tabulated
    std::vector<double> as;

    static WeightSpec sin_multibump(int m, double length = 1.0);

    /// Short label used in reports, e.g. "sin_multibump(m=3)".
    std::string id() const;
};

/// Detected sign geometry: a > 0 on (sigma_i, tau_i), a < 0 between them.
struct SignPattern {
    int n = 0;
    std::vector<double> sigma;
    std::vector<double> tau;
    std::vector<double> gamma;

    /// Position of x in the partition 0 <= sigma_1 < tau_1 < ... < tau_n <= L.
    /// Even values 2k are the negativity interval before hump k+1 (k = 0..n),
    /// odd values 2i-1 are positivity interval i.
    int region(double x) const;
};

class Weight {
public:
    /// Detects the sign pattern by a 10^4-interval scan refined with
    /// bisection, fits the growth exponents, and validates the chain
    /// ordering. Throws Error(Spec) on malformed or degenerate weights.
    static Weight build(const WeightSpec& spec);

    /// Unchecked evaluation; the integrators call this in their inner loop.
    double operator()(double x) const;

    /// Checked evaluation: rejects x outside [0, L].
    double eval(double x) const;

    const WeightSpec& spec() const noexcept { return spec_; }
    const SignPattern& pattern() const noexcept { return pattern_; }
    double sup_norm() const noexcept { return sup_norm_; }
    double length() const noexcept { return spec_.length; }
    int intervals() const noexcept { return pattern_.n; }

private:
    Weight() = default;
    double eval_piecewise(double x) const;
    double eval_tabulated(double x) const;

    WeightSpec spec_;
    SignPattern pattern_;
    double sup_norm_ = 0.0;
    std::vector<double> breaks_;  // piecewise_power: region boundaries
};

Weight build_weight(const WeightSpec& spec);
double eval_weight(const Weight& w, double x);

/// Least-squares slope of log|a| against log dist on dist in [lo, hi],
/// measured inward from `edge`. `direction` is +1 to step right, -1 left.
double fit_growth_exponent(const Weight& w, double edge, int direction, double lo = 1e-4, double hi = 1e-2);

}  // namespace multibump
