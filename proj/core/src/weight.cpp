#include "multibump/weight.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "multibump/errors.hpp"

namespace multibump {

namespace {

constexpr int kScanIntervals = 10000;
constexpr double kRootTol = 1e-12;

struct SignRun {
    double start;
    double end;
    int sign;
};

int sign_of(double v, double zero_tol) {
    if (v > zero_tol) return 1;
    if (v < -zero_tol) return -1;
    return 0;
}

template <class F>
double bisect_root(const F& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200 && hi - lo > kRootTol * 1e-3; ++it) {
        double mid = 0.5 * (lo + hi);
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void check_finite_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw spec_error(std::string(name) + " must be a positive finite number");
}

void validate_spec(const WeightSpec& s) {
    check_finite_positive(s.length, "domain length L");
    switch (s.kind) {
    case WeightKind::SinMultibump:
        if (s.frequency < 1 || s.frequency % 2 == 0)
            throw spec_error("sin_multibump requires an odd positive frequency m, got " + std::to_string(s.frequency));
        break;
    case WeightKind::PiecewisePower: {
        const std::size_t n = s.sigma.size();
        if (n == 0) throw spec_error("piecewise_power needs at least one positivity interval");
        if (s.tau.size() != n || s.gamma.size() != n || s.coeff.size() != n)
            throw spec_error("piecewise_power: sigma, tau, gamma, c must have equal length");
        double prev = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (s.sigma[i] < prev || (i > 0 && s.sigma[i] <= prev))
                throw spec_error("piecewise_power breakpoints must be strictly increasing within [0, L]");
            if (s.tau[i] <= s.sigma[i]) throw spec_error("piecewise_power requires sigma_i < tau_i");
            prev = s.tau[i];
            check_finite_positive(s.gamma[i], "gamma_i");
            check_finite_positive(s.coeff[i], "c_i");
        }
        if (s.tau.back() > s.length) throw spec_error("piecewise_power breakpoints exceed L");
        std::size_t negatives = (n - 1) + (s.sigma.front() > 0.0 ? 1 : 0) + (s.tau.back() < s.length ? 1 : 0);
        if (s.depth.size() != negatives)
            throw spec_error("piecewise_power expects " + std::to_string(negatives) + " negative-hump depths d");
        for (double d : s.depth) check_finite_positive(d, "d_j");
        break;
    }
    case WeightKind::Tabulated: {
        if (s.xs.size() < 64) throw spec_error("tabulated weight needs at least 64 samples");
        if (s.xs.size() != s.as.size()) throw spec_error("tabulated weight: x and a sample counts differ");
        for (std::size_t k = 1; k < s.xs.size(); ++k)
            if (!(s.xs[k] > s.xs[k - 1])) throw spec_error("tabulated x-samples must be strictly increasing");
        const double tol = 1e-12 * s.length;
        if (std::abs(s.xs.front()) > tol || std::abs(s.xs.back() - s.length) > tol)
            throw spec_error("tabulated x-samples must span exactly [0, L]");
        for (double a : s.as)
            if (!std::isfinite(a)) throw spec_error("tabulated a-samples must be finite");
        break;
    }
    }
}

}  // namespace

WeightSpec WeightSpec::sin_multibump(int m, double length) {
    WeightSpec s;
    s.kind = WeightKind::SinMultibump;
    s.frequency = m;
    s.length = length;
    return s;
}

std::string WeightSpec::id() const {
    switch (kind) {
    case WeightKind::SinMultibump: return "sin_multibump(m=" + std::to_string(frequency) + ")";
    case WeightKind::PiecewisePower: return "piecewise_power(n=" + std::to_string(sigma.size()) + ")";
    case WeightKind::Tabulated: return "tabulated(" + std::to_string(xs.size()) + ")";
    }
    return "unknown";
}

int SignPattern::region(double x) const {
    for (int i = 0; i < n; ++i) {
        if (x < sigma[i]) return 2 * i;
        if (x <= tau[i]) return 2 * i + 1;
    }
    return 2 * n;
}

double Weight::operator()(double x) const {
    switch (spec_.kind) {
    case WeightKind::SinMultibump:
        return std::sin(spec_.frequency * std::numbers::pi * x / spec_.length);
    case WeightKind::PiecewisePower: return eval_piecewise(x);
    case WeightKind::Tabulated: return eval_tabulated(x);
    }
    return 0.0;
}

double Weight::eval(double x) const {
    if (!(x >= 0.0 && x <= spec_.length))
        throw spec_error("weight evaluated outside [0, L]: x = " + std::to_string(x));
    return (*this)(x);
}

double Weight::eval_piecewise(double x) const {
    const auto& s = spec_;
    const std::size_t n = s.sigma.size();
    std::size_t d = 0;
    if (s.sigma.front() > 0.0) {
        if (x < s.sigma.front())
            return -s.depth[0] * std::sin(0.5 * std::numbers::pi * (s.sigma.front() - x) / s.sigma.front());
        d = 1;
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (x >= s.sigma[i] && x <= s.tau[i]) {
            double dist = std::min(x - s.sigma[i], s.tau[i] - x);
            return s.coeff[i] * std::pow(dist, s.gamma[i]);
        }
        if (i + 1 < n && x > s.tau[i] && x < s.sigma[i + 1])
            return -s.depth[d + i] * std::sin(std::numbers::pi * (x - s.tau[i]) / (s.sigma[i + 1] - s.tau[i]));
    }
    // right boundary negativity interval (tau_n, L)
    const double tn = s.tau.back();
    return -s.depth.back() * std::sin(0.5 * std::numbers::pi * (x - tn) / (s.length - tn));
}

double Weight::eval_tabulated(double x) const {
    const auto& xs = spec_.xs;
    const auto& as = spec_.as;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return as.front();
    if (it == xs.end()) return as.back();
    std::size_t k = static_cast<std::size_t>(it - xs.begin());
    double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return as[k - 1] + t * (as[k] - as[k - 1]);
}

double fit_growth_exponent(const Weight& w, double edge, int direction, double lo, double hi) {
    constexpr int kSamples = 21;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (int k = 0; k < kSamples; ++k) {
        double t = static_cast<double>(k) / (kSamples - 1);
        double dist = lo * std::pow(hi / lo, t);
        double v = std::abs(w(edge + direction * dist));
        if (v <= 0.0) continue;
        double lx = std::log(dist), ly = std::log(v);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 2) return 0.0;
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

Weight Weight::build(const WeightSpec& spec) {
    validate_spec(spec);
    Weight w;
    w.spec_ = spec;
    const double L = spec.length;

    // Scan on a uniform grid and split [0, L] into maximal sign runs.
    std::vector<double> xs(kScanIntervals + 1), vs(kScanIntervals + 1);
    double vmax = 0.0;
    for (int k = 0; k <= kScanIntervals; ++k) {
        xs[k] = L * k / kScanIntervals;
        vs[k] = w(xs[k]);
        vmax = std::max(vmax, std::abs(vs[k]));
    }
    if (!(vmax > 0.0)) throw spec_error("weight vanishes identically");
    const double zero_tol = 1e-13 * vmax;
    auto f = [&w](double x) { return w(x); };

    std::vector<SignRun> runs;
    int current = 0;
    double run_start = 0.0;
    for (int k = 0; k <= kScanIntervals; ++k) {
        int s = sign_of(vs[k], zero_tol);
        if (s == 0) {
            if (k > 0 && k < kScanIntervals) {
                int prev = sign_of(vs[k - 1], zero_tol);
                int next = sign_of(vs[k + 1], zero_tol);
                if (prev == 0 || next == 0) throw spec_error("weight vanishes on a subinterval near x = " + std::to_string(xs[k]));
                if (prev == next)
                    throw spec_error("weight touches zero without changing sign at x = " + std::to_string(xs[k]));
                if (current != 0) runs.push_back({run_start, xs[k], current});
                current = 0;
                run_start = xs[k];
            }
            continue;
        }
        if (current == 0) {
            current = s;
            if (runs.empty() && k > 0 && sign_of(vs[k - 1], zero_tol) == 0) run_start = xs[k - 1];
            continue;
        }
        if (s != current) {
            double root = bisect_root(f, xs[k - 1], xs[k]);
            runs.push_back({run_start, root, current});
            run_start = root;
            current = s;
        }
    }
    if (current != 0) runs.push_back({run_start, L, current});
    if (runs.empty()) throw spec_error("weight has no sign structure");
    runs.front().start = 0.0;
    runs.back().end = L;
    // A zero sample between runs of opposite sign: refine it.
    for (std::size_t r = 1; r < runs.size(); ++r) {
        double x0 = runs[r].start;
        double step = L / kScanIntervals;
        double lo = std::max(0.0, x0 - step), hi = std::min(L, x0 + step);
        if (sign_of(w(lo), zero_tol) * sign_of(w(hi), zero_tol) < 0) {
            double root = bisect_root(f, lo, hi);
            runs[r].start = root;
            runs[r - 1].end = root;
        }
    }

    // Reject dips to zero inside a run (a touching zero the scan skipped over).
    for (const auto& run : runs) {
        double width = run.end - run.start;
        double inset = 0.01 * width;
        for (int k = 1; k < kScanIntervals; ++k) {
            if (xs[k] <= run.start + inset || xs[k] >= run.end - inset) continue;
            double a0 = std::abs(vs[k - 1]), a1 = std::abs(vs[k]), a2 = std::abs(vs[k + 1]);
            if (a1 <= a0 && a1 <= a2 && a1 < 1e-9 * vmax)
                throw spec_error("weight nearly touches zero inside a sign interval at x = " + std::to_string(xs[k]));
        }
    }

    SignPattern& pat = w.pattern_;
    for (const auto& run : runs) {
        if (run.sign > 0) {
            pat.sigma.push_back(run.start);
            pat.tau.push_back(run.end);
        }
    }
    pat.n = static_cast<int>(pat.sigma.size());
    if (pat.n == 0) throw spec_error("weight has no positivity interval");
    for (std::size_t r = 1; r < runs.size(); ++r)
        if (runs[r].sign == runs[r - 1].sign) throw spec_error("weight sign pattern violates the alternating chain");

    for (int i = 0; i < pat.n; ++i) {
        double width = pat.tau[i] - pat.sigma[i];
        double hi = std::min(1e-2, 0.25 * width);
        double lo = std::min(1e-4, hi * 1e-2);
        double g_left = fit_growth_exponent(w, pat.sigma[i], +1, lo, hi);
        double g_right = fit_growth_exponent(w, pat.tau[i], -1, lo, hi);
        if (std::abs(g_left - g_right) > 0.1)
            throw spec_error("growth exponents at the two ends of positivity interval " + std::to_string(i + 1) +
                             " disagree");
        pat.gamma.push_back(0.5 * (g_left + g_right));
        if (!(pat.gamma.back() > 0.0)) throw spec_error("growth exponent must be positive");
    }

    switch (spec.kind) {
    case WeightKind::SinMultibump: w.sup_norm_ = 1.0; break;
    case WeightKind::PiecewisePower: {
        double m = 0.0;
        for (std::size_t i = 0; i < spec.sigma.size(); ++i)
            m = std::max(m, spec.coeff[i] * std::pow(0.5 * (spec.tau[i] - spec.sigma[i]), spec.gamma[i]));
        for (double d : spec.depth) m = std::max(m, d);
        w.sup_norm_ = m;
        if (pat.n != static_cast<int>(spec.sigma.size()))
            throw spec_error("detected sign pattern does not match the declared breakpoints");
        for (int i = 0; i < pat.n; ++i) {
            if (std::abs(pat.sigma[i] - spec.sigma[i]) > 1e-9 * L || std::abs(pat.tau[i] - spec.tau[i]) > 1e-9 * L)
                throw spec_error("detected sign pattern does not match the declared breakpoints");
            if (std::abs(pat.gamma[i] - spec.gamma[i]) > 0.05)
                throw spec_error("fitted growth exponent deviates from declared gamma");
        }
        break;
    }
    case WeightKind::Tabulated: {
        double m = 0.0;
        for (double a : spec.as) m = std::max(m, std::abs(a));
        w.sup_norm_ = m;
        break;
    }
    }
    return w;
}

Weight build_weight(const WeightSpec& spec) { return Weight::build(spec); }

double eval_weight(const Weight& w, double x) { return w.eval(x); }

}  // namespace multibump
