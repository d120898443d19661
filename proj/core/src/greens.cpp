#include "multibump/greens.hpp"

#include <cmath>
#include <numbers>

#include "multibump/errors.hpp"

namespace multibump {

namespace {

constexpr double kMagnitudeLimit = 1e12;

void check_magnitude(std::span<const double> u) {
    for (double v : u)
        if (!(std::abs(v) <= kMagnitudeLimit))
            throw numerical_fault("MAGNITUDE_FAULT", "profile magnitude exceeds 1e12");
}

void check_size(const Grid& grid, std::span<const double> f) {
    if (static_cast<int>(f.size()) != grid.size()) throw spec_error("sample count does not match grid");
}

}  // namespace

double kernel(double x, double y, double L) {
    if (!(x >= 0.0 && x <= L && y >= 0.0 && y <= L)) throw spec_error("kernel arguments outside [0, L]");
    return (y <= x ? y * (L - x) : x * (L - y)) / L;
}

std::vector<double> apply_K(const Grid& grid, std::span<const double> f) {
    check_size(grid, f);
    const int n = grid.size();
    const double L = grid.L, h = grid.h();
    // u_j = (L - x_j)/L * h sum_{k<=j} y_k f_k + x_j/L * h sum_{k>j} (L - y_k) f_k.
    // Trapezoid end weights do not matter: the kernel vanishes at y = 0, L.
    std::vector<double> left(n, 0.0), right(n + 1, 0.0);
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        acc += grid.x(k) * f[k];
        left[k] = acc;
    }
    acc = 0.0;
    for (int k = n - 1; k >= 0; --k) {
        acc += (L - grid.x(k)) * f[k];
        right[k] = acc;
    }
    std::vector<double> u(n, 0.0);
    for (int j = 1; j < n - 1; ++j) {
        double xj = grid.x(j);
        u[j] = h * ((L - xj) * left[j] + xj * right[j + 1]) / L;
    }
    return u;
}

std::vector<double> reaction(const Grid& grid, const Weight& weight, double lambda, double p, std::span<const double> u) {
    check_size(grid, u);
    std::vector<double> g(u.size());
    for (int j = 0; j < grid.size(); ++j) {
        double up = std::max(u[j], 0.0);
        g[j] = lambda * up + weight(grid.x(j)) * std::pow(up, p);
    }
    return g;
}

std::vector<double> apply_Phi(const Grid& grid, const Weight& weight, double lambda, double p,
                              std::span<const double> u) {
    check_magnitude(u);
    return apply_K(grid, reaction(grid, weight, lambda, p, u));
}

BumpWeight::BumpWeight(const Weight& weight, IndexSet set) : set_(std::move(set)), pattern_(weight.pattern()) {
    if (set_.empty()) throw spec_error("bump weight needs a nonempty index set");
    set_.check_range(pattern_.n);
}

double BumpWeight::operator()(double x) const {
    for (int i : set_.members()) {
        double s = pattern_.sigma[i - 1], t = pattern_.tau[i - 1];
        if (x > s && x < t) return std::pow(std::min(x - s, t - x), pattern_.gamma[i - 1]);
    }
    return 0.0;
}

std::vector<double> BumpWeight::samples(const Grid& grid) const {
    std::vector<double> w(grid.size());
    for (int j = 0; j < grid.size(); ++j) w[j] = (*this)(grid.x(j));
    return w;
}

std::vector<double> apply_homotopy(const Grid& grid, const Weight& weight, double lambda, double p,
                                   const Homotopy& kind, std::span<const double> u) {
    check_magnitude(u);
    auto g = reaction(grid, weight, lambda, p, u);
    if (const auto* th = std::get_if<ThetaHomotopy>(&kind)) {
        if (!(th->theta >= 0.0 && th->theta <= 1.0)) throw spec_error("theta must lie in [0, 1]");
        for (double& v : g) v *= th->theta;
    } else {
        const auto& mh = std::get<MuHomotopy>(kind);
        if (!(mh.mu >= 0.0)) throw spec_error("mu must be non-negative");
        if (!mh.bump) throw spec_error("mu homotopy needs a bump weight");
        for (int j = 0; j < grid.size(); ++j) g[j] += mh.mu * (*mh.bump)(grid.x(j));
    }
    return apply_K(grid, g);
}

Eigenpair principal_eigenpair(const Grid& grid) {
    Eigenpair e;
    e.sigma1 = std::pow(std::numbers::pi / grid.L, 2);
    e.phi.resize(grid.size());
    for (int j = 0; j < grid.size(); ++j) e.phi[j] = std::sin(std::numbers::pi * grid.x(j) / grid.L);
    e.phi.front() = 0.0;
    e.phi.back() = 0.0;
    return e;
}

double trapezoid(const Grid& grid, std::span<const double> f) {
    check_size(grid, f);
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t j = 1; j + 1 < f.size(); ++j) s += f[j];
    return s * grid.h();
}

}  // namespace multibump
