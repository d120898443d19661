#include "multibump/grid.hpp"

#include <algorithm>
#include <cmath>

#include "multibump/errors.hpp"

namespace multibump {

Grid::Grid(int interior, double length) : N(interior), L(length) {
    if (N < 3) throw spec_error("grid needs at least 3 interior nodes");
    if (!(L > 0.0)) throw spec_error("grid length must be positive");
}

std::vector<double> Grid::nodes() const {
    std::vector<double> xs(size());
    for (int j = 0; j < size(); ++j) xs[j] = x(j);
    return xs;
}

std::string to_string(ProfileSource s) {
    switch (s) {
    case ProfileSource::Newton: return "newton";
    case ProfileSource::Shooting: return "shooting";
    case ProfileSource::Continuation: return "continuation";
    }
    return "newton";
}

ProfileSource profile_source_from_string(const std::string& s) {
    if (s == "newton") return ProfileSource::Newton;
    if (s == "shooting") return ProfileSource::Shooting;
    if (s == "continuation") return ProfileSource::Continuation;
    throw spec_error("unknown profile source '" + s + "'");
}

double GridProfile::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double GridProfile::sup_on(double a, double b) const {
    double m = 0.0;
    const double h = grid.h();
    int lo = std::max(0, static_cast<int>(std::ceil(a / h - 1e-9)));
    int hi = std::min(grid.N + 1, static_cast<int>(std::floor(b / h + 1e-9)));
    for (int j = lo; j <= hi; ++j) m = std::max(m, std::abs(values[j]));
    return m;
}

double GridProfile::min_value() const { return *std::min_element(values.begin(), values.end()); }

double sup_distance(const GridProfile& a, const GridProfile& b) {
    if (!(a.grid == b.grid)) throw spec_error("sup_distance: profiles live on different grids");
    double m = 0.0;
    for (std::size_t j = 0; j < a.values.size(); ++j) m = std::max(m, std::abs(a.values[j] - b.values[j]));
    return m;
}

}  // namespace multibump
