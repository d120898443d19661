#pragma once

#include <string>
#include <vector>

#include "multibump/index_set.hpp"

namespace multibump {

/// Uniform grid on [0, L] with N interior nodes: x_j = j h, j = 0..N+1.
struct Grid {
    int N = 257;
    double L = 1.0;

    Grid() = default;
    Grid(int interior, double length);

    double h() const noexcept { return L / (N + 1); }
    double x(int j) const noexcept { return j == N + 1 ? L : j * h(); }
    int size() const noexcept { return N + 2; }
    std::vector<double> nodes() const;

    /// Refined grid 2N+1 sharing every node of this one.
    Grid refined() const { return Grid(2 * N + 1, L); }

    bool operator==(const Grid&) const = default;
};

enum class ProfileSource { Newton, Shooting, Continuation };

std::string to_string(ProfileSource s);
ProfileSource profile_source_from_string(const std::string& s);

/// Solution candidate sampled on a grid. values has N+2 entries with
/// values.front() == values.back() == 0.
struct GridProfile {
    Grid grid;
    std::vector<double> values;
    double lambda = 0.0;
    double residual_norm = 0.0;
    ProfileSource source = ProfileSource::Newton;

    double sup_norm() const;
    /// Sup over nodes lying in the closed interval [a, b].
    double sup_on(double a, double b) const;
    double min_value() const;
};

/// Sup-norm distance between two profiles on a common grid.
double sup_distance(const GridProfile& a, const GridProfile& b);

}  // namespace multibump
