#pragma once

#include <span>
#include <vector>

namespace multibump {

/// n x n tridiagonal matrix. lower[i] = A(i+1, i), upper[i] = A(i, i+1).
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit Tridiagonal(std::size_t n = 0) : lower(n ? n - 1 : 0), diag(n), upper(n ? n - 1 : 0) {}

    std::size_t size() const noexcept { return diag.size(); }
    std::vector<double> multiply(std::span<const double> x) const;
};

/// Gaussian elimination with partial pivoting (the LAPACK gtsv scheme).
/// Throws Error(Numerical, "SINGULAR_MATRIX") on an exactly zero pivot.
std::vector<double> solve(Tridiagonal a, std::vector<double> b);

}  // namespace multibump
