#include "multibump/tridiagonal.hpp"

#include <cmath>
#include <utility>

#include "multibump/errors.hpp"

namespace multibump {

std::vector<double> Tridiagonal::multiply(std::span<const double> x) const {
    const std::size_t n = size();
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0) s += lower[i - 1] * x[i - 1];
        if (i + 1 < n) s += upper[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

std::vector<double> solve(Tridiagonal a, std::vector<double> b) {
    const std::size_t n = a.size();
    if (b.size() != n) throw spec_error("tridiagonal solve: size mismatch");
    if (n == 0) return b;
    auto& dl = a.lower;
    auto& d = a.diag;
    auto& du = a.upper;
    auto singular = [] { return numerical_fault("SINGULAR_MATRIX", "tridiagonal system is singular"); };

    // After elimination dl[i] holds the second superdiagonal of U.
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) throw singular();
            double fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = 0.0;
        } else {
            double fact = d[i] / dl[i];
            d[i] = dl[i];
            double temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if (i + 2 < n) {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = 0.0;
            }
            du[i] = temp;
            std::swap(b[i], b[i + 1]);
            b[i + 1] -= fact * b[i];
        }
    }
    if (d[n - 1] == 0.0) throw singular();
    b[n - 1] /= d[n - 1];
    if (n > 1) b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t k = n - 2; k-- > 0;) b[k] = (b[k] - du[k] * b[k + 1] - dl[k] * b[k + 2]) / d[k];
    return b;
}

}  // namespace multibump
