#pragma once

#include <span>
#include <variant>
#include <vector>

#include "multibump/grid.hpp"
#include "multibump/index_set.hpp"
#include "multibump/weight.hpp"

namespace multibump {

/// Green's kernel of -d^2/dx^2 with Dirichlet conditions on [0, L],
/// normalized so that u(x) = int_0^L kernel(x, y) f(y) dy solves -u'' = f.
double kernel(double x, double y, double L);

/// Trapezoid quadrature of the kernel against f on the grid nodes. The
/// result vanishes at both end nodes.
std::vector<double> apply_K(const Grid& grid, std::span<const double> f);

/// lambda u+ + a (u+)^p evaluated nodewise.
std::vector<double> reaction(const Grid& grid, const Weight& weight, double lambda, double p, std::span<const double> u);

/// Phi_lambda(u) = K(lambda u+ + a (u+)^p). Throws MAGNITUDE_FAULT when
/// any |u_j| exceeds 1e12.
std::vector<double> apply_Phi(const Grid& grid, const Weight& weight, double lambda, double p,
                              std::span<const double> u);

/// w = dist(x, boundary of I_i^+)^gamma_i on the humps i in the index set,
/// zero elsewhere.
class BumpWeight {
public:
    BumpWeight(const Weight& weight, IndexSet set);

    double operator()(double x) const;
    const IndexSet& index_set() const noexcept { return set_; }
    std::vector<double> samples(const Grid& grid) const;

private:
    IndexSet set_;
    SignPattern pattern_;
};

struct ThetaHomotopy {
    double theta = 1.0;  // in [0, 1]
};

struct MuHomotopy {
    double mu = 0.0;  // >= 0
    const BumpWeight* bump = nullptr;
};

using Homotopy = std::variant<ThetaHomotopy, MuHomotopy>;

/// theta: K(theta (lambda u+ + a (u+)^p)); mu: K(lambda u+ + a (u+)^p + mu w).
std::vector<double> apply_homotopy(const Grid& grid, const Weight& weight, double lambda, double p,
                                   const Homotopy& kind, std::span<const double> u);

/// Principal Dirichlet eigenpair: Sigma1 = (pi/L)^2, phi = sin(pi x / L).
struct Eigenpair {
    double sigma1 = 0.0;
    std::vector<double> phi;
};

Eigenpair principal_eigenpair(const Grid& grid);

/// Composite trapezoid rule on the grid nodes.
double trapezoid(const Grid& grid, std::span<const double> f);

}  // namespace multibump
