#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multibump/grid.hpp"
#include "multibump/weight.hpp"

namespace multibump {

struct BranchPoint {
    double lambda = 0.0;
    GridProfile profile;
    double amplitude = 0.0;  // |u|_inf
    double arclength = 0.0;  // cumulative, in the weighted product norm
    double residual = 0.0;   // |F|_inf after correction
};

struct TurningPoint {
    double lambda_t = 0.0;
    std::size_t index = 0;  // branch point closest to the fold
};

struct Branch {
    std::vector<BranchPoint> points;
    std::optional<TurningPoint> fold;
    double lambda_lo = 0.0;  // visited lambda range
    double lambda_hi = 0.0;
    bool terminated = false;  // corrector failed below the minimum step
    std::string stop_reason;
};

struct ContinuationConfig {
    double h_init = 0.02;
    double h_min = 1e-4;
    double h_max = 0.1;
    int max_points = 4000;
    double r_cap = std::numeric_limits<double>::infinity();  // halt once |u|_inf > 10 r_cap
    double lambda_min = -80.0;                                // halt once lambda drops below
    double residual_tol = 1e-9;
    int max_corrector_iters = 12;
};

/// Corrects (Sigma1, eps phi) with lambda free and u fixed to eps at the node
/// nearest the maximum of phi. Throws NEWTON_FAILED on nonconvergence.
BranchPoint init_branch(const Weight& weight, double p, double eps, const Grid& grid);

/// Predictor-corrector trace from the bifurcation point. The second point
/// is init_branch at 2 eps; afterwards a secant predictor and a spherical
/// arclength constraint |X - X_prev| = h in the norm
/// sqrt(dlambda^2 + h_grid sum du_j^2).
Branch continue_branch(const Weight& weight, double p, const BranchPoint& seed, const ContinuationConfig& cfg,
                       const Grid& grid);

/// Rightmost sign change of the increments of lambda along the branch,
/// refined by a quadratic through the three neighbouring points.
std::optional<TurningPoint> detect_turning_point(const Branch& branch);
std::optional<TurningPoint> detect_turning_point(std::span<const double> arclength, std::span<const double> lambda);

/// Newton-corrects the branch at a fixed lambda, starting from the
/// interpolated neighbouring points. Returns nothing if lambda is not
/// bracketed or the solve fails.
std::optional<GridProfile> point_at_lambda(const Branch& branch, double lambda, const Weight& weight, double p);

}  // namespace multibump
