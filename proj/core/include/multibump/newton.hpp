#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multibump/grid.hpp"
#include "multibump/index_set.hpp"
#include "multibump/tridiagonal.hpp"
#include "multibump/weight.hpp"

namespace multibump {

struct ClassifierConfig;

struct NewtonConfig {
    int max_iters = 100;
    double residual_tol = 1e-10;  // max norm; see residual_floor()
    double backtrack = 0.5;
    double min_step = 1.0 / (1 << 20);
    double max_step_ratio = 0.5;  // trust cap: |t delta|_inf <= ratio * max(|u|_inf, r_lambda)
    double dedup_tol = 1e-3;
    double amplitude = 0.0;  // seed amplitude A; 0 selects 2 r_lambda
    int threads = 1;
};

/// F_j = (-u_{j-1} + 2 u_j - u_{j+1}) / h^2 - lambda u_j+ - a(x_j) (u_j+)^p
/// at interior nodes; the two boundary entries are zero.
std::vector<double> fd_residual(const Grid& grid, double lambda, std::span<const double> u, const Weight& weight,
                                double p);

/// Interior N x N Jacobian of fd_residual, with derivative 0 chosen for
/// u+ at u_j <= 0.
Tridiagonal fd_jacobian(const Grid& grid, double lambda, std::span<const double> u, const Weight& weight, double p);

/// Max norm of the interior entries.
double max_norm(std::span<const double> v);

/// Smallest residual the discrete operator can resolve in double precision
/// for a profile of this magnitude.
double residual_floor(const Grid& grid, double lambda, double sup_a, double p, double sup_u);

/// Sum over i in the set of amplitude sin(pi (x - sigma_i) / (tau_i - sigma_i))
/// on I_i^+, zero elsewhere.
std::vector<double> seed_profile(const Grid& grid, const IndexSet& set, const Weight& weight, double lambda,
                                 double amplitude);

struct NewtonResult {
    bool converged = false;
    GridProfile profile;
    int iterations = 0;
    std::vector<double> residual_history;
    std::string failure;
};

/// Damped Newton on fd_residual with backtracking on the max norm.
NewtonResult newton_solve(const Grid& grid, double lambda, const Weight& weight, double p, std::vector<double> u0,
                          const NewtonConfig& cfg);

/// Re-solves on the nested grid 2N+1 from the interpolated profile and
/// returns (4 u_fine - u_coarse) / 3 on the coarse nodes, which cancels the
/// leading h^2 error term. Throws NEWTON_FAILED if the fine solve fails.
GridProfile richardson_extrapolate(const GridProfile& coarse, const Weight& weight, double p, const NewtonConfig& cfg);

struct SeedRecord {
    IndexSet seed;
    double amplitude = 0.0;
    bool converged = false;
    int iterations = 0;
    double residual = 0.0;
    std::optional<IndexSet> classified;
    int solution = -1;  // position in NewtonSolutionSet::profiles, -1 if dropped
    std::string note;
};

struct NewtonSolutionSet {
    double lambda = 0.0;
    std::vector<GridProfile> profiles;
    std::vector<IndexSet> classes;
    std::vector<SeedRecord> seeds;

    std::size_t size() const noexcept { return profiles.size(); }
    bool occupies(const IndexSet& set) const;
};

/// Newton from every nonempty index-set seed at amplitudes A, A/2 and A/4;
/// keeps converged, non-negative, nontrivial limits, deduplicated in the
/// sup norm and classified into boxes.
NewtonSolutionSet solve_all(double lambda, const Weight& weight, double p, const NewtonConfig& cfg, const Grid& grid,
                            const ClassifierConfig& ccfg);

}  // namespace multibump
