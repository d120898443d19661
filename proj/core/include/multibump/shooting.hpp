#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "multibump/greens.hpp"
#include "multibump/grid.hpp"
#include "multibump/index_set.hpp"
#include "multibump/ode.hpp"
#include "multibump/weight.hpp"

namespace multibump {

struct ClassifierConfig;

/// Right-hand side -u'' = theta (lambda u+ + a (u+)^p) + mu w.
/// theta = 1, mu = 0 is the problem itself; the other settings are the two
/// homotopies used in the degree computation.
struct ShootingField {
    double lambda = -80.0;
    double p = 3.0;
    double theta = 1.0;
    double mu = 0.0;
    const BumpWeight* bump = nullptr;
};

struct ShootingCaps {
    double u_cap = 1e6;
    ode::Tolerances tol{};
};

enum class Fate {
    Survived,  // reached x = L
    Crossed,   // went negative; u'' <= 0 afterwards so it never returns
    BlownUp,   // |u| exceeded u_cap
};

struct ShootingOutcome {
    double s = 0.0;
    double terminal = 0.0;  // S(s) = u(L; s), or +-infinity on blow-up
    bool blew_up = false;
    Fate fate = Fate::Survived;
    double event_x = 0.0;   // crossing / blow-up location (L if survived)
    int event_region = -1;  // SignPattern::region of event_x
    std::vector<double> per_interval_sup;
    std::vector<double> trajectory;  // u at grid nodes, when requested
};

struct IvpOptions {
    const Grid* sample_grid = nullptr;               // fill trajectory at these nodes
    std::vector<double>* record_mesh = nullptr;      // accepted step endpoints
    std::span<const double> replay_mesh{};           // fixed-step replay instead of adaptive
};

/// Integrates u'' = -(field) from (u, u')(0) = (0, s) to x = L.
/// Throws INTEGRATION_FAULT on step-size underflow.
ShootingOutcome integrate_ivp(const Weight& weight, const ShootingField& field, double s, const ShootingCaps& caps,
                              const IvpOptions& opts = {});

struct ScanOptions {
    Grid grid{2049, 1.0};
    int points_per_decade = 40;
    int uniform_points = 200;
    double s_min = 0.0;          // 0: automatic
    double s_max = 0.0;          // 0: automatic, then doubled until no new zero
    int max_doublings = 8;
    double bracket_rel = 1e-10;  // relative width at which fate bisection stops
    double signature_tol = 0.05;   // neighbour gap in (event x / L, asinh of hump sups) that triggers a split
    double signature_rel = 1e-8;   // relative width at which signature splitting stops
    double zero_tol = 1e-10;     // |S| target for refined zeros
    double dedup_tol = 1e-3;     // sup-norm distance below which profiles merge
    double degenerate_slope = 1e-8;
    bool include_zero_slope = false;  // also evaluate s = 0 (forced homotopy)
    int threads = 1;
    ShootingCaps caps{};
};

/// One row of the scan report.
struct ScanSample {
    double s;
    double terminal;
    bool blew_up;
    std::vector<double> per_interval_sup;
};

struct SolutionSet {
    double lambda = 0.0;
    std::vector<GridProfile> profiles;
    std::vector<double> slopes;             // s* = u'(0)
    std::vector<int> indices;               // sign of S'(s*)
    std::vector<double> derivatives;        // S'(s*)
    std::vector<bool> degenerate;           // |S'| below threshold
    int trivial_index = 1;                  // sign of S'(0+)
    double s_max = 0.0;
    std::vector<ScanSample> scan;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return profiles.size(); }
};

/// Finds every sign change of the shooting function on (0, s_max] and
/// refines each to a solution profile.
SolutionSet enumerate_solutions(const Weight& weight, const ShootingField& field, const ScanOptions& opts = {});

/// Convenience overload for the unperturbed problem.
SolutionSet enumerate_solutions(double lambda, const Weight& weight, double p, const ScanOptions& opts = {});

/// Automatic lower end of the slope scan.
double default_s_min(const Weight& weight, const ShootingField& field);
/// Initial upper end 10 r_lambda cosh(sqrt(-lambda) L).
double default_s_max(const Weight& weight, const ShootingField& field);

/// Global sign fixing the empty-set box to degree one.
int calibrate_orientation(const SolutionSet& set, const SignPattern& pattern, const ClassifierConfig& cfg);

/// orientation * sum of indices over solutions classified into the box for
/// `index_set`; the trivial solution counts toward the empty set. Throws
/// MARGIN_VIOLATION when a per-interval sup sits on the box boundary.
int box_degree(const SolutionSet& set, const SignPattern& pattern, const IndexSet& index_set,
               const ClassifierConfig& cfg, int orientation);

/// -v'' = alpha (x + kappa)^gamma v^p + beta(x), v(0) = 1, v'(0) = s.
struct LiouvilleProblem {
    double alpha = 1.0;
    double gamma = 0.0;
    double kappa = 0.0;
    std::function<double(double)> beta = [](double) { return 0.0; };
    double beta_value = 0.0;  // for reports when beta is constant
};

enum class LiouvilleVerdict { Exits, NoExit };

struct LiouvilleResult {
    double slope = 0.0;
    LiouvilleVerdict verdict = LiouvilleVerdict::NoExit;
    double exit_x = 0.0;
    bool reached_one = false;  // v stayed in [0, 1] up to x = 1
    double v1 = 0.0;
    double dv1 = 0.0;
    bool bound_applies = false;  // v'(1) < 0
    double bound = 0.0;          // 1 + v(1) / (-v'(1))
};

std::vector<LiouvilleResult> liouville_check(const LiouvilleProblem& prob, double p, std::span<const double> slopes,
                                             double x_max);

std::string to_string(LiouvilleVerdict v);

}  // namespace multibump
