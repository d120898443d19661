#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "multibump/greens.hpp"
#include "multibump/grid.hpp"
#include "multibump/index_set.hpp"
#include "multibump/newton.hpp"
#include "multibump/shooting.hpp"
#include "multibump/weight.hpp"

namespace multibump {

struct ClassifierConfig {
    double rho = 1.0;
    double r_cap = std::numeric_limits<double>::infinity();
    double margin = 1e-3;  // relative dead band around rho
};

/// Lower bound (-lambda / |a|_inf)^(1/(p-1)) on nontrivial solutions.
double r_lambda(double lambda, double sup_norm_a, double p);

/// Threshold above which the bump-forced problem has no nontrivial
/// non-negative solution:
/// [(Sigma1 - lambda) + |a|_inf R^(p-1)] L R / int w phi.
double mu_star(double lambda, double r_cap, const Weight& weight, const BumpWeight& w, double p, const Grid& grid);

/// Same formula from the pieces, for callers that already hold int w phi.
double mu_star_formula(double lambda, double r_cap, double sup_norm_a, double p, double length, double w_phi);

/// Sup of the profile over each closed positivity interval.
std::vector<double> per_interval_sups(const GridProfile& profile, const SignPattern& pattern);

/// {i : sup over I_i^+ > rho}. Throws BAND_HIT if a sup lies in the dead
/// band rho (1 +- margin), and OUT_OF_BOX if |u|_inf >= r_cap.
IndexSet classify(const GridProfile& profile, const SignPattern& pattern, const ClassifierConfig& cfg);

enum class ReportStatus { Pass, Fail, Inconclusive };
std::string to_string(ReportStatus s);

struct ReportRow {
    double lambda = 0.0;
    std::map<std::string, double> values;
};

struct VerificationReport {
    std::string lemma;
    std::string weight_id;
    std::optional<double> lambda;
    double p = 0.0;
    std::optional<double> rho;
    ReportStatus status = ReportStatus::Fail;
    std::map<std::string, double> margins;
    std::map<std::string, double> thresholds;
    std::vector<ReportRow> rows;
    std::string note;

    bool pass() const noexcept { return status == ReportStatus::Pass; }
};

/// Nontrivial solutions of the theta-scaled problem, for each theta, all
/// satisfy |u|_inf > r_lambda.
VerificationReport verify_lower_bound(double lambda, std::span<const double> thetas, const Weight& weight, double p,
                                  const ScanOptions& opts);

/// Solution sets over a decreasing lambda grid.
std::vector<SolutionSet> sweep_solutions(std::span<const double> lambda_grid, const Weight& weight, double p,
                                         const ScanOptions& opts);

/// Compacts [tau_i + eta, sigma_{i+1} - eta] with eta = 5% of the length
/// for every interior negativity interval.
std::vector<std::pair<double, double>> default_negativity_compacts(const SignPattern& pattern);

/// max over K of every enumerated solution eventually drops below delta.
VerificationReport verify_decay(std::span<const SolutionSet> sweep, const std::vector<std::pair<double, double>>& compacts,
                                  double delta, const Weight& weight, double p);

/// No per-interval sup in the dead band for every grid lambda below the
/// discovered threshold.
VerificationReport verify_dichotomy(double rho, std::span<const SolutionSet> sweep, const Weight& weight, double p,
                                  double margin = 1e-3);

/// Scan the mu-homotopy at mu = factor * mu_star and count nontrivial
/// solutions; r_cap is 1.5 times the largest observed norm unless given.
VerificationReport verify_forced_nonexistence(double lambda, const Weight& weight, double p, const IndexSet& set, double factor,
                                  const ScanOptions& opts, std::optional<double> r_cap = std::nullopt);

struct DegreeTable {
    double lambda = 0.0;
    int orientation = 1;
    std::map<IndexSet, int> lambda_boxes;  // deg on Lambda^I
    std::map<IndexSet, int> omega_boxes;   // deg on Omega^I = union of Lambda^J, J subset of I
    std::map<IndexSet, int> occupancy;     // solutions per box, trivial included
    bool pass = false;
};

DegreeTable degree_table(const SolutionSet& set, const Weight& weight, double p, double rho, double margin = 1e-3);
DegreeTable degree_table(double lambda, const Weight& weight, double p, double rho, const ScanOptions& opts);

/// Largest grid lambda such that every grid value at or below it has
/// rho < r_lambda and no per-interval sup in the dead band.
std::optional<double> discover_lambda_star(std::span<const SolutionSet> sweep, const Weight& weight, double p, double rho,
                                           double margin = 1e-3);

/// Largest grid lambda at or below which every grid value has all 2^n - 1
/// nonempty boxes occupied by solve_all.
std::optional<double> empirical_lambda_c(std::span<const NewtonSolutionSet> sweep, int n);

/// Number of nontrivial profiles with |u|_inf <= r_lambda.
int lower_bound_violations(std::span<const GridProfile> profiles, double r);

/// 1.5 times the largest observed sup norm.
double r_cap_from(const SolutionSet& set);

}  // namespace multibump
