#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "multibump/classifier.hpp"
#include "multibump/continuation.hpp"
#include "multibump/grid.hpp"
#include "multibump/newton.hpp"
#include "multibump/shooting.hpp"
#include "multibump/weight.hpp"

namespace multibump {

struct VerifyConfig {
    std::vector<double> thetas{0.25, 0.5, 0.75, 1.0};
    double delta = 0.1;
    std::vector<std::pair<double, double>> compacts;  // empty: default_negativity_compacts
    IndexSet bump_set{1};
    double mu_factor = 1.05;
};

struct LiouvilleGrid {
    std::vector<double> alphas{0.5, 1.0, 2.0};
    std::vector<double> gammas{0.0, 1.0, 2.0};
    std::vector<double> kappas{0.0, 1.0};
    std::vector<double> betas{0.0, 0.5};
    std::vector<double> slopes{0.0, -0.1, -1.0};
    double p = 3.0;
    double x_max = 0.0;  // 0: 10 (1 + kappa) per configuration
};

/// One run description, read from a JSON file.
struct ProblemSpec {
    WeightSpec weight;
    double p = 3.0;
    std::optional<double> lambda;
    std::vector<double> lambda_grid;  // strictly decreasing
    int N = 2049;
    unsigned seed = 0;
    int threads = 1;
    double rho = 1.0;
    double margin = 1e-3;
    double r_cap = std::numeric_limits<double>::infinity();
    NewtonConfig newton;
    ScanOptions scan;
    ContinuationConfig continuation;
    double branch_eps = 1e-4;
    int branch_N = 257;
    VerifyConfig verify;
    LiouvilleGrid liouville;

    Grid grid() const { return Grid(N, weight.length); }
    ClassifierConfig classifier() const { return {rho, r_cap, margin}; }
    double require_lambda() const;
    /// Sweep grid, or the default -10 ... -320 when none was given.
    std::vector<double> sweep_grid() const;
    /// Pushes N, L and the thread count into the nested solver configs.
    void sync();
};

/// Throws Error(Spec) naming the offending field.
ProblemSpec parse_problem_spec(const nlohmann::json& j);
ProblemSpec load_problem_spec(const std::string& path);
nlohmann::json to_json(const ProblemSpec& spec);

nlohmann::json to_json(const WeightSpec& w);
WeightSpec weight_spec_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GridProfile& profile);
GridProfile grid_profile_from_json(const nlohmann::json& j);

nlohmann::json to_json(const VerificationReport& report);
VerificationReport verification_report_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DegreeTable& table);
nlohmann::json to_json(const SolutionSet& set, const Weight& weight, const ClassifierConfig& cfg);
nlohmann::json solve_manifest(const NewtonSolutionSet& set, const Weight& weight);
nlohmann::json to_json(const Branch& branch);
nlohmann::json to_json(const LiouvilleResult& r);

/// 17 significant digits, '.' decimal separator, locale independent.
std::string format_double(double v);

std::string profile_csv(const GridProfile& profile);
std::string scan_csv(const SolutionSet& set, int intervals);
std::string branch_csv(const Branch& branch);
std::string degree_csv(const DegreeTable& table);

struct RunOptions {
    std::string spec_path;
    std::string out_dir = ".";
    std::optional<int> threads;
    std::optional<int> grid_N;
    std::optional<unsigned> seed;
};

enum ExitCode : int { Ok = 0, VerificationFailed = 1, SpecInvalid = 2, NumericalFault = 3 };

/// Commands: solve, count, classify, sweep, continue, verify, liouville,
/// degree-table. Artifacts go to out_dir; errors are reported as one JSON
/// object on `err`.
int run(const std::string& command, const RunOptions& opts, std::ostream& out, std::ostream& err);

const std::vector<std::string>& commands();

}  // namespace multibump
