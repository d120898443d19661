// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "multibump/classifier.hpp"
#include "multibump/continuation.hpp"
#include "multibump/errors.hpp"
#include "multibump/greens.hpp"
#include "multibump/io.hpp"
#include "multibump/newton.hpp"
#include "multibump/shooting.hpp"

using namespace multibump;
namespace fs = std::filesystem;

namespace {

constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

struct Verdict {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count(); }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Profiles collected by criteria 1 and 2 for the lower-bound audit.
struct Collected {
    double lambda;
    const GridProfile* profile;
};
std::vector<GridProfile> g_profiles;
std::vector<double> g_lambdas;

void collect(double lambda, const std::vector<GridProfile>& ps) {
    for (const auto& p : ps) {
        g_profiles.push_back(p);
        g_lambdas.push_back(lambda);
    }
}

const Weight& sine(int m) {
    static const Weight w3 = Weight::build(WeightSpec::sin_multibump(3));
    static const Weight w5 = Weight::build(WeightSpec::sin_multibump(5));
    return m == 3 ? w3 : w5;
}

Verdict criterion1() {
    Stopwatch sw;
    const Weight& w = sine(3);
    const Grid grid(2049, 1.0);
    ScanOptions scan;
    scan.grid = grid;
    NewtonSolutionSet newton = solve_all(-80, w, 3, NewtonConfig{}, grid, ClassifierConfig{});
    SolutionSet shoot = enumerate_solutions(-80, w, 3, scan);
    collect(-80, newton.profiles);
    collect(-80, shoot.profiles);

    bool boxes = true;
    for (const IndexSet& s : nonempty_index_sets(2)) {
        boxes = boxes && newton.occupies(s);
        bool in_shoot = false;
        for (const auto& p : shoot.profiles) in_shoot = in_shoot || classify(p, w.pattern(), ClassifierConfig{}) == s;
        boxes = boxes && in_shoot;
    }
    // Newton profiles are Richardson-extrapolated so the comparison measures
    // the solvers, not the O(h^2) truncation of the difference scheme.
    double agreement = 0;
    for (const GridProfile& s : shoot.profiles) {
        double best = INFINITY;
        for (const GridProfile& p : newton.profiles)
            best = std::min(best, sup_distance(s, richardson_extrapolate(p, w, 3, NewtonConfig{})));
        agreement = std::max(agreement, best);
    }
    const double t = sw.seconds();
    Verdict v;
    v.pass = newton.size() >= 3 && shoot.size() >= 3 && boxes && agreement <= 1e-5 && t <= 60;
    v.detail = fmt("newton=%zu shooting=%zu all_boxes=%s agreement=%.2e runtime=%.1fs", newton.size(), shoot.size(),
                   boxes ? "yes" : "no", agreement, t);
    return v;
}

Verdict criterion2() {
    Stopwatch sw;
    const Weight& w = sine(5);
    const Grid grid(2049, 1.0);
    std::vector<NewtonSolutionSet> sweep;
    std::string occ;
    for (double lambda : {-40.0, -80.0, -160.0, -320.0}) {
        sweep.push_back(solve_all(lambda, w, 3, NewtonConfig{}, grid, ClassifierConfig{}));
        collect(lambda, sweep.back().profiles);
        int n = 0;
        for (const IndexSet& s : nonempty_index_sets(3)) n += sweep.back().occupies(s);
        occ += fmt("%s%g:%d", occ.empty() ? "" : ",", lambda, n);
    }
    auto lc = empirical_lambda_c(sweep, 3);
    const double t = sw.seconds();
    Verdict v;
    v.pass = lc.has_value() && t <= 600;
    v.detail = fmt("boxes_occupied{%s} lambda_c=%s runtime=%.1fs", occ.c_str(),
                   lc ? fmt("%g", *lc).c_str() : "none", t);
    return v;
}

Verdict criterion3() {
    int violations = 0;
    for (std::size_t k = 0; k < g_profiles.size(); ++k)
        violations += lower_bound_violations(std::span(&g_profiles[k], 1), r_lambda(g_lambdas[k], 1.0, 3));
    std::vector<double> thetas{0.25, 0.5, 0.75, 1.0};
    int scans = 0, failed = 0;
    double min_margin = INFINITY;
    auto scan_weight = [&](int m, std::initializer_list<double> lambdas) {
        for (double lambda : lambdas) {
            VerificationReport r = verify_lower_bound(lambda, thetas, sine(m), 3, ScanOptions{});
            ++scans;
            failed += r.pass() ? 0 : 1;
            violations += static_cast<int>(r.margins.count("violations") ? r.margins.at("violations") : 0);
            if (r.margins.count("min_norm_minus_r")) min_margin = std::min(min_margin, r.margins.at("min_norm_minus_r"));
        }
    };
    scan_weight(3, {-80});
    scan_weight(5, {-40, -80, -160, -320});
    Verdict v;
    v.pass = violations == 0 && failed == 0;
    v.detail = fmt("profiles=%zu theta_scans=%d violations=%d min(|u|-r)=%.3f", g_profiles.size(), scans, violations,
                   min_margin);
    return v;
}

Verdict criterion4() {
    DegreeTable t = degree_table(-80, sine(3), 3, 1.0, ScanOptions{});
    const std::map<IndexSet, int> expected{{IndexSet{}, 1}, {IndexSet{1}, -1}, {IndexSet{2}, -1}, {IndexSet{1, 2}, 1}};
    bool omega_zero = true;
    for (const auto& [s, d] : t.omega_boxes)
        if (!s.empty()) omega_zero = omega_zero && d == 0;
    std::string table;
    for (const auto& [s, d] : t.lambda_boxes) table += fmt("%s%s:%d", table.empty() ? "" : " ", s.to_string().c_str(), d);
    Verdict v;
    v.pass = t.lambda_boxes == expected && omega_zero;
    v.detail = "table " + table + (omega_zero ? ", Omega sums zero" : ", Omega sums nonzero");
    return v;
}

const std::vector<SolutionSet>& n2_sweep() {
    static const std::vector<SolutionSet> s = [] {
        std::vector<double> grid{-10, -20, -40, -80, -160, -320, -400};
        return sweep_solutions(grid, sine(3), 3, ScanOptions{});
    }();
    return s;
}

Verdict criterion5() {
    VerificationReport r = verify_dichotomy(1.0, n2_sweep(), sine(3), 3);
    Verdict v;
    double hat = r.thresholds.count("lambda_hat") ? r.thresholds.at("lambda_hat") : NAN;
    v.pass = r.pass() && hat <= -10 && hat >= -400;
    v.detail = fmt("lambda_hat=%g closest_sup_to_rho=%.3f", hat,
                   r.margins.count("closest_to_rho") ? r.margins.at("closest_to_rho") : NAN);
    return v;
}

Verdict criterion6() {
    std::vector<SolutionSet> pair;
    for (const auto& s : n2_sweep())
        if (s.lambda == -20 || s.lambda == -320) pair.push_back(s);
    std::vector<std::pair<double, double>> K{{0.4, 0.6}};
    VerificationReport r = verify_decay(pair, K, 0.1, sine(3), 3);
    const double factor = r.margins.at("decay_factor");
    Verdict v;
    v.pass = factor >= 10;
    v.detail = fmt("max_K(-20)=%.4f max_K(-320)=%.4f decay_factor=%.2f (required 10)", r.rows[0].values.at("max_on_K"),
                   r.rows[1].values.at("max_on_K"), factor);
    return v;
}

Verdict criterion7() {
    VerificationReport r = verify_forced_nonexistence(-80, sine(3), 3, IndexSet{1}, 1.05, ScanOptions{});
    Verdict v;
    v.pass = r.pass();
    v.detail = fmt("mu=%.6g mu_star=%.6g solutions=%g", r.thresholds.at("mu"), r.thresholds.at("mu_star"),
                   r.margins.at("solutions"));
    return v;
}

Verdict criterion8() {
    int configs = 0, exits = 0, bound_checked = 0, bound_ok = 0;
    std::vector<double> slopes{0.0, -0.1, -1.0};
    for (double alpha : {0.5, 1.0, 2.0})
        for (double gamma : {0.0, 1.0, 2.0})
            for (double kappa : {0.0, 1.0})
                for (double beta : {0.0, 0.5}) {
                    LiouvilleProblem prob;
                    prob.alpha = alpha;
                    prob.gamma = gamma;
                    prob.kappa = kappa;
                    prob.beta = [beta](double) { return beta; };
                    prob.beta_value = beta;
                    for (const auto& r : liouville_check(prob, 3.0, slopes, 10 * (1 + kappa))) {
                        ++configs;
                        exits += r.verdict == LiouvilleVerdict::Exits;
                        if (r.bound_applies) {
                            ++bound_checked;
                            bound_ok += r.exit_x <= r.bound + 1e-6;
                        }
                    }
                }
    Verdict v;
    v.pass = configs >= 50 && exits == configs && bound_ok == bound_checked;
    v.detail = fmt("configurations=%d exits=%d bound_checked=%d bound_ok=%d", configs, exits, bound_checked, bound_ok);
    return v;
}

Verdict criterion9() {
    const Grid grid(257, 1.0);
    BranchPoint seed = init_branch(sine(3), 3, 1e-4, grid);
    Branch b = continue_branch(sine(3), 3, seed, ContinuationConfig{}, grid);
    const double dev = std::abs(seed.lambda - kPi2);
    Verdict v;
    v.pass = dev <= 1e-2 && (!b.fold || b.fold->lambda_t > kPi2);
    v.detail = fmt("|lambda0-pi^2|=%.3e fold=%s points=%zu", dev, b.fold ? fmt("%.6f", b.fold->lambda_t).c_str() : "none",
                   b.points.size());
    return v;
}

double jacobian_worst() {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> U(0.1, 3.0), D(-1.0, 1.0), L(-200.0, 20.0);
    double worst = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Grid g(65, 1.0);
        const double lambda = L(rng);
        std::vector<double> u(g.size(), 0.0), d(g.size(), 0.0), up, um;
        for (int j = 1; j <= g.N; ++j) {
            u[j] = U(rng);
            d[j] = D(rng);
        }
        const double t = 1e-6;
        up = um = u;
        for (int j = 1; j <= g.N; ++j) {
            up[j] += t * d[j];
            um[j] -= t * d[j];
        }
        auto Fp = fd_residual(g, lambda, up, sine(3), 3);
        auto Fm = fd_residual(g, lambda, um, sine(3), 3);
        auto Jd = fd_jacobian(g, lambda, u, sine(3), 3).multiply(std::span<const double>(d).subspan(1, g.N));
        double num = 0, den = 0;
        for (int j = 1; j <= g.N; ++j) {
            num = std::max(num, std::abs((Fp[j] - Fm[j]) / (2 * t) - Jd[j - 1]));
            den = std::max(den, std::abs(Jd[j - 1]));
        }
        worst = std::max(worst, num / den);
    }
    return worst;
}

double apply_K_order() {
    auto err = [](int N) {
        Grid g(N, 1.0);
        std::vector<double> f(g.size());
        double e = 0;
        for (int j = 0; j < g.size(); ++j) f[j] = std::exp(g.x(j));
        auto u = apply_K(g, f);
        for (int j = 0; j < g.size(); ++j)
            e = std::max(e, std::abs(u[j] - (1 + (std::numbers::e - 1) * g.x(j) - std::exp(g.x(j)))));
        return e;
    };
    return std::log2(err(127) / err(255));
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// Every driver command, twice; compares every emitted file byte for byte.
std::pair<int, int> determinism(const fs::path& scratch) {
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    const fs::path spec = scratch / "spec.json";
    std::ofstream(spec) << R"({"weight": {"kind": "sin_multibump", "m": 3}, "p": 3, "lambda": -80,
                               "lambda_grid": [-20, -80, -320], "grid": {"N": 1025}, "seed": 1})";
    int files = 0, mismatches = 0;
    for (const std::string& cmd : commands()) {
        for (const char* tag : {"a", "b"}) {
            RunOptions o;
            o.spec_path = spec.string();
            o.out_dir = (scratch / tag / cmd).string();
            std::ostringstream out, err;
            int code = run(cmd, o, out, err);
            if (code != Ok && code != VerificationFailed) ++mismatches;
        }
        for (const auto& e : fs::directory_iterator(scratch / "a" / cmd)) {
            ++files;
            fs::path other = scratch / "b" / cmd / e.path().filename();
            if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++mismatches;
        }
    }
    return {files, mismatches};
}

Verdict criterion10(const fs::path& scratch) {
    const double worst = jacobian_worst();
    const double order = apply_K_order();
    auto [files, mismatches] = determinism(scratch);
    Verdict v;
    v.pass = worst <= 1e-6 && order >= 1.9 && order <= 2.1 && files > 0 && mismatches == 0;
    v.detail = fmt("jacobian_rel_err=%.2e apply_K_order=%.4f artifacts=%d mismatches=%d", worst, order, files,
                   mismatches);
    return v;
}

}  // namespace

int main(int argc, char** argv) {
    fs::path scratch = fs::temp_directory_path() / "multibump_acceptance";
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--scratch") scratch = argv[i + 1];

    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"multiplicity n=2", criterion1},
        {"multiplicity n=3", criterion2},
        {"lower bound invariant", criterion3},
        {"degree table", criterion4},
        {"dichotomy", criterion5},
        {"decay on negativity", criterion6},
        {"forced nonexistence", criterion7},
        {"Liouville desk check", criterion8},
        {"continuation", criterion9},
        {"numerical hygiene", [&] { return criterion10(scratch); }},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        failures += v.pass ? 0 : 1;
        std::printf("criterion %2zu %s  %-22s %s\n", k + 1, v.pass ? "PASS" : "FAIL", criteria[k].first,
                    v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
