#include "multibump/newton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "multibump/classifier.hpp"
#include "multibump/errors.hpp"
#include "multibump/greens.hpp"
#include "multibump/parallel.hpp"

namespace multibump {

namespace {

void check_profile(const Grid& grid, std::span<const double> u) {
    if (static_cast<int>(u.size()) != grid.size()) throw spec_error("profile size does not match grid");
}

double pos_pow(double up, double p) {
    if (p == 3.0) return up * up * up;
    if (p == 2.0) return up * up;
    return std::pow(up, p);
}

}  // namespace

std::vector<double> fd_residual(const Grid& grid, double lambda, std::span<const double> u, const Weight& weight,
                                double p) {
    check_profile(grid, u);
    const double ih2 = 1.0 / (grid.h() * grid.h());
    std::vector<double> F(u.size(), 0.0);
    for (int j = 1; j <= grid.N; ++j) {
        double up = u[j] > 0 ? u[j] : 0.0;
        F[j] = (-u[j - 1] + 2 * u[j] - u[j + 1]) * ih2 - lambda * up - weight(grid.x(j)) * pos_pow(up, p);
    }
    return F;
}

Tridiagonal fd_jacobian(const Grid& grid, double lambda, std::span<const double> u, const Weight& weight, double p) {
    check_profile(grid, u);
    const double ih2 = 1.0 / (grid.h() * grid.h());
    Tridiagonal J(grid.N);
    std::fill(J.lower.begin(), J.lower.end(), -ih2);
    std::fill(J.upper.begin(), J.upper.end(), -ih2);
    for (int j = 1; j <= grid.N; ++j) {
        double d = 2 * ih2;
        if (u[j] > 0) d -= lambda + p * weight(grid.x(j)) * pos_pow(u[j], p - 1);
        J.diag[j - 1] = d;
    }
    return J;
}

double max_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double residual_floor(const Grid& grid, double lambda, double sup_a, double p, double sup_u) {
    const double eps = std::numeric_limits<double>::epsilon();
    double scale = 4 * sup_u / (grid.h() * grid.h()) + std::abs(lambda) * sup_u + sup_a * std::pow(sup_u, p);
    return 16 * eps * scale;
}

std::vector<double> seed_profile(const Grid& grid, const IndexSet& set, const Weight& weight, double lambda,
                                 double amplitude) {
    (void)lambda;
    if (set.empty()) throw spec_error("seed_profile needs a nonempty index set");
    if (!(amplitude > 0)) throw spec_error("seed amplitude must be positive");
    const SignPattern& pat = weight.pattern();
    set.check_range(pat.n);
    std::vector<double> u(grid.size(), 0.0);
    for (int i : set.members()) {
        double s = pat.sigma[i - 1], t = pat.tau[i - 1];
        for (int j = 1; j <= grid.N; ++j) {
            double x = grid.x(j);
            if (x >= s && x <= t) u[j] += amplitude * std::sin(std::numbers::pi * (x - s) / (t - s));
        }
    }
    return u;
}

NewtonResult newton_solve(const Grid& grid, double lambda, const Weight& weight, double p, std::vector<double> u0,
                          const NewtonConfig& cfg) {
    check_profile(grid, u0);
    if (cfg.max_iters < 1 || !(cfg.residual_tol > 0)) throw spec_error("invalid Newton configuration");
    NewtonResult res;
    std::vector<double> u = std::move(u0);
    u.front() = u.back() = 0.0;
    std::vector<double> F = fd_residual(grid, lambda, u, weight, p);
    double r = max_norm(F);
    res.residual_history.push_back(r);

    const double step_scale = lambda < 0 ? r_lambda(lambda, weight.sup_norm(), p) : 1.0;
    auto target = [&](const std::vector<double>& v) {
        return std::max(cfg.residual_tol, residual_floor(grid, lambda, weight.sup_norm(), p, max_norm(v)));
    };

    for (int it = 0; it < cfg.max_iters; ++it) {
        if (r <= target(u)) {
            res.converged = true;
            break;
        }
        Tridiagonal J = fd_jacobian(grid, lambda, u, weight, p);
        std::vector<double> rhs(F.begin() + 1, F.end() - 1);
        for (double& v : rhs) v = -v;
        std::vector<double> delta;
        try {
            delta = solve(J, std::move(rhs));
        } catch (const Error& e) {
            res.failure = e.code();
            break;
        }
        const double dnorm = max_norm(delta);
        double t = std::min(1.0, cfg.max_step_ratio * std::max(max_norm(u), step_scale) / dnorm);
        bool accepted = false;
        std::vector<double> trial(u.size(), 0.0);
        while (t >= cfg.min_step) {
            for (int j = 1; j <= grid.N; ++j) trial[j] = u[j] + t * delta[j - 1];
            if (max_norm(trial) > 1e12) {
                t *= cfg.backtrack;
                continue;
            }
            std::vector<double> Ft = fd_residual(grid, lambda, trial, weight, p);
            double rt = max_norm(Ft);
            if (rt < r) {
                u.swap(trial);
                F.swap(Ft);
                r = rt;
                accepted = true;
                break;
            }
            t *= cfg.backtrack;
        }
        res.iterations = it + 1;
        if (!accepted) {
            // At the roundoff floor no step can decrease the residual further.
            double step = max_norm(delta);
            if (step <= 1e-12 * std::max(1.0, max_norm(u)) && r <= 1e3 * target(u)) {
                res.converged = true;
            } else {
                res.failure = "LINE_SEARCH_STALLED";
            }
            break;
        }
        res.residual_history.push_back(r);
    }
    if (!res.converged && res.failure.empty()) {
        if (r <= target(u))
            res.converged = true;
        else
            res.failure = "MAX_ITERS";
    }
    res.profile = GridProfile{grid, std::move(u), lambda, r, ProfileSource::Newton};
    return res;
}

GridProfile richardson_extrapolate(const GridProfile& coarse, const Weight& weight, double p, const NewtonConfig& cfg) {
    const Grid fine = coarse.grid.refined();
    std::vector<double> u0(fine.size(), 0.0);
    for (int j = 0; j < coarse.grid.size(); ++j) u0[2 * j] = coarse.values[j];
    for (int j = 0; j + 1 < coarse.grid.size(); ++j) u0[2 * j + 1] = 0.5 * (coarse.values[j] + coarse.values[j + 1]);
    NewtonResult r = newton_solve(fine, coarse.lambda, weight, p, std::move(u0), cfg);
    if (!r.converged) throw numerical_fault("NEWTON_FAILED", "refined solve did not converge: " + r.failure);
    GridProfile out = coarse;
    for (int j = 0; j < coarse.grid.size(); ++j)
        out.values[j] = (4 * r.profile.values[2 * j] - coarse.values[j]) / 3;
    return out;
}

bool NewtonSolutionSet::occupies(const IndexSet& set) const {
    return std::find(classes.begin(), classes.end(), set) != classes.end();
}

NewtonSolutionSet solve_all(double lambda, const Weight& weight, double p, const NewtonConfig& cfg, const Grid& grid,
                            const ClassifierConfig& ccfg) {
    if (!(lambda < 0)) throw spec_error("solve_all requires lambda < 0");
    if (grid.L != weight.length()) throw spec_error("grid length differs from the weight's domain");
    const double r = r_lambda(lambda, weight.sup_norm(), p);
    const double A = cfg.amplitude > 0 ? cfg.amplitude : 2 * r;

    struct Job {
        IndexSet set;
        double amplitude;
    };
    std::vector<Job> jobs;
    for (const IndexSet& s : nonempty_index_sets(weight.intervals())) {
        jobs.push_back({s, A});
        jobs.push_back({s, A / 2});
        jobs.push_back({s, A / 4});
    }
    std::vector<NewtonResult> results(jobs.size());
    parallel_for(jobs.size(), cfg.threads, [&](std::size_t i) {
        results[i] = newton_solve(grid, lambda, weight, p, seed_profile(grid, jobs[i].set, weight, lambda, jobs[i].amplitude),
                                  cfg);
    });

    NewtonSolutionSet out;
    out.lambda = lambda;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        NewtonResult& nr = results[i];
        SeedRecord rec;
        rec.seed = jobs[i].set;
        rec.amplitude = jobs[i].amplitude;
        rec.converged = nr.converged;
        rec.iterations = nr.iterations;
        rec.residual = nr.profile.residual_norm;
        if (!nr.converged) {
            rec.note = nr.failure;
        } else if (nr.profile.sup_norm() <= 1e-6) {
            rec.note = "trivial";
        } else if (nr.profile.min_value() < -1e-8 * std::max(1.0, nr.profile.sup_norm())) {
            rec.note = "negative";
        } else {
            IndexSet cls;
            try {
                cls = classify(nr.profile, weight.pattern(), ccfg);
            } catch (const Error& e) {
                ClassifierConfig loose = ccfg;
                loose.margin = 0.0;
                loose.r_cap = std::numeric_limits<double>::infinity();
                cls = classify(nr.profile, weight.pattern(), loose);
                rec.note = e.code();
            }
            rec.classified = cls;
            for (std::size_t k = 0; k < out.profiles.size(); ++k) {
                if (sup_distance(out.profiles[k], nr.profile) < cfg.dedup_tol) {
                    rec.solution = static_cast<int>(k);
                    if (rec.note.empty()) rec.note = "duplicate";
                    break;
                }
            }
            if (rec.solution < 0) {
                rec.solution = static_cast<int>(out.profiles.size());
                out.profiles.push_back(nr.profile);
                out.classes.push_back(cls);
            }
        }
        out.seeds.push_back(std::move(rec));
    }
    if (out.profiles.empty())
        throw verification_failure("SUITE_FAILURE",
                                   "no seed converged to a nontrivial solution at lambda = " + std::to_string(lambda));
    return out;
}

}  // namespace multibump
