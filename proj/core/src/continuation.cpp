#include "multibump/continuation.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "multibump/errors.hpp"
#include "multibump/greens.hpp"
#include "multibump/newton.hpp"

namespace multibump {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Extended unknown X = (u_1..u_N, lambda); boundary values stay zero.
struct State {
    std::vector<double> u;  // N+2 entries
    double lambda = 0.0;
};

double weighted_distance(const Grid& g, const State& a, const State& b) {
    double s = 0.0;
    for (int j = 1; j <= g.N; ++j) s += (a.u[j] - b.u[j]) * (a.u[j] - b.u[j]);
    double dl = a.lambda - b.lambda;
    return std::sqrt(dl * dl + g.h() * s);
}

// One bordered Newton system: [J  -u+ ; c_u  c_l] [du; dl] = [-F; -g].
bool bordered_solve(const Grid& grid, const Tridiagonal& J, const std::vector<double>& u,
                    const std::vector<double>& c_u, double c_l, const std::vector<double>& F, double g,
                    std::vector<double>& du, double& dl) {
    const int N = grid.N;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * N + 2);
    for (int i = 0; i < N; ++i) {
        trip.emplace_back(i, i, J.diag[i]);
        if (i > 0) trip.emplace_back(i, i - 1, J.lower[i - 1]);
        if (i + 1 < N) trip.emplace_back(i, i + 1, J.upper[i]);
        double up = u[i + 1] > 0 ? u[i + 1] : 0.0;
        if (up != 0.0) trip.emplace_back(i, N, -up);
        if (c_u[i] != 0.0) trip.emplace_back(N, i, c_u[i]);
    }
    trip.emplace_back(N, N, c_l);
    SpMat A(N + 1, N + 1);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::SparseLU<SpMat> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) return false;
    Eigen::VectorXd rhs(N + 1);
    for (int i = 0; i < N; ++i) rhs[i] = -F[i + 1];
    rhs[N] = -g;
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite()) return false;
    du.assign(N + 2, 0.0);
    for (int i = 0; i < N; ++i) du[i + 1] = x[i];
    dl = x[N];
    return true;
}

double target_residual(const Grid& grid, const Weight& w, double p, const State& X, double tol) {
    return std::max(tol, residual_floor(grid, X.lambda, w.sup_norm(), p, max_norm(X.u)));
}

int peak_node(const Grid& grid) { return (grid.N + 1) / 2; }

// Newton on the bordered system with a caller-supplied constraint.
template <class Constraint>
bool correct(const Grid& grid, const Weight& w, double p, State& X, Constraint&& constraint, double tol, int max_iters,
             double& residual) {
    std::vector<double> c_u(grid.N);
    for (int it = 0; it <= max_iters; ++it) {
        std::vector<double> F = fd_residual(grid, X.lambda, X.u, w, p);
        double c_l = 0.0;
        double g = constraint(X, c_u, c_l);
        residual = max_norm(F);
        if (!std::isfinite(residual)) return false;
        if (residual <= target_residual(grid, w, p, X, tol) && std::abs(g) <= 1e-12) return true;
        if (it == max_iters) break;
        Tridiagonal J = fd_jacobian(grid, X.lambda, X.u, w, p);
        std::vector<double> du;
        double dl = 0.0;
        if (!bordered_solve(grid, J, X.u, c_u, c_l, F, g, du, dl)) return false;
        for (int j = 1; j <= grid.N; ++j) X.u[j] += du[j];
        X.lambda += dl;
        // Roundoff floor reached: further steps cannot move the state.
        if (max_norm(du) <= 1e-13 * std::max(1.0, max_norm(X.u)) && std::abs(dl) <= 1e-13 * std::max(1.0, std::abs(X.lambda))) {
            residual = max_norm(fd_residual(grid, X.lambda, X.u, w, p));
            return residual <= 1e3 * target_residual(grid, w, p, X, tol);
        }
    }
    return false;
}

BranchPoint to_point(const Grid& grid, const State& X, double arclength, double residual) {
    BranchPoint bp;
    bp.lambda = X.lambda;
    bp.profile = GridProfile{grid, X.u, X.lambda, residual, ProfileSource::Continuation};
    bp.amplitude = max_norm(X.u);
    bp.arclength = arclength;
    bp.residual = residual;
    return bp;
}

State from_point(const BranchPoint& bp) { return State{bp.profile.values, bp.lambda}; }

}  // namespace

BranchPoint init_branch(const Weight& weight, double p, double eps, const Grid& grid) {
    if (!(eps >= 1e-6 && eps <= 1e-2)) throw spec_error("init_branch requires 1e-6 <= eps <= 1e-2");
    if (!(p > 1)) throw spec_error("init_branch requires p > 1");
    if (grid.L != weight.length()) throw spec_error("grid length differs from the weight's domain");
    Eigenpair e = principal_eigenpair(grid);
    State X;
    X.lambda = e.sigma1;
    X.u.resize(e.phi.size());
    for (std::size_t j = 0; j < e.phi.size(); ++j) X.u[j] = eps * e.phi[j];
    X.u.front() = X.u.back() = 0.0;
    const int m = peak_node(grid);
    double residual = 0.0;
    auto amplitude = [&](const State& s, std::vector<double>& c_u, double& c_l) {
        std::fill(c_u.begin(), c_u.end(), 0.0);
        c_u[m - 1] = 1.0;
        c_l = 0.0;
        return s.u[m] - eps;
    };
    if (!correct(grid, weight, p, X, amplitude, std::min(1e-9, 1e-6 * eps), 50, residual))
        throw numerical_fault("NEWTON_FAILED", "branch seed did not converge at eps = " + std::to_string(eps));
    return to_point(grid, X, 0.0, residual);
}

Branch continue_branch(const Weight& weight, double p, const BranchPoint& seed, const ContinuationConfig& cfg,
                       const Grid& grid) {
    if (!(cfg.h_min > 0 && cfg.h_min <= cfg.h_init && cfg.h_init <= cfg.h_max))
        throw spec_error("continuation steps must satisfy 0 < h_min <= h_init <= h_max");
    if (!(seed.profile.grid == grid)) throw spec_error("seed lives on a different grid");
    Branch br;
    br.points.push_back(seed);

    // Second point: the same construction at twice the amplitude.
    double eps = seed.profile.values[peak_node(grid)];
    BranchPoint second = init_branch(weight, p, std::min(2 * eps, 1e-2), grid);
    second.arclength = weighted_distance(grid, from_point(seed), from_point(second));
    br.points.push_back(second);

    double h = cfg.h_init;
    auto finish = [&](const std::string& why) { br.stop_reason = why; };
    while (true) {
        if (static_cast<int>(br.points.size()) >= cfg.max_points) {
            finish("max_points");
            break;
        }
        const State X1 = from_point(br.points[br.points.size() - 1]);
        const State X0 = from_point(br.points[br.points.size() - 2]);
        if (X1.lambda < cfg.lambda_min) {
            finish("lambda_min");
            break;
        }
        if (max_norm(X1.u) > 10 * cfg.r_cap) {
            finish("r_cap");
            break;
        }
        const double d01 = weighted_distance(grid, X0, X1);
        bool accepted = false;
        while (h >= cfg.h_min) {
            State X = X1;
            for (int j = 1; j <= grid.N; ++j) X.u[j] += h * (X1.u[j] - X0.u[j]) / d01;
            X.lambda += h * (X1.lambda - X0.lambda) / d01;
            const double hg = grid.h();
            auto sphere = [&](const State& s, std::vector<double>& c_u, double& c_l) {
                double acc = 0.0;
                for (int j = 1; j <= grid.N; ++j) {
                    double d = s.u[j] - X1.u[j];
                    c_u[j - 1] = 2 * hg * d;
                    acc += d * d;
                }
                double dl = s.lambda - X1.lambda;
                c_l = 2 * dl;
                return (dl * dl + hg * acc - h * h) / (h * h);
            };
            // The constraint is scaled by 1/h^2 so its tolerance is relative.
            auto scaled = [&](const State& s, std::vector<double>& c_u, double& c_l) {
                double g = sphere(s, c_u, c_l);
                for (double& c : c_u) c /= h * h;
                c_l /= h * h;
                return g;
            };
            double residual = 0.0;
            int iters_budget = cfg.max_corrector_iters;
            if (correct(grid, weight, p, X, scaled, cfg.residual_tol, iters_budget, residual)) {
                // Reject corrections that turned back onto the previous segment.
                double dot = (X.lambda - X1.lambda) * (X1.lambda - X0.lambda);
                for (int j = 1; j <= grid.N; ++j) dot += hg * (X.u[j] - X1.u[j]) * (X1.u[j] - X0.u[j]);
                if (dot > 0) {
                    double s = br.points.back().arclength + weighted_distance(grid, X1, X);
                    br.points.push_back(to_point(grid, X, s, residual));
                    accepted = true;
                    h = std::min(cfg.h_max, 1.5 * h);
                    break;
                }
            }
            h *= 0.5;
        }
        if (!accepted) {
            br.terminated = true;
            finish("TERMINATED");
            break;
        }
    }

    br.lambda_lo = br.lambda_hi = br.points.front().lambda;
    for (const auto& pt : br.points) {
        br.lambda_lo = std::min(br.lambda_lo, pt.lambda);
        br.lambda_hi = std::max(br.lambda_hi, pt.lambda);
    }
    br.fold = detect_turning_point(br);
    return br;
}

std::optional<TurningPoint> detect_turning_point(std::span<const double> s, std::span<const double> lambda) {
    if (s.size() != lambda.size()) throw spec_error("arclength and lambda sequences differ in length");
    if (lambda.size() < 3) throw spec_error("turning point detection needs at least 3 points");
    std::optional<TurningPoint> best;
    for (std::size_t i = 1; i + 1 < lambda.size(); ++i) {
        double d0 = lambda[i] - lambda[i - 1], d1 = lambda[i + 1] - lambda[i];
        if (!(d0 * d1 < 0)) continue;
        // Vertex of the parabola through the three points, in s.
        double s0 = s[i - 1], s1 = s[i], s2 = s[i + 1];
        double l0 = lambda[i - 1], l1 = lambda[i], l2 = lambda[i + 1];
        double a = ((l2 - l1) / (s2 - s1) - (l1 - l0) / (s1 - s0)) / (s2 - s0);
        double b = (l1 - l0) / (s1 - s0) - a * (s0 + s1);
        double lt = l1;
        if (a != 0.0) {
            double sv = -b / (2 * a);
            if (sv >= s0 && sv <= s2) lt = l1 + a * (sv - s1) * (sv - s1) + (b + 2 * a * s1) * (sv - s1);
        }
        if (!best || lt > best->lambda_t) best = TurningPoint{lt, i};
    }
    return best;
}

std::optional<TurningPoint> detect_turning_point(const Branch& branch) {
    if (branch.points.size() < 3) return std::nullopt;
    std::vector<double> s, l;
    for (const auto& pt : branch.points) {
        s.push_back(pt.arclength);
        l.push_back(pt.lambda);
    }
    return detect_turning_point(s, l);
}

std::optional<GridProfile> point_at_lambda(const Branch& branch, double lambda, const Weight& weight, double p) {
    for (std::size_t i = 1; i < branch.points.size(); ++i) {
        const auto& a = branch.points[i - 1];
        const auto& b = branch.points[i];
        if ((a.lambda - lambda) * (b.lambda - lambda) > 0) continue;
        double t = a.lambda == b.lambda ? 0.0 : (lambda - a.lambda) / (b.lambda - a.lambda);
        std::vector<double> u0(a.profile.values.size());
        for (std::size_t j = 0; j < u0.size(); ++j) u0[j] = (1 - t) * a.profile.values[j] + t * b.profile.values[j];
        NewtonResult r = newton_solve(a.profile.grid, lambda, weight, p, std::move(u0), NewtonConfig{});
        if (!r.converged) return std::nullopt;
        r.profile.source = ProfileSource::Continuation;
        return r.profile;
    }
    return std::nullopt;
}

}  // namespace multibump
