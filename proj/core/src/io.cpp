#include "multibump/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "multibump/errors.hpp"
#include "multibump/parallel.hpp"

namespace multibump {

using nlohmann::json;

namespace {

// Non-finite doubles have no JSON literal; they travel as strings.
json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double to_num(const json& j, const std::string& where) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& s = j.get_ref<const std::string&>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw spec_error(where + " must be a number");
}

json num_map(const std::map<std::string, double>& m) {
    json o = json::object();
    for (const auto& [k, v] : m) o[k] = num(v);
    return o;
}

std::map<std::string, double> num_map_from(const json& j, const std::string& where) {
    std::map<std::string, double> m;
    for (const auto& [k, v] : j.items()) m[k] = to_num(v, where + "." + k);
    return m;
}

// Typed access to one JSON object; reports unknown keys so typos in a spec
// file do not pass silently.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw spec_error(label() + " must be a JSON object");
    }

    bool has(const char* key) const { return j_.contains(key); }

    double number(const char* key, double fallback) {
        if (!mark(key)) return fallback;
        return to_num(j_.at(key), field(key));
    }

    int integer(const char* key, int fallback) {
        if (!mark(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw spec_error(field(key) + " must be an integer");
        return v.get<int>();
    }

    std::string string(const char* key, const std::string& fallback) {
        if (!mark(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_string()) throw spec_error(field(key) + " must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key, std::vector<double> fallback) {
        if (!mark(key)) return fallback;
        const json& v = j_.at(key);
        if (!v.is_array()) throw spec_error(field(key) + " must be an array of numbers");
        std::vector<double> out;
        out.reserve(v.size());
        for (const json& e : v) out.push_back(to_num(e, field(key)));
        return out;
    }

    const json* child(const char* key) {
        if (!mark(key)) return nullptr;
        return &j_.at(key);
    }

    std::string field(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!used_.count(k)) throw spec_error("unknown field '" + field(k.c_str()) + "'");
    }

private:
    bool mark(const char* key) {
        if (!j_.contains(key)) return false;
        used_.insert(key);
        return true;
    }
    std::string label() const { return path_.empty() ? "problem spec" : "'" + path_ + "'"; }

    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

IndexSet index_set_from(const json& j, const std::string& where) {
    if (j.is_string()) return IndexSet::parse(j.get<std::string>());
    if (j.is_array()) {
        std::vector<int> members;
        for (const json& e : j) {
            if (!e.is_number_integer()) throw spec_error(where + " members must be integers");
            members.push_back(e.get<int>());
        }
        return IndexSet(std::move(members));
    }
    throw spec_error(where + " must be an index set such as \"{1,2}\" or [1, 2]");
}

void parse_newton(Section s, NewtonConfig& c) {
    c.max_iters = s.integer("max_iters", c.max_iters);
    c.residual_tol = s.number("residual_tol", c.residual_tol);
    c.backtrack = s.number("backtrack", c.backtrack);
    c.min_step = s.number("min_step", c.min_step);
    c.max_step_ratio = s.number("max_step_ratio", c.max_step_ratio);
    c.dedup_tol = s.number("dedup_tol", c.dedup_tol);
    c.amplitude = s.number("amplitude", c.amplitude);
    s.finish();
    if (c.max_iters < 1) throw spec_error("newton.max_iters must be at least 1");
    if (!(c.residual_tol > 0)) throw spec_error("newton.residual_tol must be positive");
    if (!(c.backtrack > 0 && c.backtrack < 1)) throw spec_error("newton.backtrack must lie in (0, 1)");
    if (!(c.max_step_ratio > 0)) throw spec_error("newton.max_step_ratio must be positive");
}

void parse_scan(Section s, ScanOptions& c) {
    c.points_per_decade = s.integer("points_per_decade", c.points_per_decade);
    c.uniform_points = s.integer("uniform_points", c.uniform_points);
    c.s_min = s.number("s_min", c.s_min);
    c.s_max = s.number("s_max", c.s_max);
    c.max_doublings = s.integer("max_doublings", c.max_doublings);
    c.bracket_rel = s.number("bracket_rel", c.bracket_rel);
    c.signature_tol = s.number("signature_tol", c.signature_tol);
    c.signature_rel = s.number("signature_rel", c.signature_rel);
    c.zero_tol = s.number("zero_tol", c.zero_tol);
    c.dedup_tol = s.number("dedup_tol", c.dedup_tol);
    c.degenerate_slope = s.number("degenerate_slope", c.degenerate_slope);
    c.caps.u_cap = s.number("u_cap", c.caps.u_cap);
    s.finish();
    if (c.points_per_decade < 1 || c.uniform_points < 0) throw spec_error("scan sample counts must be positive");
    if (c.s_min < 0 || c.s_max < 0) throw spec_error("scan.s_min and scan.s_max must be non-negative");
    if (c.s_max > 0 && c.s_min >= c.s_max) throw spec_error("scan.s_min must be below scan.s_max");
    if (!(c.bracket_rel > 0) || !(c.zero_tol > 0)) throw spec_error("scan tolerances must be positive");
}

void parse_continuation(Section s, ProblemSpec& spec) {
    ContinuationConfig& c = spec.continuation;
    c.h_init = s.number("h_init", c.h_init);
    c.h_min = s.number("h_min", c.h_min);
    c.h_max = s.number("h_max", c.h_max);
    c.max_points = s.integer("max_points", c.max_points);
    c.r_cap = s.number("r_cap", c.r_cap);
    c.lambda_min = s.number("lambda_min", c.lambda_min);
    c.residual_tol = s.number("residual_tol", c.residual_tol);
    c.max_corrector_iters = s.integer("max_corrector_iters", c.max_corrector_iters);
    spec.branch_eps = s.number("eps", spec.branch_eps);
    spec.branch_N = s.integer("N", spec.branch_N);
    s.finish();
    if (!(c.h_min > 0 && c.h_min <= c.h_init && c.h_init <= c.h_max))
        throw spec_error("continuation steps must satisfy 0 < h_min <= h_init <= h_max");
    if (!(spec.branch_eps >= 1e-6 && spec.branch_eps <= 1e-2))
        throw spec_error("continuation.eps must lie in [1e-6, 1e-2]");
    if (spec.branch_N < 3) throw spec_error("continuation.N must be at least 3");
}

void parse_verify(Section s, VerifyConfig& c) {
    c.thetas = s.numbers("thetas", c.thetas);
    c.delta = s.number("delta", c.delta);
    c.mu_factor = s.number("mu_factor", c.mu_factor);
    if (const json* b = s.child("bump_set")) c.bump_set = index_set_from(*b, s.field("bump_set"));
    if (const json* k = s.child("compacts")) {
        if (!k->is_array()) throw spec_error("verify.compacts must be an array of [a, b] pairs");
        c.compacts.clear();
        for (const json& pair : *k) {
            if (!pair.is_array() || pair.size() != 2) throw spec_error("verify.compacts entries must be [a, b] pairs");
            double a = to_num(pair[0], "verify.compacts"), b = to_num(pair[1], "verify.compacts");
            if (!(a < b)) throw spec_error("verify.compacts entries need a < b");
            c.compacts.emplace_back(a, b);
        }
    }
    s.finish();
    for (double t : c.thetas)
        if (!(t > 0 && t <= 1)) throw spec_error("verify.thetas must lie in (0, 1]");
    if (!(c.delta > 0)) throw spec_error("verify.delta must be positive");
    if (!(c.mu_factor > 1)) throw spec_error("verify.mu_factor must exceed 1");
    if (c.bump_set.empty()) throw spec_error("verify.bump_set must be nonempty");
}

void parse_liouville(Section s, LiouvilleGrid& c) {
    c.alphas = s.numbers("alphas", c.alphas);
    c.gammas = s.numbers("gammas", c.gammas);
    c.kappas = s.numbers("kappas", c.kappas);
    c.betas = s.numbers("betas", c.betas);
    c.slopes = s.numbers("slopes", c.slopes);
    c.p = s.number("p", c.p);
    c.x_max = s.number("x_max", c.x_max);
    s.finish();
    for (double a : c.alphas)
        if (!(a > 0)) throw spec_error("liouville.alphas must be positive");
    for (double g : c.gammas)
        if (!(g >= 0)) throw spec_error("liouville.gammas must be non-negative");
    for (double k : c.kappas)
        if (!(k >= 0)) throw spec_error("liouville.kappas must be non-negative");
    for (double b : c.betas)
        if (!(b >= 0)) throw spec_error("liouville.betas must be non-negative");
    for (double v : c.slopes)
        if (!(v <= 0)) throw spec_error("liouville.slopes must be non-positive");
    if (!(c.p > 1)) throw spec_error("liouville.p must satisfy p > 1");
    if (c.x_max < 0) throw spec_error("liouville.x_max must be non-negative");
}

void check_descending(const std::vector<double>& grid) {
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] < grid[k - 1])) throw spec_error("lambda_grid must be strictly decreasing");
}

double slope_left(const GridProfile& g) {
    const auto& u = g.values;
    return (-3 * u[0] + 4 * u[1] - u[2]) / (2 * g.grid.h());
}

double slope_right(const GridProfile& g) {
    const auto& u = g.values;
    const std::size_t n = u.size();
    return (3 * u[n - 1] - 4 * u[n - 2] + u[n - 3]) / (2 * g.grid.h());
}

json doubles(std::span<const double> v) {
    json a = json::array();
    for (double x : v) a.push_back(num(x));
    return a;
}

std::string source_name(ProfileSource s) {
    switch (s) {
    case ProfileSource::Newton: return "newton";
    case ProfileSource::Shooting: return "shooting";
    case ProfileSource::Continuation: return "continuation";
    }
    return "newton";
}

ProfileSource source_from(const std::string& s) {
    if (s == "newton") return ProfileSource::Newton;
    if (s == "shooting") return ProfileSource::Shooting;
    if (s == "continuation") return ProfileSource::Continuation;
    throw spec_error("unknown profile source '" + s + "'");
}

ReportStatus status_from(const std::string& s) {
    if (s == "PASS") return ReportStatus::Pass;
    if (s == "FAIL") return ReportStatus::Fail;
    if (s == "INCONCLUSIVE") return ReportStatus::Inconclusive;
    throw spec_error("unknown report status '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------- ProblemSpec

double ProblemSpec::require_lambda() const {
    if (!lambda) throw spec_error("this command needs a scalar 'lambda'");
    return *lambda;
}

std::vector<double> ProblemSpec::sweep_grid() const {
    if (!lambda_grid.empty()) return lambda_grid;
    return {-10, -20, -40, -80, -160, -320};
}

void ProblemSpec::sync() {
    Grid g = grid();
    scan.grid = g;
    scan.threads = threads;
    newton.threads = threads;
}

json to_json(const WeightSpec& w) {
    json j;
    switch (w.kind) {
    case WeightKind::SinMultibump:
        j["kind"] = "sin_multibump";
        j["m"] = w.frequency;
        break;
    case WeightKind::PiecewisePower:
        j["kind"] = "piecewise_power";
        j["sigma"] = doubles(w.sigma);
        j["tau"] = doubles(w.tau);
        j["gamma"] = doubles(w.gamma);
        j["c"] = doubles(w.coeff);
        j["d"] = doubles(w.depth);
        break;
    case WeightKind::Tabulated:
        j["kind"] = "tabulated";
        j["x"] = doubles(w.xs);
        j["a"] = doubles(w.as);
        break;
    }
    j["L"] = w.length;
    return j;
}

WeightSpec weight_spec_from_json(const json& j) {
    Section s(j, "weight");
    WeightSpec w;
    const std::string kind = s.string("kind", "");
    w.length = s.number("L", 1.0);
    if (kind == "sin_multibump") {
        w.kind = WeightKind::SinMultibump;
        w.frequency = s.integer("m", 3);
    } else if (kind == "piecewise_power") {
        w.kind = WeightKind::PiecewisePower;
        w.sigma = s.numbers("sigma", {});
        w.tau = s.numbers("tau", {});
        w.gamma = s.numbers("gamma", {});
        w.coeff = s.numbers("c", {});
        w.depth = s.numbers("d", {});
    } else if (kind == "tabulated") {
        w.kind = WeightKind::Tabulated;
        w.xs = s.numbers("x", {});
        w.as = s.numbers("a", {});
    } else {
        throw spec_error("weight.kind must be sin_multibump, piecewise_power or tabulated, got '" + kind + "'");
    }
    s.finish();
    Weight::build(w);  // validates
    return w;
}

ProblemSpec parse_problem_spec(const json& j) {
    Section s(j, "");
    ProblemSpec spec;
    const json* w = s.child("weight");
    if (!w) throw spec_error("problem spec needs a 'weight' object");
    spec.weight = weight_spec_from_json(*w);
    if (s.has("L")) spec.weight.length = s.number("L", spec.weight.length);
    spec.p = s.number("p", spec.p);
    if (!(spec.p > 1) || !std::isfinite(spec.p))
        throw spec_error("p must satisfy p > 1 (superlinear exponent), got " + format_double(spec.p));
    if (s.has("lambda")) spec.lambda = s.number("lambda", 0.0);
    spec.lambda_grid = s.numbers("lambda_grid", {});
    check_descending(spec.lambda_grid);
    if (const json* g = s.child("grid")) {
        Section gs(*g, "grid");
        spec.N = gs.integer("N", spec.N);
        gs.finish();
    }
    spec.seed = static_cast<unsigned>(s.integer("seed", 0));
    spec.threads = s.integer("threads", spec.threads);
    spec.rho = s.number("rho", spec.rho);
    spec.margin = s.number("margin", spec.margin);
    spec.r_cap = s.number("r_cap", spec.r_cap);
    if (const json* n = s.child("newton")) parse_newton(Section(*n, "newton"), spec.newton);
    if (const json* n = s.child("scan")) parse_scan(Section(*n, "scan"), spec.scan);
    if (const json* n = s.child("continuation")) parse_continuation(Section(*n, "continuation"), spec);
    if (const json* n = s.child("verify")) parse_verify(Section(*n, "verify"), spec.verify);
    if (const json* n = s.child("liouville")) parse_liouville(Section(*n, "liouville"), spec.liouville);
    s.finish();

    if (spec.N < 3) throw spec_error("grid.N must be at least 3");
    if (spec.threads < 1) throw spec_error("threads must be at least 1");
    if (!(spec.rho > 0)) throw spec_error("rho must be positive");
    if (!(spec.margin >= 0 && spec.margin < 1)) throw spec_error("margin must lie in [0, 1)");
    if (!(spec.r_cap > 0)) throw spec_error("r_cap must be positive");
    Weight::build(spec.weight);
    spec.sync();
    return spec;
}

ProblemSpec load_problem_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw spec_error("cannot open spec file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw spec_error("spec file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_problem_spec(j);
}

json to_json(const ProblemSpec& spec) {
    json j;
    j["weight"] = to_json(spec.weight);
    j["p"] = spec.p;
    if (spec.lambda) j["lambda"] = *spec.lambda;
    if (!spec.lambda_grid.empty()) j["lambda_grid"] = doubles(spec.lambda_grid);
    j["grid"] = {{"N", spec.N}};
    j["seed"] = spec.seed;
    j["threads"] = spec.threads;
    j["rho"] = spec.rho;
    j["margin"] = spec.margin;
    j["r_cap"] = num(spec.r_cap);
    const NewtonConfig& n = spec.newton;
    j["newton"] = {{"max_iters", n.max_iters},   {"residual_tol", n.residual_tol},
                   {"backtrack", n.backtrack},   {"min_step", n.min_step},
                   {"max_step_ratio", n.max_step_ratio}, {"dedup_tol", n.dedup_tol},
                   {"amplitude", n.amplitude}};
    const ScanOptions& sc = spec.scan;
    j["scan"] = {{"points_per_decade", sc.points_per_decade},
                 {"uniform_points", sc.uniform_points},
                 {"s_min", sc.s_min},
                 {"s_max", sc.s_max},
                 {"max_doublings", sc.max_doublings},
                 {"bracket_rel", sc.bracket_rel},
                 {"signature_tol", sc.signature_tol},
                 {"signature_rel", sc.signature_rel},
                 {"zero_tol", sc.zero_tol},
                 {"dedup_tol", sc.dedup_tol},
                 {"degenerate_slope", sc.degenerate_slope},
                 {"u_cap", num(sc.caps.u_cap)}};
    const ContinuationConfig& c = spec.continuation;
    j["continuation"] = {{"h_init", c.h_init},
                         {"h_min", c.h_min},
                         {"h_max", c.h_max},
                         {"max_points", c.max_points},
                         {"r_cap", num(c.r_cap)},
                         {"lambda_min", c.lambda_min},
                         {"residual_tol", c.residual_tol},
                         {"max_corrector_iters", c.max_corrector_iters},
                         {"eps", spec.branch_eps},
                         {"N", spec.branch_N}};
    json compacts = json::array();
    for (const auto& [a, b] : spec.verify.compacts) compacts.push_back({a, b});
    j["verify"] = {{"thetas", doubles(spec.verify.thetas)},
                   {"delta", spec.verify.delta},
                   {"mu_factor", spec.verify.mu_factor},
                   {"bump_set", spec.verify.bump_set.members()},
                   {"compacts", compacts}};
    const LiouvilleGrid& l = spec.liouville;
    j["liouville"] = {{"alphas", doubles(l.alphas)}, {"gammas", doubles(l.gammas)}, {"kappas", doubles(l.kappas)},
                      {"betas", doubles(l.betas)},   {"slopes", doubles(l.slopes)}, {"p", l.p},
                      {"x_max", l.x_max}};
    return j;
}

// ------------------------------------------------------------------ artifacts

json to_json(const GridProfile& g) {
    return {{"lambda", num(g.lambda)},
            {"N", g.grid.N},
            {"L", g.grid.L},
            {"residual", num(g.residual_norm)},
            {"source", source_name(g.source)},
            {"values", doubles(g.values)}};
}

GridProfile grid_profile_from_json(const json& j) {
    GridProfile g;
    const int N = j.at("N").get<int>();
    g.grid = Grid(N, j.contains("L") ? j.at("L").get<double>() : 1.0);
    g.lambda = to_num(j.at("lambda"), "lambda");
    if (j.contains("residual")) g.residual_norm = to_num(j.at("residual"), "residual");
    if (j.contains("source")) g.source = source_from(j.at("source").get<std::string>());
    for (const json& v : j.at("values")) g.values.push_back(to_num(v, "values"));
    if (static_cast<int>(g.values.size()) != g.grid.size())
        throw spec_error("profile has " + std::to_string(g.values.size()) + " values, expected N + 2");
    return g;
}

json to_json(const VerificationReport& r) {
    json j;
    j["lemma"] = r.lemma;
    j["weight_id"] = r.weight_id;
    j["lambda"] = r.lambda ? num(*r.lambda) : json(nullptr);
    j["p"] = r.p;
    j["rho"] = r.rho ? num(*r.rho) : json(nullptr);
    j["status"] = to_string(r.status);
    j["margins"] = num_map(r.margins);
    j["thresholds"] = num_map(r.thresholds);
    json rows = json::array();
    for (const ReportRow& row : r.rows) rows.push_back({{"lambda", num(row.lambda)}, {"values", num_map(row.values)}});
    j["rows"] = rows;
    j["note"] = r.note;
    return j;
}

VerificationReport verification_report_from_json(const json& j) {
    VerificationReport r;
    r.lemma = j.at("lemma").get<std::string>();
    r.weight_id = j.at("weight_id").get<std::string>();
    if (!j.at("lambda").is_null()) r.lambda = to_num(j.at("lambda"), "lambda");
    r.p = j.at("p").get<double>();
    if (!j.at("rho").is_null()) r.rho = to_num(j.at("rho"), "rho");
    r.status = status_from(j.at("status").get<std::string>());
    r.margins = num_map_from(j.at("margins"), "margins");
    r.thresholds = num_map_from(j.at("thresholds"), "thresholds");
    for (const json& row : j.at("rows"))
        r.rows.push_back({to_num(row.at("lambda"), "rows.lambda"), num_map_from(row.at("values"), "rows.values")});
    r.note = j.at("note").get<std::string>();
    return r;
}

json to_json(const DegreeTable& t) {
    json boxes = json::array();
    for (const auto& [set, deg] : t.lambda_boxes) {
        auto occ = t.occupancy.find(set);
        auto om = t.omega_boxes.find(set);
        boxes.push_back({{"index_set", set.to_string()},
                         {"degree", deg},
                         {"omega_degree", om == t.omega_boxes.end() ? 0 : om->second},
                         {"solutions", occ == t.occupancy.end() ? 0 : occ->second}});
    }
    return {{"lambda", num(t.lambda)}, {"orientation", t.orientation}, {"boxes", boxes}, {"pass", t.pass}};
}

json to_json(const SolutionSet& set, const Weight& weight, const ClassifierConfig& cfg) {
    json sols = json::array();
    for (std::size_t k = 0; k < set.size(); ++k) {
        const GridProfile& g = set.profiles[k];
        json row{{"slope", num(set.slopes[k])},
                 {"index", set.indices[k]},
                 {"derivative", num(set.derivatives[k])},
                 {"degenerate", static_cast<bool>(set.degenerate[k])},
                 {"sup_norm", num(g.sup_norm())},
                 {"min_value", num(g.min_value())},
                 {"sup_norms", doubles(per_interval_sups(g, weight.pattern()))}};
        try {
            row["index_set"] = classify(g, weight.pattern(), cfg).to_string();
        } catch (const Error& e) {
            row["index_set"] = nullptr;
            row["classification_error"] = e.code();
        }
        sols.push_back(std::move(row));
    }
    json warnings = json::array();
    for (const std::string& w : set.warnings) warnings.push_back(w);
    return {{"lambda", num(set.lambda)},
            {"count", set.size()},
            {"trivial_index", set.trivial_index},
            {"s_max", num(set.s_max)},
            {"scan_points", set.scan.size()},
            {"solutions", sols},
            {"warnings", warnings}};
}

json solve_manifest(const NewtonSolutionSet& set, const Weight& weight) {
    json sols = json::array();
    for (std::size_t k = 0; k < set.size(); ++k) {
        const GridProfile& g = set.profiles[k];
        sols.push_back({{"index_set", set.classes[k].to_string()},
                        {"sup_norm", num(g.sup_norm())},
                        {"sup_norms", doubles(per_interval_sups(g, weight.pattern()))},
                        {"residual", num(g.residual_norm)},
                        {"slope_left", num(slope_left(g))},
                        {"slope_right", num(slope_right(g))}});
    }
    json seeds = json::array();
    for (const SeedRecord& r : set.seeds) {
        seeds.push_back({{"seed", r.seed.to_string()},
                         {"amplitude", num(r.amplitude)},
                         {"converged", r.converged},
                         {"iterations", r.iterations},
                         {"residual", num(r.residual)},
                         {"classified", r.classified ? json(r.classified->to_string()) : json(nullptr)},
                         {"solution", r.solution},
                         {"note", r.note}});
    }
    json occupied = json::array();
    for (const IndexSet& s : nonempty_index_sets(weight.intervals()))
        if (set.occupies(s)) occupied.push_back(s.to_string());
    return {{"lambda", num(set.lambda)},
            {"count", set.size()},
            {"boxes_total", (1 << weight.intervals()) - 1},
            {"boxes_occupied", occupied},
            {"solutions", sols},
            {"seeds", seeds}};
}

json to_json(const Branch& b) {
    return {{"points", b.points.size()},
            {"fold_lambda", b.fold ? num(b.fold->lambda_t) : json(nullptr)},
            {"fold_index", b.fold ? json(b.fold->index) : json(nullptr)},
            {"lambda_lo", num(b.lambda_lo)},
            {"lambda_hi", num(b.lambda_hi)},
            {"terminated", b.terminated},
            {"stop_reason", b.stop_reason}};
}

json to_json(const LiouvilleResult& r) {
    return {{"slope", num(r.slope)},     {"verdict", to_string(r.verdict)},
            {"exit_x", num(r.exit_x)},   {"reached_one", r.reached_one},
            {"v1", num(r.v1)},           {"dv1", num(r.dv1)},
            {"bound_applies", r.bound_applies}, {"bound", num(r.bound)}};
}

std::string profile_csv(const GridProfile& g) {
    std::string out = "x,u\n";
    for (int j = 0; j < g.grid.size(); ++j) out += format_double(g.grid.x(j)) + "," + format_double(g.values[j]) + "\n";
    return out;
}

std::string scan_csv(const SolutionSet& set, int intervals) {
    std::string out = "s,S,blew_up";
    for (int i = 1; i <= intervals; ++i) out += ",sup_I" + std::to_string(i);
    out += "\n";
    for (const ScanSample& r : set.scan) {
        out += format_double(r.s) + "," + format_double(r.terminal) + "," + (r.blew_up ? "1" : "0");
        for (int i = 0; i < intervals; ++i)
            out += "," + (i < static_cast<int>(r.per_interval_sup.size()) ? format_double(r.per_interval_sup[i]) : "");
        out += "\n";
    }
    return out;
}

std::string branch_csv(const Branch& b) {
    std::string out = "lambda,sup_norm,fold_flag\n";
    for (std::size_t k = 0; k < b.points.size(); ++k) {
        bool fold = b.fold && b.fold->index == k;
        out += format_double(b.points[k].lambda) + "," + format_double(b.points[k].amplitude) + "," + (fold ? "1" : "0") +
               "\n";
    }
    return out;
}

std::string degree_csv(const DegreeTable& t) {
    std::string out = "index_set,degree\n";
    for (const auto& [set, deg] : t.lambda_boxes) out += "\"" + set.to_string() + "\"," + std::to_string(deg) + "\n";
    return out;
}

// --------------------------------------------------------------------- driver

namespace {

class Output {
public:
    explicit Output(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw spec_error("cannot create output directory '" + dir_.string() + "': " + ec.message());
    }

    void text(const std::string& name, const std::string& body) const {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw spec_error("cannot write '" + (dir_ / name).string() + "'");
        f << body;
    }

    void json_file(const std::string& name, const json& j) const { text(name, j.dump(2) + "\n"); }

private:
    std::filesystem::path dir_;
};

struct Context {
    ProblemSpec spec;
    Weight weight;
    Output out;
    std::ostream& log;
};

json header(const Context& c, const std::string& command) {
    return {{"command", command}, {"spec", to_json(c.spec)}};
}

int cmd_solve(Context& c) {
    const double lambda = c.spec.require_lambda();
    NewtonSolutionSet set = solve_all(lambda, c.weight, c.spec.p, c.spec.newton, c.spec.grid(), c.spec.classifier());
    json j = header(c, "solve");
    j["result"] = solve_manifest(set, c.weight);
    c.out.json_file("solve_manifest.json", j);
    json profiles = json::array();
    for (const GridProfile& g : set.profiles) profiles.push_back(to_json(g));
    c.out.json_file("solve_profiles.json", profiles);
    for (std::size_t k = 0; k < set.size(); ++k)
        c.out.text("solution_" + std::to_string(k) + ".csv", profile_csv(set.profiles[k]));
    c.log << "solve: " << set.size() << " solutions at lambda = " << format_double(lambda) << "\n";
    return Ok;
}

int cmd_count(Context& c) {
    const double lambda = c.spec.require_lambda();
    SolutionSet set = enumerate_solutions(lambda, c.weight, c.spec.p, c.spec.scan);
    json j = header(c, "count");
    j["result"] = to_json(set, c.weight, c.spec.classifier());
    c.out.json_file("count_report.json", j);
    c.out.text("scan.csv", scan_csv(set, c.weight.intervals()));
    json profiles = json::array();
    for (const GridProfile& g : set.profiles) profiles.push_back(to_json(g));
    c.out.json_file("count_profiles.json", profiles);
    c.log << "count: " << set.size() << " solutions at lambda = " << format_double(lambda) << "\n";
    return Ok;
}

int cmd_classify(Context& c) {
    const double lambda = c.spec.require_lambda();
    SolutionSet set = enumerate_solutions(lambda, c.weight, c.spec.p, c.spec.scan);
    const ClassifierConfig cfg = c.spec.classifier();
    std::map<IndexSet, int> boxes;
    for (const IndexSet& s : all_index_sets(c.weight.intervals())) boxes[s] = 0;
    boxes[IndexSet{}] += 1;  // trivial solution
    int unclassified = 0;
    std::string csv = "solution,index_set,sup_norm\n";
    for (std::size_t k = 0; k < set.size(); ++k) {
        std::string label;
        try {
            IndexSet s = classify(set.profiles[k], c.weight.pattern(), cfg);
            boxes[s] += 1;
            label = s.to_string();
        } catch (const Error& e) {
            ++unclassified;
            label = e.code();
        }
        csv += std::to_string(k) + ",\"" + label + "\"," + format_double(set.profiles[k].sup_norm()) + "\n";
    }
    json occ = json::array();
    for (const auto& [s, n] : boxes) occ.push_back({{"index_set", s.to_string()}, {"solutions", n}});
    json j = header(c, "classify");
    j["result"] = to_json(set, c.weight, cfg);
    j["result"]["boxes"] = occ;
    j["result"]["unclassified"] = unclassified;
    c.out.json_file("classify_report.json", j);
    c.out.text("classify.csv", csv);
    c.log << "classify: " << set.size() << " solutions, " << unclassified << " unclassified\n";
    return unclassified == 0 ? Ok : VerificationFailed;
}

int cmd_sweep(Context& c) {
    const std::vector<double> grid = c.spec.sweep_grid();
    check_descending(grid);
    const int n = c.weight.intervals();
    std::vector<SolutionSet> shoot(grid.size());
    std::vector<NewtonSolutionSet> newton(grid.size());
    ScanOptions scan = c.spec.scan;
    NewtonConfig ncfg = c.spec.newton;
    scan.threads = ncfg.threads = 1;
    parallel_for(grid.size(), c.spec.threads, [&](std::size_t k) {
        shoot[k] = enumerate_solutions(grid[k], c.weight, c.spec.p, scan);
        newton[k] = solve_all(grid[k], c.weight, c.spec.p, ncfg, c.spec.grid(), c.spec.classifier());
    });
    std::string csv = "lambda,r_lambda,shooting_count,newton_count,boxes_occupied,boxes_total\n";
    json rows = json::array();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        int occupied = 0;
        for (const IndexSet& s : nonempty_index_sets(n)) occupied += newton[k].occupies(s) ? 1 : 0;
        const double r = r_lambda(grid[k], c.weight.sup_norm(), c.spec.p);
        csv += format_double(grid[k]) + "," + format_double(r) + "," + std::to_string(shoot[k].size()) + "," +
               std::to_string(newton[k].size()) + "," + std::to_string(occupied) + "," +
               std::to_string((1 << n) - 1) + "\n";
        rows.push_back({{"lambda", grid[k]},
                        {"r_lambda", num(r)},
                        {"shooting_count", shoot[k].size()},
                        {"newton_count", newton[k].size()},
                        {"boxes_occupied", occupied}});
    }
    auto lc = empirical_lambda_c(newton, n);
    auto ls = discover_lambda_star(shoot, c.weight, c.spec.p, c.spec.rho, c.spec.margin);
    json j = header(c, "sweep");
    j["result"] = {{"rows", rows},
                   {"boxes_total", (1 << n) - 1},
                   {"lambda_c", lc ? json(*lc) : json(nullptr)},
                   {"lambda_star", ls ? json(*ls) : json(nullptr)}};
    c.out.json_file("sweep.json", j);
    c.out.text("sweep.csv", csv);
    c.log << "sweep: " << grid.size() << " lambda values, lambda_c = " << (lc ? format_double(*lc) : "none") << "\n";
    return Ok;
}

int cmd_continue(Context& c) {
    const Grid grid(c.spec.branch_N, c.weight.length());
    BranchPoint seed = init_branch(c.weight, c.spec.p, c.spec.branch_eps, grid);
    Branch b = continue_branch(c.weight, c.spec.p, seed, c.spec.continuation, grid);
    json j = header(c, "continue");
    j["result"] = to_json(b);
    c.out.json_file("branch.json", j);
    c.out.text("branch.csv", branch_csv(b));
    c.log << "continue: " << b.points.size() << " points, fold at "
          << (b.fold ? format_double(b.fold->lambda_t) : "none") << ", stop: " << b.stop_reason << "\n";
    return Ok;
}

int cmd_verify(Context& c) {
    const ProblemSpec& s = c.spec;
    const double lambda = s.require_lambda();
    std::vector<VerificationReport> reports;
    reports.push_back(verify_lower_bound(lambda, s.verify.thetas, c.weight, s.p, s.scan));
    reports.push_back(verify_forced_nonexistence(lambda, c.weight, s.p, s.verify.bump_set, s.verify.mu_factor, s.scan,
                                     std::isfinite(s.r_cap) ? std::optional<double>(s.r_cap) : std::nullopt));
    const std::vector<double> grid = s.sweep_grid();
    check_descending(grid);
    std::vector<SolutionSet> sweep = sweep_solutions(grid, c.weight, s.p, s.scan);
    auto compacts = s.verify.compacts.empty() ? default_negativity_compacts(c.weight.pattern()) : s.verify.compacts;
    if (!compacts.empty()) reports.push_back(verify_decay(sweep, compacts, s.verify.delta, c.weight, s.p));
    reports.push_back(verify_dichotomy(s.rho, sweep, c.weight, s.p, s.margin));
    DegreeTable table = degree_table(lambda, c.weight, s.p, s.rho, s.scan);

    json arr = json::array();
    std::string csv = "lemma,status,margin\n";
    bool failed = false;
    for (const VerificationReport& r : reports) {
        arr.push_back(to_json(r));
        double margin = r.margins.empty() ? std::numeric_limits<double>::quiet_NaN() : r.margins.begin()->second;
        csv += r.lemma + "," + to_string(r.status) + "," + format_double(margin) + "\n";
        failed |= r.status == ReportStatus::Fail;
        c.log << r.lemma << ": " << to_string(r.status) << "\n";
    }
    csv += std::string("degree_table,") + (table.pass ? "PASS" : "FAIL") + ",nan\n";
    failed |= !table.pass;
    json j = header(c, "verify");
    j["result"] = {{"reports", arr}, {"degree_table", to_json(table)}};
    c.out.json_file("verify.json", j);
    c.out.text("verify_summary.csv", csv);
    return failed ? VerificationFailed : Ok;
}

int cmd_liouville(Context& c) {
    const LiouvilleGrid& g = c.spec.liouville;
    std::string csv = "alpha,gamma,kappa,beta,slope,verdict,exit_x,bound_applies,bound,bound_ok\n";
    json rows = json::array();
    int bad = 0;
    for (double alpha : g.alphas)
        for (double gamma : g.gammas)
            for (double kappa : g.kappas)
                for (double beta : g.betas) {
                    LiouvilleProblem prob;
                    prob.alpha = alpha;
                    prob.gamma = gamma;
                    prob.kappa = kappa;
                    prob.beta = [beta](double) { return beta; };
                    prob.beta_value = beta;
                    const double x_max = g.x_max > 0 ? g.x_max : 10 * (1 + kappa);
                    for (const LiouvilleResult& r : liouville_check(prob, g.p, g.slopes, x_max)) {
                        const bool exits = r.verdict == LiouvilleVerdict::Exits;
                        const bool bound_ok = !r.bound_applies || (exits && r.exit_x <= r.bound * (1 + 1e-9));
                        bad += (!exits || !bound_ok) ? 1 : 0;
                        csv += format_double(alpha) + "," + format_double(gamma) + "," + format_double(kappa) + "," +
                               format_double(beta) + "," + format_double(r.slope) + "," + to_string(r.verdict) + "," +
                               format_double(r.exit_x) + "," + (r.bound_applies ? "1" : "0") + "," +
                               format_double(r.bound) + "," + (bound_ok ? "1" : "0") + "\n";
                        json row = to_json(r);
                        row["alpha"] = alpha;
                        row["gamma"] = gamma;
                        row["kappa"] = kappa;
                        row["beta"] = beta;
                        row["bound_ok"] = bound_ok;
                        rows.push_back(std::move(row));
                    }
                }
    json j = header(c, "liouville");
    j["result"] = {{"configurations", rows.size()}, {"failures", bad}, {"rows", rows}};
    c.out.json_file("liouville.json", j);
    c.out.text("liouville.csv", csv);
    c.log << "liouville: " << rows.size() << " configurations, " << bad << " failures\n";
    return bad == 0 ? Ok : VerificationFailed;
}

int cmd_degree_table(Context& c) {
    const double lambda = c.spec.require_lambda();
    DegreeTable t = degree_table(lambda, c.weight, c.spec.p, c.spec.rho, c.spec.scan);
    json j = header(c, "degree-table");
    j["result"] = to_json(t);
    c.out.json_file("degree_table.json", j);
    c.out.text("degree_table.csv", degree_csv(t));
    c.log << "degree-table: " << (t.pass ? "PASS" : "FAIL") << "\n";
    return t.pass ? Ok : VerificationFailed;
}

int exit_code_for(ErrorKind k) {
    switch (k) {
    case ErrorKind::Spec: return SpecInvalid;
    case ErrorKind::Numerical: return NumericalFault;
    case ErrorKind::Verification: return VerificationFailed;
    }
    return NumericalFault;
}

const char* kind_name(ErrorKind k) {
    switch (k) {
    case ErrorKind::Spec: return "spec";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Verification: return "verification";
    }
    return "numerical";
}

void report_error(std::ostream& err, const std::string& code, const char* kind, const std::string& message,
                  int exit_code) {
    json j = {{"error", {{"code", code}, {"kind", kind}, {"message", message}, {"exit_code", exit_code}}}};
    err << j.dump() << "\n";
}

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"solve",    "count",  "classify",  "sweep",
                                                "continue", "verify", "liouville", "degree-table"};
    return names;
}

int run(const std::string& command, const RunOptions& opts, std::ostream& out, std::ostream& err) {
    using Handler = int (*)(Context&);
    static const std::map<std::string, Handler> handlers{
        {"solve", cmd_solve},       {"count", cmd_count},   {"classify", cmd_classify},
        {"sweep", cmd_sweep},       {"continue", cmd_continue}, {"verify", cmd_verify},
        {"liouville", cmd_liouville}, {"degree-table", cmd_degree_table}};
    try {
        auto it = handlers.find(command);
        if (it == handlers.end()) throw spec_error("unknown command '" + command + "'");
        if (opts.spec_path.empty()) throw spec_error("--spec is required");
        ProblemSpec spec = load_problem_spec(opts.spec_path);
        if (opts.threads) {
            if (*opts.threads < 1) throw spec_error("--threads must be at least 1");
            spec.threads = *opts.threads;
        }
        if (opts.grid_N) {
            if (*opts.grid_N < 3) throw spec_error("--grid-N must be at least 3");
            spec.N = *opts.grid_N;
        }
        if (opts.seed) spec.seed = *opts.seed;
        spec.sync();
        Context ctx{spec, Weight::build(spec.weight), Output(opts.out_dir), out};
        return it->second(ctx);
    } catch (const Error& e) {
        int code = exit_code_for(e.kind());
        report_error(err, e.code(), kind_name(e.kind()), e.what(), code);
        return code;
    } catch (const json::exception& e) {
        report_error(err, "SPEC_ERROR", "spec", e.what(), SpecInvalid);
        return SpecInvalid;
    } catch (const std::exception& e) {
        report_error(err, "INTERNAL", "numerical", e.what(), NumericalFault);
        return NumericalFault;
    }
}

}  // namespace multibump
