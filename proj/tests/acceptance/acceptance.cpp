// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
// Tolerances are pinned here and nowhere else.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "regradius/regradius.hpp"

using namespace regradius;
namespace fs = std::filesystem;

namespace {

constexpr double kEckartYoungRel = 0.10;
constexpr double kEckartYoungSeconds = 30.0;
constexpr double kMaxCondition = 20.0;
constexpr double kBoundsSlack = 0.05;
constexpr double kLipLow = 0.85, kLipHigh = 1.1;
constexpr double kDestabilizedFraction = 0.1;
constexpr double kDestabilizeSeconds = 60.0;
constexpr double kInterpolationTol = 0.075;
constexpr double kLyusternikGravesSlack = 0.05;
constexpr std::size_t kBumpPairs = 10000;
constexpr double kBumpLipRel = 1e-8;
constexpr double kGradientTol = 1e-4;
constexpr std::size_t kRankOneTrials = 1000;
constexpr double kRankOneTol = 1e-10;
constexpr double kCenterZeroTol = 1e-12;
constexpr double kSvdBisectionRel = 1e-8;
constexpr double kSharedPoolRel = 1e-9;

struct Check {
    bool ok = true;
    std::vector<std::string> notes;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back(what);
        }
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Matrix gaussian(std::size_t m, std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix a(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = g(rng);
    return a;
}

double condition(const Matrix& a) {
    const auto s = oracles::svd(a).singular_values;
    return s.front() / s.back();
}

Matrix well_conditioned(std::size_t n, std::mt19937_64& rng) {
    for (;;) {
        Matrix a = gaussian(n, n, rng);
        if (condition(a) <= kMaxCondition) return a;
    }
}

const GraphPoint origin(std::size_t n) { return {zeros(n), zeros(n)}; }

MappingModel diag() { return MappingModel::linear(Matrix{{2.0, 0.0}, {0.0, 0.5}}); }
MappingModel id2() { return MappingModel::smooth(builtins::identity(2)); }

// ---- 1 ---------------------------------------------------------------------

Check eckart_young() {
    Check c;
    std::mt19937_64 rng(20240601);
    const ScaleSchedule sch = ScaleSchedule::geometric();
    double worst = 0.0, slowest = 0.0;
    for (int t = 0; t < 10; ++t) {
        const Matrix a = well_conditioned(3, rng);
        const double sigma = oracles::sigma_min(a).sigma_min();
        const MappingModel f = MappingModel::linear(a);
        const auto t0 = std::chrono::steady_clock::now();
        const double rg = rg_estimate(f, origin(3), sch).value;
        const double rgp = rg_plus_estimate(f, origin(3), sch).value;
        const double secs = seconds_since(t0);
        const double e1 = std::abs(rg - sigma) / sigma, e2 = std::abs(rgp - sigma) / sigma;
        worst = std::max({worst, e1, e2});
        slowest = std::max(slowest, secs);
        c.expect(e1 <= kEckartYoungRel, "matrix " + std::to_string(t) + ": rg " + fmt(rg) + " vs sigma " + fmt(sigma));
        c.expect(e2 <= kEckartYoungRel, "matrix " + std::to_string(t) + ": rg+ " + fmt(rgp) + " vs sigma " + fmt(sigma));
        c.expect(secs < kEckartYoungSeconds, "matrix " + std::to_string(t) + ": " + fmt(secs) + " s");
    }
    c.notes.push_back("worst rel err " + fmt(worst) + ", slowest " + fmt(slowest) + " s");
    return c;
}

// ---- 2 ---------------------------------------------------------------------

Check bounds_suite() {
    Check c;
    struct Case {
        std::string name;
        MappingModel f;
        GraphPoint base;
    };
    std::vector<Case> cases{
        {"identity", id2(), origin(2)},
        {"diag(2,0.5)", diag(), origin(2)},
        {"diag(1,3)", MappingModel::linear(Matrix{{1.0, 0.0}, {0.0, 3.0}}), origin(2)},
        {"abs-branches", MappingModel::smooth(builtins::abs_branches(1)), origin(1)},
        {"parabola(1,1)", MappingModel::smooth(builtins::parabola(2)), {{1.0, 1.0}, {1.0, 1.0}}},
        {"parabola(0.5,-1)", MappingModel::smooth(builtins::parabola(2)), {{0.5, -1.0}, {0.25, 1.0}}},
    };
    std::mt19937_64 rng(77);
    for (int t = 0; t < 5; ++t) cases.push_back({"random " + std::to_string(t), MappingModel::linear(gaussian(2, 2, rng)), origin(2)});
    const ScaleSchedule sch = ScaleSchedule::geometric();
    std::size_t violations = 0;
    for (const auto& k : cases) {
        const double rg = rg_estimate(k.f, k.base, sch).value;
        const double rgp = rg_plus_estimate(k.f, k.base, sch).value;
        const bool ok = rg <= rgp + kBoundsSlack * std::max(1.0, rgp);
        violations += ok ? 0 : 1;
        c.expect(ok, k.name + ": rg " + fmt(rg) + " > rg+ " + fmt(rgp));
    }
    c.notes.push_back(std::to_string(cases.size()) + " mappings, " + std::to_string(violations) + " violations");
    return c;
}

// ---- 3 ---------------------------------------------------------------------

Check destabilization() {
    Check c;
    const ScaleSchedule sch = ScaleSchedule::geometric();
    for (const auto& [name, f] : std::vector<std::pair<std::string, MappingModel>>{{"diag", diag()}, {"identity", id2()}}) {
        const auto t0 = std::chrono::steady_clock::now();
        const RadiusReport r = verify_destabilization(f, origin(2), sch);
        const double secs = seconds_since(t0);
        const double target = r.rg_plus->value;
        c.expect(r.lip_f >= kLipLow * target && r.lip_f <= kLipHigh * target,
                 name + ": lip " + fmt(r.lip_f) + " outside [0.85, 1.1]*" + fmt(target));
        c.expect(r.rg_perturbed->value < kDestabilizedFraction * target,
                 name + ": rg(F+f) " + fmt(r.rg_perturbed->value));
        c.expect(secs < kDestabilizeSeconds, name + ": " + fmt(secs) + " s");
        c.notes.push_back(name + " lip " + fmt(r.lip_f) + " rg+ " + fmt(target) + " rg(F+f) " +
                          fmt(r.rg_perturbed->value) + " in " + fmt(secs) + " s");
    }
    return c;
}

// ---- 4 ---------------------------------------------------------------------

Check interpolation() {
    Check c;
    const ScaleSchedule sch = ScaleSchedule::geometric();
    const double sigma = 0.5;
    for (double r : {0.0, 0.25, 0.5}) {
        const RadiusReport rep = verify_interpolation(diag(), origin(2), r, sch);
        const double rg = rep.rg_perturbed->value;
        c.expect(std::abs(rg - (sigma - r)) <= kInterpolationTol, "r=" + fmt(r) + ": rg(F+af) " + fmt(rg));
        c.expect(std::abs(rep.lip_f - r) <= kInterpolationTol, "r=" + fmt(r) + ": lip(af) " + fmt(rep.lip_f));
        c.notes.push_back("r=" + fmt(r) + " rg " + fmt(rg) + " lip " + fmt(rep.lip_f));
    }
    return c;
}

// ---- 5 ---------------------------------------------------------------------

Check lyusternik_graves() {
    Check c;
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> amp(0.05, 0.4);
    const ScaleSchedule sch = ScaleSchedule::geometric();
    double worst = -kInf;
    for (int t = 0; t < 20; ++t) {
        MappingModel f = t % 4 == 0 ? id2() : (t % 4 == 1 ? diag() : MappingModel::linear(well_conditioned(2, rng)));
        const Matrix b = gaussian(2, 2, rng);
        const Perturbation g = t % 5 == 4 ? Perturbation(LinearPerturbation{b.scaled(amp(rng) / 2.0), zeros(2)})
                                          : Perturbation(SinePerturbation{amp(rng), b, zeros(2)});
        const RadiusReport r = verify_lyusternik_graves(f, origin(2), g, sch);
        const double residual = r.residuals.at("lower_bound_gap");
        const double allowed = kLyusternikGravesSlack * std::max(1.0, r.rg->value);
        worst = std::max(worst, residual - allowed);
        c.expect(residual <= allowed, "pair " + std::to_string(t) + ": residual " + fmt(residual));
    }
    c.notes.push_back("20 pairs, worst residual - allowance " + fmt(worst));
    return c;
}

// ---- 6 ---------------------------------------------------------------------

void bump_suite(Check& c, const std::string& name, const BumpPerturbation& p, std::uint64_t seed) {
    c.expect(p.bumps.size() >= 2, name + ": fewer than 2 bumps");
    c.expect(supports_disjoint(p), name + ": supports overlap");
    c.expect(shells_separated(p), name + ": shells not separated");
    std::mt19937_64 rng(seed);
    double worst_lip = 0.0, worst_grad = 0.0;
    for (std::size_t k = 0; k < p.bumps.size(); ++k) {
        const BumpSpec& b = p.bumps[k];
        const std::string tag = name + " bump " + std::to_string(k);
        c.expect(bump_value(b, b.center, p.domain) == 1.0, tag + ": s_k(x_k) != 1");
        // boundary: points whose computed distance ratio is >= 1 give exactly 0
        for (int i = 0; i < 200; ++i) {
            Vec u = b.center + b.radius * random_unit(p.domain, rng);
            while (distance(u, b.center, p.domain) / b.radius < 1.0)
                for (std::size_t j = 0; j < u.size(); ++j)
                    u[j] = std::nextafter(u[j], u[j] > b.center[j] ? kInf : -kInf);
            c.expect(bump_value(b, u, p.domain) == 0.0, tag + ": nonzero on the boundary");
        }
        // pairwise Lipschitz ratio of f_k over pairs straddling the support
        const double bound = b.exponent() * dual_norm(b.slope, p.domain) * (1.0 + kBumpLipRel);
        for (std::size_t i = 0; i < kBumpPairs; ++i) {
            const double spread = i % 2 ? 1.5 * b.radius : b.radius * std::ldexp(1.0, -static_cast<int>(i % 20));
            const Vec a = random_in_ball(b.center, 1.2 * b.radius, p.domain, rng);
            const Vec q = random_in_ball(a, spread, p.domain, rng);
            const double d = distance(a, q, p.domain);
            if (!(d > 0.0)) continue;
            const double ratio = euclidean_norm(bump_term(b, a, p.domain) - bump_term(b, q, p.domain)) / d;
            worst_lip = std::max(worst_lip, ratio / bound);
            if (ratio > bound) {
                c.expect(false, tag + ": Lipschitz ratio " + fmt(ratio) + " > " + fmt(bound));
                break;
            }
        }
        // gradient at the center against central differences
        const Matrix fd = oracles::finite_difference_jacobian([&](const Vec& x) { return p(x); }, b.center, 1e-6 * b.radius);
        const Matrix g = p.gradient_at_center(k);
        for (std::size_t r = 0; r < g.rows(); ++r)
            for (std::size_t col = 0; col < g.cols(); ++col) worst_grad = std::max(worst_grad, std::abs(fd(r, col) - g(r, col)));
        c.expect(euclidean_norm(p(b.center)) <= kCenterZeroTol, tag + ": f(x_k) != 0");
    }
    c.expect(worst_grad <= kGradientTol, name + ": gradient error " + fmt(worst_grad));
    const double rank = rank_one_residual(p, kRankOneTrials, seed + 1);
    c.expect(rank <= kRankOneTol, name + ": rank-one residual " + fmt(rank));
    c.notes.push_back(name + " " + std::to_string(p.bumps.size()) + " bumps, max lip ratio/bound " + fmt(worst_lip) +
                      ", grad err " + fmt(worst_grad) + ", rank-one " + fmt(rank));
}

Check bump_properties() {
    Check c;
    const ScaleSchedule sch = ScaleSchedule::geometric();
    bump_suite(c, "diag", build_perturbation(diag(), origin(2), sch).perturbation, 11);
    bump_suite(c, "identity", build_perturbation(id2(), origin(2), sch).perturbation, 12);
    return c;
}

// ---- 7 ---------------------------------------------------------------------

Check ekeland_relocation() {
    Check c;
    struct Case {
        std::string name;
        MappingModel f;
        GraphPoint base;
        Vec y_star;
    };
    std::mt19937_64 rng(5);
    const std::vector<Case> cases{
        {"identity-1", MappingModel::smooth(builtins::identity(1)), origin(1), {1.0}},
        {"identity-2", id2(), origin(2), {0.6, 0.8}},
        {"diag", diag(), origin(2), {0.0, 1.0}},
        {"random-linear", MappingModel::linear(well_conditioned(2, rng)), origin(2), {-0.8, 0.6}},
        {"parabola", MappingModel::smooth(builtins::parabola(2)), {{1.0, 1.0}, {1.0, 1.0}}, {1.0, 0.0}},
    };
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const Case& k = cases[i];
        const std::size_t n = k.f.domain().dimension();
        const ProductNormSpec prod = k.f.product();
        const SampledGraph s = sample_graph(k.f, k.base, 1e-2, SampleLayout{6, 4 * n + 4}, 100 + i);
        // planted witness at x̄: x* = ∇F(x̄)ᵀy*
        const Matrix j = oracles::finite_difference_jacobian([&](const Vec& x) { return k.f.images(x).front(); },
                                                             k.base.x, 1e-6);
        const WitnessEntry entry{k.base.x, k.base.y, 0.05, k.y_star, j.apply_transpose(k.y_star), 0, false, s, kInf};
        if (!coderivative_membership(s, k.base, entry.y_star, entry.x_star, entry.eps, prod)) {
            c.expect(false, k.name + ": planted witness fails membership");
            continue;
        }
        try {
            const Relocation r = relocate_witness_ekeland(s, prod, k.base.x, entry, kFirstBumpLabel + static_cast<int>(i));
            const double moved = distance(r.entry.x, k.base.x, k.f.domain());
            const double hop = pair_distance(r.entry.x, r.entry.y, r.start.x, r.start.y, prod);
            const double allowance = distance(r.start.x, k.base.x, k.f.domain());
            c.expect(moved > 0.0, k.name + ": x stayed at the base point");
            c.expect(oracles::brute_force_membership(s, {r.entry.x, r.entry.y}, r.entry.x_star, -r.entry.y_star,
                                                     r.entry.eps, prod),
                     k.name + ": relocated membership fails");
            c.expect(hop <= allowance * (1.0 + 1e-12), k.name + ": distance bound " + fmt(hop) + " > " + fmt(allowance));
            c.expect(r.steps <= s.points.size(), k.name + ": " + std::to_string(r.steps) + " steps");
            c.notes.push_back(k.name + " " + std::to_string(r.steps) + " steps");
        } catch (const Error& e) {
            c.expect(false, k.name + ": " + e.what());
        }
    }
    return c;
}

// ---- 8 ---------------------------------------------------------------------

Check oracle_cross_check() {
    Check c;
    std::mt19937_64 rng(8);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Matrix a = gaussian(3, 3, rng);
        const double s = oracles::sigma_min(a).sigma_min();
        const double b = std::sqrt(std::max(0.0, oracles::lambda_min_gram(a)));
        const double rel = std::abs(s - b) / s;
        worst = std::max(worst, rel);
        c.expect(rel <= kSvdBisectionRel, "matrix " + std::to_string(t) + ": " + fmt(s) + " vs " + fmt(b));
    }
    c.notes.push_back("svd vs bisection worst rel " + fmt(worst));

    const ScaleSchedule sch = ScaleSchedule::geometric(5);
    const std::vector<std::pair<MappingModel, GraphPoint>> cases{
        {diag(), origin(2)},
        {MappingModel::linear(Matrix{{1.0, 0.4}, {-0.3, 0.8}}), origin(2)},
        {MappingModel::smooth(builtins::abs_branches(1)), origin(1)},
        {MappingModel::smooth(builtins::parabola(2)), {{1.0, 1.0}, {1.0, 1.0}}},
        {id2(), origin(2)},
    };
    double worst_pool = 0.0;
    for (const auto& [f, base] : cases) {
        const RatioSearch r = rg_search(f, base, sch);
        for (const auto& s : r.estimate.per_scale) {
            const double bf = oracles::brute_force_rg(r.pool, f, base, s.delta);
            const double d = std::abs(bf - s.value) / std::max(1.0, s.value);
            worst_pool = std::max(worst_pool, d);
            c.expect(d <= kSharedPoolRel, f.kind() + " delta " + fmt(s.delta) + ": " + fmt(bf) + " vs " + fmt(s.value));
        }
    }
    c.notes.push_back("brute force vs estimate worst " + fmt(worst_pool));
    return c;
}

// ---- 9 ---------------------------------------------------------------------

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string strip_timestamp(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line))
        if (line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
    return out;
}

Check determinism() {
    Check c;
    const fs::path dir = fs::temp_directory_path() / ("regradius_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << R"({
  "mapping": {"kind": "linear", "matrix": [[2, 0], [0, 0.5]]},
  "base_point": {"x": [0, 0]},
  "schedule": {"count": 4},
  "tasks": ["rg", "rg_plus", {"lyusternik_graves": {"f": {"kind": "sine", "amplitude": 0.1,
                                                        "matrix": [[1, 0], [0, 1]], "base_point": [0, 0]}}},
            "strong_check"],
  "seed": 3
})";
    const std::vector<std::pair<std::string, std::string>> runs{{"a", "1"}, {"b", "1"}, {"c", "4"}};
    std::vector<std::string> reports, traces;
    for (const auto& [tag, jobs] : runs) {
        const std::string cmd = std::string("\"") + REGRADIUS_CLI_PATH + "\" run --config \"" + cfg.string() +
                                "\" --out \"" + (dir / tag).string() + "\" --jobs " + jobs;
        const int status = std::system(cmd.c_str());
        c.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, "run " + tag + " exit status " + std::to_string(status));
        reports.push_back(strip_timestamp(read_text(dir / tag / "report.json")));
        traces.push_back(read_text(dir / tag / "traces.csv"));
    }
    c.expect(!reports[0].empty(), "empty report");
    c.expect(reports[0] == reports[1] && traces[0] == traces[1], "two runs differ");
    c.expect(reports[0] == reports[2] && traces[0] == traces[2], "--jobs 1 and --jobs 4 differ");
    c.notes.push_back("report " + std::to_string(reports[0].size()) + " bytes, identical across 3 runs");
    fs::remove_all(dir);
    return c;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Check()>>> criteria{
        {"eckart-young agreement", eckart_young},
        {"rg below rg+ suite", bounds_suite},
        {"destabilization", destabilization},
        {"interpolation", interpolation},
        {"lyusternik-graves", lyusternik_graves},
        {"bump properties", bump_properties},
        {"ekeland relocation", ekeland_relocation},
        {"oracle cross-check", oracle_cross_check},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = criteria[i].second();
        } catch (const std::exception& e) {
            c.ok = false;
            c.notes.push_back(std::string("exception: ") + e.what());
        }
        std::string detail;
        for (const auto& n : c.notes) detail += (detail.empty() ? "" : "; ") + n;
        std::printf("criterion %zu %s: %s (%.1f s) %s\n", i + 1, criteria[i].first.c_str(), c.ok ? "PASS" : "FAIL",
                    seconds_since(t0), detail.c_str());
        std::fflush(stdout);
        failed += c.ok ? 0 : 1;
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
