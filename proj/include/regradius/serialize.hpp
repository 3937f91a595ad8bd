#pragma once

// JSON encoding of mappings, perturbations, estimates and reports.
// Infinite values are written as the strings "inf" / "-inf", NaN as null.

#include <cmath>
#include <string>
#include <vector>

#include "json.hpp"

#include "regradius/bump.hpp"
#include "regradius/error.hpp"
#include "regradius/linalg.hpp"
#include "regradius/mappings.hpp"
#include "regradius/moduli.hpp"
#include "regradius/perturbation_function.hpp"
#include "regradius/radius.hpp"
#include "regradius/spaces.hpp"

namespace regradius::io {

using json = nlohmann::ordered_json;

inline json number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double to_number(const json& j, const std::string& field) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    fail(ErrorKind::invalid_argument, field + ": expected a number");
}

inline json vec(const Vec& v) {
    json a = json::array();
    for (double x : v) a.push_back(number(x));
    return a;
}

inline Vec to_vec(const json& j, const std::string& field) {
    require(j.is_array(), ErrorKind::invalid_argument, field + ": expected an array of numbers");
    Vec v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(to_number(j[i], field + "[" + std::to_string(i) + "]"));
    return v;
}

inline json matrix(const Matrix& m) {
    json a = json::array();
    for (const Vec& r : m.to_rows()) a.push_back(vec(r));
    return a;
}

inline Matrix to_matrix(const json& j, const std::string& field) {
    require(j.is_array() && !j.empty(), ErrorKind::invalid_argument, field + ": expected a nonempty array of rows");
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(to_vec(j[i], field + "[" + std::to_string(i) + "]"));
    for (const Vec& r : rows)
        require(r.size() == rows.front().size() && !r.empty(), ErrorKind::dimension_mismatch, field + ": ragged rows");
    return Matrix::from_rows(rows);
}

inline const json& field(const json& j, const std::string& key, const std::string& where) {
    require(j.is_object(), ErrorKind::invalid_argument, where + ": expected an object");
    require(j.contains(key), ErrorKind::invalid_argument, where + "." + key + ": missing");
    return j.at(key);
}

inline double optional_number(const json& j, const std::string& key, double fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    return to_number(j.at(key), where + "." + key);
}

inline json graph_point(const GraphPoint& z) { return json{{"x", vec(z.x)}, {"y", vec(z.y)}}; }

inline GraphPoint to_graph_point(const json& j, const std::string& where) {
    return {to_vec(field(j, "x", where), where + ".x"), to_vec(field(j, "y", where), where + ".y")};
}

// ---- perturbations ------------------------------------------------------

inline json bump_perturbation(const BumpPerturbation& p) {
    json bumps = json::array();
    for (const auto& b : p.bumps) {
        bumps.push_back(json{{"center", vec(b.center)},
                             {"radius", number(b.radius)},
                             {"slope", vec(b.slope)},
                             {"direction", vec(b.direction)},
                             {"exponent", number(b.exponent())},
                             {"index", b.index}});
    }
    return json{{"kind", "bump"},
                {"base_point", vec(p.base_point)},
                {"domain_p", number(p.domain.p())},
                {"range_dimension", p.range_dimension},
                {"bumps", bumps}};
}

inline BumpPerturbation to_bump_perturbation(const json& j, const std::string& where) {
    BumpPerturbation p;
    p.base_point = to_vec(field(j, "base_point", where), where + ".base_point");
    require(!p.base_point.empty(), ErrorKind::invalid_argument, where + ".base_point: empty");
    p.domain = NormSpec(p.base_point.size(), optional_number(j, "domain_p", 2.0, where));
    const json& bumps = field(j, "bumps", where);
    require(bumps.is_array(), ErrorKind::invalid_argument, where + ".bumps: expected an array");
    for (std::size_t i = 0; i < bumps.size(); ++i) {
        const std::string w = where + ".bumps[" + std::to_string(i) + "]";
        const json& b = bumps[i];
        BumpSpec s;
        s.center = to_vec(field(b, "center", w), w + ".center");
        s.radius = to_number(field(b, "radius", w), w + ".radius");
        s.slope = to_vec(field(b, "slope", w), w + ".slope");
        s.direction = to_vec(field(b, "direction", w), w + ".direction");
        if (b.contains("index")) {
            s.index = b.at("index").get<int>();
        } else {
            const double e = to_number(field(b, "exponent", w), w + ".exponent");
            require(e > 1.0, ErrorKind::invalid_argument, w + ".exponent: must exceed 1");
            s.index = static_cast<int>(std::lround(1.0 / (e - 1.0)));
        }
        require(s.index >= 1, ErrorKind::invalid_argument, w + ".index: must be >= 1");
        require(s.radius > 0.0, ErrorKind::invalid_argument, w + ".radius: must be positive");
        require(s.center.size() == p.base_point.size() && s.slope.size() == p.base_point.size(),
                ErrorKind::dimension_mismatch, w + ": center/slope dimension differs from base_point");
        p.bumps.push_back(std::move(s));
    }
    if (j.contains("range_dimension")) {
        p.range_dimension = j.at("range_dimension").get<std::size_t>();
    } else {
        require(!p.bumps.empty(), ErrorKind::invalid_argument, where + ".range_dimension: missing");
        p.range_dimension = p.bumps.front().direction.size();
    }
    for (const auto& s : p.bumps)
        require(s.direction.size() == p.range_dimension, ErrorKind::dimension_mismatch,
                where + ": bump direction dimension differs from range_dimension");
    return p;
}

inline json perturbation(const Perturbation& f) {
    return std::visit(
        [](const auto& d) -> json {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, LinearPerturbation>) {
                return json{{"kind", "linear"}, {"matrix", matrix(d.matrix)}, {"base_point", vec(d.base_point)}};
            } else if constexpr (std::is_same_v<T, SinePerturbation>) {
                return json{{"kind", "sine"},
                            {"amplitude", number(d.amplitude)},
                            {"matrix", matrix(d.matrix)},
                            {"base_point", vec(d.base_point)}};
            } else if constexpr (std::is_same_v<T, BumpPerturbation>) {
                return bump_perturbation(d);
            } else {
                fail(ErrorKind::unsupported, "custom perturbation '" + d.name + "' has no JSON form");
            }
        },
        f.variant());
}

inline Perturbation to_perturbation(const json& j, const std::string& where) {
    const std::string kind = field(j, "kind", where).get<std::string>();
    if (kind == "bump") return Perturbation(to_bump_perturbation(j, where));
    const Matrix m = to_matrix(field(j, "matrix", where), where + ".matrix");
    const Vec base = to_vec(field(j, "base_point", where), where + ".base_point");
    require(base.size() == m.cols(), ErrorKind::dimension_mismatch, where + ": matrix columns differ from base_point");
    if (kind == "linear") return Perturbation(LinearPerturbation{m, base});
    if (kind == "sine") return Perturbation(SinePerturbation{to_number(field(j, "amplitude", where), where + ".amplitude"), m, base});
    fail(ErrorKind::invalid_argument, where + ".kind: unknown perturbation kind '" + kind + "'");
}

// ---- mappings -----------------------------------------------------------

inline json mapping(const MappingModel& f) {
    json j;
    if (const Matrix* a = f.linear_matrix()) {
        j = json{{"kind", "linear"}, {"matrix", matrix(*a)}};
    } else if (const SmoothMap* s = f.smooth_map()) {
        j = json{{"kind", "smooth-builtin"}, {"builtin", s->name}, {"dimension", s->domain_dim}};
    } else if (const SampledGraph* g = f.stored_graph()) {
        json pts = json::array();
        for (const auto& z : g->points) pts.push_back(graph_point(z));
        j = json{{"kind", "graph"}, {"base", graph_point(g->base)}, {"radius", number(g->radius)}, {"points", pts}};
    } else {
        const auto* d = f.perturbation_data();
        j = json{{"kind", "perturbed"},
                 {"base", mapping(*d->base)},
                 {"perturbation", perturbation(d->f)},
                 {"scale", number(d->scale)}};
    }
    j["domain_p"] = number(f.domain().p());
    j["range_p"] = number(f.range().p());
    return j;
}

inline MappingModel to_mapping(const json& j, const std::string& where = "mapping") {
    const std::string kind = field(j, "kind", where).get<std::string>();
    const double dp = optional_number(j, "domain_p", 2.0, where);
    const double rp = optional_number(j, "range_p", 2.0, where);
    require(dp >= 1.0 && rp >= 1.0, ErrorKind::invalid_argument, where + ": norm exponents must be >= 1");
    if (kind == "linear") return MappingModel::linear(to_matrix(field(j, "matrix", where), where + ".matrix"), dp, rp);
    if (kind == "smooth-builtin") {
        const std::string name = field(j, "builtin", where).get<std::string>();
        const std::size_t n = j.contains("dimension") ? j.at("dimension").get<std::size_t>() : 1;
        require(n >= 1, ErrorKind::invalid_argument, where + ".dimension: must be >= 1");
        return MappingModel::smooth(builtins::by_name(name, n), dp, rp);
    }
    if (kind == "graph") {
        SampledGraph g;
        g.base = to_graph_point(field(j, "base", where), where + ".base");
        g.radius = optional_number(j, "radius", 0.0, where);
        const json& pts = field(j, "points", where);
        require(pts.is_array(), ErrorKind::invalid_argument, where + ".points: expected an array");
        for (std::size_t i = 0; i < pts.size(); ++i)
            g.points.push_back(to_graph_point(pts[i], where + ".points[" + std::to_string(i) + "]"));
        return MappingModel::finite_graph(std::move(g), dp, rp);
    }
    if (kind == "perturbed") {
        const MappingModel base = to_mapping(field(j, "base", where), where + ".base");
        Perturbation f = to_perturbation(field(j, "perturbation", where), where + ".perturbation");
        return MappingModel::perturbed(base, std::move(f), optional_number(j, "scale", 1.0, where));
    }
    fail(ErrorKind::invalid_argument, where + ".kind: unknown mapping kind '" + kind + "'");
}

// ---- estimates and reports ---------------------------------------------

inline json estimate(const ModulusEstimate& e) {
    json per = json::array();
    for (const auto& s : e.per_scale) per.push_back(json::array({number(s.delta), number(s.value)}));
    json j{{"value", number(e.value)},
           {"per_scale", per},
           {"stabilized", e.stabilized},
           {"low_confidence", e.low_confidence}};
    if (const auto& w = e.last_witness()) {
        j["witness"] = json{{"x", vec(w->element.at.x)},
                            {"y", vec(w->element.at.y)},
                            {"y_star", vec(w->element.y_star)},
                            {"x_star", vec(w->element.x_star)},
                            {"eps", number(w->element.eps)}};
    }
    return j;
}

inline json report(const RadiusReport& r) {
    auto opt_value = [](const std::optional<ModulusEstimate>& e) { return e ? number(e->value) : json(nullptr); };
    json j{{"task", r.task},
           {"rg", opt_value(r.rg)},
           {"rg_plus", opt_value(r.rg_plus)},
           {"lip_f", number(r.lip_f)},
           {"rg_perturbed", opt_value(r.rg_perturbed)},
           {"r_target", number(r.r_target)},
           {"alpha", number(r.alpha)}};
    json res = json::object(), ver = json::object();
    for (const auto& [k, v] : r.residuals) res[k] = number(v);
    for (const auto& [k, v] : r.verdicts) ver[k] = v;
    j["residuals"] = res;
    j["verdicts"] = ver;
    json est = json::object();
    if (r.rg) est["rg"] = estimate(*r.rg);
    if (r.rg_plus) est["rg_plus"] = estimate(*r.rg_plus);
    if (r.lip) est["lip"] = estimate(*r.lip);
    if (r.rg_perturbed) est["rg_perturbed"] = estimate(*r.rg_perturbed);
    j["estimates"] = est;
    if (r.perturbation) j["perturbation"] = bump_perturbation(*r.perturbation);
    return j;
}

}  // namespace regradius::io
