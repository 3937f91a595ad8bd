#pragma once

// Single-valued perturbations f: R^n → R^m added to a set-valued mapping.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "regradius/bump.hpp"
#include "regradius/linalg.hpp"

namespace regradius {

struct LinearPerturbation {
    Matrix matrix;  // f(x) = C (x − x̄)
    Vec base_point;
};

/// f(x)_i = amplitude · sin((B (x − x̄))_i)
struct SinePerturbation {
    double amplitude;
    Matrix matrix;
    Vec base_point;
};

struct CustomPerturbation {
    std::string name;
    std::size_t range_dimension;
    std::function<Vec(const Vec&)> fn;
};

class Perturbation {
public:
    using Variant = std::variant<LinearPerturbation, SinePerturbation, BumpPerturbation, CustomPerturbation>;

    Perturbation(Variant v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

    static Perturbation zero(std::size_t domain_dim, std::size_t range_dim) {
        return Perturbation(LinearPerturbation{Matrix(range_dim, domain_dim), zeros(domain_dim)});
    }

    Vec operator()(const Vec& x) const {
        return std::visit(
            [&](const auto& f) -> Vec {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, LinearPerturbation>) {
                    return f.matrix.apply(x - f.base_point);
                } else if constexpr (std::is_same_v<T, SinePerturbation>) {
                    Vec z = f.matrix.apply(x - f.base_point);
                    for (double& c : z) c = f.amplitude * std::sin(c);
                    return z;
                } else if constexpr (std::is_same_v<T, BumpPerturbation>) {
                    return f(x);
                } else {
                    return f.fn(x);
                }
            },
            v_);
    }

    std::size_t range_dimension() const {
        return std::visit(
            [](const auto& f) -> std::size_t {
                using T = std::decay_t<decltype(f)>;
                if constexpr (std::is_same_v<T, BumpPerturbation>) {
                    return f.range_dimension;
                } else if constexpr (std::is_same_v<T, CustomPerturbation>) {
                    return f.range_dimension;
                } else {
                    return f.matrix.rows();
                }
            },
            v_);
    }

    const BumpPerturbation* bumps() const { return std::get_if<BumpPerturbation>(&v_); }
    const LinearPerturbation* linear() const { return std::get_if<LinearPerturbation>(&v_); }
    const Variant& variant() const { return v_; }

    std::string kind() const {
        switch (v_.index()) {
            case 0: return "linear";
            case 1: return "sine";
            case 2: return "bump";
            default: return std::get<CustomPerturbation>(v_).name;
        }
    }

    /// Points where the perturbation has structure worth sampling around.
    std::vector<Vec> anchors() const {
        std::vector<Vec> out;
        if (const auto* b = bumps())
            for (const auto& spec : b->bumps) out.push_back(spec.center);
        return out;
    }

private:
    Variant v_;
};

}  // namespace regradius
