#ifndef FEZ_TRANSFORM_HPP
#define FEZ_TRANSFORM_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "fez/errors.hpp"
#include "fez/mesh.hpp"

namespace fez {

enum class TransformFamily : std::uint8_t {
    HierarchicalBasis = 0,
    LiftedWavelet = 1,
};

enum class TransformArithmetic : std::uint8_t {
    Float = 0,
    Integer = 1,
};

/// Transform selector. The lifting weight is a rational lift_num/lift_den;
/// each parent p of a level-l vertex receives
///   lift_num / (lift_den * child_count_l(p)) * detail
/// per child, so a parent's total update is the weighted average of its
/// children's details. Perfect reconstruction holds for any weight.
struct TransformKind {
    TransformFamily family = TransformFamily::HierarchicalBasis;
    TransformArithmetic arithmetic = TransformArithmetic::Float;
    std::uint32_t lift_num = 1;
    std::uint32_t lift_den = 4;
};

namespace detail {

// floor division, exact on integer-valued doubles
inline long long floor_div(long long a, long long b) {
    long long q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

inline long long as_integer(double v) {
    if (!(std::abs(v) <= 9.0e15) || v != std::floor(v))
        throw DataError("integer transform requires integer-valued input");
    return static_cast<long long>(v);
}

inline void check_vector(const MeshHierarchy& h, const CoefficientVector& u) {
    if (u.values.size() != h.vertex_count())
        throw UsageError("coefficient vector length does not match hierarchy");
}

inline Basis basis_of(TransformFamily family) {
    return family == TransformFamily::HierarchicalBasis ? Basis::HierarchicalBasis : Basis::LiftedWavelet;
}

} // namespace detail

/// In-place multilevel analysis, finest level first. The predict step
/// replaces each level-l value by its detail against the parent midpoint;
/// the wavelet variant then updates the parents from the details. Integer
/// arithmetic uses floor divisions that the synthesis reverses exactly.
inline void analyze(const MeshHierarchy& h, CoefficientVector& u, TransformKind kind) {
    detail::check_vector(h, u);
    if (u.basis != Basis::Nodal) throw UsageError("analyze expects a nodal vector");

    double* a = u.values.data();
    const bool wavelet = kind.family == TransformFamily::LiftedWavelet;

    if (kind.arithmetic == TransformArithmetic::Float) {
        for (int l = h.refinements; l >= 1; --l) {
            const auto& vs = h.level_vertices[static_cast<std::size_t>(l)];
            for (std::uint32_t v : vs) {
                const auto& p = h.parents[v];
                a[v] -= 0.5 * (a[p[0]] + a[p[1]]);
            }
            if (wavelet) {
                const auto& counts = h.child_count[static_cast<std::size_t>(l)];
                const double w = static_cast<double>(kind.lift_num) / static_cast<double>(kind.lift_den);
                for (std::uint32_t v : vs) {
                    const auto& p = h.parents[v];
                    a[p[0]] += w / counts[p[0]] * a[v];
                    a[p[1]] += w / counts[p[1]] * a[v];
                }
            }
        }
    } else {
        for (double v : u.values) (void)detail::as_integer(v);
        for (int l = h.refinements; l >= 1; --l) {
            const auto& vs = h.level_vertices[static_cast<std::size_t>(l)];
            for (std::uint32_t v : vs) {
                const auto& p = h.parents[v];
                const long long s = static_cast<long long>(a[p[0]]) + static_cast<long long>(a[p[1]]);
                a[v] = static_cast<double>(static_cast<long long>(a[v]) - detail::floor_div(s, 2));
            }
            if (wavelet) {
                const auto& counts = h.child_count[static_cast<std::size_t>(l)];
                for (std::uint32_t v : vs) {
                    const auto& p = h.parents[v];
                    const long long d = static_cast<long long>(a[v]) * kind.lift_num;
                    a[p[0]] += static_cast<double>(
                        detail::floor_div(d, static_cast<long long>(kind.lift_den) * counts[p[0]]));
                    a[p[1]] += static_cast<double>(
                        detail::floor_div(d, static_cast<long long>(kind.lift_den) * counts[p[1]]));
                }
            }
        }
    }
    u.basis = detail::basis_of(kind.family);
}

/// Exact inverse of analyze; bit-exact in integer arithmetic.
inline void synthesize(const MeshHierarchy& h, CoefficientVector& u, TransformKind kind) {
    detail::check_vector(h, u);
    if (u.basis != detail::basis_of(kind.family))
        throw UsageError("coefficient vector basis does not match transform kind");

    double* a = u.values.data();
    const bool wavelet = kind.family == TransformFamily::LiftedWavelet;

    if (kind.arithmetic == TransformArithmetic::Float) {
        for (int l = 1; l <= h.refinements; ++l) {
            const auto& vs = h.level_vertices[static_cast<std::size_t>(l)];
            if (wavelet) {
                const auto& counts = h.child_count[static_cast<std::size_t>(l)];
                const double w = static_cast<double>(kind.lift_num) / static_cast<double>(kind.lift_den);
                for (std::uint32_t v : vs) {
                    const auto& p = h.parents[v];
                    a[p[0]] -= w / counts[p[0]] * a[v];
                    a[p[1]] -= w / counts[p[1]] * a[v];
                }
            }
            for (std::uint32_t v : vs) {
                const auto& p = h.parents[v];
                a[v] += 0.5 * (a[p[0]] + a[p[1]]);
            }
        }
    } else {
        for (double v : u.values) (void)detail::as_integer(v);
        for (int l = 1; l <= h.refinements; ++l) {
            const auto& vs = h.level_vertices[static_cast<std::size_t>(l)];
            if (wavelet) {
                const auto& counts = h.child_count[static_cast<std::size_t>(l)];
                for (std::uint32_t v : vs) {
                    const auto& p = h.parents[v];
                    const long long d = static_cast<long long>(a[v]) * kind.lift_num;
                    a[p[0]] -= static_cast<double>(
                        detail::floor_div(d, static_cast<long long>(kind.lift_den) * counts[p[0]]));
                    a[p[1]] -= static_cast<double>(
                        detail::floor_div(d, static_cast<long long>(kind.lift_den) * counts[p[1]]));
                }
            }
            for (std::uint32_t v : vs) {
                const auto& p = h.parents[v];
                const long long s = static_cast<long long>(a[p[0]]) + static_cast<long long>(a[p[1]]);
                a[v] = static_cast<double>(static_cast<long long>(a[v]) + detail::floor_div(s, 2));
            }
        }
    }
    u.basis = Basis::Nodal;
}

} // namespace fez

#endif
