#ifndef FEZ_MESH_HPP
#define FEZ_MESH_HPP

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fez/errors.hpp"

namespace fez {

/// Representation a coefficient vector is currently in.
enum class Basis : std::uint8_t {
    Nodal = 0,
    HierarchicalBasis = 1,
    LiftedWavelet = 2,
};

/// Nodal values of a piecewise linear finite element function, indexed
/// consistently with the hierarchy that produced it.
struct CoefficientVector {
    std::vector<double> values;
    Basis basis = Basis::Nodal;
};

inline constexpr int kMaxRefinements1d = 14;
inline constexpr int kMaxRefinements2d = 10;

/// Nested uniform-refinement grid on the unit interval (1D) or the
/// triangulated unit square (2D). Every vertex of level l >= 1 is the
/// midpoint of an edge of the level l-1 grid; its two parents are the
/// endpoints of that edge. All squares are split along the same diagonal
/// (bottom-left to top-right), so diagonal midpoints have the two diagonal
/// endpoints as parents.
struct MeshHierarchy {
    int dim = 1;
    int refinements = 0;

    std::vector<std::array<double, 2>> coords; // y == 0 in 1D
    std::vector<std::uint8_t> vertex_level;
    std::vector<std::array<std::uint32_t, 2>> parents; // valid for level >= 1

    /// Vertices introduced at each level, in index order. level_vertices[0]
    /// holds the coarse grid.
    std::vector<std::vector<std::uint32_t>> level_vertices;

    /// Cumulative vertex counts: vertices_per_level[l] is the size of the
    /// level-l grid.
    std::vector<std::size_t> vertices_per_level;

    /// child_count[l][p] for l >= 1: number of level-l vertices that have p
    /// as a parent. Used by the wavelet update step.
    std::vector<std::vector<std::uint8_t>> child_count;

    std::size_t vertex_count() const { return coords.size(); }
    int levels() const { return refinements + 1; }

    std::size_t vertices_on_level(int l) const { return level_vertices[static_cast<std::size_t>(l)].size(); }
};

namespace detail {

inline int first_level_1d(std::uint32_t i, int refinements) {
    if (i == 0) return 0;
    int tz = std::countr_zero(i);
    return tz >= refinements ? 0 : refinements - tz;
}

inline int first_level_2d(std::uint32_t i, std::uint32_t j, int refinements) {
    auto tz = [&](std::uint32_t x) { return x == 0 ? refinements : std::min(std::countr_zero(x), refinements); };
    return refinements - std::min(tz(i), tz(j));
}

} // namespace detail

/// Builds the structured hierarchy with the given number of uniform
/// refinements. 1D vertex i sits at i*2^-l; 2D vertex (i,j) is stored
/// row-major at index j*(2^l+1)+i.
inline MeshHierarchy build_hierarchy(int dim, int refinements) {
    if (dim != 1 && dim != 2) throw UsageError("dim must be 1 or 2");
    if (refinements < 0) throw UsageError("refinements must be nonnegative");
    const int cap = dim == 1 ? kMaxRefinements1d : kMaxRefinements2d;
    if (refinements > cap)
        throw CapacityError("refinement count " + std::to_string(refinements) + " exceeds cap " +
                            std::to_string(cap) + " in " + std::to_string(dim) + "D");

    MeshHierarchy h;
    h.dim = dim;
    h.refinements = refinements;
    const std::uint32_t n_side = (1u << refinements) + 1u;
    const double spacing = std::ldexp(1.0, -refinements);

    h.level_vertices.assign(static_cast<std::size_t>(refinements) + 1, {});

    if (dim == 1) {
        h.coords.resize(n_side);
        h.vertex_level.resize(n_side);
        h.parents.assign(n_side, {0, 0});
        for (std::uint32_t i = 0; i < n_side; ++i) {
            h.coords[i] = {i * spacing, 0.0};
            const int l = detail::first_level_1d(i, refinements);
            h.vertex_level[i] = static_cast<std::uint8_t>(l);
            h.level_vertices[static_cast<std::size_t>(l)].push_back(i);
            if (l >= 1) {
                const std::uint32_t s = 1u << (refinements - l);
                h.parents[i] = {i - s, i + s};
            }
        }
    } else {
        const std::size_t n = static_cast<std::size_t>(n_side) * n_side;
        h.coords.resize(n);
        h.vertex_level.resize(n);
        h.parents.assign(n, {0, 0});
        for (std::uint32_t j = 0; j < n_side; ++j) {
            for (std::uint32_t i = 0; i < n_side; ++i) {
                const std::uint32_t v = j * n_side + i;
                h.coords[v] = {i * spacing, j * spacing};
                const int l = detail::first_level_2d(i, j, refinements);
                h.vertex_level[v] = static_cast<std::uint8_t>(l);
                h.level_vertices[static_cast<std::size_t>(l)].push_back(v);
                if (l >= 1) {
                    const std::uint32_t s = 1u << (refinements - l);
                    const bool odd_i = ((i / s) & 1u) != 0;
                    const bool odd_j = ((j / s) & 1u) != 0;
                    if (odd_i && odd_j) {
                        // midpoint of a coarse cell diagonal
                        h.parents[v] = {(j - s) * n_side + (i - s), (j + s) * n_side + (i + s)};
                    } else if (odd_i) {
                        h.parents[v] = {j * n_side + (i - s), j * n_side + (i + s)};
                    } else {
                        h.parents[v] = {(j - s) * n_side + i, (j + s) * n_side + i};
                    }
                }
            }
        }
    }

    h.vertices_per_level.resize(static_cast<std::size_t>(refinements) + 1);
    std::size_t cum = 0;
    for (int l = 0; l <= refinements; ++l) {
        cum += h.level_vertices[static_cast<std::size_t>(l)].size();
        h.vertices_per_level[static_cast<std::size_t>(l)] = cum;
    }

    h.child_count.assign(static_cast<std::size_t>(refinements) + 1, {});
    for (int l = 1; l <= refinements; ++l) {
        auto& counts = h.child_count[static_cast<std::size_t>(l)];
        counts.assign(h.vertex_count(), 0);
        for (std::uint32_t v : h.level_vertices[static_cast<std::size_t>(l)]) {
            ++counts[h.parents[v][0]];
            ++counts[h.parents[v][1]];
        }
    }
    return h;
}

/// Nodal interpolant of f(x, y) on the finest grid (y = 0 in 1D).
template <class F>
CoefficientVector sample_function(const MeshHierarchy& h, F&& f) {
    CoefficientVector u;
    u.values.resize(h.vertex_count());
    u.basis = Basis::Nodal;
    for (std::size_t v = 0; v < h.vertex_count(); ++v) u.values[v] = f(h.coords[v][0], h.coords[v][1]);
    return u;
}

/// Level at which vertex i first appears.
inline int level_of(const MeshHierarchy& h, std::size_t i) {
    if (i >= h.vertex_count()) throw UsageError("vertex index out of range");
    return h.vertex_level[i];
}

} // namespace fez

#endif
