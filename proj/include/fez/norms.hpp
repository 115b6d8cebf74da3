#ifndef FEZ_NORMS_HPP
#define FEZ_NORMS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fez/errors.hpp"
#include "fez/mesh.hpp"

namespace fez {

enum class NormKind : std::uint8_t {
    Linf = 0,
    L2 = 1,
    Hminus1 = 2,
};

/// Symmetric sparse matrix in CSR layout.
struct SparseMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;
    std::vector<std::uint32_t> col;
    std::vector<double> val;

    void apply(std::span<const double> x, std::span<double> y) const {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += val[k] * x[col[k]];
            y[i] = s;
        }
    }

    std::vector<double> apply(std::span<const double> x) const {
        std::vector<double> y(n);
        apply(x, y);
        return y;
    }

    double diagonal(std::size_t i) const {
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col[k] == i) return val[k];
        return 0.0;
    }
};

namespace detail {

class TripletAccumulator {
public:
    explicit TripletAccumulator(std::size_t n) : rows_(n) {}

    void add(std::uint32_t i, std::uint32_t j, double v) { rows_[i].emplace_back(j, v); }

    SparseMatrix compile() {
        SparseMatrix m;
        m.n = rows_.size();
        m.row_ptr.resize(m.n + 1, 0);
        for (std::size_t i = 0; i < m.n; ++i) {
            auto& r = rows_[i];
            std::sort(r.begin(), r.end(), [](auto& a, auto& b) { return a.first < b.first; });
            std::size_t unique = 0;
            for (std::size_t k = 0; k < r.size();) {
                std::size_t k2 = k + 1;
                while (k2 < r.size() && r[k2].first == r[k].first) {
                    r[k].second += r[k2].second;
                    ++k2;
                }
                r[unique++] = r[k];
                k = k2;
            }
            r.resize(unique);
            m.row_ptr[i + 1] = m.row_ptr[i] + unique;
        }
        m.col.reserve(m.row_ptr[m.n]);
        m.val.reserve(m.row_ptr[m.n]);
        for (auto& r : rows_) {
            for (auto& [j, v] : r) {
                m.col.push_back(j);
                m.val.push_back(v);
            }
        }
        return m;
    }

private:
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows_;
};

} // namespace detail

/// Assembles P1 mass and stiffness matrices on the finest level of a
/// hierarchy and evaluates discrete norms. K = A + M backs the H^-1 norm;
/// the full H^1 inner product keeps constants out of the kernel.
class NormOperator {
public:
    explicit NormOperator(const MeshHierarchy& h) { assemble(h); }

    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness() const { return stiffness_; }

    double norm(const CoefficientVector& e, NormKind kind) const {
        if (e.basis != Basis::Nodal) throw UsageError("norms are defined on nodal coefficient vectors");
        if (e.values.size() != mass_.n) throw UsageError("coefficient vector length does not match mesh");
        switch (kind) {
        case NormKind::Linf: {
            double m = 0.0;
            for (double v : e.values) m = std::max(m, std::abs(v));
            return m;
        }
        case NormKind::L2: {
            auto me = mass_.apply(e.values);
            double s = 0.0;
            for (std::size_t i = 0; i < me.size(); ++i) s += me[i] * e.values[i];
            return std::sqrt(std::max(0.0, s));
        }
        case NormKind::Hminus1: {
            auto f = mass_.apply(e.values);
            auto z = solve_k(f);
            double s = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * z[i];
            return std::sqrt(std::max(0.0, s));
        }
        }
        throw UsageError("unknown norm kind");
    }

    /// Solves (A + M) z = f by Jacobi-preconditioned conjugate gradients to
    /// relative residual 1e-10. Deterministic iteration order.
    std::vector<double> solve_k(std::span<const double> f) const {
        const std::size_t n = k_.n;
        std::vector<double> x(n, 0.0), r(f.begin(), f.end()), z(n), p(n), ap(n);
        double bnorm = 0.0;
        for (double v : r) bnorm += v * v;
        bnorm = std::sqrt(bnorm);
        if (bnorm == 0.0) return x;

        auto precondition = [&](const std::vector<double>& in, std::vector<double>& out) {
            for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * jacobi_[i];
        };

        precondition(r, z);
        p = z;
        double rz = 0.0;
        for (std::size_t i = 0; i < n; ++i) rz += r[i] * z[i];

        const std::size_t max_iters = 20 * n + 100;
        for (std::size_t it = 0; it < max_iters; ++it) {
            k_.apply(p, ap);
            double pap = 0.0;
            for (std::size_t i = 0; i < n; ++i) pap += p[i] * ap[i];
            if (pap <= 0.0) throw NumericError("H^-1 solve: operator lost positive definiteness");
            const double alpha = rz / pap;
            double rnorm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
                rnorm += r[i] * r[i];
            }
            if (std::sqrt(rnorm) <= 1e-10 * bnorm) return x;
            precondition(r, z);
            double rz_new = 0.0;
            for (std::size_t i = 0; i < n; ++i) rz_new += r[i] * z[i];
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        throw NumericError("H^-1 solve: conjugate gradients did not converge");
    }

private:
    void assemble(const MeshHierarchy& h) {
        const std::size_t n = h.vertex_count();
        detail::TripletAccumulator mass_acc(n), stiff_acc(n);

        if (h.dim == 1) {
            const std::uint32_t cells = 1u << h.refinements;
            const double len = std::ldexp(1.0, -h.refinements);
            for (std::uint32_t c = 0; c < cells; ++c) {
                const std::uint32_t v[2] = {c, c + 1};
                const double m_diag = len / 3.0, m_off = len / 6.0;
                const double a = 1.0 / len;
                for (int i = 0; i < 2; ++i) {
                    for (int j = 0; j < 2; ++j) {
                        mass_acc.add(v[i], v[j], i == j ? m_diag : m_off);
                        stiff_acc.add(v[i], v[j], (i == j ? 1.0 : -1.0) * a);
                    }
                }
            }
        } else {
            const std::uint32_t side = 1u << h.refinements;
            const std::uint32_t n_side = side + 1;
            auto vid = [&](std::uint32_t i, std::uint32_t j) { return j * n_side + i; };
            auto add_triangle = [&](std::array<std::uint32_t, 3> v) {
                const auto& a = h.coords[v[0]];
                const auto& b = h.coords[v[1]];
                const auto& c = h.coords[v[2]];
                const double det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
                const double area = 0.5 * std::abs(det);
                // grad of barycentric coordinates
                const double gx[3] = {(b[1] - c[1]) / det, (c[1] - a[1]) / det, (a[1] - b[1]) / det};
                const double gy[3] = {(c[0] - b[0]) / det, (a[0] - c[0]) / det, (b[0] - a[0]) / det};
                for (int i = 0; i < 3; ++i) {
                    for (int j = 0; j < 3; ++j) {
                        mass_acc.add(v[i], v[j], area / 12.0 * (i == j ? 2.0 : 1.0));
                        stiff_acc.add(v[i], v[j], area * (gx[i] * gx[j] + gy[i] * gy[j]));
                    }
                }
            };
            for (std::uint32_t j = 0; j < side; ++j) {
                for (std::uint32_t i = 0; i < side; ++i) {
                    // split along the bottom-left -> top-right diagonal
                    add_triangle({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
                    add_triangle({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
                }
            }
        }

        mass_ = mass_acc.compile();
        stiffness_ = stiff_acc.compile();

        detail::TripletAccumulator k_acc(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = mass_.row_ptr[i]; k < mass_.row_ptr[i + 1]; ++k)
                k_acc.add(static_cast<std::uint32_t>(i), mass_.col[k], mass_.val[k]);
            for (std::size_t k = stiffness_.row_ptr[i]; k < stiffness_.row_ptr[i + 1]; ++k)
                k_acc.add(static_cast<std::uint32_t>(i), stiffness_.col[k], stiffness_.val[k]);
        }
        k_ = k_acc.compile();

        jacobi_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = k_.diagonal(i);
            jacobi_[i] = d > 0.0 ? 1.0 / d : 1.0;
        }
    }

    SparseMatrix mass_, stiffness_, k_;
    std::vector<double> jacobi_;
};

} // namespace fez

#endif
