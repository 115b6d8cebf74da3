#ifndef FEZ_SCHEDULE_HPP
#define FEZ_SCHEDULE_HPP

#include <cmath>
#include <vector>

#include "fez/errors.hpp"
#include "fez/mesh.hpp"
#include "fez/norms.hpp"

namespace fez {

/// Per-level pointwise quantization tolerances for one target norm.
struct LevelSchedule {
    NormKind target = NormKind::Linf;
    double epsilon = 0.0;
    std::vector<double> delta; // one entry per level
};

struct ScheduleOptions {
    /// For the Linf target: 0 selects the uniform budget split; a ratio
    /// r in (0, 1) makes level l's share proportional to r^l (coarse levels
    /// get the larger shares). The shares always sum to epsilon.
    double linf_geometric_ratio = 0.0;
};

/// Builds the tolerance schedule for a target norm.
///
/// Linf: the pointwise budget is split across levels (uniformly by
/// default), so the reconstruction error bound accumulated through
/// synthesis stays below epsilon.
///
/// L2 / H^-1: level tolerances follow delta_l = beta * 2^(-s*l) with s = 0
/// for L2 and s = -1 for H^-1, which balances the per-level contributions
/// delta_l * 2^(-l(d/2-s)) * sqrt(N_l) to the target norm. beta is
/// calibrated in one shot so those predicted contributions sum to epsilon.
inline LevelSchedule make_schedule(const MeshHierarchy& h, NormKind target, double epsilon,
                                   const ScheduleOptions& opts = {}) {
    if (!(epsilon > 0.0)) throw UsageError("tolerance must be positive");
    const int levels = h.levels();
    LevelSchedule sched;
    sched.target = target;
    sched.epsilon = epsilon;
    sched.delta.resize(static_cast<std::size_t>(levels));

    if (target == NormKind::Linf) {
        const double r = opts.linf_geometric_ratio;
        if (r == 0.0) {
            for (auto& d : sched.delta) d = epsilon / levels;
        } else {
            if (!(r > 0.0 && r < 1.0)) throw UsageError("geometric split ratio must lie in (0, 1)");
            double sum = 0.0;
            for (int l = 0; l < levels; ++l) sum += std::pow(r, l);
            for (int l = 0; l < levels; ++l)
                sched.delta[static_cast<std::size_t>(l)] = epsilon * std::pow(r, l) / sum;
        }
        return sched;
    }

    const double s = target == NormKind::L2 ? 0.0 : -1.0;
    const double half_d = 0.5 * h.dim;
    double contribution_sum = 0.0;
    for (int l = 0; l < levels; ++l) {
        const double n_l = static_cast<double>(h.vertices_on_level(l));
        contribution_sum += std::exp2(-l * half_d) * std::sqrt(n_l);
    }
    const double beta = epsilon / contribution_sum;
    for (int l = 0; l < levels; ++l) sched.delta[static_cast<std::size_t>(l)] = beta * std::exp2(-s * l);
    return sched;
}

} // namespace fez

#endif
