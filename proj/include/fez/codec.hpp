#ifndef FEZ_CODEC_HPP
#define FEZ_CODEC_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fez/container.hpp"
#include "fez/errors.hpp"
#include "fez/mesh.hpp"
#include "fez/norms.hpp"
#include "fez/quantizer.hpp"
#include "fez/range_coder.hpp"
#include "fez/schedule.hpp"
#include "fez/transform.hpp"

namespace fez {

namespace detail {

// Pointwise error budgets are shrunk by this factor so the guaranteed
// bounds hold strictly despite floating-point rounding in the pipeline.
inline constexpr double kGuardBand = 1.0 - 1e-6;

// Adaptive alphabets are capped at 2^12 symbols (plus escape); lower bits
// of wider indices bypass the model as raw bits.
inline constexpr int kMaxModelBits = 12;

inline int adaptive_bits(int k) { return k < kMaxModelBits ? k : kMaxModelBits; }

inline std::uint32_t escape_symbol(int k) { return 1u << adaptive_bits(k); }

struct LevelPlan {
    LevelParams params;
    std::vector<std::uint32_t> symbols;   // quantizer indices, in vertex order
    std::vector<std::uint64_t> raw_bits;  // escaped values, in vertex order
    std::vector<bool> escaped;            // parallel to symbols
};

inline int bits_for_step(double range, double max_step) {
    // smallest k with 2^-k * range <= max_step
    int k = 1;
    while (k <= 32 && std::ldexp(range, -k) > max_step) ++k;
    return k;
}

inline int bits_for_cells(std::uint64_t cells) {
    int k = 1;
    while (k < 64 && (std::uint64_t{1} << k) < cells) ++k;
    return k;
}

/// Deterministic heavy-tail trim: drop up to 0.1% of the values from each
/// end of the range when that saves at least two bits; trimmed-away values
/// are escaped and stored exactly.
inline void choose_range(std::span<const double> values, double max_step, bool integer_mode, double& lo,
                         double& hi, int& k) {
    lo = values[0];
    hi = values[0];
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    auto bits_for = [&](double range) {
        return integer_mode ? bits_for_cells(static_cast<std::uint64_t>(range) + 1)
                            : bits_for_step(range, max_step);
    };
    k = bits_for(hi - lo);

    const std::size_t m = values.size() / 1000;
    if (m == 0 || k <= 2) return;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double lo_t = sorted[m];
    const double hi_t = sorted[sorted.size() - 1 - m];
    if (!(hi_t > lo_t)) return;
    const int k_t = bits_for(hi_t - lo_t);
    if (k - k_t >= 2) {
        lo = lo_t;
        hi = hi_t;
        k = k_t;
    }
}

} // namespace detail

/// Compresses a nodal coefficient vector.
///
/// TransformThenQuantize runs the float transform and quantizes each
/// level's coefficients with a midpoint quantizer whose step meets the
/// schedule's per-level tolerance. QuantizeThenTransform snaps nodal
/// values to a global grid of step 2*epsilon and runs the integer
/// transform, which preserves the pointwise bound |error| <= epsilon
/// exactly through reconstruction.
inline CompressedBlob compress(const MeshHierarchy& h, const CoefficientVector& u, TransformKind kind,
                               PipelineOrder order, const LevelSchedule& sched) {
    if (u.basis != Basis::Nodal) throw UsageError("compress expects a nodal vector");
    if (u.values.size() != h.vertex_count())
        throw UsageError("coefficient vector length does not match hierarchy");
    for (double v : u.values)
        if (!std::isfinite(v)) throw DataError("input contains non-finite values");
    if (sched.delta.size() != static_cast<std::size_t>(h.levels()))
        throw UsageError("schedule level count does not match hierarchy");

    const bool qt = order == PipelineOrder::QuantizeThenTransform;
    if (qt && kind.arithmetic != TransformArithmetic::Integer)
        throw UsageError("quantize-then-transform requires integer arithmetic");
    if (!qt && kind.arithmetic != TransformArithmetic::Float)
        throw UsageError("transform-then-quantize requires float arithmetic");
    if (qt && sched.target != NormKind::Linf)
        throw UsageError("quantize-then-transform supports the Linf target only; "
                         "level-dependent schedules need transform-then-quantize");

    CoefficientVector work;
    work.values = u.values;
    work.basis = Basis::Nodal;

    const double qt_step = 2.0 * sched.epsilon * detail::kGuardBand;
    if (qt) {
        for (auto& v : work.values) {
            const double m = std::floor(v / qt_step + 0.5);
            if (!(std::abs(m) < 4.0e15))
                throw ToleranceError("tolerance too tight: quantized magnitudes overflow the integer grid");
            v = m;
        }
    }
    analyze(h, work, kind);

    // Wavelet updates spread detail errors to parents, so the strict Linf
    // budget needs levels >= 1 tightened by den/(den+num).
    double wavelet_tighten = 1.0;
    if (!qt && sched.target == NormKind::Linf && kind.family == TransformFamily::LiftedWavelet)
        wavelet_tighten = static_cast<double>(kind.lift_den) / (kind.lift_den + kind.lift_num);

    ContainerHeader hdr;
    hdr.dim = static_cast<std::uint8_t>(h.dim);
    hdr.refinements = static_cast<std::uint8_t>(h.refinements);
    hdr.family = kind.family;
    hdr.arithmetic = kind.arithmetic;
    hdr.order = order;
    hdr.target = sched.target;
    hdr.epsilon = sched.epsilon;

    std::vector<detail::LevelPlan> plans(static_cast<std::size_t>(h.levels()));
    std::vector<double> level_values;
    for (int l = 0; l < h.levels(); ++l) {
        auto& plan = plans[static_cast<std::size_t>(l)];
        const auto& vs = h.level_vertices[static_cast<std::size_t>(l)];
        level_values.clear();
        level_values.reserve(vs.size());
        for (std::uint32_t v : vs) level_values.push_back(work.values[v]);

        double lo = level_values[0], hi = level_values[0];
        for (double v : level_values) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (lo == hi) {
            // constant level: reconstructed from the header alone
            plan.params = {lo, hi, 1, 0};
            continue;
        }

        double delta = sched.delta[static_cast<std::size_t>(l)] * detail::kGuardBand;
        if (l >= 1) delta *= wavelet_tighten;
        const double max_step = 2.0 * delta;

        int k = 1;
        detail::choose_range(level_values, max_step, qt, lo, hi, k);
        if (k > 32)
            throw ToleranceError("tolerance too tight: level " + std::to_string(l) +
                                 " needs more than 32 bits per value");

        plan.params.c_min = lo;
        plan.params.c_max = hi;
        plan.params.bits = static_cast<std::uint8_t>(k);
        plan.params.symbol_count = static_cast<std::uint32_t>(vs.size());
        plan.symbols.resize(vs.size());
        plan.escaped.assign(vs.size(), false);

        const QuantizerSpec spec{lo, hi, static_cast<std::uint8_t>(k)};
        for (std::size_t i = 0; i < vs.size(); ++i) {
            const double v = level_values[i];
            if (v < lo || v > hi) {
                plan.escaped[i] = true;
                plan.symbols[i] = detail::escape_symbol(k);
                plan.raw_bits.push_back(qt ? std::bit_cast<std::uint64_t>(
                                                 static_cast<std::int64_t>(v))
                                           : std::bit_cast<std::uint64_t>(v));
            } else if (qt) {
                plan.symbols[i] = static_cast<std::uint32_t>(static_cast<std::int64_t>(v) -
                                                             static_cast<std::int64_t>(lo));
            } else {
                plan.symbols[i] = quantize(spec, v);
            }
        }
    }

    std::vector<std::uint8_t> payload;
    RangeEncoder enc(payload);
    for (const auto& plan : plans) {
        if (plan.params.symbol_count == 0) continue;
        const int k = plan.params.bits;
        const int lo_bits = k - detail::adaptive_bits(k);
        AdaptiveModel model(detail::escape_symbol(k) + 1);
        std::size_t raw_index = 0;
        for (std::size_t i = 0; i < plan.symbols.size(); ++i) {
            if (plan.escaped[i]) {
                model.encode_symbol(enc, detail::escape_symbol(k));
                enc.encode_bits(plan.raw_bits[raw_index++], 64);
            } else {
                model.encode_symbol(enc, plan.symbols[i] >> lo_bits);
                if (lo_bits > 0) enc.encode_bits(plan.symbols[i] & ((1u << lo_bits) - 1u), lo_bits);
            }
        }
    }
    enc.finish();

    for (auto& plan : plans) hdr.levels.push_back(plan.params);
    return detail::assemble_container(hdr, payload);
}

/// Decodes a blob produced by compress. The result is bit-exact for a
/// given blob; error guarantees follow the compressing schedule.
inline CoefficientVector decompress(const CompressedBlob& blob, const MeshHierarchy& h) {
    const auto parsed = detail::parse_container(blob.bytes);
    const auto& hdr = parsed.header;
    if (hdr.dim != h.dim || hdr.refinements != h.refinements)
        throw UsageError("blob was produced for a different hierarchy");
    if (hdr.levels.size() != static_cast<std::size_t>(h.levels()))
        throw FormatError("level count in header does not match hierarchy");

    const bool qt = hdr.order == PipelineOrder::QuantizeThenTransform;
    CoefficientVector out;
    out.values.assign(h.vertex_count(), 0.0);

    RangeDecoder dec(parsed.payload);
    for (int l = 0; l < h.levels(); ++l) {
        const auto& lv = hdr.levels[static_cast<std::size_t>(l)];
        const auto& vs = h.level_vertices[static_cast<std::size_t>(l)];
        if (lv.symbol_count == 0) {
            if (lv.c_min != lv.c_max)
                throw FormatError("level " + std::to_string(l) + " has no symbols but a non-constant range");
            for (std::uint32_t v : vs) out.values[v] = lv.c_min;
            continue;
        }
        if (lv.symbol_count != vs.size())
            throw FormatError("level " + std::to_string(l) + " symbol count does not match hierarchy");

        const int k = lv.bits;
        const int lo_bits = k - detail::adaptive_bits(k);
        AdaptiveModel model(detail::escape_symbol(k) + 1);
        const QuantizerSpec spec{lv.c_min, lv.c_max, lv.bits};
        for (std::uint32_t v : vs) {
            const std::uint32_t hi_sym = model.decode_symbol(dec);
            if (hi_sym == detail::escape_symbol(k)) {
                const std::uint64_t raw = dec.decode_bits(64);
                out.values[v] = qt ? static_cast<double>(std::bit_cast<std::int64_t>(raw))
                                   : std::bit_cast<double>(raw);
            } else {
                std::uint32_t sym = hi_sym;
                if (lo_bits > 0) sym = (sym << lo_bits) | static_cast<std::uint32_t>(dec.decode_bits(lo_bits));
                if (qt) {
                    out.values[v] =
                        static_cast<double>(static_cast<std::int64_t>(lv.c_min) + static_cast<std::int64_t>(sym));
                } else {
                    out.values[v] = dequantize(spec, sym);
                }
            }
        }
    }

    TransformKind kind;
    kind.family = hdr.family;
    kind.arithmetic = hdr.arithmetic;
    out.basis = hdr.family == TransformFamily::HierarchicalBasis ? Basis::HierarchicalBasis
                                                                 : Basis::LiftedWavelet;
    synthesize(h, out, kind);

    if (qt) {
        const double step = 2.0 * hdr.epsilon * detail::kGuardBand;
        for (auto& v : out.values) v *= step;
    }
    return out;
}

struct RdPoint {
    double eps = 0.0;
    double bits_per_value = 0.0;
    double linf = 0.0;
    double l2 = 0.0;
    double hm1 = 0.0;
    double factor = 0.0;
};

/// Rate-distortion sweep: one row per tolerance, measuring the realized
/// errors of the roundtrip and the compression factor against 8-byte
/// doubles (header bytes included).
inline std::vector<RdPoint> rd_sweep(const MeshHierarchy& h, const CoefficientVector& u, TransformKind kind,
                                     PipelineOrder order, NormKind target, std::span<const double> eps_list) {
    if (eps_list.empty()) throw UsageError("tolerance list must not be empty");
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (!(eps_list[i] > 0.0)) throw UsageError("tolerances must be positive");
        if (i > 0 && eps_list[i] < eps_list[i - 1]) throw UsageError("tolerances must be sorted ascending");
    }

    NormOperator norms(h);
    const double n = static_cast<double>(h.vertex_count());
    std::vector<RdPoint> table;
    table.reserve(eps_list.size());
    for (double eps : eps_list) {
        const auto sched = make_schedule(h, target, eps);
        const auto blob = compress(h, u, kind, order, sched);
        const auto rec = decompress(blob, h);
        CoefficientVector err;
        err.values.resize(u.values.size());
        for (std::size_t i = 0; i < u.values.size(); ++i) err.values[i] = u.values[i] - rec.values[i];
        RdPoint p;
        p.eps = eps;
        p.bits_per_value = 8.0 * static_cast<double>(blob.size()) / n;
        p.linf = norms.norm(err, NormKind::Linf);
        p.l2 = norms.norm(err, NormKind::L2);
        p.hm1 = norms.norm(err, NormKind::Hminus1);
        p.factor = 64.0 / p.bits_per_value;
        table.push_back(p);
    }
    return table;
}

} // namespace fez

#endif
