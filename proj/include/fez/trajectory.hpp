#ifndef FEZ_TRAJECTORY_HPP
#define FEZ_TRAJECTORY_HPP

#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "fez/bytes.hpp"
#include "fez/codec.hpp"
#include "fez/errors.hpp"
#include "fez/mesh.hpp"

namespace fez {

enum class Predictor : std::uint8_t {
    Delta = 0,
    None = 1,
    Linear = 2, // reserved; rejected at runtime
};

/// Pipeline used for the per-step blobs. The integer quantize-then-
/// transform path keeps every step's pointwise error below its tolerance.
struct TrajectoryOptions {
    TransformKind kind{TransformFamily::HierarchicalBasis, TransformArithmetic::Integer};
    PipelineOrder order = PipelineOrder::QuantizeThenTransform;
};

/// Time sequence of coefficient vectors stored for backward access:
/// blob 0 holds the final state u^T, blob i >= 1 the backward difference
/// w^(T-i) = u^(T-i) - reconstruction(u^(T-i+1)). Differencing against the
/// reconstruction (closed loop) keeps the per-step error independent of
/// the trajectory length.
struct TrajectoryStore {
    std::uint8_t dim = 1;
    std::uint8_t refinements = 0;
    Predictor predictor = Predictor::Delta;
    std::vector<CompressedBlob> blobs;

    std::size_t step_count() const { return blobs.size(); }

    std::size_t total_bytes() const {
        std::size_t s = 0;
        for (const auto& b : blobs) s += b.size();
        return s;
    }
};

inline TrajectoryStore store_trajectory(const MeshHierarchy& h, std::span<const CoefficientVector> states,
                                        std::span<const double> eps_per_step, Predictor predictor,
                                        const TrajectoryOptions& opts = {}) {
    if (states.empty()) throw UsageError("trajectory must contain at least one state");
    if (eps_per_step.size() != states.size())
        throw UsageError("one tolerance per step required");
    if (predictor == Predictor::Linear)
        throw UsageError("linear prediction is not available; use Delta or None");
    for (const auto& s : states)
        if (s.values.size() != h.vertex_count())
            throw UsageError("trajectory states must share the hierarchy");

    TrajectoryStore store;
    store.dim = static_cast<std::uint8_t>(h.dim);
    store.refinements = static_cast<std::uint8_t>(h.refinements);
    store.predictor = predictor;
    store.blobs.reserve(states.size());

    const std::size_t last = states.size() - 1;

    if (predictor == Predictor::None) {
        for (std::size_t i = 0; i < states.size(); ++i) {
            const std::size_t t = last - i;
            const auto sched = make_schedule(h, NormKind::Linf, eps_per_step[t]);
            store.blobs.push_back(compress(h, states[t], opts.kind, opts.order, sched));
        }
        return store;
    }

    const auto final_sched = make_schedule(h, NormKind::Linf, eps_per_step[last]);
    store.blobs.push_back(compress(h, states[last], opts.kind, opts.order, final_sched));
    CoefficientVector recon = decompress(store.blobs.back(), h);

    CoefficientVector diff;
    diff.values.resize(h.vertex_count());
    for (std::size_t i = 1; i < states.size(); ++i) {
        const std::size_t t = last - i;
        for (std::size_t v = 0; v < diff.values.size(); ++v)
            diff.values[v] = states[t].values[v] - recon.values[v];
        diff.basis = Basis::Nodal;
        const auto sched = make_schedule(h, NormKind::Linf, eps_per_step[t]);
        store.blobs.push_back(compress(h, diff, opts.kind, opts.order, sched));
        const auto diff_rec = decompress(store.blobs.back(), h);
        for (std::size_t v = 0; v < recon.values.size(); ++v) recon.values[v] += diff_rec.values[v];
    }
    return store;
}

inline TrajectoryStore store_trajectory(const MeshHierarchy& h, std::span<const CoefficientVector> states,
                                        double eps, Predictor predictor, const TrajectoryOptions& opts = {}) {
    std::vector<double> eps_list(states.size(), eps);
    return store_trajectory(h, states, eps_list, predictor, opts);
}

/// Sequential reader yielding states t = T, T-1, ..., 0. Holds one decoded
/// state; each advance decodes one more blob.
class BackwardReader {
public:
    BackwardReader(const MeshHierarchy& h, const TrajectoryStore& store) : h_(&h), store_(&store) {
        if (store.dim != h.dim || store.refinements != h.refinements)
            throw UsageError("trajectory store was produced for a different hierarchy");
    }

    bool next() {
        if (index_ >= store_->blobs.size()) return false;
        CoefficientVector decoded;
        try {
            decoded = decompress(store_->blobs[index_], *h_);
        } catch (const FormatError& e) {
            throw FormatError("trajectory step " + std::to_string(step_for(index_)) + ": " + e.what());
        }
        if (index_ == 0 || store_->predictor == Predictor::None) {
            state_ = std::move(decoded);
        } else {
            for (std::size_t v = 0; v < state_.values.size(); ++v) state_.values[v] += decoded.values[v];
        }
        step_ = step_for(index_);
        ++index_;
        return true;
    }

    int step() const { return step_; }
    const CoefficientVector& state() const { return state_; }

private:
    int step_for(std::size_t index) const {
        return static_cast<int>(store_->blobs.size() - 1 - index);
    }

    const MeshHierarchy* h_;
    const TrajectoryStore* store_;
    std::size_t index_ = 0;
    int step_ = -1;
    CoefficientVector state_;
};

namespace detail {

inline constexpr char kTrajectoryMagic[4] = {'F', 'E', 'Z', 'T'};

} // namespace detail

/// Serializes a store: "FEZT" | version u8 | step count u32 |
/// per-step offsets u64[] | concatenated blobs. Little-endian.
inline std::vector<std::uint8_t> serialize_trajectory(const TrajectoryStore& store) {
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    for (char c : detail::kTrajectoryMagic) w.u8(static_cast<std::uint8_t>(c));
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(store.blobs.size()));
    std::uint64_t offset = 4 + 1 + 4 + 8 * static_cast<std::uint64_t>(store.blobs.size());
    for (const auto& b : store.blobs) {
        w.u64(offset);
        offset += b.size();
    }
    for (const auto& b : store.blobs) w.bytes(b.bytes);
    return out;
}

/// Parses a serialized trajectory. The layout does not record the
/// predictor, so the caller supplies it (it tells the reader whether blobs
/// hold states or differences).
inline TrajectoryStore parse_trajectory(std::span<const std::uint8_t> bytes, Predictor predictor) {
    if (predictor == Predictor::Linear)
        throw UsageError("linear prediction is not available; use Delta or None");
    ByteReader r(bytes);
    for (char c : detail::kTrajectoryMagic) {
        if (r.u8() != static_cast<std::uint8_t>(c))
            throw FormatError("bad trajectory magic at byte offset " + std::to_string(r.offset() - 1));
    }
    const std::uint8_t version = r.u8();
    if (version != 1) throw FormatError("unsupported trajectory version " + std::to_string(version));
    const std::uint32_t count = r.u32();
    if (count == 0) throw FormatError("trajectory holds no steps");
    std::vector<std::uint64_t> offsets(count);
    for (auto& o : offsets) o = r.u64();
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t end = i + 1 < count ? offsets[i + 1] : bytes.size();
        if (offsets[i] > end || end > bytes.size())
            throw FormatError("trajectory step " + std::to_string(count - 1 - i) + ": bad blob offsets");
    }

    TrajectoryStore store;
    store.predictor = predictor;
    for (std::size_t i = 0; i < count; ++i) {
        const std::uint64_t end = i + 1 < count ? offsets[i + 1] : bytes.size();
        CompressedBlob blob;
        blob.bytes.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offsets[i]),
                          bytes.begin() + static_cast<std::ptrdiff_t>(end));
        ContainerHeader hdr;
        try {
            hdr = peek_header(blob);
        } catch (const FormatError& e) {
            throw FormatError("trajectory step " + std::to_string(count - 1 - i) + ": " + e.what());
        }
        if (i == 0) {
            store.dim = hdr.dim;
            store.refinements = hdr.refinements;
        } else if (hdr.dim != store.dim || hdr.refinements != store.refinements) {
            throw FormatError("trajectory step " + std::to_string(count - 1 - i) +
                              ": hierarchy descriptor differs from first step");
        }
        store.blobs.push_back(std::move(blob));
    }
    return store;
}

inline void write_trajectory_file(const TrajectoryStore& store, const std::string& path) {
    const auto bytes = serialize_trajectory(store);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path);
}

inline TrajectoryStore read_trajectory_file(const std::string& path, Predictor predictor) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw IoError("cannot open " + path);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0);
    std::vector<std::uint8_t> bytes(size);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
    if (!in) throw IoError("failed reading " + path);
    return parse_trajectory(bytes, predictor);
}

} // namespace fez

#endif
