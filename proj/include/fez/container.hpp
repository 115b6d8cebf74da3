#ifndef FEZ_CONTAINER_HPP
#define FEZ_CONTAINER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fez/bytes.hpp"
#include "fez/errors.hpp"
#include "fez/mesh.hpp"
#include "fez/norms.hpp"
#include "fez/transform.hpp"

namespace fez {

enum class PipelineOrder : std::uint8_t {
    TransformThenQuantize = 0,
    QuantizeThenTransform = 1,
};

/// Self-describing compressed container. Layout (little-endian):
///   "FEZC" | version u8 | dim u8 | refinements u8 | family u8 |
///   arithmetic u8 | order u8 | target u8 | epsilon f64 | level count u8 |
///   per level { c_min f64 | c_max f64 | k u8 | symbol count u32 } |
///   payload length u64 | payload | crc32(payload) u32
struct CompressedBlob {
    std::vector<std::uint8_t> bytes;

    std::size_t size() const { return bytes.size(); }
};

struct LevelParams {
    double c_min = 0.0;
    double c_max = 0.0;
    std::uint8_t bits = 1;
    std::uint32_t symbol_count = 0;
};

struct ContainerHeader {
    std::uint8_t version = 1;
    std::uint8_t dim = 1;
    std::uint8_t refinements = 0;
    TransformFamily family = TransformFamily::HierarchicalBasis;
    TransformArithmetic arithmetic = TransformArithmetic::Float;
    PipelineOrder order = PipelineOrder::TransformThenQuantize;
    NormKind target = NormKind::Linf;
    double epsilon = 0.0;
    std::vector<LevelParams> levels;
};

namespace detail {

inline constexpr char kContainerMagic[4] = {'F', 'E', 'Z', 'C'};

inline CompressedBlob assemble_container(const ContainerHeader& hdr, std::span<const std::uint8_t> payload) {
    CompressedBlob blob;
    ByteWriter w(blob.bytes);
    for (char c : kContainerMagic) w.u8(static_cast<std::uint8_t>(c));
    w.u8(hdr.version);
    w.u8(hdr.dim);
    w.u8(hdr.refinements);
    w.u8(static_cast<std::uint8_t>(hdr.family));
    w.u8(static_cast<std::uint8_t>(hdr.arithmetic));
    w.u8(static_cast<std::uint8_t>(hdr.order));
    w.u8(static_cast<std::uint8_t>(hdr.target));
    w.f64(hdr.epsilon);
    w.u8(static_cast<std::uint8_t>(hdr.levels.size()));
    for (const auto& lv : hdr.levels) {
        w.f64(lv.c_min);
        w.f64(lv.c_max);
        w.u8(lv.bits);
        w.u32(lv.symbol_count);
    }
    w.u64(payload.size());
    w.bytes(payload);
    w.u32(crc32(payload));
    return blob;
}

struct ParsedContainer {
    ContainerHeader header;
    std::span<const std::uint8_t> payload;
};

inline ParsedContainer parse_container(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    for (char c : kContainerMagic) {
        if (r.u8() != static_cast<std::uint8_t>(c))
            throw FormatError("bad container magic at byte offset " + std::to_string(r.offset() - 1));
    }
    ParsedContainer parsed;
    auto& hdr = parsed.header;
    hdr.version = r.u8();
    if (hdr.version != 1) throw FormatError("unsupported container version " + std::to_string(hdr.version));
    hdr.dim = r.u8();
    hdr.refinements = r.u8();
    const std::uint8_t family = r.u8();
    const std::uint8_t arithmetic = r.u8();
    const std::uint8_t order = r.u8();
    const std::uint8_t target = r.u8();
    if (family > 1 || arithmetic > 1 || order > 1 || target > 2)
        throw FormatError("invalid mode byte in container header");
    hdr.family = static_cast<TransformFamily>(family);
    hdr.arithmetic = static_cast<TransformArithmetic>(arithmetic);
    hdr.order = static_cast<PipelineOrder>(order);
    hdr.target = static_cast<NormKind>(target);
    hdr.epsilon = r.f64();
    const std::uint8_t level_count = r.u8();
    hdr.levels.resize(level_count);
    for (auto& lv : hdr.levels) {
        lv.c_min = r.f64();
        lv.c_max = r.f64();
        lv.bits = r.u8();
        lv.symbol_count = r.u32();
        if (lv.bits < 1 || lv.bits > 32)
            throw FormatError("level bit width out of range at byte offset " + std::to_string(r.offset()));
    }
    const std::uint64_t payload_len = r.u64();
    const std::size_t payload_offset = r.offset();
    if (payload_len > r.remaining())
        throw FormatError("payload length exceeds container size at byte offset " +
                          std::to_string(payload_offset));
    parsed.payload = r.bytes(static_cast<std::size_t>(payload_len));
    const std::uint32_t stored_crc = r.u32();
    if (crc32(parsed.payload) != stored_crc)
        throw FormatError("payload checksum mismatch for payload at byte offset " +
                          std::to_string(payload_offset));
    return parsed;
}

} // namespace detail

/// Parses and validates the header of a blob without decoding the payload.
inline ContainerHeader peek_header(const CompressedBlob& blob) {
    return detail::parse_container(blob.bytes).header;
}

} // namespace fez

#endif
