#ifndef FEZ_QUANTIZER_HPP
#define FEZ_QUANTIZER_HPP

#include <cmath>
#include <cstdint>
#include <string>

#include "fez/errors.hpp"

namespace fez {

/// Uniform midpoint quantizer for one block of values. Step size is
/// 2^-k (c_max - c_min), so the reconstruction error of any value in range
/// is at most step/2.
struct QuantizerSpec {
    double c_min = 0.0;
    double c_max = 0.0;
    std::uint8_t bits = 1; // k in [1, 32]

    double step() const { return std::ldexp(c_max - c_min, -static_cast<int>(bits)); }

    std::uint64_t cell_count() const { return std::uint64_t{1} << bits; }
};

/// Index of the cell containing c. The top value c_max maps to the last
/// cell; a degenerate constant block (c_min == c_max) maps everything to 0.
inline std::uint32_t quantize(const QuantizerSpec& spec, double c) {
    if (!(c >= spec.c_min && c <= spec.c_max))
        throw RangeError("value " + std::to_string(c) + " outside quantizer range [" +
                         std::to_string(spec.c_min) + ", " + std::to_string(spec.c_max) + "]");
    const std::uint64_t top = spec.cell_count() - 1;
    if (spec.c_min == spec.c_max) return 0;
    if (c == spec.c_max) return static_cast<std::uint32_t>(top);
    const double idx = std::floor((c - spec.c_min) / spec.step());
    if (idx <= 0.0) return 0;
    if (idx >= static_cast<double>(top)) return static_cast<std::uint32_t>(top);
    return static_cast<std::uint32_t>(idx);
}

/// Midpoint reconstruction of cell l.
inline double dequantize(const QuantizerSpec& spec, std::uint32_t l) {
    if (static_cast<std::uint64_t>(l) >= spec.cell_count())
        throw RangeError("quantizer index " + std::to_string(l) + " out of range");
    if (spec.c_min == spec.c_max) return spec.c_min;
    return spec.c_min + spec.step() * (static_cast<double>(l) + 0.5);
}

} // namespace fez

#endif
