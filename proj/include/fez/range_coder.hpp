#ifndef FEZ_RANGE_CODER_HPP
#define FEZ_RANGE_CODER_HPP

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fez/errors.hpp"

namespace fez {

/// Byte-wise renormalizing range encoder with carry counting. 32-bit range,
/// 64-bit low to catch carries; pending 0xFF runs are held back until the
/// carry is resolved. The first output byte is a carry sentinel that the
/// decoder discards.
class RangeEncoder {
public:
    explicit RangeEncoder(std::vector<std::uint8_t>& out) : out_(out) {}

    /// Narrows the interval to [cum, cum+freq) / total. Requires freq > 0,
    /// cum + freq <= total and total <= 2^16.
    void encode(std::uint32_t cum, std::uint32_t freq, std::uint32_t total) {
        const std::uint32_t r = range_ / total;
        low_ += static_cast<std::uint64_t>(r) * cum;
        range_ = r * freq;
        normalize();
    }

    /// Raw bits through the coder (uniform model), most significant first.
    void encode_bits(std::uint64_t value, int nbits) {
        while (nbits > 0) {
            const int chunk = nbits > 16 ? 16 : nbits;
            nbits -= chunk;
            const auto piece = static_cast<std::uint32_t>((value >> nbits) & ((1u << chunk) - 1u));
            encode(piece, 1, 1u << chunk);
        }
    }

    /// Flushes the interval state; must be called exactly once at the end.
    void finish() {
        const auto lo32 = static_cast<std::uint32_t>(low_);
        const auto hi32 = static_cast<std::uint32_t>(low_ >> 32);
        out_.push_back(static_cast<std::uint8_t>(flux_first_ + hi32));
        while (--flux_len_) out_.push_back(static_cast<std::uint8_t>(0xFFu + hi32));
        out_.push_back(static_cast<std::uint8_t>(lo32 >> 24));
        out_.push_back(static_cast<std::uint8_t>(lo32 >> 16));
        out_.push_back(static_cast<std::uint8_t>(lo32 >> 8));
        out_.push_back(static_cast<std::uint8_t>(lo32));
    }

private:
    void normalize() {
        while (range_ <= 0xFFFFFFu) {
            const auto lo32 = static_cast<std::uint32_t>(low_);
            const auto hi32 = static_cast<std::uint32_t>(low_ >> 32);
            if (lo32 < 0xFF000000u || hi32 != 0) {
                out_.push_back(static_cast<std::uint8_t>(flux_first_ + hi32));
                while (--flux_len_) out_.push_back(static_cast<std::uint8_t>(0xFFu + hi32));
                flux_first_ = static_cast<std::uint8_t>(lo32 >> 24);
            }
            ++flux_len_;
            low_ = static_cast<std::uint32_t>(lo32 << 8);
            range_ <<= 8;
        }
    }

    std::vector<std::uint8_t>& out_;
    std::uint64_t low_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint32_t flux_len_ = 1;
    std::uint8_t flux_first_ = 0;
};

/// Decoder counterpart; tracks code minus low in a 32-bit window.
class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> in) : in_(in) {
        for (int i = 0; i < 5; ++i) cml_ = (cml_ << 8) + next_byte();
    }

    /// Cumulative-frequency target of the next symbol under a model with
    /// the given total. Follow up with consume() for the matching symbol.
    std::uint32_t decode_target(std::uint32_t total) {
        r_ = range_ / total;
        const std::uint32_t t = cml_ / r_;
        return t >= total ? total - 1 : t;
    }

    void consume(std::uint32_t cum, std::uint32_t freq) {
        cml_ -= r_ * cum;
        range_ = r_ * freq;
        while (range_ <= 0xFFFFFFu) {
            cml_ = (cml_ << 8) + next_byte();
            range_ <<= 8;
        }
    }

    std::uint64_t decode_bits(int nbits) {
        std::uint64_t value = 0;
        while (nbits > 0) {
            const int chunk = nbits > 16 ? 16 : nbits;
            nbits -= chunk;
            const std::uint32_t t = decode_target(1u << chunk);
            consume(t, 1);
            value = (value << chunk) | t;
        }
        return value;
    }

    std::size_t consumed_bytes() const { return pos_; }

private:
    std::uint8_t next_byte() {
        if (pos_ >= in_.size())
            throw FormatError("range-coded stream truncated at byte " + std::to_string(pos_));
        return in_[pos_++];
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
    std::uint32_t range_ = 0xFFFFFFFFu;
    std::uint32_t cml_ = 0;
    std::uint32_t r_ = 0;
};

namespace detail {

/// Fenwick tree over symbol counts plus a plain copy for O(1) lookups.
class FenwickCounts {
public:
    FenwickCounts(std::uint32_t n, std::uint32_t init) : counts_(n, init), tree_(n + 1, 0), total_(0) {
        for (std::uint32_t i = 1; i <= n; ++i) {
            tree_[i] += init;
            const std::uint32_t parent = i + (i & (~i + 1));
            if (parent <= n) tree_[parent] += tree_[i];
        }
        total_ = static_cast<std::uint64_t>(n) * init;
    }

    std::uint32_t size() const { return static_cast<std::uint32_t>(counts_.size()); }
    std::uint32_t total() const { return static_cast<std::uint32_t>(total_); }
    std::uint32_t count(std::uint32_t s) const { return counts_[s]; }

    void add(std::uint32_t s, std::uint32_t delta) {
        counts_[s] += delta;
        total_ += delta;
        for (std::uint32_t i = s + 1; i < tree_.size(); i += i & (~i + 1)) tree_[i] += delta;
    }

    std::uint32_t prefix(std::uint32_t s) const { // sum of counts [0, s)
        std::uint32_t acc = 0;
        for (std::uint32_t i = s; i > 0; i -= i & (~i + 1)) acc += tree_[i];
        return acc;
    }

    /// Finds (symbol, prefix) with prefix(symbol) <= target < prefix(symbol+1).
    std::pair<std::uint32_t, std::uint32_t> find(std::uint32_t target) const {
        std::uint32_t idx = 0, acc = 0;
        std::uint32_t mask = std::bit_floor(tree_.size() - 1);
        for (; mask > 0; mask >>= 1) {
            const std::uint32_t probe = idx + mask;
            if (probe < tree_.size() && acc + tree_[probe] <= target) {
                idx = probe;
                acc += tree_[probe];
            }
        }
        return {idx, acc};
    }

    void halve() {
        total_ = 0;
        std::fill(tree_.begin(), tree_.end(), 0);
        const std::uint32_t n = size();
        for (std::uint32_t s = 0; s < n; ++s) {
            counts_[s] = std::max(1u, counts_[s] >> 1);
            total_ += counts_[s];
            tree_[s + 1] += counts_[s];
            const std::uint32_t parent = (s + 1) + ((s + 1) & (~(s + 1) + 1));
            if (parent <= n) tree_[parent] += tree_[s + 1];
        }
    }

private:
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint32_t> tree_;
    std::uint64_t total_;
};

} // namespace detail

/// Adaptive order-0 symbol model. Counts start at 1, observed symbols gain
/// 32, and all counts are halved (keeping them positive) once the total
/// reaches 2^16, which also keeps the coder's total within range.
class AdaptiveModel {
public:
    static constexpr std::uint32_t kIncrement = 32;
    static constexpr std::uint32_t kRescaleThreshold = 1u << 16;

    explicit AdaptiveModel(std::uint32_t alphabet_size) : counts_(alphabet_size, 1) {
        if (alphabet_size == 0 || alphabet_size > kRescaleThreshold / 2)
            throw UsageError("adaptive model alphabet size out of range");
    }

    std::uint32_t alphabet_size() const { return counts_.size(); }

    void encode_symbol(RangeEncoder& enc, std::uint32_t s) {
        if (s >= counts_.size()) throw UsageError("symbol outside model alphabet");
        enc.encode(counts_.prefix(s), counts_.count(s), counts_.total());
        bump(s);
    }

    std::uint32_t decode_symbol(RangeDecoder& dec) {
        const std::uint32_t target = dec.decode_target(counts_.total());
        const auto [s, cum] = counts_.find(target);
        dec.consume(cum, counts_.count(s));
        bump(s);
        return s;
    }

private:
    void bump(std::uint32_t s) {
        counts_.add(s, kIncrement);
        if (counts_.total() >= kRescaleThreshold) counts_.halve();
    }

    detail::FenwickCounts counts_;
};

/// Losslessly encodes a symbol sequence under a fresh coder.
inline std::vector<std::uint8_t> encode_symbols(AdaptiveModel& model, std::span<const std::uint32_t> symbols) {
    std::vector<std::uint8_t> out;
    RangeEncoder enc(out);
    for (std::uint32_t s : symbols) model.encode_symbol(enc, s);
    enc.finish();
    return out;
}

inline std::vector<std::uint32_t> decode_symbols(AdaptiveModel& model, std::span<const std::uint8_t> bytes,
                                                 std::size_t count) {
    std::vector<std::uint32_t> out(count);
    RangeDecoder dec(bytes);
    for (std::size_t i = 0; i < count; ++i) out[i] = model.decode_symbol(dec);
    return out;
}

} // namespace fez

#endif
