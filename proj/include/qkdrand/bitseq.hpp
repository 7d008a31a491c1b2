#ifndef QKDRAND_BITSEQ_HPP
#define QKDRAND_BITSEQ_HPP

#include <cstdint>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qkdrand/errors.hpp"

namespace qkdrand {

enum class BitFormat { Ascii01, RawPacked };

/// Packed, length-tagged binary sequence. Immutable by convention once a
/// pipeline hands it out; mutation is limited to construction helpers.
///
/// Serialized byte image is MSB-first within each byte (bit 0 of the
/// sequence is the most significant bit of byte 0); trailing pad bits of
/// the final byte are zero. The raw_packed file format is an 8-byte
/// little-endian bit count followed by that byte image.
class BitSeq {
public:
    BitSeq() = default;

    /// n zero bits.
    explicit BitSeq(std::size_t n) : len_(n), words_((n + 63) / 64, 0) {}

    /// Parses '0'/'1' text; whitespace is ignored. Throws InvalidCharacter
    /// with the byte offset of the first offending character.
    static BitSeq from_ascii(std::string_view text);

    /// Unpacks nbits from an MSB-first byte image.
    static BitSeq from_bytes_msb(std::span<const std::uint8_t> bytes, std::size_t nbits);

    std::size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    bool get(std::size_t i) const {
        return (words_[i >> 6] >> (i & 63)) & 1;
    }
    bool operator[](std::size_t i) const { return get(i); }

    void set(std::size_t i, bool v) {
        const std::uint64_t mask = 1ULL << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    void append(bool v) {
        if ((len_ & 63) == 0) words_.push_back(0);
        if (v) words_[len_ >> 6] |= 1ULL << (len_ & 63);
        ++len_;
    }

    std::size_t ones_count() const;

    /// Number of one bits in [start, start + len).
    std::size_t ones_in_range(std::size_t start, std::size_t len) const;

    /// Bits [start, start + len). Throws OutOfRange.
    BitSeq slice(std::size_t start, std::size_t len) const;

    /// k <= 64 bits starting at `start`, with bit `start` as the most
    /// significant bit of the result (natural reading order).
    std::uint64_t word_msb(std::size_t start, unsigned k) const;

    /// Sequence with bit order reversed.
    BitSeq reversed() const;

    BitSeq concat(const BitSeq& other) const;

    std::string to_ascii() const;
    std::vector<std::uint8_t> to_bytes_msb() const;

    /// Internal packed words, LSB-first bit order, tail bits zero.
    std::span<const std::uint64_t> words() const { return words_; }

    static BitSeq load(const std::filesystem::path& path, BitFormat format);
    void save(const std::filesystem::path& path, BitFormat format) const;

    friend bool operator==(const BitSeq& a, const BitSeq& b) {
        return a.len_ == b.len_ && a.words_ == b.words_;
    }

private:
    std::size_t len_ = 0;
    std::vector<std::uint64_t> words_;

    void mask_tail();
};

} // namespace qkdrand

#endif
