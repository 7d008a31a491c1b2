#include "qkdrand/bitseq.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>

namespace qkdrand {

void BitSeq::mask_tail() {
    if (len_ & 63) words_.back() &= (1ULL << (len_ & 63)) - 1;
}

BitSeq BitSeq::from_ascii(std::string_view text) {
    BitSeq seq;
    seq.words_.reserve(text.size() / 64 + 1);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '0' || c == '1') {
            seq.append(c == '1');
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            throw InvalidCharacter(i);
        }
    }
    return seq;
}

BitSeq BitSeq::from_bytes_msb(std::span<const std::uint8_t> bytes, std::size_t nbits) {
    if (bytes.size() * 8 < nbits)
        throw OutOfRange("byte image shorter than requested bit count");
    BitSeq seq(nbits);
    for (std::size_t i = 0; i < nbits; ++i) {
        const bool bit = (bytes[i >> 3] >> (7 - (i & 7))) & 1;
        if (bit) seq.words_[i >> 6] |= 1ULL << (i & 63);
    }
    return seq;
}

std::size_t BitSeq::ones_count() const {
    std::size_t total = 0;
    for (std::uint64_t w : words_) total += std::popcount(w);
    return total;
}

std::size_t BitSeq::ones_in_range(std::size_t start, std::size_t len) const {
    if (start + len > len_) throw OutOfRange("ones_in_range past end");
    if (len == 0) return 0;
    const std::size_t first = start >> 6, last = (start + len - 1) >> 6;
    std::uint64_t head_mask = ~0ULL << (start & 63);
    std::uint64_t tail_mask = ((start + len) & 63)
        ? (1ULL << ((start + len) & 63)) - 1 : ~0ULL;
    if (first == last) return std::popcount(words_[first] & head_mask & tail_mask);
    std::size_t total = std::popcount(words_[first] & head_mask);
    for (std::size_t w = first + 1; w < last; ++w) total += std::popcount(words_[w]);
    total += std::popcount(words_[last] & tail_mask);
    return total;
}

BitSeq BitSeq::slice(std::size_t start, std::size_t len) const {
    if (start + len > len_ || start > len_)
        throw OutOfRange("slice out of range");
    BitSeq out(len);
    const std::size_t shift = start & 63;
    const std::size_t base = start >> 6;
    const std::size_t nwords = out.words_.size();
    for (std::size_t w = 0; w < nwords; ++w) {
        std::uint64_t v = words_[base + w] >> shift;
        if (shift && base + w + 1 < words_.size())
            v |= words_[base + w + 1] << (64 - shift);
        out.words_[w] = v;
    }
    out.mask_tail();
    return out;
}

std::uint64_t BitSeq::word_msb(std::size_t start, unsigned k) const {
    if (k > 64 || start + k > len_) throw OutOfRange("word_msb out of range");
    std::uint64_t v = 0;
    for (unsigned j = 0; j < k; ++j)
        v = (v << 1) | static_cast<std::uint64_t>(get(start + j));
    return v;
}

BitSeq BitSeq::reversed() const {
    BitSeq out(len_);
    for (std::size_t i = 0; i < len_; ++i)
        if (get(i)) out.words_[(len_ - 1 - i) >> 6] |= 1ULL << ((len_ - 1 - i) & 63);
    return out;
}

BitSeq BitSeq::concat(const BitSeq& other) const {
    BitSeq out = *this;
    for (std::size_t i = 0; i < other.len_; ++i) out.append(other.get(i));
    return out;
}

std::string BitSeq::to_ascii() const {
    std::string s(len_, '0');
    for (std::size_t i = 0; i < len_; ++i)
        if (get(i)) s[i] = '1';
    return s;
}

std::vector<std::uint8_t> BitSeq::to_bytes_msb() const {
    std::vector<std::uint8_t> bytes((len_ + 7) / 8, 0);
    for (std::size_t i = 0; i < len_; ++i)
        if (get(i)) bytes[i >> 3] |= static_cast<std::uint8_t>(1u << (7 - (i & 7)));
    return bytes;
}

BitSeq BitSeq::load(const std::filesystem::path& path, BitFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    if (format == BitFormat::Ascii01) {
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        if (in.bad()) throw IoError("read failed on " + path.string());
        return from_ascii(text);
    }
    std::uint8_t header[8];
    in.read(reinterpret_cast<char*>(header), 8);
    if (in.gcount() != 8) throw TruncatedFile("missing raw_packed header");
    std::uint64_t nbits = 0;
    for (int i = 7; i >= 0; --i) nbits = (nbits << 8) | header[i];
    const std::size_t nbytes = (nbits + 7) / 8;
    std::vector<std::uint8_t> bytes(nbytes);
    in.read(reinterpret_cast<char*>(bytes.data()),
            static_cast<std::streamsize>(nbytes));
    if (static_cast<std::size_t>(in.gcount()) != nbytes)
        throw TruncatedFile("raw_packed data shorter than header length");
    return from_bytes_msb(bytes, nbits);
}

void BitSeq::save(const std::filesystem::path& path, BitFormat format) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    if (format == BitFormat::Ascii01) {
        const std::string text = to_ascii();
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.put('\n');
    } else {
        std::uint8_t header[8];
        std::uint64_t n = len_;
        for (int i = 0; i < 8; ++i) { header[i] = n & 0xff; n >>= 8; }
        out.write(reinterpret_cast<const char*>(header), 8);
        const auto bytes = to_bytes_msb();
        out.write(reinterpret_cast<const char*>(bytes.data()),
                  static_cast<std::streamsize>(bytes.size()));
    }
    out.flush();
    if (!out) throw IoError("write failed on " + path.string());
}

} // namespace qkdrand
