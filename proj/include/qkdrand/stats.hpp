#ifndef QKDRAND_STATS_HPP
#define QKDRAND_STATS_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qkdrand/bitseq.hpp"

namespace qkdrand::stats {

/// Complementary error function, |absolute error| <= 1e-12.
double erfc(double x);

/// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0,
/// |absolute error| <= 1e-10. Throws DomainError outside the domain.
double igamc_q(double a, double x);

/// Standard normal CDF, Phi(x) = erfc(-x / sqrt(2)) / 2.
double normal_cdf(double x);

/// Dense binary matrix with row-major bit-packed storage.
class Gf2Matrix {
public:
    Gf2Matrix(std::size_t rows, std::size_t cols);

    /// Fills row-major from seq starting at `offset`: bit offset + r*cols + c
    /// lands at (r, c).
    static Gf2Matrix from_bits(const BitSeq& seq, std::size_t offset,
                               std::size_t rows, std::size_t cols);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t r, std::size_t c) const {
        return (words_[r * words_per_row_ + (c >> 6)] >> (c & 63)) & 1;
    }
    void set(std::size_t r, std::size_t c, bool v) {
        const std::uint64_t mask = 1ULL << (c & 63);
        auto& w = words_[r * words_per_row_ + (c >> 6)];
        if (v) w |= mask; else w &= ~mask;
    }

    std::size_t rank() const;

private:
    std::size_t rows_, cols_, words_per_row_;
    std::vector<std::uint64_t> words_;
};

inline std::size_t gf2_rank(const Gf2Matrix& m) { return m.rank(); }

/// Linear complexity: length of the shortest LFSR generating seq.
/// Berlekamp–Massey over GF(2), bit-packed. All-zero input gives 0.
std::size_t berlekamp_massey(const BitSeq& seq);

} // namespace qkdrand::stats

#endif
