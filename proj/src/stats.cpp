#include "qkdrand/stats.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "qkdrand/errors.hpp"

namespace qkdrand::stats {

namespace {

constexpr int kMaxIter = 2000;
constexpr double kEps = 1e-16;
constexpr double kFpMin = std::numeric_limits<double>::min() / kEps;

// Lower regularized gamma P(a, x) by series, valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < kMaxIter; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a, x) by modified Lentz continued fraction,
// valid for x >= a + 1.
double gamma_q_cf(double a, double x) {
    double b = x + 1.0 - a;
    double c = 1.0 / kFpMin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = b + an / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

} // namespace

double igamc_q(double a, double x) {
    if (!(a > 0.0) || std::isnan(x))
        throw DomainError("igamc_q requires a > 0");
    if (x < 0.0)
        throw DomainError("igamc_q requires x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    // Series below the a+1 split, continued fraction above.
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double erfc(double x) {
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    const double q = (x == 0.0) ? 1.0 : igamc_q(0.5, x * x);
    return x >= 0.0 ? q : 2.0 - q;
}

double normal_cdf(double x) {
    return 0.5 * erfc(-x / std::sqrt(2.0));
}

Gf2Matrix::Gf2Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), words_per_row_((cols + 63) / 64),
      words_(rows * words_per_row_, 0) {
    if (rows == 0 || cols == 0)
        throw DomainError("Gf2Matrix requires rows, cols >= 1");
}

Gf2Matrix Gf2Matrix::from_bits(const BitSeq& seq, std::size_t offset,
                               std::size_t rows, std::size_t cols) {
    if (offset + rows * cols > seq.size())
        throw OutOfRange("Gf2Matrix::from_bits past sequence end");
    Gf2Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (seq.get(offset + r * cols + c)) m.set(r, c, true);
    return m;
}

std::size_t Gf2Matrix::rank() const {
    std::vector<std::uint64_t> work = words_;
    auto row = [&](std::size_t r) { return work.data() + r * words_per_row_; };
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols_ && rank < rows_; ++col) {
        const std::size_t w = col >> 6;
        const std::uint64_t mask = 1ULL << (col & 63);
        std::size_t pivot = rows_;
        for (std::size_t r = rank; r < rows_; ++r) {
            if (row(r)[w] & mask) { pivot = r; break; }
        }
        if (pivot == rows_) continue;
        if (pivot != rank)
            for (std::size_t k = 0; k < words_per_row_; ++k)
                std::swap(row(pivot)[k], row(rank)[k]);
        for (std::size_t r = rank + 1; r < rows_; ++r) {
            if (row(r)[w] & mask)
                for (std::size_t k = 0; k < words_per_row_; ++k)
                    row(r)[k] ^= row(rank)[k];
        }
        ++rank;
    }
    return rank;
}

std::size_t berlekamp_massey(const BitSeq& seq) {
    const std::size_t n_bits = seq.size();
    if (n_bits == 0) return 0;
    const BitSeq rev = seq.reversed();
    const auto rw = rev.words();
    const std::size_t poly_words = n_bits / 64 + 1;

    std::vector<std::uint64_t> conn(poly_words, 0), prev(poly_words, 0),
        tmp(poly_words, 0);
    conn[0] = 1;
    prev[0] = 1;
    std::size_t complexity = 0;
    long long last_step = -1;

    // Reads the window rev[offset .. offset+63] as one word.
    auto rev_word = [&](std::size_t offset) -> std::uint64_t {
        const std::size_t wi = offset >> 6;
        const unsigned sh = offset & 63;
        if (wi >= rw.size()) return 0;
        std::uint64_t v = rw[wi] >> sh;
        if (sh && wi + 1 < rw.size()) v |= rw[wi + 1] << (64 - sh);
        return v;
    };

    for (std::size_t n = 0; n < n_bits; ++n) {
        // discrepancy d = XOR_{i=0..L} conn[i] * s[n-i]; s[n-i] = rev[n_bits-1-n+i]
        const std::size_t offset = n_bits - 1 - n;
        const std::size_t taps_words = complexity / 64 + 1;
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < taps_words; ++w)
            acc ^= conn[w] & rev_word(offset + 64 * w);
        const bool d = std::popcount(acc) & 1;
        if (!d) continue;

        const std::size_t shift = static_cast<std::size_t>(
            static_cast<long long>(n) - last_step);
        const bool lengthen = 2 * complexity <= n;
        if (lengthen) tmp = conn;
        // conn ^= prev << shift
        const std::size_t ws = shift >> 6;
        const unsigned bs = shift & 63;
        for (std::size_t i = 0; i + ws < poly_words; ++i) {
            const std::uint64_t v = prev[i];
            if (!v) continue;
            conn[i + ws] ^= v << bs;
            if (bs && i + ws + 1 < poly_words) conn[i + ws + 1] ^= v >> (64 - bs);
        }
        if (lengthen) {
            complexity = n + 1 - complexity;
            last_step = static_cast<long long>(n);
            prev = tmp;
        }
    }
    return complexity;
}

} // namespace qkdrand::stats
