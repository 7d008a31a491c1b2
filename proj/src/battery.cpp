#include "qkdrand/battery.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <map>

#include "qkdrand/errors.hpp"
#include "qkdrand/stats.hpp"

namespace qkdrand::battery {

namespace {

using stats::erfc;
using stats::igamc_q;
using stats::normal_cdf;

double two_sided_normal_p(double z) { return erfc(std::fabs(z) / std::sqrt(2.0)); }

TestResult finalize(TestResult result, double alpha) {
    result.alpha = alpha;
    const bool ok = std::all_of(result.p_values.begin(), result.p_values.end(),
                                [alpha](double p) { return p >= alpha; });
    result.verdict = ok ? Verdict::Pass : Verdict::Fail;
    return result;
}

void require_bits(const BitSeq& seq, std::size_t minimum, const char* test) {
    if (seq.size() < minimum)
        throw TooFewBits(std::string(test) + " needs at least " +
                         std::to_string(minimum) + " bits, got " +
                         std::to_string(seq.size()));
}

// P(no run of ones longer than r in m fair bits), by the run-length
// recurrence on normalized probabilities.
double prob_longest_run_at_most(std::size_t m, std::size_t r) {
    if (m <= r) return 1.0;
    std::vector<double> p(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        if (i <= r) {
            p[i] = 1.0;
            continue;
        }
        double acc = 0.0, w = 0.5;
        for (std::size_t j = 0; j <= r; ++j, w *= 0.5) acc += w * p[i - 1 - j];
        p[i] = acc;
    }
    return p[m];
}

struct LongestRunLayout {
    std::size_t block_bits;
    std::size_t lowest_class; // longest runs <= lowest_class fall in class 0
    std::size_t classes;      // K + 1
};

LongestRunLayout longest_run_layout(std::size_t n) {
    if (n < 6272) return {8, 1, 4};
    if (n < 750000) return {128, 4, 6};
    return {10000, 10, 7};
}

} // namespace

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        default: return "skipped";
    }
}

std::vector<double> longest_run_class_probs(std::size_t block_bits) {
    LongestRunLayout layout{};
    if (block_bits == 8) layout = {8, 1, 4};
    else if (block_bits == 128) layout = {128, 4, 6};
    else if (block_bits == 10000) layout = {10000, 10, 7};
    else throw DomainError("longest-run block size must be 8, 128 or 10000");

    std::vector<double> probs(layout.classes);
    double below = prob_longest_run_at_most(layout.block_bits, layout.lowest_class);
    probs[0] = below;
    for (std::size_t c = 1; c + 1 < layout.classes; ++c) {
        const double next =
            prob_longest_run_at_most(layout.block_bits, layout.lowest_class + c);
        probs[c] = next - below;
        below = next;
    }
    probs[layout.classes - 1] = 1.0 - below;
    return probs;
}

double rank_level_probability(std::size_t rows, std::size_t cols,
                              std::size_t level) {
    if (level > std::min(rows, cols)) return 0.0;
    const double m = static_cast<double>(rows);
    const double q = static_cast<double>(cols);
    const double r = static_cast<double>(level);
    double log2_value = r * (q + m - r) - m * q;
    double product = 1.0;
    for (std::size_t i = 0; i < level; ++i) {
        const double di = static_cast<double>(i);
        product *= (1.0 - std::exp2(di - q)) * (1.0 - std::exp2(di - m)) /
                   (1.0 - std::exp2(di - r));
    }
    return product * std::exp2(log2_value);
}

std::vector<double> overlap_class_probs(double eta, std::size_t classes) {
    std::vector<double> probs(classes);
    double total = 0.0;
    for (std::size_t u = 0; u + 1 < classes; ++u) {
        double p;
        if (u == 0) {
            p = std::exp(-eta);
        } else {
            p = 0.0;
            const double du = static_cast<double>(u);
            for (std::size_t l = 1; l <= u; ++l) {
                const double dl = static_cast<double>(l);
                p += std::exp(-eta - du * std::log(2.0) + dl * std::log(eta) -
                              std::lgamma(dl + 1.0) + std::lgamma(du) -
                              std::lgamma(dl) - std::lgamma(du - dl + 1.0));
            }
        }
        probs[u] = p;
        total += p;
    }
    probs[classes - 1] = 1.0 - total;
    return probs;
}

// --- frequency family -------------------------------------------------------

TestResult frequency_monobit(const BitSeq& seq, double alpha) {
    require_bits(seq, 100, "frequency");
    const double n = static_cast<double>(seq.size());
    const double s_n = 2.0 * static_cast<double>(seq.ones_count()) - n;
    const double s_obs = std::fabs(s_n) / std::sqrt(n);
    TestResult r;
    r.test_id = "frequency";
    r.statistics = {{"s_n", s_n}, {"s_obs", s_obs}};
    r.p_values = {erfc(s_obs / std::sqrt(2.0))};
    return finalize(std::move(r), alpha);
}

TestResult block_frequency(const BitSeq& seq, std::size_t block_bits,
                           double alpha) {
    if (block_bits == 0) throw DomainError("block_frequency block size must be >= 1");
    require_bits(seq, 100, "block_frequency");
    const std::size_t blocks = seq.size() / block_bits;
    if (blocks == 0)
        throw TooFewBits("block_frequency needs at least one full block");
    double chi2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const double pi = static_cast<double>(
                              seq.ones_in_range(b * block_bits, block_bits)) /
                          static_cast<double>(block_bits);
        chi2 += (pi - 0.5) * (pi - 0.5);
    }
    chi2 *= 4.0 * static_cast<double>(block_bits);
    TestResult r;
    r.test_id = "block_frequency";
    r.params = {{"block_bits", static_cast<double>(block_bits)},
                {"block_count", static_cast<double>(blocks)}};
    r.statistics = {{"chi_square", chi2}};
    r.p_values = {igamc_q(static_cast<double>(blocks) / 2.0, chi2 / 2.0)};
    return finalize(std::move(r), alpha);
}

TestResult runs_test(const BitSeq& seq, double alpha) {
    require_bits(seq, 100, "runs");
    const std::size_t n = seq.size();
    const double pi = static_cast<double>(seq.ones_count()) / static_cast<double>(n);
    if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(static_cast<double>(n)))
        throw PreconditionFailed("runs: ones proportion too far from 1/2");
    std::size_t v_n = 1;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if (seq.get(i) != seq.get(i + 1)) ++v_n;
    const double dn = static_cast<double>(n);
    const double num = std::fabs(static_cast<double>(v_n) - 2.0 * dn * pi * (1.0 - pi));
    const double den = 2.0 * std::sqrt(2.0 * dn) * pi * (1.0 - pi);
    TestResult r;
    r.test_id = "runs";
    r.statistics = {{"v_n", static_cast<double>(v_n)}, {"pi", pi}};
    r.p_values = {erfc(num / den)};
    return finalize(std::move(r), alpha);
}

TestResult longest_run(const BitSeq& seq, double alpha) {
    require_bits(seq, 128, "longest_run");
    const auto layout = longest_run_layout(seq.size());
    const auto probs = longest_run_class_probs(layout.block_bits);
    const std::size_t blocks = seq.size() / layout.block_bits;
    std::vector<std::size_t> nu(layout.classes, 0);
    for (std::size_t b = 0; b < blocks; ++b) {
        std::size_t longest = 0, run = 0;
        for (std::size_t i = 0; i < layout.block_bits; ++i) {
            if (seq.get(b * layout.block_bits + i)) {
                ++run;
                longest = std::max(longest, run);
            } else {
                run = 0;
            }
        }
        std::size_t cls = longest <= layout.lowest_class
                              ? 0
                              : std::min(longest - layout.lowest_class,
                                         layout.classes - 1);
        ++nu[cls];
    }
    double chi2 = 0.0;
    for (std::size_t c = 0; c < layout.classes; ++c) {
        const double expct = static_cast<double>(blocks) * probs[c];
        const double d = static_cast<double>(nu[c]) - expct;
        chi2 += d * d / expct;
    }
    const double k = static_cast<double>(layout.classes - 1);
    TestResult r;
    r.test_id = "longest_run";
    r.params = {{"block_bits", static_cast<double>(layout.block_bits)},
                {"block_count", static_cast<double>(blocks)},
                {"classes", static_cast<double>(layout.classes)}};
    r.statistics = {{"chi_square", chi2}};
    r.p_values = {igamc_q(k / 2.0, chi2 / 2.0)};
    return finalize(std::move(r), alpha);
}

TestResult rank_test(const BitSeq& seq, double alpha) {
    require_bits(seq, 38912, "rank");
    constexpr std::size_t kDim = 32;
    const std::size_t matrices = seq.size() / (kDim * kDim);
    std::size_t full = 0, minus1 = 0;
    for (std::size_t i = 0; i < matrices; ++i) {
        const auto m = stats::Gf2Matrix::from_bits(seq, i * kDim * kDim, kDim, kDim);
        const std::size_t r = m.rank();
        if (r == kDim) ++full;
        else if (r == kDim - 1) ++minus1;
    }
    const std::size_t rest = matrices - full - minus1;
    const double p_full = rank_level_probability(kDim, kDim, kDim);
    const double p_minus1 = rank_level_probability(kDim, kDim, kDim - 1);
    const double p_rest = 1.0 - p_full - p_minus1;
    const double dn = static_cast<double>(matrices);
    double chi2 = 0.0;
    const std::array<std::pair<double, double>, 3> cells{{
        {static_cast<double>(full), p_full},
        {static_cast<double>(minus1), p_minus1},
        {static_cast<double>(rest), p_rest},
    }};
    for (const auto& [obs, p] : cells) {
        const double d = obs - dn * p;
        chi2 += d * d / (dn * p);
    }
    TestResult r;
    r.test_id = "rank";
    r.params = {{"matrix_dim", static_cast<double>(kDim)},
                {"matrix_count", dn}};
    r.statistics = {{"chi_square", chi2}};
    r.p_values = {igamc_q(1.0, chi2 / 2.0)}; // = exp(-chi2/2)
    return finalize(std::move(r), alpha);
}

// --- template family --------------------------------------------------------

namespace {

bool template_is_periodic(const BitSeq& templ) {
    const std::size_t m = templ.size();
    for (std::size_t period = 1; period < m; ++period) {
        bool matches = true;
        for (std::size_t i = 0; i + period < m; ++i)
            if (templ.get(i) != templ.get(i + period)) { matches = false; break; }
        if (matches) return true;
    }
    return false;
}

} // namespace

TestResult non_overlapping_template(const BitSeq& seq, const BitSeq& templ,
                                    std::size_t block_bits, double alpha) {
    const std::size_t m = templ.size();
    if (m < 2 || m > 10)
        throw DomainError("non_overlapping template length must be in [2, 10]");
    if (template_is_periodic(templ))
        throw PeriodicTemplate("template has a proper period");
    std::size_t M = block_bits ? block_bits : seq.size() / 8;
    if (M < m) throw TooFewBits("non_overlapping block shorter than template");
    const std::size_t blocks = seq.size() / M;
    if (blocks == 0) throw TooFewBits("non_overlapping needs one full block");

    const std::uint64_t pattern = templ.word_msb(0, static_cast<unsigned>(m));
    const double dm = static_cast<double>(m);
    const double mu = (static_cast<double>(M) - dm + 1.0) / std::exp2(dm);
    const double var = static_cast<double>(M) *
                       (std::exp2(-dm) - (2.0 * dm - 1.0) * std::exp2(-2.0 * dm));

    double chi2 = 0.0;
    std::size_t total_matches = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t start = b * M;
        std::size_t count = 0, j = 0;
        while (j + m <= M) {
            if (seq.word_msb(start + j, static_cast<unsigned>(m)) == pattern) {
                ++count;
                j += m; // non-overlapping: skip past the match
            } else {
                ++j;
            }
        }
        total_matches += count;
        const double d = static_cast<double>(count) - mu;
        chi2 += d * d / var;
    }
    TestResult r;
    r.test_id = "non_overlapping_template";
    r.params = {{"template_bits", dm},
                {"block_bits", static_cast<double>(M)},
                {"block_count", static_cast<double>(blocks)}};
    r.statistics = {{"chi_square", chi2},
                    {"mu", mu},
                    {"matches", static_cast<double>(total_matches)}};
    r.p_values = {igamc_q(static_cast<double>(blocks) / 2.0, chi2 / 2.0)};
    return finalize(std::move(r), alpha);
}

TestResult overlapping_template(const BitSeq& seq, std::size_t template_bits,
                                std::size_t block_bits, std::size_t block_count,
                                double alpha) {
    if (template_bits < 2 || template_bits > 32)
        throw DomainError("overlapping template length must be in [2, 32]");
    const std::size_t M = block_bits;
    if (M < template_bits)
        throw TooFewBits("overlapping block shorter than template");
    std::size_t blocks = block_count ? block_count : seq.size() / M;
    if (blocks == 0 || seq.size() < M * blocks)
        throw TooFewBits("overlapping template needs n >= M * N");

    constexpr std::size_t kClasses = 6; // K = 5
    const double dm = static_cast<double>(template_bits);
    const double lambda = (static_cast<double>(M) - dm + 1.0) / std::exp2(dm);
    const double eta = lambda / 2.0;
    const auto probs = overlap_class_probs(eta, kClasses);

    std::vector<std::size_t> nu(kClasses, 0);
    std::size_t total_matches = 0;
    for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t start = b * M;
        std::size_t run = 0, count = 0;
        for (std::size_t i = 0; i < M; ++i) {
            run = seq.get(start + i) ? run + 1 : 0;
            if (run >= template_bits) ++count; // window of all ones ends here
        }
        total_matches += count;
        ++nu[std::min(count, kClasses - 1)];
    }
    double chi2 = 0.0;
    for (std::size_t c = 0; c < kClasses; ++c) {
        const double expct = static_cast<double>(blocks) * probs[c];
        const double d = static_cast<double>(nu[c]) - expct;
        chi2 += d * d / expct;
    }
    TestResult r;
    r.test_id = "overlapping_template";
    r.params = {{"template_bits", dm},
                {"block_bits", static_cast<double>(M)},
                {"block_count", static_cast<double>(blocks)}};
    r.statistics = {{"lambda", lambda},
                    {"eta", eta},
                    {"chi_square", chi2},
                    {"matches", static_cast<double>(total_matches)}};
    r.p_values = {igamc_q(static_cast<double>(kClasses - 1) / 2.0, chi2 / 2.0)};
    return finalize(std::move(r), alpha);
}

// --- universal / complexity -------------------------------------------------

TestResult maurer_universal(const BitSeq& seq, std::size_t word_bits,
                            double alpha) {
    // Published expectation/variance for L in [6, 16].
    static constexpr double kExpected[17] = {
        0, 0, 0, 0, 0, 0, 5.2177052, 6.1962507, 7.1836656, 8.1764248,
        9.1723243, 10.170032, 11.168765, 12.168070, 13.167693, 14.167488,
        15.167379};
    static constexpr double kVariance[17] = {
        0, 0, 0, 0, 0, 0, 2.954, 3.125, 3.238, 3.311, 3.356, 3.384,
        3.401, 3.410, 3.416, 3.419, 3.421};

    std::size_t L = word_bits;
    if (L == 0) {
        const std::size_t n = seq.size();
        for (std::size_t cand = 6; cand <= 16; ++cand)
            if (n >= cand * 1010 * (std::size_t{1} << cand)) L = cand;
        if (L == 0) throw TooFewBits("maurer_universal needs at least 387840 bits");
    }
    if (L < 6 || L > 16)
        throw DomainError("maurer_universal word size must be in [6, 16]");
    if (seq.size() < L * 1010 * (std::size_t{1} << L))
        throw TooFewBits("maurer_universal sequence too short for word size");

    const std::size_t init_blocks = 10 * (std::size_t{1} << L); // Q
    const std::size_t total_blocks = seq.size() / L;
    const std::size_t test_blocks = total_blocks - init_blocks; // K

    std::vector<std::size_t> last(std::size_t{1} << L, 0);
    for (std::size_t i = 1; i <= init_blocks; ++i)
        last[seq.word_msb((i - 1) * L, static_cast<unsigned>(L))] = i;
    double sum = 0.0;
    for (std::size_t i = init_blocks + 1; i <= init_blocks + test_blocks; ++i) {
        const auto word = seq.word_msb((i - 1) * L, static_cast<unsigned>(L));
        sum += std::log2(static_cast<double>(i - last[word]));
        last[word] = i;
    }
    const double f_n = sum / static_cast<double>(test_blocks);

    const double dl = static_cast<double>(L);
    const double dk = static_cast<double>(test_blocks);
    const double c = 0.7 - 0.8 / dl +
                     (4.0 + 32.0 / dl) * std::pow(dk, -3.0 / dl) / 15.0;
    const double sigma = c * std::sqrt(kVariance[L] / dk);
    TestResult r;
    r.test_id = "maurer_universal";
    r.params = {{"word_bits", dl},
                {"init_blocks", static_cast<double>(init_blocks)},
                {"test_blocks", dk}};
    r.statistics = {{"f_n", f_n}, {"expected", kExpected[L]}, {"sigma", sigma}};
    r.p_values = {erfc(std::fabs(f_n - kExpected[L]) / (std::sqrt(2.0) * sigma))};
    return finalize(std::move(r), alpha);
}

TestResult linear_complexity(const BitSeq& seq, std::size_t block_bits,
                             std::size_t min_blocks, double alpha) {
    if (block_bits < 500 || block_bits > 5000)
        throw DomainError("linear_complexity block size must be in [500, 5000]");
    const std::size_t blocks = seq.size() / block_bits;
    if (blocks < std::max<std::size_t>(1, min_blocks))
        throw TooFewBits("linear_complexity needs at least " +
                         std::to_string(min_blocks) + " blocks");

    static constexpr double kPi[7] = {1.0 / 96, 1.0 / 32, 1.0 / 8, 1.0 / 2,
                                      1.0 / 4,  1.0 / 16, 1.0 / 48};
    const double dm = static_cast<double>(block_bits);
    const double sign_mu = (block_bits % 2 == 0) ? 1.0 : -1.0; // (-1)^(M+1) inverted
    const double mu = dm / 2.0 + (9.0 - sign_mu) / 36.0 -
                      (dm / 3.0 + 2.0 / 9.0) / std::exp2(dm);
    const double sign_t = (block_bits % 2 == 0) ? 1.0 : -1.0; // (-1)^M

    std::vector<std::size_t> nu(7, 0);
    for (std::size_t b = 0; b < blocks; ++b) {
        const auto block = seq.slice(b * block_bits, block_bits);
        const double l = static_cast<double>(stats::berlekamp_massey(block));
        const double t = sign_t * (l - mu) + 2.0 / 9.0;
        std::size_t cls;
        if (t <= -2.5) cls = 0;
        else if (t <= -1.5) cls = 1;
        else if (t <= -0.5) cls = 2;
        else if (t <= 0.5) cls = 3;
        else if (t <= 1.5) cls = 4;
        else if (t <= 2.5) cls = 5;
        else cls = 6;
        ++nu[cls];
    }
    double chi2 = 0.0;
    for (std::size_t c = 0; c < 7; ++c) {
        const double expct = static_cast<double>(blocks) * kPi[c];
        const double d = static_cast<double>(nu[c]) - expct;
        chi2 += d * d / expct;
    }
    TestResult r;
    r.test_id = "linear_complexity";
    r.params = {{"block_bits", dm}, {"block_count", static_cast<double>(blocks)}};
    r.statistics = {{"chi_square", chi2}, {"mu", mu}};
    r.p_values = {igamc_q(3.0, chi2 / 2.0)};
    return finalize(std::move(r), alpha);
}

// --- serial / cumulative sums -----------------------------------------------

namespace {

// psi^2_k over overlapping k-bit patterns of the cyclically extended sequence.
double psi_squared(const BitSeq& seq, std::size_t k) {
    if (k == 0) return 0.0;
    const std::size_t n = seq.size();
    const std::uint64_t mask = (k == 64) ? ~0ULL : (1ULL << k) - 1;
    std::vector<std::uint32_t> counts(std::size_t{1} << k, 0);
    std::uint64_t code = 0;
    for (std::size_t i = 0; i + 1 < k; ++i)
        code = ((code << 1) | seq.get(i)) & mask;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t next = (i + k - 1) % n;
        code = ((code << 1) | seq.get(next)) & mask;
        ++counts[code];
    }
    double sum_sq = 0.0;
    for (const auto c : counts)
        sum_sq += static_cast<double>(c) * static_cast<double>(c);
    return std::exp2(static_cast<double>(k)) / static_cast<double>(n) * sum_sq -
           static_cast<double>(n);
}

} // namespace

TestResult serial_test(const BitSeq& seq, std::size_t pattern_bits,
                       double alpha) {
    const std::size_t n = seq.size();
    if (pattern_bits < 1 || pattern_bits > 16)
        throw DomainError("serial pattern length must be in [1, 16]");
    if (n < 8)
        throw TooFewBits("serial needs at least 8 bits");
    const auto log2_floor = static_cast<std::size_t>(
        std::floor(std::log2(static_cast<double>(n))));
    if (pattern_bits + 2 >= log2_floor)
        throw InvalidM("serial requires m < floor(log2 n) - 2");

    const double psi_m = psi_squared(seq, pattern_bits);
    const double psi_m1 = psi_squared(seq, pattern_bits - 1);
    const double psi_m2 = pattern_bits >= 2 ? psi_squared(seq, pattern_bits - 2) : 0.0;
    // both deltas are non-negative in exact arithmetic; cancellation between
    // the n-sized psi values can leave a tiny negative residue
    const double del1 = std::max(0.0, psi_m - psi_m1);
    const double del2 = std::max(0.0, psi_m - 2.0 * psi_m1 + psi_m2);
    const double dm = static_cast<double>(pattern_bits);
    TestResult r;
    r.test_id = "serial";
    r.params = {{"pattern_bits", dm}};
    r.statistics = {{"psi2_m", psi_m}, {"del1", del1}, {"del2", del2}};
    r.p_values = {igamc_q(std::exp2(dm - 2.0), del1 / 2.0),
                  igamc_q(std::exp2(dm - 3.0), del2 / 2.0)};
    return finalize(std::move(r), alpha);
}

TestResult cumulative_sums(const BitSeq& seq, CusumDirection direction,
                           double alpha) {
    require_bits(seq, 100, "cumulative_sums");
    const std::size_t n = seq.size();
    long long sum = 0, max_abs = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t idx = direction == CusumDirection::Forward ? i : n - 1 - i;
        sum += seq.get(idx) ? 1 : -1;
        max_abs = std::max(max_abs, std::llabs(sum));
    }
    const double z = static_cast<double>(max_abs);
    const double dn = static_cast<double>(n);
    const double sqrt_n = std::sqrt(dn);

    double sum1 = 0.0;
    {
        const long long start = static_cast<long long>(std::floor((-dn / z + 1.0) / 4.0));
        const long long finish = static_cast<long long>(std::floor((dn / z - 1.0) / 4.0));
        for (long long k = start; k <= finish; ++k) {
            const double dk = static_cast<double>(k);
            sum1 += normal_cdf((4.0 * dk + 1.0) * z / sqrt_n) -
                    normal_cdf((4.0 * dk - 1.0) * z / sqrt_n);
        }
    }
    double sum2 = 0.0;
    {
        const long long start = static_cast<long long>(std::floor((-dn / z - 3.0) / 4.0));
        const long long finish = static_cast<long long>(std::floor((dn / z - 1.0) / 4.0));
        for (long long k = start; k <= finish; ++k) {
            const double dk = static_cast<double>(k);
            sum2 += normal_cdf((4.0 * dk + 3.0) * z / sqrt_n) -
                    normal_cdf((4.0 * dk + 1.0) * z / sqrt_n);
        }
    }
    const double p = std::clamp(1.0 - sum1 + sum2, 0.0, 1.0);
    TestResult r;
    r.test_id = direction == CusumDirection::Forward ? "cusum_forward"
                                                     : "cusum_backward";
    r.statistics = {{"z", z}};
    r.p_values = {p};
    return finalize(std::move(r), alpha);
}

// --- DIEHARD-style tests ----------------------------------------------------

TestResult count_the_ones(const BitSeq& seq, double alpha) {
    require_bits(seq, 800, "count_the_ones");
    const std::size_t bytes = seq.size() / 8;
    if (bytes < 5) throw TooFewBits("count_the_ones needs at least 5 bytes");
    // Letter classes by byte popcount {<=2, 3, 4, 5, >=6}.
    static constexpr double kLetterProb[5] = {37.0 / 256, 56.0 / 256, 70.0 / 256,
                                              56.0 / 256, 37.0 / 256};
    std::vector<std::uint8_t> letters(bytes);
    for (std::size_t i = 0; i < bytes; ++i) {
        const auto ones = static_cast<unsigned>(
            std::popcount(seq.word_msb(i * 8, 8)));
        letters[i] = static_cast<std::uint8_t>(
            ones <= 2 ? 0 : ones >= 6 ? 4 : ones - 2);
    }
    // Overlapping 5- and 4-letter words at offsets 0..words-1, rolling base-5.
    const std::size_t words = bytes - 4;
    std::vector<std::uint32_t> count5(3125, 0), count4(625, 0);
    std::uint32_t code = 0;
    for (std::size_t i = 0; i < 4; ++i) code = code * 5 + letters[i];
    for (std::size_t i = 0; i < words; ++i) {
        ++count4[code % 625];
        code = code % 625 * 5 + letters[i + 4];
        ++count5[code];
    }
    double q5 = 0.0;
    for (std::size_t w = 0; w < 3125; ++w) {
        double p = 1.0;
        std::size_t t = w;
        for (int d = 0; d < 5; ++d) { p *= kLetterProb[t % 5]; t /= 5; }
        const double expct = static_cast<double>(words) * p;
        const double diff = static_cast<double>(count5[w]) - expct;
        q5 += diff * diff / expct;
    }
    double q4 = 0.0;
    for (std::size_t w = 0; w < 625; ++w) {
        double p = 1.0;
        std::size_t t = w;
        for (int d = 0; d < 4; ++d) { p *= kLetterProb[t % 5]; t /= 5; }
        const double expct = static_cast<double>(words) * p;
        const double diff = static_cast<double>(count4[w]) - expct;
        q4 += diff * diff / expct;
    }
    const double z = (q5 - q4 - 2500.0) / std::sqrt(5000.0);
    TestResult r;
    r.test_id = "count_the_ones";
    r.params = {{"bytes", static_cast<double>(bytes)},
                {"words", static_cast<double>(words)}};
    r.statistics = {{"q5", q5}, {"q4", q4}, {"z", z}};
    r.p_values = {two_sided_normal_p(z)};
    return finalize(std::move(r), alpha);
}

std::size_t parking_successes(const BitSeq& seq, std::size_t attempts) {
    constexpr double kSide = 100.0;
    constexpr double kScale = kSide / 4294967296.0; // 100 / 2^32
    std::vector<std::vector<std::pair<float, float>>> grid(100 * 100);
    std::size_t parked = 0;
    for (std::size_t a = 0; a < attempts; ++a) {
        const double x =
            static_cast<double>(seq.word_msb(a * 64, 32)) * kScale;
        const double y =
            static_cast<double>(seq.word_msb(a * 64 + 32, 32)) * kScale;
        const int cx = std::min(99, static_cast<int>(x));
        const int cy = std::min(99, static_cast<int>(y));
        bool crash = false;
        for (int gx = std::max(0, cx - 1); gx <= std::min(99, cx + 1) && !crash; ++gx)
            for (int gy = std::max(0, cy - 1); gy <= std::min(99, cy + 1) && !crash; ++gy)
                for (const auto& [px, py] : grid[gx * 100 + gy])
                    if (std::fabs(x - px) < 1.0 && std::fabs(y - py) < 1.0) {
                        crash = true;
                        break;
                    }
        if (!crash) {
            grid[cx * 100 + cy].emplace_back(static_cast<float>(x),
                                             static_cast<float>(y));
            ++parked;
        }
    }
    return parked;
}

TestResult parking_lot(const BitSeq& seq, std::size_t attempts, double mean,
                       double sigma, double alpha) {
    require_bits(seq, attempts * 64, "parking_lot");
    const std::size_t parked = parking_successes(seq, attempts);
    const double z = (static_cast<double>(parked) - mean) / sigma;
    TestResult r;
    r.test_id = "parking_lot";
    r.params = {{"attempts", static_cast<double>(attempts)},
                {"calibrated_mean", mean},
                {"calibrated_sigma", sigma}};
    r.statistics = {{"parked", static_cast<double>(parked)}, {"z", z}};
    r.p_values = {two_sided_normal_p(z)};
    return finalize(std::move(r), alpha);
}

TestResult poker_test(const BitSeq& seq, std::size_t block_bits, double alpha) {
    if (block_bits < 1 || block_bits > 16)
        throw DomainError("poker block size must be in [1, 16]");
    const std::size_t blocks = seq.size() / block_bits;
    const std::size_t cells = std::size_t{1} << block_bits;
    if (blocks < 5 * cells)
        throw TooFewBits("poker needs floor(n/m) >= 5 * 2^m blocks");
    std::vector<std::uint32_t> counts(cells, 0);
    for (std::size_t b = 0; b < blocks; ++b)
        ++counts[seq.word_msb(b * block_bits, static_cast<unsigned>(block_bits))];
    double sum_sq = 0.0;
    for (const auto c : counts)
        sum_sq += static_cast<double>(c) * static_cast<double>(c);
    const double dk = static_cast<double>(blocks);
    const double chi2 = static_cast<double>(cells) / dk * sum_sq - dk;
    TestResult r;
    r.test_id = "poker";
    r.params = {{"block_bits", static_cast<double>(block_bits)},
                {"block_count", dk}};
    r.statistics = {{"chi_square", chi2}};
    r.p_values = {igamc_q(static_cast<double>(cells - 1) / 2.0, chi2 / 2.0)};
    return finalize(std::move(r), alpha);
}

namespace {

// Interval histogram of y = (value / 2^k)^s over d cells, with the exact
// discrete cell probabilities. s = 1 is the plain uniform-distribution case.
TestResult interval_chi_square(const char* test_id, const BitSeq& seq,
                               std::size_t word_bits, std::size_t series_len,
                               std::size_t intervals, double alpha) {
    if (word_bits < 1 || word_bits > 16)
        throw DomainError("word size must be in [1, 16]");
    if (intervals < 2 || intervals > (std::size_t{1} << word_bits))
        throw DomainError("interval count must be in [2, 2^k]");
    if (series_len < 1) throw DomainError("series length must be >= 1");
    const std::size_t words = seq.size() / word_bits;
    const std::size_t groups = words / series_len;
    if (groups < 5 * intervals)
        throw TooFewBits(std::string(test_id) + " needs at least 5*d group maxima");

    const std::size_t m = std::size_t{1} << word_bits;
    const double dm = static_cast<double>(m);
    const double ds = static_cast<double>(series_len);
    const double dd = static_cast<double>(intervals);

    // Cell of each word value and exact P(group max lands in cell).
    std::vector<std::size_t> cell_of(m);
    std::vector<double> cell_prob(intervals, 0.0);
    double prev_cdf = 0.0;
    for (std::size_t v = 0; v < m; ++v) {
        const double y = std::pow(static_cast<double>(v) / dm, ds);
        cell_of[v] = std::min(intervals - 1,
                              static_cast<std::size_t>(y * dd));
        const double cdf = std::pow(static_cast<double>(v + 1) / dm, ds);
        cell_prob[cell_of[v]] += cdf - prev_cdf;
        prev_cdf = cdf;
    }

    std::vector<std::uint32_t> counts(intervals, 0);
    for (std::size_t g = 0; g < groups; ++g) {
        std::uint64_t best = 0;
        for (std::size_t j = 0; j < series_len; ++j)
            best = std::max(best, seq.word_msb((g * series_len + j) * word_bits,
                                               static_cast<unsigned>(word_bits)));
        ++counts[cell_of[best]];
    }
    double chi2 = 0.0;
    for (std::size_t c = 0; c < intervals; ++c) {
        const double expct = static_cast<double>(groups) * cell_prob[c];
        const double d = static_cast<double>(counts[c]) - expct;
        chi2 += d * d / expct;
    }
    TestResult r;
    r.test_id = test_id;
    r.params = {{"word_bits", static_cast<double>(word_bits)},
                {"intervals", dd},
                {"series_len", ds},
                {"groups", static_cast<double>(groups)}};
    r.statistics = {{"chi_square", chi2}};
    r.p_values = {igamc_q((dd - 1.0) / 2.0, chi2 / 2.0)};
    return finalize(std::move(r), alpha);
}

} // namespace

TestResult uniform_distribution(const BitSeq& seq, std::size_t word_bits,
                                std::size_t intervals, double alpha) {
    return interval_chi_square("uniform_distribution", seq, word_bits, 1,
                               intervals, alpha);
}

TestResult max_subseries(const BitSeq& seq, std::size_t word_bits,
                         std::size_t series_len, std::size_t intervals,
                         double alpha) {
    return interval_chi_square("max_subseries", seq, word_bits, series_len,
                               intervals, alpha);
}

TestResult extreme_point(const BitSeq& seq, std::size_t word_bits,
                         double alpha) {
    if (word_bits < 1 || word_bits > 64)
        throw DomainError("extreme_point word size must be in [1, 64]");
    const std::size_t words = seq.size() / word_bits;
    if (words < 3) throw TooFewBits("extreme_point needs at least 3 words");
    std::size_t extrema = 0;
    std::uint64_t a = seq.word_msb(0, static_cast<unsigned>(word_bits));
    std::uint64_t b = seq.word_msb(word_bits, static_cast<unsigned>(word_bits));
    for (std::size_t i = 2; i < words; ++i) {
        const std::uint64_t c =
            seq.word_msb(i * word_bits, static_cast<unsigned>(word_bits));
        if ((b > a && b > c) || (b < a && b < c)) ++extrema;
        a = b;
        b = c;
    }
    const double dw = static_cast<double>(words);
    const double mean = 2.0 * (dw - 2.0) / 3.0;
    const double var = (16.0 * dw - 29.0) / 90.0;
    const double z = (static_cast<double>(extrema) - mean) / std::sqrt(var);
    TestResult r;
    r.test_id = "extreme_point";
    r.params = {{"word_bits", static_cast<double>(word_bits)},
                {"words", dw}};
    r.statistics = {{"extrema", static_cast<double>(extrema)}, {"z", z}};
    r.p_values = {two_sided_normal_p(z)};
    return finalize(std::move(r), alpha);
}

// --- dispatcher --------------------------------------------------------------

const std::vector<std::string>& registry() {
    static const std::vector<std::string> kIds = {
        "frequency",
        "block_frequency",
        "runs",
        "longest_run",
        "rank",
        "overlapping_template",
        "non_overlapping_template",
        "maurer_universal",
        "linear_complexity",
        "serial",
        "count_the_ones",
        "parking_lot",
        "max_subseries",
        "uniform_distribution",
        "poker",
        "extreme_point",
        "cumulative_sums",
    };
    return kIds;
}

BatteryReport run_battery(const BitSeq& seq, const BatteryConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw DomainError("alpha must lie in (0, 1)");
    if (cfg.enabled)
        for (const auto& id : *cfg.enabled)
            if (std::find(registry().begin(), registry().end(), id) ==
                registry().end())
                throw DomainError("unknown test id: " + id);

    const auto enabled = [&](const std::string& id) {
        return !cfg.enabled ||
               std::find(cfg.enabled->begin(), cfg.enabled->end(), id) !=
                   cfg.enabled->end();
    };

    const double a = cfg.alpha;
    std::map<std::string, std::function<TestResult()>> runners;
    runners["frequency"] = [&] { return frequency_monobit(seq, a); };
    runners["block_frequency"] = [&] {
        return block_frequency(seq, cfg.block_frequency_block_bits, a);
    };
    runners["runs"] = [&] { return runs_test(seq, a); };
    runners["longest_run"] = [&] { return longest_run(seq, a); };
    runners["rank"] = [&] { return rank_test(seq, a); };
    runners["overlapping_template"] = [&] {
        return overlapping_template(seq, cfg.overlap_template_bits,
                                    cfg.overlap_block_bits,
                                    cfg.overlap_block_count, a);
    };
    runners["non_overlapping_template"] = [&] {
        return non_overlapping_template(seq,
                                        BitSeq::from_ascii(cfg.nonoverlap_template),
                                        cfg.nonoverlap_block_bits, a);
    };
    runners["maurer_universal"] = [&] {
        return maurer_universal(seq, cfg.maurer_word_bits, a);
    };
    runners["linear_complexity"] = [&] {
        return linear_complexity(seq, cfg.linear_complexity_block_bits,
                                 cfg.linear_complexity_min_blocks, a);
    };
    runners["serial"] = [&] { return serial_test(seq, cfg.serial_pattern_bits, a); };
    runners["count_the_ones"] = [&] { return count_the_ones(seq, a); };
    runners["parking_lot"] = [&] {
        return parking_lot(seq, cfg.parking_attempts, cfg.parking_mean,
                           cfg.parking_sigma, a);
    };
    runners["max_subseries"] = [&] {
        return max_subseries(seq, cfg.maxsub_word_bits, cfg.maxsub_series_len,
                             cfg.maxsub_intervals, a);
    };
    runners["uniform_distribution"] = [&] {
        return uniform_distribution(seq, cfg.uniform_word_bits,
                                    cfg.uniform_intervals, a);
    };
    runners["poker"] = [&] { return poker_test(seq, cfg.poker_block_bits, a); };
    runners["extreme_point"] = [&] {
        return extreme_point(seq, cfg.extreme_word_bits, a);
    };
    runners["cumulative_sums"] = [&]() -> TestResult {
        auto fwd = cumulative_sums(seq, CusumDirection::Forward, a);
        auto bwd = cumulative_sums(seq, CusumDirection::Backward, a);
        TestResult r;
        r.test_id = "cumulative_sums";
        r.statistics = {{"z_forward", fwd.statistics[0].second},
                        {"z_backward", bwd.statistics[0].second}};
        r.p_values = {fwd.p_values[0], bwd.p_values[0]};
        return finalize(std::move(r), a);
    };

    BatteryReport report;
    report.sequence_bits = seq.size();
    for (const auto& id : registry()) {
        if (!enabled(id)) continue;
        TestResult result;
        try {
            result = runners.at(id)();
        } catch (const Error& e) {
            result.test_id = id;
            result.alpha = a;
            result.verdict = Verdict::Skipped;
            result.skip_reason = e.what();
        }
        report.results.push_back(std::move(result));
    }
    return report;
}

} // namespace qkdrand::battery
