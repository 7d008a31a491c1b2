#ifndef QKDRAND_BATTERY_HPP
#define QKDRAND_BATTERY_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkdrand/bitseq.hpp"

namespace qkdrand::battery {

enum class Verdict { Pass, Fail, Skipped };

const char* verdict_name(Verdict v);

/// One test's outcome: named statistics, one or more P-values, and the
/// verdict at significance alpha. A test that cannot run on the given
/// sequence is reported as Skipped with a reason.
struct TestResult {
    std::string test_id;
    std::vector<std::pair<std::string, double>> params;
    std::vector<std::pair<std::string, double>> statistics;
    std::vector<double> p_values;
    double alpha = 0.01;
    Verdict verdict = Verdict::Skipped;
    std::string skip_reason;

    bool passed() const { return verdict == Verdict::Pass; }
};

/// Monte Carlo calibration of the parking-lot statistic, produced by
/// tools/parking_calibrate (see README). Regenerate with:
///   parking_calibrate --trials 40000 --seed 1
inline constexpr double kParkingCalibratedMean = 3523.290000;
inline constexpr double kParkingCalibratedSigma = 21.704323;

struct BatteryConfig {
    double alpha = 0.01;
    /// Tests to run, reported in registry order. Unset means all tests; an
    /// explicitly empty set yields an empty report.
    std::optional<std::vector<std::string>> enabled;

    std::size_t block_frequency_block_bits = 128;
    std::string nonoverlap_template = "000000001";
    std::size_t nonoverlap_block_bits = 0; ///< 0 = floor(n/8)
    std::size_t overlap_template_bits = 9;
    std::size_t overlap_block_bits = 1032;
    std::size_t overlap_block_count = 0; ///< 0 = floor(n/M)
    std::size_t maurer_word_bits = 0;    ///< 0 = auto-select from n
    std::size_t linear_complexity_block_bits = 500;
    std::size_t linear_complexity_min_blocks = 200;
    std::size_t serial_pattern_bits = 5;
    std::size_t poker_block_bits = 4;
    std::size_t uniform_word_bits = 8;
    std::size_t uniform_intervals = 2;
    std::size_t maxsub_word_bits = 8;
    std::size_t maxsub_series_len = 3;
    std::size_t maxsub_intervals = 10;
    std::size_t extreme_word_bits = 32;
    std::size_t parking_attempts = 12000;
    double parking_mean = kParkingCalibratedMean;
    double parking_sigma = kParkingCalibratedSigma;
};

// --- individual tests ------------------------------------------------------

TestResult frequency_monobit(const BitSeq& seq, double alpha = 0.01);
TestResult block_frequency(const BitSeq& seq, std::size_t block_bits,
                           double alpha = 0.01);
TestResult runs_test(const BitSeq& seq, double alpha = 0.01);
TestResult longest_run(const BitSeq& seq, double alpha = 0.01);
TestResult rank_test(const BitSeq& seq, double alpha = 0.01);
TestResult non_overlapping_template(const BitSeq& seq, const BitSeq& templ,
                                    std::size_t block_bits, double alpha = 0.01);
/// All-ones template of template_bits bits; block_count 0 = floor(n/M).
TestResult overlapping_template(const BitSeq& seq, std::size_t template_bits,
                                std::size_t block_bits,
                                std::size_t block_count = 0,
                                double alpha = 0.01);
/// word_bits 0 = auto-select from n; init blocks Q = 10 * 2^L.
TestResult maurer_universal(const BitSeq& seq, std::size_t word_bits = 0,
                            double alpha = 0.01);
TestResult linear_complexity(const BitSeq& seq, std::size_t block_bits,
                             std::size_t min_blocks = 200, double alpha = 0.01);
TestResult serial_test(const BitSeq& seq, std::size_t pattern_bits,
                       double alpha = 0.01);

enum class CusumDirection { Forward, Backward };
TestResult cumulative_sums(const BitSeq& seq, CusumDirection direction,
                           double alpha = 0.01);

TestResult count_the_ones(const BitSeq& seq, double alpha = 0.01);
TestResult parking_lot(const BitSeq& seq, std::size_t attempts = 12000,
                       double mean = kParkingCalibratedMean,
                       double sigma = kParkingCalibratedSigma,
                       double alpha = 0.01);
TestResult poker_test(const BitSeq& seq, std::size_t block_bits,
                      double alpha = 0.01);
TestResult uniform_distribution(const BitSeq& seq, std::size_t word_bits,
                                std::size_t intervals, double alpha = 0.01);
TestResult max_subseries(const BitSeq& seq, std::size_t word_bits,
                         std::size_t series_len, std::size_t intervals,
                         double alpha = 0.01);
TestResult extreme_point(const BitSeq& seq, std::size_t word_bits,
                         double alpha = 0.01);

// --- dispatcher ------------------------------------------------------------

/// Fixed test-id order: the sixteen battery tests plus cumulative_sums.
const std::vector<std::string>& registry();

struct BatteryReport {
    std::vector<TestResult> results;
    std::size_t sequence_bits = 0;
    std::string source;
    std::uint64_t seed = 0;
    std::size_t round_index = 0;
};

/// Runs the enabled tests; a test whose preconditions fail is reported as
/// Skipped with the error message, never as a failure.
BatteryReport run_battery(const BitSeq& seq, const BatteryConfig& cfg = {});

// --- pieces exposed for verification ---------------------------------------

/// P(rank = level) for a random rows x cols matrix over GF(2), from the
/// product formula.
double rank_level_probability(std::size_t rows, std::size_t cols,
                              std::size_t level);

/// Exact longest-one-run class probabilities for the NIST class layout of
/// the given block size (8, 128 or 10000).
std::vector<double> longest_run_class_probs(std::size_t block_bits);

/// Class probabilities for overlapping-template totals, computed from
/// eta = lambda / 2.
std::vector<double> overlap_class_probs(double eta, std::size_t classes);

/// Successfully parked cars for the parking-lot statistic on this exact
/// geometry (100 x 100 lot, crash when max-norm distance < 1).
std::size_t parking_successes(const BitSeq& seq, std::size_t attempts);

} // namespace qkdrand::battery

#endif
