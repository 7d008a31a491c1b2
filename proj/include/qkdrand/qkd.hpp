#ifndef QKDRAND_QKD_HPP
#define QKDRAND_QKD_HPP

#include <cstdint>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qkdrand/bitseq.hpp"

namespace qkdrand::qkd {

enum class Basis : std::uint8_t { Rectilinear = 0, Diagonal = 1 };

/// One pumped photon on the sender side. Channel transit fills in the
/// loss flag and, when an eavesdropper intercepted, her measurement basis.
struct PhotonRecord {
    bool bit = false;
    Basis prep_basis = Basis::Rectilinear;
    bool lost = false;
    std::optional<Basis> eve_basis;
};

struct Eavesdropping {
    enum class Mode { None, InterceptResend };
    Mode mode = Mode::None;
    double fraction = 0.0;

    static Eavesdropping none() { return {}; }
    static Eavesdropping intercept_resend(double fraction) {
        return {Mode::InterceptResend, fraction};
    }
};

struct ChannelConfig {
    double flip_prob = 0.0;
    double loss_prob = 0.0;
    Eavesdropping eve = Eavesdropping::none();

    void validate() const; // throws DomainError
};

struct QberEstimate {
    double error_rate = 0.0;
    double threshold = 0.0;
    std::size_t sampled_bits = 0;
    bool abort = false;
};

struct ReconConfig {
    std::size_t block_bits = 16; ///< first-round block size K, >= 2
    std::size_t rounds = 3;      ///< N
    bool permute_between_rounds = true;

    void validate() const;
};

/// Outcome for both parties. leaked_bits counts every parity disclosed on
/// the public channel (top-level block parities plus bisection parities);
/// localization_leaked_bits counts only the bisection parities.
struct ReconciliationResult {
    BitSeq alice_key;
    BitSeq bob_key;
    std::size_t corrected_errors = 0;
    std::size_t leaked_bits = 0;
    std::size_t localization_leaked_bits = 0;
};

struct PaParams {
    std::size_t input_length = 0;   ///< L, must equal key length
    std::size_t eve_known_bits = 0; ///< M
    std::size_t security_bits = 0;  ///< s
};

std::vector<PhotonRecord> generate_photons(std::size_t n, std::uint64_t seed);

BitSeq photon_bits(const std::vector<PhotonRecord>& photons);
std::vector<Basis> photon_bases(const std::vector<PhotonRecord>& photons);

struct ChannelOutput {
    BitSeq receiver_bits;
    std::vector<Basis> receiver_bases;
    std::vector<bool> received_mask;
};

/// Sends photons through the lossy/noisy channel and measures them at the
/// receiver. Mutates `photons` to record loss and interception events.
ChannelOutput transmit_and_measure(std::vector<PhotonRecord>& photons,
                                   const ChannelConfig& channel,
                                   std::uint64_t receiver_seed);

struct SiftResult {
    BitSeq alice_raw;
    BitSeq bob_raw;
};

/// Keeps positions that were received and measured in the preparation basis.
SiftResult sift(const std::vector<Basis>& prep_bases,
                const std::vector<Basis>& receiver_bases,
                const BitSeq& sender_bits,
                const BitSeq& receiver_bits,
                const std::vector<bool>& received_mask);

struct QberOutcome {
    QberEstimate estimate;
    BitSeq alice_remaining;
    BitSeq bob_remaining;
};

/// Compares a seeded random sample of round(sample_fraction * L) positions
/// and removes them from both keys.
QberOutcome estimate_qber(const BitSeq& alice, const BitSeq& bob,
                          double sample_fraction, double e_max,
                          std::uint64_t seed);

/// Cascade-style parity reconciliation: per round an optional identical
/// seeded permutation, K-bit blocks (block size halving each round, floor,
/// min 2), parity comparison, and bisection to locate one erroneous bit per
/// odd block, flipped on the receiver side. Earlier rounds' blocks whose
/// parity toggles after a flip are re-searched.
ReconciliationResult reconcile(const BitSeq& alice, const BitSeq& bob,
                               const ReconConfig& cfg, std::uint64_t seed);

/// Seeded random binary Toeplitz matrix of shape (L-M-s) x L applied over
/// GF(2). Output length is exactly L - M - s.
BitSeq privacy_amplify(const BitSeq& key, const PaParams& params,
                       std::uint64_t seed);

/// How run_pipeline fills M of the privacy-amplification equation.
/// LocalizationOnly counts the parities disclosed while bisecting for
/// errors; AllDisclosed additionally counts every top-level block parity
/// and the bits revealed during error estimation.
enum class LeakagePolicy { LocalizationOnly, AllDisclosed };

struct PipelineConfig {
    std::size_t rounds = 3;
    std::size_t photons_per_round = 100000;
    ChannelConfig channel{0.03, 0.0, Eavesdropping::none()};
    ReconConfig recon{};
    double e_max = 0.11;
    double sample_fraction = 0.1;
    std::size_t security_bits = 64;
    LeakagePolicy leakage_policy = LeakagePolicy::LocalizationOnly;
    std::uint64_t master_seed = 0;

    void validate() const;
};

struct RoundRecord {
    std::size_t round_index = 0; ///< 1-based
    std::size_t pumped = 0;
    std::size_t received = 0;
    std::size_t sifted = 0;
    std::size_t after_estimation = 0;
    std::size_t after_reconciliation = 0;
    std::size_t after_pa = 0;
    bool aborted = false;
    std::string abort_reason;
    QberEstimate qber{};
    std::size_t parities_disclosed = 0;
    std::size_t localization_parities = 0;
    std::size_t corrected_errors = 0;
    std::size_t eve_known_bits = 0; ///< M used in the PA equation
    BitSeq alice_final;
    BitSeq bob_final;
    std::uint64_t round_seed = 0;
};

struct PipelineReport {
    PipelineConfig config;
    std::vector<RoundRecord> rounds;
};

PipelineReport run_pipeline(const PipelineConfig& cfg);

} // namespace qkdrand::qkd

#endif
