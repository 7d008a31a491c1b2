#include "qkdrand/qkd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <numeric>

#include "qkdrand/errors.hpp"
#include "qkdrand/rng.hpp"

namespace qkdrand::qkd {

namespace {

void check_prob(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError(std::string(name) + " must lie in [0, 1]");
}

// Seed-derivation tags for the pipeline phases.
enum : std::uint64_t {
    kTagPhotons = 1,
    kTagChannel = 2,
    kTagSample = 3,
    kTagRecon = 4,
    kTagPa = 5,
};

} // namespace

void ChannelConfig::validate() const {
    check_prob(flip_prob, "flip_prob");
    check_prob(loss_prob, "loss_prob");
    if (eve.mode == Eavesdropping::Mode::InterceptResend)
        check_prob(eve.fraction, "eve fraction");
}

void ReconConfig::validate() const {
    if (block_bits < 2) throw DomainError("recon block_bits must be >= 2");
    if (rounds < 1) throw DomainError("recon rounds must be >= 1");
}

void PipelineConfig::validate() const {
    channel.validate();
    recon.validate();
    check_prob(e_max, "e_max");
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
        throw DomainError("sample_fraction must lie in (0, 1)");
}

std::vector<PhotonRecord> generate_photons(std::size_t n, std::uint64_t seed) {
    Xoshiro256 rng(seed);
    std::vector<PhotonRecord> photons(n);
    for (auto& p : photons) {
        p.bit = rng.bit();
        p.prep_basis = rng.bit() ? Basis::Diagonal : Basis::Rectilinear;
    }
    return photons;
}

BitSeq photon_bits(const std::vector<PhotonRecord>& photons) {
    BitSeq bits(photons.size());
    for (std::size_t i = 0; i < photons.size(); ++i)
        if (photons[i].bit) bits.set(i, true);
    return bits;
}

std::vector<Basis> photon_bases(const std::vector<PhotonRecord>& photons) {
    std::vector<Basis> bases(photons.size());
    for (std::size_t i = 0; i < photons.size(); ++i)
        bases[i] = photons[i].prep_basis;
    return bases;
}

ChannelOutput transmit_and_measure(std::vector<PhotonRecord>& photons,
                                   const ChannelConfig& channel,
                                   std::uint64_t receiver_seed) {
    channel.validate();
    Xoshiro256 rng(receiver_seed);
    const std::size_t n = photons.size();
    ChannelOutput out;
    out.receiver_bits = BitSeq(n);
    out.receiver_bases.resize(n);
    out.received_mask.assign(n, false);

    const bool eve_on = channel.eve.mode == Eavesdropping::Mode::InterceptResend;
    for (std::size_t i = 0; i < n; ++i) {
        auto& photon = photons[i];
        // loss happens before the eavesdropper: a lost photon is never
        // intercepted and produces no receiver click
        photon.lost = rng.bernoulli(channel.loss_prob);
        if (photon.lost) {
            // the detector basis is still set, it just never fires
            out.receiver_bases[i] = rng.bit() ? Basis::Diagonal : Basis::Rectilinear;
            continue;
        }

        // State of the photon arriving at the receiver.
        bool arriving_bit = photon.bit;
        Basis arriving_basis = photon.prep_basis;
        if (eve_on && rng.bernoulli(channel.eve.fraction)) {
            const Basis eve_basis = rng.bit() ? Basis::Diagonal : Basis::Rectilinear;
            const bool eve_bit =
                (eve_basis == photon.prep_basis) ? photon.bit : rng.bit();
            photon.eve_basis = eve_basis;
            arriving_bit = eve_bit;     // resent with her result
            arriving_basis = eve_basis; // in her basis
        }

        const Basis recv_basis = rng.bit() ? Basis::Diagonal : Basis::Rectilinear;
        out.receiver_bases[i] = recv_basis;
        bool measured;
        if (recv_basis == arriving_basis)
            measured = arriving_bit ^ rng.bernoulli(channel.flip_prob);
        else
            measured = rng.bit();
        out.received_mask[i] = true;
        if (measured) out.receiver_bits.set(i, true);
    }
    return out;
}

SiftResult sift(const std::vector<Basis>& prep_bases,
                const std::vector<Basis>& receiver_bases,
                const BitSeq& sender_bits,
                const BitSeq& receiver_bits,
                const std::vector<bool>& received_mask) {
    const std::size_t n = prep_bases.size();
    if (receiver_bases.size() != n || sender_bits.size() != n ||
        receiver_bits.size() != n || received_mask.size() != n)
        throw LengthMismatch("sift inputs must have equal length");
    SiftResult result;
    for (std::size_t i = 0; i < n; ++i) {
        if (received_mask[i] && prep_bases[i] == receiver_bases[i]) {
            result.alice_raw.append(sender_bits.get(i));
            result.bob_raw.append(receiver_bits.get(i));
        }
    }
    return result;
}

QberOutcome estimate_qber(const BitSeq& alice, const BitSeq& bob,
                          double sample_fraction, double e_max,
                          std::uint64_t seed) {
    if (alice.size() != bob.size())
        throw LengthMismatch("estimate_qber keys must have equal length");
    if (alice.size() < 10) throw KeyTooShort("estimate_qber needs >= 10 bits");
    if (!(sample_fraction > 0.0 && sample_fraction < 1.0))
        throw DomainError("sample_fraction must lie in (0, 1)");
    check_prob(e_max, "e_max");

    const std::size_t total = alice.size();
    const std::size_t sample_size = static_cast<std::size_t>(
        std::llround(sample_fraction * static_cast<double>(total)));

    // Partial Fisher-Yates: the first sample_size entries are the sample.
    std::vector<std::uint32_t> index(total);
    std::iota(index.begin(), index.end(), 0u);
    Xoshiro256 rng(seed);
    for (std::size_t i = 0; i < sample_size; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(index[i], index[j]);
    }

    std::vector<bool> sampled(total, false);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < sample_size; ++i) {
        sampled[index[i]] = true;
        if (alice.get(index[i]) != bob.get(index[i])) ++mismatches;
    }

    QberOutcome outcome;
    outcome.estimate.sampled_bits = sample_size;
    outcome.estimate.threshold = e_max;
    outcome.estimate.error_rate =
        sample_size ? static_cast<double>(mismatches) / static_cast<double>(sample_size)
                    : 0.0;
    outcome.estimate.abort = outcome.estimate.error_rate > e_max;
    for (std::size_t i = 0; i < total; ++i) {
        if (!sampled[i]) {
            outcome.alice_remaining.append(alice.get(i));
            outcome.bob_remaining.append(bob.get(i));
        }
    }
    return outcome;
}

namespace {

// One round's view of the key: a permutation of bit positions cut into
// consecutive blocks, plus the running alice^bob parity of every block.
struct Partition {
    std::vector<std::uint32_t> order;    // position list
    std::vector<std::uint32_t> slot_of;  // inverse permutation
    std::size_t block_bits = 0;
    std::vector<std::uint8_t> mismatch;  // per-block parity of alice^bob

    std::size_t block_count() const {
        return (order.size() + block_bits - 1) / block_bits;
    }
    std::size_t block_of(std::uint32_t pos) const {
        return slot_of[pos] / block_bits;
    }
};

} // namespace

ReconciliationResult reconcile(const BitSeq& alice, const BitSeq& bob,
                               const ReconConfig& cfg, std::uint64_t seed) {
    if (alice.size() != bob.size())
        throw LengthMismatch("reconcile keys must have equal length");
    cfg.validate();

    ReconciliationResult result;
    result.alice_key = alice;
    result.bob_key = bob;
    const std::size_t total = alice.size();
    if (total == 0) return result;

    std::vector<std::uint8_t> diff(total);
    for (std::size_t i = 0; i < total; ++i)
        diff[i] = alice.get(i) != result.bob_key.get(i);

    Xoshiro256 perm_rng(derive_seed(seed, 0x9e));
    std::vector<Partition> history;
    history.reserve(cfg.rounds);

    const auto block_parity = [&](const Partition& p, std::size_t block) {
        const std::size_t lo = block * p.block_bits;
        const std::size_t hi = std::min(lo + p.block_bits, p.order.size());
        std::uint8_t parity = 0;
        for (std::size_t s = lo; s < hi; ++s) parity ^= diff[p.order[s]];
        return parity;
    };

    std::deque<std::pair<std::size_t, std::size_t>> queue; // (partition, block)

    const auto flip_bob = [&](std::uint32_t pos) {
        result.bob_key.set(pos, !result.bob_key.get(pos));
        diff[pos] ^= 1;
        ++result.corrected_errors;
        for (std::size_t pi = 0; pi < history.size(); ++pi) {
            auto& part = history[pi];
            const std::size_t blk = part.block_of(pos);
            part.mismatch[blk] ^= 1;
            if (part.mismatch[blk]) queue.emplace_back(pi, blk);
        }
    };

    // Bisection over the slot range [lo, hi) of one odd-parity block. Each
    // disclosed half parity is one more leaked bit.
    const auto locate_and_fix = [&](const Partition& p, std::size_t block) {
        std::size_t lo = block * p.block_bits;
        std::size_t hi = std::min(lo + p.block_bits, p.order.size());
        while (hi - lo > 1) {
            const std::size_t mid = lo + (hi - lo) / 2;
            std::uint8_t left = 0;
            for (std::size_t s = lo; s < mid; ++s) left ^= diff[p.order[s]];
            ++result.leaked_bits;
            ++result.localization_leaked_bits;
            if (left)
                hi = mid;
            else
                lo = mid;
        }
        flip_bob(p.order[lo]);
    };

    std::size_t block_bits = cfg.block_bits;
    for (std::size_t round = 0; round < cfg.rounds; ++round) {
        Partition part;
        part.block_bits = block_bits;
        part.order.resize(total);
        std::iota(part.order.begin(), part.order.end(), 0u);
        if (cfg.permute_between_rounds && round > 0)
            perm_rng.shuffle(part.order);
        part.slot_of.resize(total);
        for (std::uint32_t s = 0; s < total; ++s)
            part.slot_of[part.order[s]] = s;

        const std::size_t blocks = part.block_count();
        part.mismatch.resize(blocks);
        history.push_back(std::move(part));
        auto& current = history.back();
        result.leaked_bits += blocks; // one disclosed parity per block
        for (std::size_t b = 0; b < blocks; ++b) {
            current.mismatch[b] = block_parity(current, b);
            if (current.mismatch[b]) queue.emplace_back(history.size() - 1, b);
        }

        while (!queue.empty()) {
            const auto [pi, blk] = queue.front();
            queue.pop_front();
            if (!history[pi].mismatch[blk]) continue; // already settled
            locate_and_fix(history[pi], blk);
        }

        block_bits = std::max<std::size_t>(2, block_bits / 2);
    }
    return result;
}

BitSeq privacy_amplify(const BitSeq& key, const PaParams& params,
                       std::uint64_t seed) {
    if (params.input_length != key.size())
        throw LengthMismatch("PaParams.input_length must equal key length");
    const long long out_len = static_cast<long long>(params.input_length) -
                              static_cast<long long>(params.eve_known_bits) -
                              static_cast<long long>(params.security_bits);
    if (out_len < 1)
        throw NonPositiveOutputLength("privacy amplification needs L - M - s >= 1");

    const std::size_t in_bits = key.size();
    const std::size_t out_bits = static_cast<std::size_t>(out_len);

    // Toeplitz diagonals: out[i] = parity(diag[i .. i+L-1] AND reverse(key)).
    const std::size_t diag_bits = out_bits + in_bits - 1;
    BitSeq diag(diag_bits);
    Xoshiro256 rng(seed);
    for (std::size_t w = 0; w < (diag_bits + 63) / 64; ++w) {
        const std::uint64_t r = rng.next();
        for (unsigned b = 0; b < 64; ++b) {
            const std::size_t i = w * 64 + b;
            if (i >= diag_bits) break;
            if ((r >> b) & 1) diag.set(i, true);
        }
    }

    const BitSeq key_rev = key.reversed();
    const auto kw = key_rev.words();
    const auto dw = diag.words();
    const std::size_t key_words = kw.size();

    BitSeq out(out_bits);
    for (std::size_t i = 0; i < out_bits; ++i) {
        const std::size_t base = i >> 6;
        const unsigned sh = i & 63;
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < key_words; ++w) {
            std::uint64_t window = dw[base + w] >> sh;
            if (sh && base + w + 1 < dw.size()) window |= dw[base + w + 1] << (64 - sh);
            acc ^= window & kw[w];
        }
        if (std::popcount(acc) & 1) out.set(i, true);
    }
    return out;
}

PipelineReport run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    PipelineReport report;
    report.config = cfg;
    report.rounds.reserve(cfg.rounds);

    for (std::size_t round = 0; round < cfg.rounds; ++round) {
        RoundRecord rec;
        rec.round_index = round + 1;
        rec.round_seed = derive_seed(cfg.master_seed, round);
        rec.pumped = cfg.photons_per_round;

        auto photons =
            generate_photons(cfg.photons_per_round, derive_seed(rec.round_seed, kTagPhotons));
        auto channel_out = transmit_and_measure(
            photons, cfg.channel, derive_seed(rec.round_seed, kTagChannel));
        rec.received = static_cast<std::size_t>(std::count(
            channel_out.received_mask.begin(), channel_out.received_mask.end(), true));

        auto sifted = sift(photon_bases(photons), channel_out.receiver_bases,
                           photon_bits(photons), channel_out.receiver_bits,
                           channel_out.received_mask);
        rec.sifted = sifted.alice_raw.size();

        if (rec.sifted < 10) {
            rec.aborted = true;
            rec.abort_reason = "sifted key too short";
            report.rounds.push_back(std::move(rec));
            continue;
        }

        auto qber = estimate_qber(sifted.alice_raw, sifted.bob_raw,
                                  cfg.sample_fraction, cfg.e_max,
                                  derive_seed(rec.round_seed, kTagSample));
        rec.qber = qber.estimate;
        rec.after_estimation = qber.alice_remaining.size();
        if (qber.estimate.abort) {
            rec.aborted = true;
            rec.abort_reason = "error rate above threshold";
            report.rounds.push_back(std::move(rec));
            continue;
        }

        auto recon = reconcile(qber.alice_remaining, qber.bob_remaining,
                               cfg.recon, derive_seed(rec.round_seed, kTagRecon));
        rec.after_reconciliation = recon.alice_key.size();
        rec.parities_disclosed = recon.leaked_bits;
        rec.localization_parities = recon.localization_leaked_bits;
        rec.corrected_errors = recon.corrected_errors;

        rec.eve_known_bits =
            cfg.leakage_policy == LeakagePolicy::LocalizationOnly
                ? recon.localization_leaked_bits
                : recon.leaked_bits + qber.estimate.sampled_bits;

        const long long out_len =
            static_cast<long long>(rec.after_reconciliation) -
            static_cast<long long>(rec.eve_known_bits) -
            static_cast<long long>(cfg.security_bits);
        if (out_len < 1) {
            rec.aborted = true;
            rec.abort_reason = "no bits left after privacy amplification";
            report.rounds.push_back(std::move(rec));
            continue;
        }

        const PaParams pa{rec.after_reconciliation, rec.eve_known_bits,
                          cfg.security_bits};
        const std::uint64_t pa_seed = derive_seed(rec.round_seed, kTagPa);
        rec.alice_final = privacy_amplify(recon.alice_key, pa, pa_seed);
        rec.bob_final = privacy_amplify(recon.bob_key, pa, pa_seed);
        rec.after_pa = rec.alice_final.size();
        report.rounds.push_back(std::move(rec));
    }
    return report;
}

} // namespace qkdrand::qkd
