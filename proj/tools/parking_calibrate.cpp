// Monte Carlo calibration of the parking-lot statistic: distribution of the
// number of successfully parked cars over many reference-PRNG sequences on
// exactly the geometry battery::parking_successes implements. The resulting
// mean and sigma are the BatteryConfig defaults (see README).
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <random>

#include <CLI11.hpp>

#include "qkdrand/battery.hpp"
#include "qkdrand/bitseq.hpp"

namespace {

qkdrand::BitSeq reference_bits(std::uint64_t seed, std::size_t nbits) {
    std::mt19937_64 gen(seed);
    qkdrand::BitSeq seq(nbits);
    std::size_t i = 0;
    while (i < nbits) {
        const std::uint64_t w = gen();
        for (int b = 63; b >= 0 && i < nbits; --b, ++i)
            if ((w >> b) & 1) seq.set(i, true);
    }
    return seq;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Calibrate the parking-lot test mean and sigma"};
    std::size_t trials = 40000;
    std::size_t attempts = 12000;
    std::uint64_t seed = 1;
    app.add_option("--trials", trials, "Monte Carlo trials")->capture_default_str();
    app.add_option("--attempts", attempts, "parking attempts per trial")
        ->capture_default_str();
    app.add_option("--seed", seed, "reference PRNG seed")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto bits = reference_bits(seed + t, attempts * 64);
        const auto parked = static_cast<double>(
            qkdrand::battery::parking_successes(bits, attempts));
        sum += parked;
        sum_sq += parked * parked;
    }
    const double n = static_cast<double>(trials);
    const double mean = sum / n;
    const double variance = (sum_sq - sum * sum / n) / (n - 1.0);
    std::printf("trials %zu attempts %zu seed %" PRIu64 "\n", trials, attempts, seed);
    std::printf("mean %.6f\n", mean);
    std::printf("sigma %.6f\n", std::sqrt(variance));
    return 0;
}
