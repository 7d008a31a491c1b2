// qkdrand command line: run the BB84 pipeline, run the randomness battery on
// pipeline keys or bit files, and fetch reference bits from a remote
// quantum-RNG HTTP service.
//
// Exit codes: 0 success; 1 battery verdict contains failures (--strict only);
// 2 configuration error; 3 I/O or network error.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qkdrand/battery.hpp"
#include "qkdrand/bitseq.hpp"
#include "qkdrand/errors.hpp"
#include "qkdrand/fetch.hpp"
#include "qkdrand/qkd.hpp"
#include "qkdrand/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBatteryFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

constexpr const char* kDefaultEndpoint = "http://qrng.anu.edu.au/API/jsonI.php";

std::vector<std::string> split_csv(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

qkdrand::BitFormat parse_format(const std::string& name) {
    if (name == "ascii01") return qkdrand::BitFormat::Ascii01;
    if (name == "raw_packed") return qkdrand::BitFormat::RawPacked;
    throw qkdrand::DomainError("unknown format: " + name);
}

bool battery_has_failures(const qkdrand::battery::BatteryReport& report) {
    for (const auto& result : report.results)
        if (result.verdict == qkdrand::battery::Verdict::Fail) return true;
    return false;
}

void write_outputs(const qkdrand::report::ReportDocument& doc,
                   const std::string& json_path, const std::string& csv_path) {
    using qkdrand::report::ReportFormat;
    if (!json_path.empty())
        qkdrand::report::emit_report(doc, ReportFormat::Json, json_path);
    if (!csv_path.empty())
        qkdrand::report::emit_report(doc, ReportFormat::Csv, csv_path);
    if (json_path.empty() && csv_path.empty())
        std::cout << qkdrand::report::to_json(doc);
}

struct SimulateArgs {
    qkdrand::qkd::PipelineConfig pipeline{};
    double eve_fraction = 0.0;
    double alpha = 0.01;
    std::string tests;
    std::string out_json;
    std::string out_csv;
    std::string key_dir;
    std::string leakage_policy = "localization_only";
    bool strict = false;
};

int run_simulate(SimulateArgs& args) {
    auto& cfg = args.pipeline;
    if (args.eve_fraction > 0.0)
        cfg.channel.eve =
            qkdrand::qkd::Eavesdropping::intercept_resend(args.eve_fraction);
    if (args.leakage_policy == "localization_only")
        cfg.leakage_policy = qkdrand::qkd::LeakagePolicy::LocalizationOnly;
    else if (args.leakage_policy == "all_disclosed")
        cfg.leakage_policy = qkdrand::qkd::LeakagePolicy::AllDisclosed;
    else
        throw qkdrand::DomainError("unknown leakage policy: " + args.leakage_policy);
    cfg.validate();

    qkdrand::battery::BatteryConfig battery_cfg;
    battery_cfg.alpha = args.alpha;
    if (!args.tests.empty()) battery_cfg.enabled = split_csv(args.tests);

    const auto pipeline_report = qkdrand::qkd::run_pipeline(cfg);
    std::vector<qkdrand::battery::BatteryReport> batteries;
    bool failures = false;
    for (const auto& round : pipeline_report.rounds) {
        auto report = qkdrand::battery::run_battery(round.alice_final, battery_cfg);
        report.source = "pipeline";
        report.seed = cfg.master_seed;
        report.round_index = round.round_index;
        failures = failures || battery_has_failures(report);
        if (!args.key_dir.empty() && !round.alice_final.empty()) {
            const auto path = std::filesystem::path(args.key_dir) /
                              ("round_" + std::to_string(round.round_index) +
                               ".key");
            round.alice_final.save(path, qkdrand::BitFormat::RawPacked);
        }
        batteries.push_back(std::move(report));
    }
    const auto doc = qkdrand::report::make_report(pipeline_report, batteries);
    write_outputs(doc, args.out_json, args.out_csv);
    return args.strict && failures ? kExitBatteryFailed : kExitOk;
}

struct TestArgs {
    std::string in_path;
    std::string format = "ascii01";
    std::string tests;
    double alpha = 0.01;
    std::string out_json;
    std::string out_csv;
    bool strict = false;
};

int run_test(TestArgs& args) {
    qkdrand::battery::BatteryConfig cfg;
    cfg.alpha = args.alpha;
    if (!args.tests.empty()) cfg.enabled = split_csv(args.tests);
    const auto format = parse_format(args.format);

    const auto bits = qkdrand::BitSeq::load(args.in_path, format);
    auto report = qkdrand::battery::run_battery(bits, cfg);
    report.source = args.in_path;
    const bool failures = battery_has_failures(report);
    const auto doc = qkdrand::report::make_file_report(args.in_path, report);
    write_outputs(doc, args.out_json, args.out_csv);
    return args.strict && failures ? kExitBatteryFailed : kExitOk;
}

struct FetchArgs {
    std::string endpoint;
    std::size_t bits = 0;
    std::string out_path;
    std::string format = "ascii01";
    std::size_t timeout_ms = 5000;
};

int run_fetch(FetchArgs& args) {
    std::string endpoint = args.endpoint;
    if (endpoint.empty()) {
        const char* env = std::getenv("QKDRAND_ENDPOINT");
        endpoint = env && *env ? env : kDefaultEndpoint;
    }
    qkdrand::FetchOptions options;
    options.timeout_ms = args.timeout_ms;
    const auto bits = qkdrand::fetch_remote_bits(endpoint, args.bits, options);
    if (args.out_path.empty()) {
        std::cout << bits.to_ascii() << "\n";
    } else {
        bits.save(args.out_path, parse_format(args.format));
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"BB84 pipeline simulator with a statistical randomness battery"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(qkdrand::report::kToolVersion));

    SimulateArgs sim;
    auto* simulate = app.add_subcommand(
        "simulate", "run the BB84 pipeline and score the distilled keys");
    simulate->add_option("--photons", sim.pipeline.photons_per_round,
                         "photons pumped per round")->capture_default_str();
    simulate->add_option("--rounds", sim.pipeline.rounds, "QKD rounds")
        ->capture_default_str();
    simulate->add_option("--seed", sim.pipeline.master_seed, "master seed")
        ->capture_default_str();
    simulate->add_option("--flip-prob", sim.pipeline.channel.flip_prob,
                         "channel bit-flip probability")->capture_default_str();
    simulate->add_option("--loss-prob", sim.pipeline.channel.loss_prob,
                         "photon loss probability")->capture_default_str();
    simulate->add_option("--eve-fraction", sim.eve_fraction,
                         "intercept-resend fraction (0 disables)")
        ->capture_default_str();
    simulate->add_option("--sample-fraction", sim.pipeline.sample_fraction,
                         "key fraction sacrificed to error estimation")
        ->capture_default_str();
    simulate->add_option("--e-max", sim.pipeline.e_max, "QBER abort threshold")
        ->capture_default_str();
    simulate->add_option("--recon-block", sim.pipeline.recon.block_bits,
                         "first-round reconciliation block size")
        ->capture_default_str();
    simulate->add_option("--recon-rounds", sim.pipeline.recon.rounds,
                         "reconciliation rounds")->capture_default_str();
    simulate->add_flag_function(
        "--no-permute",
        [&sim](std::int64_t) { sim.pipeline.recon.permute_between_rounds = false; },
        "disable the seeded permutation between reconciliation rounds");
    simulate->add_option("--security", sim.pipeline.security_bits,
                         "privacy amplification security parameter s")
        ->capture_default_str();
    simulate->add_option("--leakage-policy", sim.leakage_policy,
                         "eavesdropper-knowledge accounting: localization_only "
                         "or all_disclosed")->capture_default_str();
    simulate->add_option("--alpha", sim.alpha, "battery significance level")
        ->capture_default_str();
    simulate->add_option("--tests", sim.tests,
                         "comma-separated battery test ids (default: all)");
    simulate->add_option("--out", sim.out_json, "JSON report path");
    simulate->add_option("--csv", sim.out_csv, "CSV report path");
    simulate->add_option("--key-dir", sim.key_dir,
                         "directory for per-round final keys (raw_packed)");
    simulate->add_flag("--strict", sim.strict,
                       "exit 1 when any battery test fails");

    TestArgs test;
    auto* test_cmd =
        app.add_subcommand("test", "run the battery on a bit file");
    test_cmd->add_option("--in", test.in_path, "input bit file")->required();
    test_cmd->add_option("--format", test.format, "ascii01 or raw_packed")
        ->capture_default_str();
    test_cmd->add_option("--tests", test.tests,
                         "comma-separated battery test ids (default: all)");
    test_cmd->add_option("--alpha", test.alpha, "significance level")
        ->capture_default_str();
    test_cmd->add_option("--out", test.out_json, "JSON report path");
    test_cmd->add_option("--csv", test.out_csv, "CSV report path");
    test_cmd->add_flag("--strict", test.strict,
                       "exit 1 when any battery test fails");

    FetchArgs fetch;
    auto* fetch_cmd = app.add_subcommand(
        "fetch", "download reference bits from a quantum-RNG HTTP service");
    fetch_cmd->add_option("--bits", fetch.bits, "number of bits")->required();
    fetch_cmd->add_option("--endpoint", fetch.endpoint,
                          "service URL (default: QKDRAND_ENDPOINT env var, "
                          "then the ANU server)");
    fetch_cmd->add_option("--out", fetch.out_path,
                          "output file (stdout if omitted)");
    fetch_cmd->add_option("--format", fetch.format, "ascii01 or raw_packed")
        ->capture_default_str();
    fetch_cmd->add_option("--timeout-ms", fetch.timeout_ms, "request timeout")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (simulate->parsed()) return run_simulate(sim);
        if (test_cmd->parsed()) return run_test(test);
        return run_fetch(fetch);
    } catch (const qkdrand::DomainError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const qkdrand::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
}
