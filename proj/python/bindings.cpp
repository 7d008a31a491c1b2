#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qkdrand/battery.hpp"
#include "qkdrand/bitseq.hpp"
#include "qkdrand/errors.hpp"
#include "qkdrand/fetch.hpp"
#include "qkdrand/qkd.hpp"
#include "qkdrand/stats.hpp"

namespace py = pybind11;
using namespace qkdrand;

namespace {

BitSeq seq_from_object(const py::object& obj) {
    if (py::isinstance<BitSeq>(obj)) return obj.cast<BitSeq>();
    if (py::isinstance<py::str>(obj))
        return BitSeq::from_ascii(obj.cast<std::string>());
    throw py::type_error("expected a BitSeq or a '0'/'1' string");
}

py::dict result_to_dict(const battery::TestResult& r) {
    py::dict params, statistics;
    for (const auto& [k, v] : r.params) params[py::str(k)] = v;
    for (const auto& [k, v] : r.statistics) statistics[py::str(k)] = v;
    py::dict out;
    out["test"] = r.test_id;
    out["params"] = params;
    out["statistics"] = statistics;
    out["p_values"] = r.p_values;
    out["alpha"] = r.alpha;
    out["verdict"] = battery::verdict_name(r.verdict);
    out["skip_reason"] = r.skip_reason;
    return out;
}

} // namespace

PYBIND11_MODULE(qkdrand, m) {
    m.doc() = "BB84 QKD pipeline simulator with a statistical randomness battery";

    py::register_exception<Error>(m, "QkdrandError");

    py::class_<BitSeq>(m, "BitSeq")
        .def(py::init<>())
        .def(py::init([](const std::string& text) {
                 return BitSeq::from_ascii(text);
             }),
             py::arg("bits"))
        .def_static("from_ascii",
                    [](const std::string& text) { return BitSeq::from_ascii(text); })
        .def_static(
            "load",
            [](const std::string& path, const std::string& format) {
                return BitSeq::load(path, format == "raw_packed"
                                              ? BitFormat::RawPacked
                                              : BitFormat::Ascii01);
            },
            py::arg("path"), py::arg("format") = "ascii01")
        .def(
            "save",
            [](const BitSeq& seq, const std::string& path,
               const std::string& format) {
                seq.save(path, format == "raw_packed" ? BitFormat::RawPacked
                                                      : BitFormat::Ascii01);
            },
            py::arg("path"), py::arg("format") = "ascii01")
        .def("__len__", &BitSeq::size)
        .def("__getitem__",
             [](const BitSeq& seq, std::size_t i) {
                 if (i >= seq.size()) throw py::index_error();
                 return seq.get(i);
             })
        .def("__eq__", [](const BitSeq& a, const BitSeq& b) { return a == b; })
        .def("__str__", &BitSeq::to_ascii)
        .def("to01", &BitSeq::to_ascii)
        .def("ones_count", &BitSeq::ones_count)
        .def("slice", &BitSeq::slice, py::arg("start"), py::arg("length"));

    // numerical primitives
    m.def("erfc", &stats::erfc, py::arg("x"));
    m.def("igamc_q", &stats::igamc_q, py::arg("a"), py::arg("x"));
    m.def("normal_cdf", &stats::normal_cdf, py::arg("x"));
    m.def(
        "berlekamp_massey",
        [](const py::object& seq) {
            return stats::berlekamp_massey(seq_from_object(seq));
        },
        py::arg("seq"), "Linear complexity of a bit sequence");
    m.def(
        "gf2_rank",
        [](const std::vector<std::vector<int>>& rows) {
            if (rows.empty() || rows[0].empty())
                throw DomainError("matrix must be non-empty");
            stats::Gf2Matrix mat(rows.size(), rows[0].size());
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != rows[0].size())
                    throw DomainError("ragged matrix");
                for (std::size_t c = 0; c < rows[r].size(); ++c)
                    if (rows[r][c]) mat.set(r, c, true);
            }
            return mat.rank();
        },
        py::arg("rows"), "Rank of a 0/1 matrix over GF(2)");

    // qkd pipeline
    py::class_<qkd::QberEstimate>(m, "QberEstimate")
        .def_readonly("error_rate", &qkd::QberEstimate::error_rate)
        .def_readonly("threshold", &qkd::QberEstimate::threshold)
        .def_readonly("sampled_bits", &qkd::QberEstimate::sampled_bits)
        .def_readonly("abort", &qkd::QberEstimate::abort);

    py::class_<qkd::RoundRecord>(m, "RoundRecord")
        .def_readonly("round_index", &qkd::RoundRecord::round_index)
        .def_readonly("pumped", &qkd::RoundRecord::pumped)
        .def_readonly("received", &qkd::RoundRecord::received)
        .def_readonly("sifted", &qkd::RoundRecord::sifted)
        .def_readonly("after_estimation", &qkd::RoundRecord::after_estimation)
        .def_readonly("after_reconciliation",
                      &qkd::RoundRecord::after_reconciliation)
        .def_readonly("after_pa", &qkd::RoundRecord::after_pa)
        .def_readonly("aborted", &qkd::RoundRecord::aborted)
        .def_readonly("abort_reason", &qkd::RoundRecord::abort_reason)
        .def_readonly("qber", &qkd::RoundRecord::qber)
        .def_readonly("parities_disclosed", &qkd::RoundRecord::parities_disclosed)
        .def_readonly("localization_parities",
                      &qkd::RoundRecord::localization_parities)
        .def_readonly("corrected_errors", &qkd::RoundRecord::corrected_errors)
        .def_readonly("eve_known_bits", &qkd::RoundRecord::eve_known_bits)
        .def_readonly("alice_final", &qkd::RoundRecord::alice_final)
        .def_readonly("bob_final", &qkd::RoundRecord::bob_final);

    m.def(
        "privacy_amplify",
        [](const py::object& key, std::size_t eve_known_bits,
           std::size_t security_bits, std::uint64_t seed) {
            const auto bits = seq_from_object(key);
            return qkd::privacy_amplify(
                bits, {bits.size(), eve_known_bits, security_bits}, seed);
        },
        py::arg("key"), py::arg("eve_known_bits"), py::arg("security_bits"),
        py::arg("seed"),
        "Toeplitz privacy amplification to length L - M - s");

    m.def(
        "run_pipeline",
        [](std::size_t photons, std::size_t rounds, double flip_prob,
           double loss_prob, double eve_fraction, double sample_fraction,
           double e_max, std::size_t recon_block, std::size_t recon_rounds,
           bool permute, std::size_t security_bits,
           const std::string& leakage_policy, std::uint64_t seed) {
            qkd::PipelineConfig cfg;
            cfg.photons_per_round = photons;
            cfg.rounds = rounds;
            cfg.channel.flip_prob = flip_prob;
            cfg.channel.loss_prob = loss_prob;
            if (eve_fraction > 0.0)
                cfg.channel.eve = qkd::Eavesdropping::intercept_resend(eve_fraction);
            cfg.sample_fraction = sample_fraction;
            cfg.e_max = e_max;
            cfg.recon.block_bits = recon_block;
            cfg.recon.rounds = recon_rounds;
            cfg.recon.permute_between_rounds = permute;
            cfg.security_bits = security_bits;
            cfg.leakage_policy = leakage_policy == "all_disclosed"
                                     ? qkd::LeakagePolicy::AllDisclosed
                                     : qkd::LeakagePolicy::LocalizationOnly;
            cfg.master_seed = seed;
            cfg.validate();
            return qkd::run_pipeline(cfg).rounds;
        },
        py::arg("photons") = 100000, py::arg("rounds") = 3,
        py::arg("flip_prob") = 0.03, py::arg("loss_prob") = 0.0,
        py::arg("eve_fraction") = 0.0, py::arg("sample_fraction") = 0.1,
        py::arg("e_max") = 0.11, py::arg("recon_block") = 16,
        py::arg("recon_rounds") = 3, py::arg("permute") = true,
        py::arg("security_bits") = 64,
        py::arg("leakage_policy") = "localization_only", py::arg("seed") = 0,
        "Run the full BB84 pipeline; returns the per-round records");

    // battery
    m.def(
        "run_battery",
        [](const py::object& seq, double alpha,
           const std::optional<std::vector<std::string>>& tests) {
            battery::BatteryConfig cfg;
            cfg.alpha = alpha;
            cfg.enabled = tests;
            const auto report = battery::run_battery(seq_from_object(seq), cfg);
            py::list results;
            for (const auto& r : report.results) results.append(result_to_dict(r));
            return results;
        },
        py::arg("seq"), py::arg("alpha") = 0.01,
        py::arg("tests") = py::none(),
        "Run the randomness battery; returns one dict per test (None = all)");
    m.def("battery_tests", [] { return battery::registry(); },
          "Battery test ids in report order");
    m.def(
        "frequency_monobit",
        [](const py::object& seq, double alpha) {
            return result_to_dict(battery::frequency_monobit(seq_from_object(seq), alpha));
        },
        py::arg("seq"), py::arg("alpha") = 0.01);
    m.def(
        "serial_test",
        [](const py::object& seq, std::size_t pattern_bits, double alpha) {
            return result_to_dict(
                battery::serial_test(seq_from_object(seq), pattern_bits, alpha));
        },
        py::arg("seq"), py::arg("pattern_bits") = 5, py::arg("alpha") = 0.01);

    m.def(
        "fetch_remote_bits",
        [](const std::string& endpoint, std::size_t nbits, std::size_t timeout_ms) {
            FetchOptions options;
            options.timeout_ms = timeout_ms;
            return fetch_remote_bits(endpoint, nbits, options);
        },
        py::arg("endpoint"), py::arg("nbits"), py::arg("timeout_ms") = 5000);
}
