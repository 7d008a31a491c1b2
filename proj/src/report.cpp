#include "qkdrand/report.hpp"

#include <cstdio>
#include <fstream>

#include "qkdrand/errors.hpp"

namespace qkdrand::report {

namespace {

const char* phase_names[] = {"pumped",         "received",
                             "sifted",         "after_estimation",
                             "after_reconciliation", "after_pa"};

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof buf, "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

// Minimal ordered JSON writer; nlohmann stays on the parsing side so the
// emitted bytes are under full control.
class JsonWriter {
public:
    void begin_object() { sep(); out_ += '{'; stack_.push_back(true); }
    void end_object() { out_ += '}'; stack_.pop_back(); fresh_ = false; }
    void begin_array() { sep(); out_ += '['; stack_.push_back(true); }
    void end_array() { out_ += ']'; stack_.pop_back(); fresh_ = false; }
    void key(const std::string& k) {
        sep();
        out_ += '"';
        out_ += json_escape(k);
        out_ += "\":";
        fresh_ = true;
    }
    void value(const std::string& v) {
        sep();
        out_ += '"';
        out_ += json_escape(v);
        out_ += '"';
    }
    void value_raw(const std::string& v) { sep(); out_ += v; }
    void value(std::size_t v) { value_raw(std::to_string(v)); }
    void value(bool v) { value_raw(v ? "true" : "false"); }
    void value(double v) { value_raw(format_fixed(v)); }
    std::string take() { return std::move(out_); }

private:
    void sep() {
        if (!fresh_ && !out_.empty() && out_.back() != '{' && out_.back() != '[')
            out_ += ',';
        fresh_ = false;
    }
    std::string out_;
    std::vector<bool> stack_;
    bool fresh_ = false;
};

} // namespace

std::string format_fixed(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", value);
    return buf;
}

ReportDocument make_report(const qkd::PipelineReport& pipeline,
                           const std::vector<battery::BatteryReport>& batteries) {
    const auto& cfg = pipeline.config;
    ReportDocument doc;
    doc.config = {
        {"rounds", std::to_string(cfg.rounds)},
        {"photons_per_round", std::to_string(cfg.photons_per_round)},
        {"flip_prob", format_fixed(cfg.channel.flip_prob)},
        {"loss_prob", format_fixed(cfg.channel.loss_prob)},
        {"eve_mode", cfg.channel.eve.mode == qkd::Eavesdropping::Mode::None
                         ? "none"
                         : "intercept_resend"},
        {"eve_fraction", format_fixed(cfg.channel.eve.fraction)},
        {"sample_fraction", format_fixed(cfg.sample_fraction)},
        {"e_max", format_fixed(cfg.e_max)},
        {"recon_block_bits", std::to_string(cfg.recon.block_bits)},
        {"recon_rounds", std::to_string(cfg.recon.rounds)},
        {"recon_permute",
         cfg.recon.permute_between_rounds ? "true" : "false"},
        {"security_bits", std::to_string(cfg.security_bits)},
        {"leakage_policy",
         cfg.leakage_policy == qkd::LeakagePolicy::LocalizationOnly
             ? "localization_only"
             : "all_disclosed"},
        {"master_seed", std::to_string(cfg.master_seed)},
    };
    for (const auto& round : pipeline.rounds) {
        const std::size_t counts[] = {round.pumped,
                                      round.received,
                                      round.sifted,
                                      round.after_estimation,
                                      round.after_reconciliation,
                                      round.after_pa};
        for (std::size_t p = 0; p < 6; ++p)
            doc.attrition.push_back({round.round_index, phase_names[p], counts[p]});
        RoundSummary summary;
        summary.round = round.round_index;
        summary.aborted = round.aborted;
        summary.abort_reason = round.abort_reason;
        summary.qber = round.qber.error_rate;
        summary.qber_threshold = round.qber.threshold;
        summary.sampled_bits = round.qber.sampled_bits;
        summary.parities_disclosed = round.parities_disclosed;
        summary.localization_parities = round.localization_parities;
        summary.corrected_errors = round.corrected_errors;
        summary.eve_known_bits = round.eve_known_bits;
        summary.security_bits = pipeline.config.security_bits;
        summary.final_key_bits = round.after_pa;
        doc.rounds.push_back(std::move(summary));
    }
    for (std::size_t i = 0; i < batteries.size(); ++i)
        doc.batteries.push_back(
            {i < pipeline.rounds.size() ? pipeline.rounds[i].round_index : i + 1,
             batteries[i]});
    return doc;
}

ReportDocument make_file_report(const std::string& source,
                                const battery::BatteryReport& report) {
    ReportDocument doc;
    doc.config = {
        {"source", source},
        {"sequence_bits", std::to_string(report.sequence_bits)},
        {"alpha", format_fixed(report.results.empty()
                                   ? 0.01
                                   : report.results.front().alpha)},
    };
    doc.batteries.push_back({1, report});
    return doc;
}

namespace {

void write_battery_json(JsonWriter& w, const RoundBattery& rb) {
    w.begin_object();
    w.key("round");
    w.value(rb.round);
    w.key("sequence_bits");
    w.value(rb.report.sequence_bits);
    w.key("results");
    w.begin_array();
    for (const auto& t : rb.report.results) {
        w.begin_object();
        w.key("test");
        w.value(t.test_id);
        w.key("params");
        w.begin_object();
        for (const auto& [k, v] : t.params) {
            w.key(k);
            w.value(v);
        }
        w.end_object();
        w.key("statistics");
        w.begin_object();
        for (const auto& [k, v] : t.statistics) {
            w.key(k);
            w.value(v);
        }
        w.end_object();
        w.key("p_values");
        w.begin_array();
        for (double p : t.p_values) w.value(p);
        w.end_array();
        w.key("verdict");
        w.value(std::string(battery::verdict_name(t.verdict)));
        w.key("skip_reason");
        w.value(t.skip_reason);
        w.end_object();
    }
    w.end_array();
    w.end_object();
}

} // namespace

std::string to_json(const ReportDocument& doc) {
    JsonWriter w;
    w.begin_object();
    w.key("tool");
    w.value(std::string(kToolName));
    w.key("version");
    w.value(std::string(kToolVersion));
    w.key("config");
    w.begin_object();
    for (const auto& [k, v] : doc.config) {
        w.key(k);
        w.value(v);
    }
    w.end_object();
    w.key("attrition");
    w.begin_array();
    for (const auto& row : doc.attrition) {
        w.begin_object();
        w.key("round");
        w.value(row.round);
        w.key("phase");
        w.value(row.phase);
        w.key("bits");
        w.value(row.bits);
        w.end_object();
    }
    w.end_array();
    w.key("rounds");
    w.begin_array();
    for (const auto& r : doc.rounds) {
        w.begin_object();
        w.key("round");
        w.value(r.round);
        w.key("aborted");
        w.value(r.aborted);
        w.key("abort_reason");
        w.value(r.abort_reason);
        w.key("qber");
        w.value(r.qber);
        w.key("qber_threshold");
        w.value(r.qber_threshold);
        w.key("sampled_bits");
        w.value(r.sampled_bits);
        w.key("parities_disclosed");
        w.value(r.parities_disclosed);
        w.key("localization_parities");
        w.value(r.localization_parities);
        w.key("corrected_errors");
        w.value(r.corrected_errors);
        w.key("eve_known_bits");
        w.value(r.eve_known_bits);
        w.key("security_bits");
        w.value(r.security_bits);
        w.key("final_key_bits");
        w.value(r.final_key_bits);
        w.end_object();
    }
    w.end_array();
    w.key("battery");
    w.begin_array();
    for (const auto& rb : doc.batteries) write_battery_json(w, rb);
    w.end_array();
    w.end_object();
    std::string out = w.take();
    out += '\n';
    return out;
}

std::string to_csv(const ReportDocument& doc) {
    std::string out = "round,phase,bits\n";
    for (const auto& row : doc.attrition) {
        out += std::to_string(row.round);
        out += ',';
        out += row.phase;
        out += ',';
        out += std::to_string(row.bits);
        out += '\n';
    }
    out += "\nround,test,pvalue_index,pvalue,verdict\n";
    for (const auto& rb : doc.batteries) {
        for (const auto& t : rb.report.results) {
            if (t.verdict == battery::Verdict::Skipped) {
                out += std::to_string(rb.round);
                out += ',';
                out += t.test_id;
                out += ",0,,skipped\n";
                continue;
            }
            for (std::size_t i = 0; i < t.p_values.size(); ++i) {
                out += std::to_string(rb.round);
                out += ',';
                out += t.test_id;
                out += ',';
                out += std::to_string(i);
                out += ',';
                out += format_fixed(t.p_values[i]);
                out += ',';
                out += battery::verdict_name(t.verdict);
                out += '\n';
            }
        }
    }
    return out;
}

void emit_report(const ReportDocument& doc, ReportFormat format,
                 const std::filesystem::path& path) {
    const std::string body =
        format == ReportFormat::Json ? to_json(doc) : to_csv(doc);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    out.flush();
    if (!out) throw IoError("write failed on " + path.string());
}

} // namespace qkdrand::report
