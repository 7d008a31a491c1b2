#ifndef QKDRAND_REPORT_HPP
#define QKDRAND_REPORT_HPP

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qkdrand/battery.hpp"
#include "qkdrand/qkd.hpp"

namespace qkdrand::report {

inline constexpr const char* kToolName = "qkdrand";
inline constexpr const char* kToolVersion = "0.1.0";

struct AttritionRow {
    std::size_t round = 0;
    std::string phase;
    std::size_t bits = 0;
};

struct RoundSummary {
    std::size_t round = 0;
    bool aborted = false;
    std::string abort_reason;
    double qber = 0.0;
    double qber_threshold = 0.0;
    std::size_t sampled_bits = 0;
    std::size_t parities_disclosed = 0;
    std::size_t localization_parities = 0;
    std::size_t corrected_errors = 0;
    std::size_t eve_known_bits = 0;
    std::size_t security_bits = 0;
    std::size_t final_key_bits = 0;
};

struct RoundBattery {
    std::size_t round = 0;
    battery::BatteryReport report;
};

/// The document serialized by emit_report: stable key order, doubles fixed
/// to six decimal places, so identical inputs yield identical bytes.
struct ReportDocument {
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<AttritionRow> attrition;
    std::vector<RoundSummary> rounds;
    std::vector<RoundBattery> batteries;
};

/// Attrition rows, round summaries, and per-round battery results for a
/// pipeline run. `batteries[i]` belongs to `pipeline.rounds[i]`.
ReportDocument make_report(const qkd::PipelineReport& pipeline,
                           const std::vector<battery::BatteryReport>& batteries);

/// Document for a battery run over an externally supplied sequence.
ReportDocument make_file_report(const std::string& source,
                                const battery::BatteryReport& report);

std::string format_fixed(double value); ///< six decimal places, no locale

std::string to_json(const ReportDocument& doc);
std::string to_csv(const ReportDocument& doc);

enum class ReportFormat { Json, Csv };

void emit_report(const ReportDocument& doc, ReportFormat format,
                 const std::filesystem::path& path);

} // namespace qkdrand::report

#endif
