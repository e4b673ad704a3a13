#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cge/besov_analysis.hpp"
#include "cge/coarse_grain.hpp"
#include "cge/regularity_harness.hpp"

namespace cge {

std::string tool_version();

/// Plain-text `key = value` configuration. '#' starts a comment; blank lines
/// are ignored. Keys outside the allowed set are rejected with the line number.
class RunConfig {
public:
    RunConfig() = default;

    static RunConfig parse(std::string_view text, const std::set<std::string>& allowed,
                           const std::string& source = "<config>");
    static RunConfig load(const std::filesystem::path& path, const std::set<std::string>& allowed);

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }
    /// Sorted `key = value` lines; parse(serialize()) reproduces the config.
    std::string serialize() const;

private:
    std::map<std::string, std::string> entries_;
};

/// Context embedded in every report.
struct ReportMeta {
    std::string command;
    std::string field_hash;
    std::string field_descriptor;
    RunConfig config;
};

// JSON reports (UTF-8, two-space indent, stable key order, no timestamps).
std::string report_json(const ReportMeta& meta, const EllipticityReport& report);
std::string report_json(const ReportMeta& meta, const SweepResult& sweep, const std::vector<EllipticityReport>& reports);
std::string report_json(const ReportMeta& meta, const AuditReport& report);
std::string report_json(const ReportMeta& meta, const CriterionReport& report);
std::string report_json(const ReportMeta& meta, const SharpnessReport& report);
std::string report_json(const ReportMeta& meta, const std::vector<ExperimentRecord>& records);

/// One compact JSON object per line.
std::string record_json_line(const ExperimentRecord& record);

/// RFC-4180 CSV: field, descriptor, theta, log-ratio, lb-ratio, pass.
std::string records_csv(const std::vector<ExperimentRecord>& records);

enum class PlotKind { harnack, local_boundedness };

/// CSV with columns x, y, series, field_hash. Harnack: x = Theta^{1/2},
/// y = log-ratio; local boundedness: x = Theta, y = lb ratio. One series per
/// field descriptor. Throws ValidationError on empty input.
std::string emit_plot_data(const std::vector<ExperimentRecord>& records, PlotKind kind);
/// Sharpness sweep: x = sqrt(lambda), y = log-ratio.
std::string emit_plot_data(const SharpnessReport& report, const std::string& field_hash = "");
/// Per-scale terms k -> weighted maxima of an ellipticity report.
std::string emit_scale_terms(const EllipticityReport& report, const std::string& field_hash);

std::string csv_escape(const std::string& field);

}  // namespace cge
