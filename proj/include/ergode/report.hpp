#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace ergode {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr const char* kCsvHeader = "experiment_id,quantity,value,lower,upper,params,runtime_ms";

struct ReportRow {
  std::string experiment_id;
  std::string quantity;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::string params;
  double runtime_ms = 0.0;
};

class Report {
 public:
  Report(std::uint64_t seed, std::string config_hash);

  /// Appends a row; lower <= value <= upper is required. runtime_ms is the
  /// time since the previous row (or since construction).
  void add(std::string experiment_id, std::string quantity, double value, double lower, double upper,
           std::string params = {});
  /// A row whose value is exact.
  void add_exact(std::string experiment_id, std::string quantity, double value, std::string params = {});

  /// Flags the report and appends a final `incomplete` row carrying the reason.
  void mark_incomplete(std::string reason);
  /// Extra file written next to the report.
  void attach(std::string name, std::string body) { attachments_.emplace_back(std::move(name), std::move(body)); }
  bool incomplete() const { return incomplete_; }
  const std::vector<ReportRow>& rows() const { return rows_; }
  nlohmann::json& diagnostics() { return diagnostics_; }

  std::string csv() const;
  /// Writes report.csv and report.meta.json, plus diagnostics.json when asked.
  void write(const std::filesystem::path& dir, bool with_diagnostics) const;

 private:
  std::uint64_t seed_;
  std::string config_hash_;
  std::vector<ReportRow> rows_;
  nlohmann::json diagnostics_ = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> attachments_;
  bool incomplete_ = false;
  std::string incomplete_reason_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

/// 17 significant digits, "inf"/"-inf"/"nan" for non-finite values.
std::string format_number(double v);
/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);
/// FNV-1a of the canonical (sorted-key) JSON dump, 16 hex digits.
std::string config_hash(const nlohmann::json& config);

}  // namespace ergode
