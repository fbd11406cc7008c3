#include "ergode/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ergode {

Report::Report(std::uint64_t seed, std::string config_hash) : seed_(seed), config_hash_(std::move(config_hash)) {}

void Report::add(std::string experiment_id, std::string quantity, double value, double lower, double upper,
                 std::string params) {
  if (!(lower <= value && value <= upper)) {
    throw std::logic_error("report row " + experiment_id + "/" + quantity + ": bracket [" + format_number(lower) + ", " +
                           format_number(upper) + "] misses value " + format_number(value));
  }
  const auto now = std::chrono::steady_clock::now();
  const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
  last_ = now;
  rows_.push_back({std::move(experiment_id), std::move(quantity), value, lower, upper, std::move(params), ms});
}

void Report::add_exact(std::string experiment_id, std::string quantity, double value, std::string params) {
  add(std::move(experiment_id), std::move(quantity), value, value, value, std::move(params));
}

void Report::mark_incomplete(std::string reason) {
  incomplete_ = true;
  incomplete_reason_ = std::move(reason);
  add_exact("run", "incomplete", 1.0, "reason=" + incomplete_reason_);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Report::csv() const {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& r : rows_) {
    char ms[32];
    std::snprintf(ms, sizeof ms, "%.3f", r.runtime_ms);
    os << csv_field(r.experiment_id) << ',' << csv_field(r.quantity) << ',' << format_number(r.value) << ','
       << format_number(r.lower) << ',' << format_number(r.upper) << ',' << csv_field(r.params) << ',' << ms << '\n';
  }
  return os.str();
}

void Report::write(const std::filesystem::path& dir, bool with_diagnostics) const {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& body) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    f << body;
  };
  put("report.csv", csv());
  nlohmann::json meta = {{"artifact_version", kArtifactVersion},
                         {"seed", seed_},
                         {"config_hash", config_hash_},
                         {"rows", rows_.size()},
                         {"incomplete", incomplete_}};
  if (incomplete_) meta["incomplete_reason"] = incomplete_reason_;
  put("report.meta.json", meta.dump(2) + "\n");
  for (const auto& [name, body] : attachments_) put(name, body);
  if (with_diagnostics) put("diagnostics.json", diagnostics_.dump(2) + "\n");
}

}  // namespace ergode
