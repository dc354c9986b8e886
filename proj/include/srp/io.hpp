// Output plumbing: CSV files with a '#'-prefixed JSON metadata header line
// (resolved config, version, timestamp), and a minimal JUnit XML writer for
// the verification suites.
#pragma once

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "srp/analysis.hpp"

namespace srp {

inline const char* version_string() { return "0.1.0"; }

// FNV-1a over the canonical dump of a JSON value; embedded in outputs so a
// result can be traced back to the exact configuration that produced it.
inline std::string config_hash(const json& j) {
    std::string dump = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const json& config,
              const std::vector<std::string>& columns)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        json meta{{"config", config},
                  {"version", version_string()},
                  {"config_hash", config_hash(config)},
                  {"timestamp", iso_timestamp()}};
        out_ << "# " << meta.dump() << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i)
            out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
    }

    void row(const std::vector<double>& values) {
        char buf[64];
        for (std::size_t i = 0; i < values.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
            out_ << buf << (i + 1 < values.size() ? "," : "\n");
        }
    }
    void raw_row(const std::string& line) { out_ << line << "\n"; }

  private:
    std::ofstream out_;
};

// One <testcase> per check, failures carried as <failure> nodes.
inline void write_junit(const std::string& path, const std::string& suite_name,
                        const std::vector<CheckReport>& reports) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open junit file: " + path);
    int failures = 0;
    for (const auto& r : reports) failures += r.pass ? 0 : 1;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<testsuite name=\"" << suite_name << "\" tests=\"" << reports.size()
        << "\" failures=\"" << failures << "\">\n";
    for (const auto& r : reports) {
        out << "  <testcase name=\"" << r.check << " " << config_hash(r.params) << "\">";
        if (!r.pass)
            out << "\n    <failure message=\"margin " << r.margin << "\">" << r.to_json().dump()
                << "</failure>\n  ";
        out << "</testcase>\n";
    }
    out << "</testsuite>\n";
}

}  // namespace srp
