#pragma once

#include <chrono>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace nhmps::cli {

inline constexpr const char* kVersion = "0.1.0";

// Numbers in CSV output are printed with 17 significant digits, enough to
// round-trip a double exactly, so identical runs produce identical files.
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  ~CsvWriter();

  void row(const std::vector<std::string>& cells);

  static std::string num(double v) { return format_number(v); }

 private:
  struct Impl;
  Impl* impl_;
};

void write_text_file(const std::string& path, const std::string& content);

// Every command writes one of these next to its data files: the exact config
// it ran with, a result summary, timing, and the library version.
class RunRecord {
 public:
  RunRecord(const RunConfig& cfg, const ConfigEcho& echo);

  nlohmann::json& results() { return results_; }
  void finalize(const std::string& path, int exit_code);

 private:
  nlohmann::json record_;
  nlohmann::json results_;
  std::chrono::steady_clock::time_point start_;
};

void ensure_output_dir(const std::string& dir);

}  // namespace nhmps::cli
