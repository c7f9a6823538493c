#include "record.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace nhmps::cli {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvWriter::Impl {
  std::ofstream file;
  std::size_t n_cols = 0;
  std::string path;
};

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : impl_(new Impl) {
  impl_->file.open(path);
  impl_->path = path;
  if (!impl_->file) {
    delete impl_;
    throw std::runtime_error("cannot open output file " + path);
  }
  impl_->n_cols = header.size();
  row(header);
}

CsvWriter::~CsvWriter() { delete impl_; }

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != impl_->n_cols)
    throw std::logic_error("csv row width mismatch in " + impl_->path);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) impl_->file << ',';
    impl_->file << cells[i];
  }
  impl_->file << '\n';
  if (!impl_->file) throw std::runtime_error("write failed for " + impl_->path);
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path);
}

RunRecord::RunRecord(const RunConfig& cfg, const ConfigEcho& echo)
    : start_(std::chrono::steady_clock::now()) {
  record_["version"] = kVersion;
  record_["command"] = cfg.command;
  record_["seed"] = cfg.solver.seed;
  nlohmann::json e = nlohmann::json::object();
  for (const auto& [k, v] : echo) e[k] = v;
  record_["config"] = e;
}

void RunRecord::finalize(const std::string& path, int exit_code) {
  record_["results"] = results_;
  record_["exit_code"] = exit_code;
  const auto elapsed = std::chrono::steady_clock::now() - start_;
  record_["wall_time_s"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() / 1000.0;
  write_text_file(path, record_.dump(2) + "\n");
}

void ensure_output_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

}  // namespace nhmps::cli
