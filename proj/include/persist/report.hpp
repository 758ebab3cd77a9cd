#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace persist {

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);
// Round-trip decimal (%.17g); "nan"/"inf" spelled out.
std::string fmt(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

struct OutputEntry {
  std::string file;  // relative to the output directory
  std::string hash;
};

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<OutputEntry> outputs;
  std::string status = "ok";
};

// Writes under `dir` and records the file with its content hash.
void write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                  RunManifest& manifest);
void write_manifest(const std::filesystem::path& dir, const std::vector<RunManifest>& runs);

struct SvgSeries {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

std::string svg_line_plot(const std::vector<SvgSeries>& series, const std::string& x_label, const std::string& y_label);

std::string code_version();

}  // namespace persist
