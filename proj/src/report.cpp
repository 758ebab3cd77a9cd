#include "persist/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "persist/error.hpp"

#ifndef PERSIST_VERSION
#define PERSIST_VERSION "dev"
#endif

namespace persist {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::logic_error("csv row width does not match the header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << quote(r[i]);
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out.str();
}

void write_output(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                  RunManifest& manifest) {
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + (dir / name).string());
  f << content;
  manifest.outputs.push_back({name, hex64(fnv1a(content))});
}

void write_manifest(const std::filesystem::path& dir, const std::vector<RunManifest>& runs) {
  nlohmann::ordered_json j;
  j["version"] = code_version();
  j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : runs) {
    nlohmann::ordered_json e;
    e["command"] = r.command;
    e["config_digest"] = r.config_digest;
    e["status"] = r.status;
    e["wall_seconds"] = r.wall_seconds;
    e["outputs"] = nlohmann::ordered_json::array();
    for (const auto& o : r.outputs) e["outputs"].push_back({{"file", o.file}, {"hash", o.hash}});
    j["runs"].push_back(e);
  }
  std::filesystem::create_directories(dir);
  std::ofstream f(dir / "manifest.json");
  f << j.dump(2) << '\n';
}

std::string svg_line_plot(const std::vector<SvgSeries>& series, const std::string& x_label, const std::string& y_label) {
  constexpr double W = 640, H = 400, pad = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
  auto py = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  o << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
    << "\" fill=\"none\" stroke=\"#888\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
  o << "<text x=\"12\" y=\"" << H / 2 << "\" transform=\"rotate(-90 12 " << H / 2 << ")\" text-anchor=\"middle\">"
    << y_label << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    o << "<polyline fill=\"none\" stroke=\"" << colors[k % 5] << "\" points=\"";
    for (auto [x, y] : series[k].points)
      if (std::isfinite(x) && std::isfinite(y)) o << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    o << "\"/>\n<text x=\"" << pad + 8 << "\" y=\"" << pad + 16 * (k + 1) << "\" fill=\"" << colors[k % 5] << "\">"
      << series[k].label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string code_version() { return PERSIST_VERSION; }

}  // namespace persist
