#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "efk/ode1d.hpp"
#include "efk/strip.hpp"

namespace efk {

/// Shortest round-trip decimal; infinities as "+inf"/"-inf", NaN as "nan".
std::string format_number(double x);

/// RFC 4180 table builder: CRLF line ends, fields quoted only when needed.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(const std::vector<std::string>& fields);
  CsvTable& row(const std::vector<double>& values);

  const std::string& str() const { return text_; }

 private:
  void append(const std::vector<std::string>& fields);

  std::size_t columns_;
  std::string text_;
};

std::string csv_quote(std::string_view field);

/// Parses RFC 4180 text (CRLF or LF line ends) into rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Header JSON `<stem>.json` plus `<stem>.u.f64` and `<stem>.v.f64` holding
/// little-endian doubles in grid storage order. Returns the three paths.
std::vector<std::filesystem::path> write_field(const std::filesystem::path& dir, const std::string& stem,
                                               const SolutionField& fld);
/// Reads a field back from its header; binaries are resolved next to it.
SolutionField read_field(const std::filesystem::path& header);

/// Profile as CSV with header `x,u`.
std::string profile_csv(const Profile1D& p);
/// Reads an `x,u` CSV on a uniform grid back into a profile.
Profile1D read_profile_csv(const std::filesystem::path& path, double beta);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
};

/// Standalone SVG 1.1 line plot. Non-finite points break the polyline.
std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace efk
