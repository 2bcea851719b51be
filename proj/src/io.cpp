#include "efk/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "efk/errors.hpp"

namespace efk {

namespace fs = std::filesystem;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvTable::CsvTable(std::vector<std::string> header) : columns_(header.size()) { append(header); }

CsvTable& CsvTable::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) throw Error(Errc::InvalidArgument, "csv row width differs from header");
  append(fields);
  return *this;
}

CsvTable& CsvTable::row(const std::vector<double>& values) {
  std::vector<std::string> f;
  f.reserve(values.size());
  for (double v : values) f.push_back(format_number(v));
  return row(f);
}

void CsvTable::append(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) text_ += ',';
    text_ += csv_quote(fields[i]);
  }
  text_ += "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      any = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw Error(Errc::Io, "unterminated quoted csv field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot open " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(Errc::Io, "cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::string le_bytes(const Field& z) {
  std::string out(z.size() * 8, '\0');
  for (std::size_t i = 0; i < z.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &z[i], 8);
    for (int b = 0; b < 8; ++b) out[8 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
  return out;
}

Field from_le_bytes(const std::string& s, std::size_t expected, const fs::path& path) {
  if (s.size() != expected * 8) throw Error(Errc::Io, path.string() + " does not hold the header's node count");
  Field z(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[8 * i + b])) << (8 * b);
    std::memcpy(&z[i], &bits, 8);
  }
  return z;
}

}  // namespace

std::vector<fs::path> write_field(const fs::path& dir, const std::string& stem, const SolutionField& fld) {
  const std::string u_name = stem + ".u.f64", v_name = stem + ".v.f64";
  nlohmann::ordered_json h;
  h["dims"] = fld.grid.dims();
  h["spacings"] = fld.grid.spacings();
  h["axial_half_length"] = fld.grid.axial_half_length();
  h["beta"] = fld.beta;
  h["lambda"] = fld.lambda;
  h["bc"] = {fld.bc_bottom, fld.bc_top};
  h["residual"] = fld.residual();
  h["iterations"] = fld.iterations();
  h["dtype"] = "float64";
  h["byte_order"] = "little";
  h["layout"] = "row-major, axial index fastest";
  h["files"] = {{"u", u_name}, {"v", v_name}};
  const fs::path hp = dir / (stem + ".json");
  write_file_atomic(dir / u_name, le_bytes(fld.u));
  write_file_atomic(dir / v_name, le_bytes(fld.v));
  write_file_atomic(hp, h.dump(2) + "\n");
  return {hp, dir / u_name, dir / v_name};
}

SolutionField read_field(const fs::path& header) {
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(read_file(header));
    const auto dims = h.at("dims").get<std::vector<std::size_t>>();
    const auto sp = h.at("spacings").get<std::vector<double>>();
    if (dims.empty() || dims.size() != sp.size()) throw Error(Errc::Io, "field header dims/spacings disagree");
    std::vector<std::size_t> ts(dims.begin(), dims.end() - 1);
    std::vector<double> th(sp.begin(), sp.end() - 1);
    SolutionField f{StripGrid(ts, th, dims.back(), h.at("axial_half_length").get<double>()), {}, {}, 0.0, 0.0, 0.0, 0.0, {}};
    f.beta = h.at("beta").get<double>();
    f.lambda = h.at("lambda").get<double>();
    f.bc_bottom = h.at("bc").at(0).get<double>();
    f.bc_top = h.at("bc").at(1).get<double>();
    f.residual_history = {h.at("residual").get<double>()};
    const fs::path base = header.parent_path();
    const fs::path up = base / h.at("files").at("u").get<std::string>();
    const fs::path vp = base / h.at("files").at("v").get<std::string>();
    f.u = from_le_bytes(read_file(up), f.grid.size(), up);
    f.v = from_le_bytes(read_file(vp), f.grid.size(), vp);
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Io, header.string() + ": " + e.what());
  }
}

std::string profile_csv(const Profile1D& p) {
  CsvTable t({"x", "u"});
  for (std::size_t i = 0; i < p.size(); ++i) t.row(std::vector<double>{p.grid.x(i), p.values[i]});
  return t.str();
}

Profile1D read_profile_csv(const fs::path& path, double beta) {
  const auto rows = parse_csv(read_file(path));
  if (rows.size() < 3 || rows[0] != std::vector<std::string>{"x", "u"}) {
    throw Error(Errc::Io, path.string() + " is not an x,u profile table");
  }
  std::vector<double> x, u;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != 2) throw Error(Errc::Io, path.string() + ": malformed row");
    for (int c = 0; c < 2; ++c) {
      double v = 0;
      const auto& s = rows[r][c];
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw Error(Errc::Io, path.string() + ": bad number '" + s + "'");
      }
      (c == 0 ? x : u).push_back(v);
    }
  }
  const double half = -x.front();
  if (!(half > 0) || std::abs(x.back() - half) > 1e-9 * half) {
    throw Error(Errc::Io, path.string() + ": grid must be symmetric about 0");
  }
  Profile1D p = constant_profile(0.0, beta, half, x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - p.grid.x(i)) > 1e-9 * half) throw Error(Errc::Io, path.string() + ": grid not uniform");
  }
  p.values = u;
  p.left_limit = u.front();
  p.right_limit = u.back();
  p.method = "file";
  return p;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_line_plot(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  const double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 50;
  const double pw = W - left - right, ph = H - top - bottom;
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) { return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0); };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 <= 0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 <= 0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (1 - (ty(y) - y0) / (y1 - y0)) * ph; };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::string o;
  o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"420\" viewBox=\"0 0 640 420\">\n";
  o += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  o += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">" +
       xml_escape(spec.title) + "</text>\n";
  o += "<rect x=\"" + fmt("%.2f", left) + "\" y=\"" + fmt("%.2f", top) + "\" width=\"" + fmt("%.2f", pw) +
       "\" height=\"" + fmt("%.2f", ph) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4.0;
    const double yv = y0 + (y1 - y0) * k / 4.0;
    const double X = left + pw * k / 4.0, Y = top + ph * (1 - k / 4.0);
    o += "<line x1=\"" + fmt("%.2f", X) + "\" y1=\"" + fmt("%.2f", top + ph) + "\" x2=\"" + fmt("%.2f", X) +
         "\" y2=\"" + fmt("%.2f", top + ph + 5) + "\" stroke=\"black\"/>\n";
    o += "<text x=\"" + fmt("%.2f", X) + "\" y=\"" + fmt("%.2f", top + ph + 18) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + fmt("%.3g", xv) + "</text>\n";
    o += "<line x1=\"" + fmt("%.2f", left - 5) + "\" y1=\"" + fmt("%.2f", Y) + "\" x2=\"" + fmt("%.2f", left) +
         "\" y2=\"" + fmt("%.2f", Y) + "\" stroke=\"black\"/>\n";
    const std::string label = spec.log_y ? "1e" + fmt("%.3g", yv) : fmt("%.3g", yv);
    o += "<text x=\"" + fmt("%.2f", left - 8) + "\" y=\"" + fmt("%.2f", Y + 4) +
         "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + label + "</text>\n";
  }
  o += "<text x=\"" + fmt("%.2f", left + pw / 2) + "\" y=\"" + fmt("%.2f", H - 10) +
       "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" + xml_escape(spec.x_label) +
       "</text>\n";
  o += "<text x=\"16\" y=\"" + fmt("%.2f", top + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"12\" transform=\"rotate(-90 16 " + fmt("%.2f", top + ph / 2) + ")\">" +
       xml_escape(spec.y_label) + "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const char* color = colors[si % 6];
    std::string pts;
    auto flush = [&] {
      if (!pts.empty()) {
        o += std::string("<polyline fill=\"none\" stroke=\"") + color + "\" stroke-width=\"1.5\" points=\"" + pts +
             "\"/>\n";
      }
      pts.clear();
    };
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) {
        flush();
        continue;
      }
      if (!pts.empty()) pts += ' ';
      pts += fmt("%.2f", px(s.x[i])) + "," + fmt("%.2f", py(s.y[i]));
    }
    flush();
    const double ly = top + 14 + 16.0 * static_cast<double>(si);
    o += "<line x1=\"" + fmt("%.2f", left + pw - 130) + "\" y1=\"" + fmt("%.2f", ly) + "\" x2=\"" +
         fmt("%.2f", left + pw - 110) + "\" y2=\"" + fmt("%.2f", ly) + "\" stroke=\"" + color +
         "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + fmt("%.2f", left + pw - 104) + "\" y=\"" + fmt("%.2f", ly + 4) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + xml_escape(s.name) + "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace efk
