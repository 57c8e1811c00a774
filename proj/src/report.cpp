#include "qhgeo/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <system_error>

#include <unistd.h>

namespace qhgeo {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void append_line(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += quote(fields[i]);
  }
  out += "\r\n";
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw std::invalid_argument("csv header is empty");
}

void CsvTable::add_row(std::vector<std::string> fields) {
  if (fields.size() != header_.size()) throw std::invalid_argument("csv row width differs from header");
  rows_.push_back(std::move(fields));
}

std::string CsvTable::str() const {
  std::string out;
  append_line(out, header_);
  for (const auto& row : rows_) append_line(out, row);
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move output into place: " + path.string());
  }
}

void SvgCanvas::polyline(const Matrix& points, const std::string& stroke, bool closed) {
  if (points.rows() != 2) throw std::invalid_argument("svg polylines are planar");
  lines_.push_back({points, stroke, closed});
}

void SvgCanvas::circle(const Vector& centre, double radius_px, const std::string& fill) {
  if (centre.size() != 2) throw std::invalid_argument("svg circles are planar");
  dots_.push_back({centre, radius_px, fill});
}

std::string SvgCanvas::render(int width, int height) const {
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  auto extend = [&](double x, double y) {
    lo_x = std::min(lo_x, x);
    hi_x = std::max(hi_x, x);
    lo_y = std::min(lo_y, y);
    hi_y = std::max(hi_y, y);
  };
  for (const Line& l : lines_) {
    for (Eigen::Index i = 0; i < l.points.cols(); ++i) extend(l.points(0, i), l.points(1, i));
  }
  for (const Dot& d : dots_) extend(d.centre(0), d.centre(1));
  if (!(hi_x >= lo_x)) lo_x = lo_y = 0.0, hi_x = hi_y = 1.0;
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
  const double margin = 20.0;
  const double scale = std::min(width, height) - 2.0 * margin;
  auto px = [&](double x) { return margin + (x - lo_x) / span * scale; };
  auto py = [&](double y) { return height - margin - (y - lo_y) / span * scale; };

  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\">\n";
  char buf[64];
  for (const Line& l : lines_) {
    out += l.closed ? "  <polygon" : "  <polyline";
    out += " fill=\"none\" stroke=\"" + l.stroke + "\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index i = 0; i < l.points.cols(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.4f,%.4f", i ? " " : "", px(l.points(0, i)), py(l.points(1, i)));
      out += buf;
    }
    out += "\"/>\n";
  }
  for (const Dot& d : dots_) {
    std::snprintf(buf, sizeof buf, "cx=\"%.4f\" cy=\"%.4f\" r=\"%.2f\"", px(d.centre(0)), py(d.centre(1)), d.radius);
    out += std::string("  <circle ") + buf + " fill=\"" + d.fill + "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace qhgeo
