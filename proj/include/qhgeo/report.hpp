#pragma once

#include "qhgeo/norm.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qhgeo {

/// Shortest round-trip decimal text of a double ("%.17g"); "inf", "-inf"
/// and "nan" for non-finite values.
std::string format_number(double v);

/// RFC 4180 table: fields containing a comma, quote or line break are
/// quoted with doubled inner quotes; lines end with CRLF.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> fields);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a sibling temporary file and renames it over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Minimal SVG 1.1 writer for planar drawings (polylines and circles only).
/// Coordinates are mapped to the canvas with the y axis pointing up.
class SvgCanvas {
 public:
  void polyline(const Matrix& points, const std::string& stroke, bool closed = false);
  void circle(const Vector& centre, double radius_px, const std::string& fill);
  std::string render(int width = 600, int height = 600) const;

 private:
  struct Line {
    Matrix points;
    std::string stroke;
    bool closed;
  };
  struct Dot {
    Vector centre;
    double radius;
    std::string fill;
  };
  std::vector<Line> lines_;
  std::vector<Dot> dots_;
};

}  // namespace qhgeo
