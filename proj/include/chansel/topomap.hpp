#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "chansel/dataset.hpp"

namespace chansel {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Triangle = std::array<std::size_t, 3>;

/// Delaunay triangulation by Bowyer-Watson insertion, hull gap filling and
/// Lawson edge flips. Triangles are counter-clockwise. Throws
/// ValidationError for fewer than 3 points, duplicates, or a collinear set.
std::vector<Triangle> delaunay_triangulation(std::span<const Point2> points);

/// Piecewise-linear interpolant over a Delaunay triangulation of scattered
/// nodes. Exact at the nodes; undefined outside their convex hull.
class LinearInterpolator {
 public:
  LinearInterpolator(std::vector<Point2> nodes, std::vector<double> values);

  std::optional<double> at(double x, double y) const;
  const std::vector<Triangle>& triangles() const { return triangles_; }

 private:
  std::vector<Point2> nodes_;
  std::vector<double> values_;
  std::vector<Triangle> triangles_;
};

inline constexpr const char* kTopomapInterpolation = "piecewise-linear-delaunay";

/// R x R grid spanning the layout's bounding box, both extremes included.
/// values[row * R + col] sits at (x(col), y(row)); y increases with row.
struct TopomapGrid {
  std::size_t resolution = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  std::vector<std::optional<double>> values;

  double x(std::size_t col) const;
  double y(std::size_t row) const;
  std::optional<double> at(std::size_t row, std::size_t col) const {
    return values[row * resolution + col];
  }
};

/// Scores as drawn on a map: non-finite entries (degenerate channels) are
/// replaced by the lowest finite score, then the result is normalized.
std::vector<double> map_scores(std::span<const double> scores);

/// Interpolates map_scores(scores) over the electrode positions. Throws
/// ValidationError for resolution < 8, a score count that does not match
/// the layout, all-equal scores, or a collinear layout.
TopomapGrid topomap_grid(std::span<const double> scores, const ChannelLayout& layout,
                         std::size_t resolution);

/// {"interpolation", "resolution", "x", "y", "values" (rows, null outside
/// the hull), "electrodes" [{name, x, y, value}]}.
nlohmann::json to_json(const TopomapGrid& grid, const ChannelLayout& layout,
                       std::span<const double> normalized);

}  // namespace chansel
