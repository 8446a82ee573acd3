#include "chansel/topomap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "chansel/error.hpp"
#include "chansel/report.hpp"

namespace chansel {
namespace {

constexpr double kInsideTolerance = 1e-12;

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Positive when d lies strictly inside the circumcircle of the
// counter-clockwise triangle (a, b, c).
double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

void check_points(std::span<const Point2> points) {
  if (points.size() < 3) throw ValidationError("triangulation needs at least 3 points");
  double x_min = points[0].x, x_max = x_min, y_min = points[0].y, y_max = y_min;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError("non-finite point");
    x_min = std::min(x_min, p.x);
    x_max = std::max(x_max, p.x);
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i].x == points[j].x && points[i].y == points[j].y) {
        throw ValidationError("duplicate electrode position");
      }
    }
  }
  // Collinear when every point lies on the line through p0 and the point
  // farthest from it.
  std::size_t far = 0;
  double far_d = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d = std::hypot(points[i].x - points[0].x, points[i].y - points[0].y);
    if (d > far_d) {
      far_d = d;
      far = i;
    }
  }
  const double scale = std::max(x_max - x_min, y_max - y_min);
  double max_area = 0.0;
  for (const auto& p : points) {
    max_area = std::max(max_area, std::abs(cross(points[0], points[far], p)));
  }
  if (max_area <= 1e-12 * scale * scale) throw ValidationError("electrode layout is collinear");
}

// A finite super-triangle can leave thin gaps along the hull. Walk the
// counter-clockwise boundary and close every reflex corner with a triangle.
void fill_hull(std::span<const Point2> p, std::vector<Triangle>& tris) {
  while (true) {
    std::set<std::pair<std::size_t, std::size_t>> directed;
    for (const auto& t : tris) {
      for (std::size_t e = 0; e < 3; ++e) directed.insert({t[e], t[(e + 1) % 3]});
    }
    std::map<std::size_t, std::size_t> next;
    for (const auto& [u, v] : directed) {
      if (!directed.count({v, u})) next[u] = v;
    }
    bool changed = false;
    for (const auto& [u, v] : next) {
      const auto it = next.find(v);
      if (it == next.end()) continue;
      const auto w = it->second;
      if (w == u || cross(p[u], p[v], p[w]) >= 0.0) continue;
      tris.push_back({u, w, v});
      changed = true;
      break;
    }
    if (!changed) return;
  }
}

// Lawson flips until every interior edge is locally Delaunay.
void legalize(std::span<const Point2> p, std::vector<Triangle>& tris) {
  double scale = 0.0;
  for (const auto& q : p) scale = std::max({scale, std::abs(q.x), std::abs(q.y)});
  const double tol = 1e-12 * std::pow(std::max(scale, 1e-300), 4);
  for (std::size_t guard = 0; guard < 100 * tris.size() * tris.size() + 100; ++guard) {
    std::map<std::pair<std::size_t, std::size_t>, std::pair<std::size_t, std::size_t>> owner;
    for (std::size_t i = 0; i < tris.size(); ++i) {
      for (std::size_t e = 0; e < 3; ++e) owner[{tris[i][e], tris[i][(e + 1) % 3]}] = {i, e};
    }
    bool flipped = false;
    for (std::size_t i = 0; i < tris.size() && !flipped; ++i) {
      for (std::size_t e = 0; e < 3 && !flipped; ++e) {
        const auto a = tris[i][e], b = tris[i][(e + 1) % 3], c = tris[i][(e + 2) % 3];
        const auto it = owner.find({b, a});
        if (it == owner.end()) continue;
        const auto [j, f] = it->second;
        const auto d = tris[j][(f + 2) % 3];
        if (incircle(p[a], p[b], p[c], p[d]) <= tol) continue;
        if (cross(p[a], p[d], p[c]) <= 0.0 || cross(p[d], p[b], p[c]) <= 0.0) continue;
        tris[i] = {a, d, c};
        tris[j] = {d, b, c};
        flipped = true;
      }
    }
    if (!flipped) return;
  }
}

}  // namespace

std::vector<Triangle> delaunay_triangulation(std::span<const Point2> points) {
  check_points(points);
  const std::size_t n = points.size();
  double x_min = points[0].x, x_max = x_min, y_min = points[0].y, y_max = y_min;
  for (const auto& p : points) {
    x_min = std::min(x_min, p.x);
    x_max = std::max(x_max, p.x);
    y_min = std::min(y_min, p.y);
    y_max = std::max(y_max, p.y);
  }
  const double span = std::max(x_max - x_min, y_max - y_min);
  const double cx = 0.5 * (x_min + x_max);
  const double cy = 0.5 * (y_min + y_max);

  std::vector<Point2> pts(points.begin(), points.end());
  pts.push_back({cx - 100.0 * span, cy - 100.0 * span});
  pts.push_back({cx + 100.0 * span, cy - 100.0 * span});
  pts.push_back({cx, cy + 100.0 * span});

  std::vector<Triangle> tris{{n, n + 1, n + 2}};
  for (std::size_t p = 0; p < n; ++p) {
    std::vector<Triangle> keep;
    std::map<std::pair<std::size_t, std::size_t>, int> edges;
    for (const auto& t : tris) {
      if (incircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[p]) > 0.0) {
        for (int e = 0; e < 3; ++e) {
          auto a = t[static_cast<std::size_t>(e)];
          auto b = t[static_cast<std::size_t>((e + 1) % 3)];
          ++edges[{std::min(a, b), std::max(a, b)}];
        }
      } else {
        keep.push_back(t);
      }
    }
    // Boundary of the cavity: edges used by exactly one removed triangle.
    // Their orientation is recovered from the new triangle's signed area.
    for (const auto& [edge, count] : edges) {
      if (count != 1) continue;
      Triangle t{edge.first, edge.second, p};
      const double area = cross(pts[t[0]], pts[t[1]], pts[t[2]]);
      if (area == 0.0) continue;
      if (area < 0.0) std::swap(t[0], t[1]);
      keep.push_back(t);
    }
    tris = std::move(keep);
  }

  std::vector<Triangle> out;
  for (const auto& t : tris) {
    if (t[0] >= n || t[1] >= n || t[2] >= n) continue;
    if (cross(pts[t[0]], pts[t[1]], pts[t[2]]) <= 0.0) continue;
    out.push_back(t);
  }
  if (out.empty()) throw ValidationError("electrode layout is degenerate");
  fill_hull(points, out);
  legalize(points, out);
  return out;
}

LinearInterpolator::LinearInterpolator(std::vector<Point2> nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  if (nodes_.size() != values_.size()) throw ValidationError("one value per node is required");
  triangles_ = delaunay_triangulation(nodes_);
}

std::optional<double> LinearInterpolator::at(double x, double y) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].x == x && nodes_[i].y == y) return values_[i];
  }
  const Point2 p{x, y};
  for (const auto& t : triangles_) {
    const auto& a = nodes_[t[0]];
    const auto& b = nodes_[t[1]];
    const auto& c = nodes_[t[2]];
    const double area = cross(a, b, c);
    const double la = cross(p, b, c) / area;
    const double lb = cross(p, c, a) / area;
    const double lc = cross(p, a, b) / area;
    if (la < -kInsideTolerance || lb < -kInsideTolerance || lc < -kInsideTolerance) continue;
    return la * values_[t[0]] + lb * values_[t[1]] + lc * values_[t[2]];
  }
  return std::nullopt;
}

double TopomapGrid::x(std::size_t col) const {
  if (col + 1 == resolution) return x_max;
  return x_min + (x_max - x_min) * static_cast<double>(col) / static_cast<double>(resolution - 1);
}

double TopomapGrid::y(std::size_t row) const {
  if (row + 1 == resolution) return y_max;
  return y_min + (y_max - y_min) * static_cast<double>(row) / static_cast<double>(resolution - 1);
}

std::vector<double> map_scores(std::span<const double> scores) {
  std::vector<double> finite(scores.begin(), scores.end());
  double lowest = std::numeric_limits<double>::infinity();
  for (double s : finite) {
    if (std::isfinite(s)) lowest = std::min(lowest, s);
  }
  if (!std::isfinite(lowest)) throw ValidationError("no finite scores to map");
  for (double& s : finite) {
    if (!std::isfinite(s)) s = lowest;
  }
  return normalize_scores(finite);
}

TopomapGrid topomap_grid(std::span<const double> scores, const ChannelLayout& layout,
                         std::size_t resolution) {
  if (resolution < 8) throw ValidationError("topomap resolution must be at least 8");
  if (scores.size() != layout.size()) {
    throw ValidationError("got " + std::to_string(scores.size()) + " scores for " +
                          std::to_string(layout.size()) + " electrodes");
  }
  if (layout.size() < 3) throw ValidationError("topomap needs at least 3 electrodes");

  const auto normalized = map_scores(scores);

  std::vector<Point2> nodes;
  for (const auto& e : layout.entries()) nodes.push_back({e.x, e.y});
  LinearInterpolator interp(nodes, normalized);

  TopomapGrid grid;
  grid.resolution = resolution;
  grid.x_min = grid.x_max = nodes[0].x;
  grid.y_min = grid.y_max = nodes[0].y;
  for (const auto& p : nodes) {
    grid.x_min = std::min(grid.x_min, p.x);
    grid.x_max = std::max(grid.x_max, p.x);
    grid.y_min = std::min(grid.y_min, p.y);
    grid.y_max = std::max(grid.y_max, p.y);
  }
  grid.values.resize(resolution * resolution);
  for (std::size_t r = 0; r < resolution; ++r) {
    for (std::size_t c = 0; c < resolution; ++c) {
      auto v = interp.at(grid.x(c), grid.y(r));
      if (v) v = std::clamp(*v, 0.0, 1.0);
      grid.values[r * resolution + c] = v;
    }
  }
  return grid;
}

nlohmann::json to_json(const TopomapGrid& grid, const ChannelLayout& layout,
                       std::span<const double> normalized) {
  using nlohmann::json;
  json j;
  j["interpolation"] = kTopomapInterpolation;
  j["resolution"] = grid.resolution;
  json xs = json::array(), ys = json::array(), rows = json::array();
  for (std::size_t i = 0; i < grid.resolution; ++i) {
    xs.push_back(grid.x(i));
    ys.push_back(grid.y(i));
  }
  for (std::size_t r = 0; r < grid.resolution; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < grid.resolution; ++c) {
      const auto v = grid.at(r, c);
      row.push_back(v ? json(*v) : json(nullptr));
    }
    rows.push_back(std::move(row));
  }
  j["x"] = std::move(xs);
  j["y"] = std::move(ys);
  j["values"] = std::move(rows);
  json electrodes = json::array();
  for (std::size_t i = 0; i < layout.size(); ++i) {
    electrodes.push_back({{"name", layout[i].name},
                          {"x", layout[i].x},
                          {"y", layout[i].y},
                          {"value", i < normalized.size() ? json(normalized[i]) : json(nullptr)}});
  }
  j["electrodes"] = std::move(electrodes);
  return j;
}

}  // namespace chansel
