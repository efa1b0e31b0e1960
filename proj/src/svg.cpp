#include "freemesh/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <span>
#include <utility>

namespace freemesh {

namespace {

class Frame {
 public:
  Frame(std::span<const Point2> pts, const SvgOptions& opt) : margin_(opt.margin) {
    double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
    double x1 = -x0, y1 = -x0;
    for (const auto& p : pts) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    if (pts.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
    const double span_x = std::max(x1 - x0, 1e-12), span_y = std::max(y1 - y0, 1e-12);
    scale_ = (opt.width - 2.0 * margin_) / std::max(span_x, span_y);
    x0_ = x0;
    y1_ = y1;
    height_ = 2.0 * margin_ + span_y * scale_;
    width_ = 2.0 * margin_ + span_x * scale_;
  }

  // y grows downward in SVG.
  std::string xy(Point2 p) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f,%.3f", margin_ + (p.x - x0_) * scale_, margin_ + (y1_ - p.y) * scale_);
    return buf;
  }

  std::string header() const {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.3f "
                  "%.3f\">\n<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n",
                  std::ceil(width_), std::ceil(height_), width_, height_);
    return buf;
  }

 private:
  double margin_;
  double scale_ = 1.0;
  double x0_ = 0.0;
  double y1_ = 0.0;
  double width_ = 0.0;
  double height_ = 0.0;
};

std::string face_path(const Frame& f, const Mesh& mesh, std::span<const std::size_t> face, const char* fill) {
  std::string d = "M" + f.xy(mesh.vertices[face[0]]);
  for (std::size_t k = 1; k < face.size(); ++k) d += " L" + f.xy(mesh.vertices[face[k]]);
  d += " Z";
  return "<path d=\"" + d + "\" fill=\"" + fill + "\" stroke=\"#1f3b73\" stroke-width=\"1\"/>\n";
}

std::string polyline(const Frame& f, const PolyBoundary& b) {
  std::string pts;
  for (std::size_t i = 0; i <= b.size(); ++i) {
    if (i > 0) pts += " ";
    pts += f.xy(b[i % b.size()]);
  }
  return "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2.5\"/>\n";
}

}  // namespace

std::string render_mesh_svg(const Mesh& mesh, const std::optional<PolyBoundary>& boundary, const SvgOptions& opt) {
  mesh.validate();
  std::vector<Point2> all = mesh.vertices;
  if (boundary) all.insert(all.end(), boundary->vertices().begin(), boundary->vertices().end());
  const Frame f(all, opt);
  std::string out = f.header();
  for (const auto& q : mesh.quads) out += face_path(f, mesh, q, "#dbe7f6");
  for (const auto& t : mesh.triangles) out += face_path(f, mesh, t, "#f6e3c4");
  if (boundary) {
    out += polyline(f, *boundary);
  } else {
    std::map<std::pair<std::size_t, std::size_t>, int> use;
    auto count = [&](std::span<const std::size_t> face) {
      for (std::size_t k = 0; k < face.size(); ++k) {
        const auto a = face[k], b = face[(k + 1) % face.size()];
        ++use[{std::min(a, b), std::max(a, b)}];
      }
    };
    for (const auto& q : mesh.quads) count(q);
    for (const auto& t : mesh.triangles) count(t);
    for (const auto& [e, n] : use) {
      if (n != 1) continue;
      const auto a = f.xy(mesh.vertices[e.first]), b = f.xy(mesh.vertices[e.second]);
      const auto ca = a.find(','), cb = b.find(',');
      out += "<line x1=\"" + a.substr(0, ca) + "\" y1=\"" + a.substr(ca + 1) + "\" x2=\"" + b.substr(0, cb) +
             "\" y2=\"" + b.substr(cb + 1) + "\" stroke=\"#c0392b\" stroke-width=\"2.5\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::string render_boundary_svg(const PolyBoundary& boundary, const SvgOptions& opt) {
  const Frame f(boundary.vertices(), opt);
  return f.header() + polyline(f, boundary) + "</svg>\n";
}

}  // namespace freemesh
