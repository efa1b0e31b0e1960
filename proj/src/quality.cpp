#include "freemesh/quality.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <utility>

#include "freemesh/mesh_env.hpp"

namespace freemesh {

namespace {

double tri_area(Point2 a, Point2 b, Point2 c) { return 0.5 * std::abs(cross(b - a, c - a)); }

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void Mesh::validate() const {
  const std::size_t n = vertices.size();
  auto check = [n](std::span<const std::size_t> face, const char* kind, std::size_t idx) {
    for (std::size_t i = 0; i < face.size(); ++i) {
      if (face[i] >= n) {
        throw GeometryError(std::string(kind) + " " + std::to_string(idx) + " references vertex " +
                            std::to_string(face[i] + 1) + " of " + std::to_string(n));
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (face[i] == face[j]) throw GeometryError(std::string(kind) + " " + std::to_string(idx) + " repeats a vertex");
      }
    }
  };
  for (std::size_t i = 0; i < quads.size(); ++i) check(quads[i], "quad", i + 1);
  for (std::size_t i = 0; i < triangles.size(); ++i) check(triangles[i], "triangle", i + 1);
}

QuadElement Mesh::quad(std::size_t i) const {
  const auto& f = quads.at(i);
  return QuadElement{{vertices[f[0]], vertices[f[1]], vertices[f[2]], vertices[f[3]]}};
}

Mesh mesh_from_elements(std::span<const QuadElement> elements) {
  Mesh mesh;
  std::map<std::pair<double, double>, std::size_t> index;
  for (const auto& e : elements) {
    std::array<Point2, 4> c = e.corners;
    if (signed_area(std::span<const Point2>(c)) < 0.0) std::reverse(c.begin(), c.end());
    std::array<std::size_t, 4> face{};
    for (std::size_t k = 0; k < 4; ++k) {
      auto [it, fresh] = index.emplace(std::make_pair(c[k].x, c[k].y), mesh.vertices.size());
      if (fresh) mesh.vertices.push_back(c[k]);
      face[k] = it->second;
    }
    mesh.quads.push_back(face);
  }
  return mesh;
}

std::size_t singularity_count(const Mesh& mesh) {
  mesh.validate();
  std::map<std::pair<std::size_t, std::size_t>, int> edge_use;
  auto add_face = [&](std::span<const std::size_t> f) {
    for (std::size_t k = 0; k < f.size(); ++k) {
      const std::size_t a = f[k], b = f[(k + 1) % f.size()];
      ++edge_use[{std::min(a, b), std::max(a, b)}];
    }
  };
  for (const auto& q : mesh.quads) add_face(q);
  for (const auto& t : mesh.triangles) add_face(t);

  std::vector<std::size_t> valence(mesh.vertices.size(), 0);
  std::vector<bool> on_boundary(mesh.vertices.size(), false);
  std::vector<bool> used(mesh.vertices.size(), false);
  for (const auto& [e, count] : edge_use) {
    ++valence[e.first];
    ++valence[e.second];
    used[e.first] = used[e.second] = true;
    if (count == 1) on_boundary[e.first] = on_boundary[e.second] = true;
  }
  std::size_t s = 0;
  for (std::size_t v = 0; v < valence.size(); ++v) {
    if (used[v] && !on_boundary[v] && valence[v] != 4) ++s;
  }
  return s;
}

double scaled_jacobian(const QuadElement& q) {
  double best = 1.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const Point2 next = q.corners[(k + 1) % 4] - q.corners[k];
    const Point2 prev = q.corners[(k + 3) % 4] - q.corners[k];
    const double ln = norm(next), lp = norm(prev);
    if (!(ln > 0.0) || !(lp > 0.0)) throw GeometryError("scaled_jacobian: zero-length edge");
    best = std::min(best, cross(next, prev) / (ln * lp));
  }
  return best;
}

double stretch(const QuadElement& q) {
  const double diag = quad_max_diagonal(q);
  if (!(diag > 0.0)) throw GeometryError("stretch: zero-length diagonal");
  const auto edges = quad_edge_lengths(q);
  return std::sqrt(2.0) * *std::min_element(edges.begin(), edges.end()) / diag;
}

double taper(const QuadElement& q) {
  const auto& c = q.corners;
  const std::array<std::array<double, 2>, 2> splits{{
      {tri_area(c[0], c[1], c[2]), tri_area(c[0], c[2], c[3])},
      {tri_area(c[1], c[2], c[3]), tri_area(c[1], c[3], c[0])},
  }};
  double worst = 0.0;
  for (const auto& s : splits) {
    const double lo = std::min(s[0], s[1]), hi = std::max(s[0], s[1]);
    if (!(lo > 0.0)) return 1.0;
    worst = std::max(worst, 1.0 - lo / hi);
  }
  return worst;
}

AngleDeviation angle_deviations(const QuadElement& q) {
  const auto a = quad_interior_angles_deg(q);
  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  return {std::abs(*lo - 90.0), std::abs(*hi - 90.0)};
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  double s = 0.0;
  for (double v : values) s += v;
  r.mean = s / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(values.size()));
  return r;
}

QualityReport report(const Mesh& mesh) {
  if (mesh.quads.empty() && mesh.triangles.empty()) throw GeometryError("report: mesh has no faces");
  mesh.validate();
  QualityReport r;
  r.quad_count = mesh.quads.size();
  r.triangle_count = mesh.triangles.size();
  r.singularity = singularity_count(mesh);

  std::vector<double> eq, mind, maxd, sj, st, tp;
  for (std::size_t i = 0; i < mesh.quads.size(); ++i) {
    const QuadElement q = mesh.quad(i);
    eq.push_back(element_quality(q));
    const AngleDeviation d = angle_deviations(q);
    mind.push_back(d.min_dev);
    maxd.push_back(d.max_dev);
    sj.push_back(scaled_jacobian(q));
    st.push_back(stretch(q));
    tp.push_back(taper(q));
  }
  r.element_quality = mean_std(eq);
  r.min_angle_dev = mean_std(mind);
  r.max_angle_dev = mean_std(maxd);
  r.scaled_jacobian = mean_std(sj);
  r.stretch = mean_std(st);
  r.taper = mean_std(tp);
  return r;
}

std::string format_table(const QualityReport& r) {
  std::string out;
  char line[128];
  auto row = [&](const char* name, const MeanStd& m) {
    std::snprintf(line, sizeof line, "%-18s %10.4f +- %-10.4f\n", name, m.mean, m.std);
    out += line;
  };
  std::snprintf(line, sizeof line, "%-18s %10zu\n", "quads", r.quad_count);
  out += line;
  std::snprintf(line, sizeof line, "%-18s %10zu\n", "triangles", r.triangle_count);
  out += line;
  std::snprintf(line, sizeof line, "%-18s %10zu\n", "singularities", r.singularity);
  out += line;
  row("element quality", r.element_quality);
  row("|min angle - 90|", r.min_angle_dev);
  row("|max angle - 90|", r.max_angle_dev);
  row("scaled jacobian", r.scaled_jacobian);
  row("stretch", r.stretch);
  row("taper", r.taper);
  return out;
}

std::string format_kv(const QualityReport& r) {
  std::string out;
  out += "quad_count=" + std::to_string(r.quad_count) + "\n";
  out += "triangle_count=" + std::to_string(r.triangle_count) + "\n";
  out += "singularity=" + std::to_string(r.singularity) + "\n";
  auto pair = [&](const char* key, const MeanStd& m) {
    out += std::string(key) + "_mean=" + shortest(m.mean) + "\n";
    out += std::string(key) + "_std=" + shortest(m.std) + "\n";
  };
  pair("element_quality", r.element_quality);
  pair("min_angle_dev", r.min_angle_dev);
  pair("max_angle_dev", r.max_angle_dev);
  pair("scaled_jacobian", r.scaled_jacobian);
  pair("stretch", r.stretch);
  pair("taper", r.taper);
  return out;
}

}  // namespace freemesh
