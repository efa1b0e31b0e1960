#include <algorithm>
#include <cmath>
#include <limits>

#include "freemesh/mesh_env.hpp"

namespace freemesh {

namespace {

// Relative tolerance for slice membership and equidistant vertices.
constexpr double kTieTol = 1e-9;

// Mean interior-side angle (radians) spanned by the j-th neighbour pairs.
double averaged_angle(const PolyBoundary& b, std::size_t i, std::size_t window) {
  const Point2 v = b[i];
  double sum = 0.0;
  for (std::size_t j = 1; j <= window; ++j) {
    const auto off = static_cast<std::ptrdiff_t>(j);
    sum += ccw_angle(b.at_offset(i, -off) - v, b.at_offset(i, off) - v);
  }
  return sum / static_cast<double>(window);
}

// Distance along the ray origin + t*dir (|dir| = 1) to the first crossing
// with a front edge that does not touch `skip`.
std::optional<double> ray_hit(const PolyBoundary& b, std::size_t skip, Point2 origin, Point2 dir) {
  std::optional<double> best;
  const std::size_t n = b.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t j2 = (j + 1) % n;
    if (j == skip || j2 == skip) continue;
    const Point2 a = b[j];
    const Point2 e = b[j2] - a;
    const double denom = cross(dir, e);
    if (std::abs(denom) <= kGeomEps * norm(e)) continue;
    const Point2 w = a - origin;
    const double t = cross(w, e) / denom;
    const double s = cross(w, dir) / denom;
    if (t > 0.0 && s >= -kGeomEps && s <= 1.0 + kGeomEps && (!best || t < *best)) best = t;
  }
  return best;
}

}  // namespace

std::size_t select_reference_vertex(const PolyBoundary& boundary, std::size_t n_rv) {
  const std::size_t n = boundary.size();
  if (n < 3) throw GeometryError("select_reference_vertex: boundary too small");
  const std::size_t window = std::max<std::size_t>(1, std::min(n_rv, (n - 1) / 2));
  std::size_t best = 0;
  double best_angle = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = averaged_angle(boundary, i, window);
    if (a < best_angle) {
      best_angle = a;
      best = i;
    }
  }
  return best;
}

double base_length(const PolyBoundary& boundary, std::size_t ref, std::size_t n) {
  if (n == 0 || 2 * n >= boundary.size()) {
    throw GeometryError("base_length: window must satisfy 0 < n < vertex_count / 2");
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto o = static_cast<std::ptrdiff_t>(j);
    sum += distance(boundary.at_offset(ref, o), boundary.at_offset(ref, o + 1));
    sum += distance(boundary.at_offset(ref, -o), boundary.at_offset(ref, -o - 1));
  }
  return sum / static_cast<double>(2 * n);
}

Observation observe(const PolyBoundary& boundary, std::size_t ref, const EnvConfig& cfg, double rho) {
  const std::size_t count = boundary.size();
  const std::size_t window = std::max<std::size_t>(1, std::min(cfg.n, (count - 1) / 2));
  const double base = base_length(boundary, ref, window);
  const Point2 v0 = boundary[ref];
  const Point2 right1 = boundary.at_offset(ref, -1);
  const Point2 left1 = boundary.at_offset(ref, 1);

  std::vector<Point2> pts;
  pts.reserve(2 * cfg.n + cfg.g);
  for (std::size_t j = cfg.n; j >= 1; --j) pts.push_back(boundary.at_offset(ref, static_cast<std::ptrdiff_t>(j)));
  for (std::size_t j = 1; j <= cfg.n; ++j) pts.push_back(boundary.at_offset(ref, -static_cast<std::ptrdiff_t>(j)));

  // Fan probes over the interior angle at V0.
  const Point2 ref_dir = right1 - v0;
  const Point2 unit_ref = (1.0 / norm(ref_dir)) * ref_dir;
  const double fan = ccw_angle(ref_dir, left1 - v0);
  const double slice = fan / static_cast<double>(cfg.g);
  const double probe_radius = cfg.fan_beta * base;
  const std::size_t right_idx = boundary.wrap(ref, -1);
  const std::size_t left_idx = boundary.wrap(ref, 1);
  for (std::size_t k = 0; k < cfg.g; ++k) {
    const double lo = slice * static_cast<double>(k);
    const double hi = slice * static_cast<double>(k + 1);
    std::optional<Point2> closest;
    double closest_d = probe_radius;
    double closest_phi = 0.0;
    for (std::size_t j = 0; j < count; ++j) {
      if (j == ref || j == right_idx || j == left_idx) continue;
      const Point2 d = boundary[j] - v0;
      const double r = norm(d);
      if (r > closest_d * (1.0 + kTieTol)) continue;
      double phi = ccw_angle(ref_dir, d);
      if (phi > 2.0 * kPi - kTieTol) phi -= 2.0 * kPi;
      // Vertices on a slice edge belong to both slices.
      if (phi < lo - kTieTol || phi > hi + kTieTol) continue;
      // Equidistant vertices: the angularly first one wins.
      const bool nearer = r < closest_d * (1.0 - kTieTol);
      const bool tie_first = r <= closest_d * (1.0 + kTieTol) && phi < closest_phi - kTieTol;
      if (!closest || nearer || tie_first) {
        closest = boundary[j];
        closest_d = std::min(r, closest_d);
        closest_phi = phi;
      }
    }
    if (!closest) {
      const Point2 dir = rotate(unit_ref, lo + 0.5 * slice);
      const auto hit = ray_hit(boundary, ref, v0, dir);
      closest = v0 + std::min(hit.value_or(probe_radius), probe_radius) * dir;
    }
    pts.push_back(*closest);
  }

  const auto polar = polar_normalize(pts, v0, right1, base);
  Observation obs;
  obs.reserve(cfg.observation_size());
  for (const auto& p : polar) {
    obs.push_back(p.radius);
    obs.push_back(p.angle);
  }
  obs.push_back(rho);
  return obs;
}

MeshAction decode_action(std::span<const double> raw, const PolyBoundary& boundary, std::size_t ref,
                         const EnvConfig& cfg) {
  if (raw.size() != 3) throw EnvError("decode_action: expected 3 action components");
  MeshAction a;
  for (std::size_t k = 0; k < 3; ++k) {
    a.raw[k] = std::isfinite(raw[k]) ? std::clamp(raw[k], -1.0, 1.0) : 0.0;
  }
  a.rule_type = a.raw[0] < 0.0 ? 0 : 1;
  a.radius_fraction = 0.5 * (a.raw[1] + 1.0);
  a.angle_fraction = 0.5 * (a.raw[2] + 1.0);

  const std::size_t window = std::max<std::size_t>(1, std::min(cfg.n, (boundary.size() - 1) / 2));
  const double base = base_length(boundary, ref, window);
  const Point2 v0 = boundary[ref];
  const Point2 ref_dir = boundary.at_offset(ref, -1) - v0;
  const double fan = ccw_angle(ref_dir, boundary.at_offset(ref, 1) - v0);
  const Point2 unit = (1.0 / norm(ref_dir)) * ref_dir;
  a.vertex = v0 + (a.radius_fraction * cfg.radius_alpha * base) * rotate(unit, a.angle_fraction * fan);
  return a;
}

}  // namespace freemesh
