#include "freemesh/domains.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "freemesh/mesh_io.hpp"

namespace freemesh {

namespace {

std::vector<Point2> star_outline(const DomainSpec& s, std::mt19937_64& rng) {
  const std::size_t k = s.count != 0 ? s.count : 8;
  if (k < 3) throw std::invalid_argument("star needs at least 3 points");
  const double inner = s.depth != 0.0 ? s.depth : 0.5;
  if (!(inner > 0.0 && inner < 1.0)) throw std::invalid_argument("star inner ratio must lie in (0, 1)");
  const double outer_r = 5.0;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < 2 * k; ++i) {
    const double t = kPi * static_cast<double>(i) / static_cast<double>(k);
    double r = (i % 2 == 0) ? outer_r : outer_r * inner;
    r *= 1.0 + 0.3 * s.variation * u(rng);
    pts.push_back({r * std::cos(t), r * std::sin(t)});
  }
  return pts;
}

std::vector<Point2> l_shape_outline() {
  return {{0.0, 0.0}, {5.0, 0.0}, {5.0, 2.5}, {2.5, 2.5}, {2.5, 5.0}, {0.0, 5.0}};
}

std::vector<Point2> multi_notch_outline(const DomainSpec& s, std::mt19937_64& rng) {
  const std::size_t k = s.count != 0 ? s.count : 2;
  const double depth = s.depth != 0.0 ? s.depth : 0.4;
  if (!(depth > 0.0 && depth < 0.5)) throw std::invalid_argument("notch depth must lie in (0, 0.5) of the height");
  const double unit = 2.0, height = 4.0;
  const double width = unit * static_cast<double>(2 * k + 1);
  const double d = depth * height;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::pair<double, double>> spans;
  for (std::size_t i = 0; i < k; ++i) {
    const double c = unit * (2.0 * static_cast<double>(i) + 1.5);
    const double half = 0.5 * unit * (1.0 + 0.5 * s.variation * u(rng));
    spans.emplace_back(c - half, c + half);
  }
  std::vector<Point2> pts{{0.0, 0.0}};
  for (std::size_t i = 0; i < k; i += 2) {
    pts.push_back({spans[i].first, 0.0});
    pts.push_back({spans[i].first, d});
    pts.push_back({spans[i].second, d});
    pts.push_back({spans[i].second, 0.0});
  }
  pts.push_back({width, 0.0});
  pts.push_back({width, height});
  for (std::size_t j = k; j-- > 0;) {
    if (j % 2 == 0) continue;
    pts.push_back({spans[j].second, height});
    pts.push_back({spans[j].second, height - d});
    pts.push_back({spans[j].first, height - d});
    pts.push_back({spans[j].first, height});
  }
  pts.push_back({0.0, height});
  return pts;
}

std::vector<Point2> ring_outline(const DomainSpec& s) {
  const std::size_t k = s.count != 0 ? s.count : 12;
  if (k < 2) throw std::invalid_argument("ring needs at least 2 vertices per arc");
  const double outer = 5.0, inner = 2.5, gap = 0.3;
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < k; ++i) {
    const double t = gap + (2.0 * kPi - 2.0 * gap) * static_cast<double>(i) / static_cast<double>(k - 1);
    pts.push_back({outer * std::cos(t), outer * std::sin(t)});
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double t = 2.0 * kPi - gap - (2.0 * kPi - 2.0 * gap) * static_cast<double>(i) / static_cast<double>(k - 1);
    pts.push_back({inner * std::cos(t), inner * std::sin(t)});
  }
  return pts;
}

std::vector<Point2> convex_outline(const DomainSpec& s, std::mt19937_64& rng) {
  const std::size_t n = s.count != 0 ? s.count : 20;
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("convex domain needs an even vertex count of at least 4");
  const double rx = 5.0, ry = s.depth != 0.0 ? 5.0 * s.depth : 3.5;
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double step = 2.0 * kPi / static_cast<double>(n);
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = step * (static_cast<double>(i) + 0.35 * s.variation * u(rng));
    pts.push_back({rx * std::cos(t), ry * std::sin(t)});
  }
  return pts;
}

// Two lobes joined by a narrow neck, one sharp corner on each lobe.
std::vector<Point2> t1_outline() {
  return {{0.0, 0.0}, {4.0, 0.0},  {4.0, 1.5}, {6.0, 1.5}, {6.0, 0.0}, {11.0, 0.0},
          {9.0, 4.0}, {6.0, 4.0},  {6.0, 2.5}, {4.0, 2.5}, {4.0, 4.0}, {-1.0, 4.0}};
}

}  // namespace

DomainKind parse_domain_kind(const std::string& name) {
  if (name == "polygon-file") return DomainKind::polygon_file;
  if (name == "star") return DomainKind::star;
  if (name == "l-shape") return DomainKind::l_shape;
  if (name == "multi-notch") return DomainKind::multi_notch;
  if (name == "ring-bridged") return DomainKind::ring_bridged;
  if (name == "convex") return DomainKind::convex;
  if (name == "t1-like") return DomainKind::t1_like;
  throw std::invalid_argument("unknown domain kind '" + name + "'");
}

std::string domain_kind_name(DomainKind kind) {
  switch (kind) {
    case DomainKind::polygon_file: return "polygon-file";
    case DomainKind::star: return "star";
    case DomainKind::l_shape: return "l-shape";
    case DomainKind::multi_notch: return "multi-notch";
    case DomainKind::ring_bridged: return "ring-bridged";
    case DomainKind::convex: return "convex";
    case DomainKind::t1_like: return "t1-like";
  }
  return "unknown";
}

std::vector<Point2> subdivide_outline(const std::vector<Point2>& outline, double h, double variation,
                                      std::uint64_t seed) {
  if (!(h > 0.0)) throw std::invalid_argument("segment length must be positive");
  if (!(variation >= 0.0 && variation <= 0.9)) throw std::invalid_argument("variation must lie in [0, 0.9]");
  const std::size_t n = outline.size();
  std::vector<std::size_t> pieces(n);
  std::size_t total = 0;
  std::size_t longest = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double len = distance(outline[i], outline[(i + 1) % n]);
    pieces[i] = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(len / h)));
    total += pieces[i];
    if (len > distance(outline[longest], outline[(longest + 1) % n])) longest = i;
  }
  if (total % 2 != 0) ++pieces[longest];

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point2> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = outline[i], b = outline[(i + 1) % n];
    std::vector<double> w(pieces[i]);
    double sum = 0.0;
    for (auto& x : w) {
      x = 1.0 + variation * u(rng);
      sum += x;
    }
    double acc = 0.0;
    out.push_back(a);
    for (std::size_t j = 0; j + 1 < w.size(); ++j) {
      acc += w[j] / sum;
      out.push_back(a + (b - a) * acc);
    }
  }
  return out;
}

PolyBoundary make_domain(const DomainSpec& spec) {
  if (!(spec.variation >= 0.0 && spec.variation <= 0.9)) throw std::invalid_argument("variation must lie in [0, 0.9]");
  std::mt19937_64 rng(spec.seed);
  std::vector<Point2> outline;
  double h = spec.segment_length;
  double variation = spec.variation;
  switch (spec.kind) {
    case DomainKind::polygon_file: {
      PolyBoundary b = read_boundary_file(spec.path);
      if (h <= 0.0) return b;
      outline = b.vertices();
      break;
    }
    case DomainKind::star: outline = star_outline(spec, rng); break;
    case DomainKind::l_shape: outline = l_shape_outline(); break;
    case DomainKind::multi_notch: outline = multi_notch_outline(spec, rng); break;
    case DomainKind::ring_bridged: outline = ring_outline(spec); break;
    case DomainKind::convex: outline = convex_outline(spec, rng); break;
    case DomainKind::t1_like:
      outline = t1_outline();
      if (h <= 0.0) h = 0.8;
      if (variation == 0.0) variation = 0.3;
      break;
  }
  if (h > 0.0) outline = subdivide_outline(outline, h, variation, spec.seed ^ 0x5bd1e995ULL);
  if (outline.size() % 2 != 0) throw std::invalid_argument("generated boundary has an odd vertex count");
  return PolyBoundary(std::move(outline), OrientationPolicy::reverse_if_ccw);
}

}  // namespace freemesh
