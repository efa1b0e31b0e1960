#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "doctest.h"
#include "freemesh/domains.hpp"
#include "freemesh/mesh_env.hpp"

using namespace freemesh;

namespace {

double shoelace(const std::vector<Point2>& p) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point2 a = p[i], b = p[(i + 1) % p.size()];
    s += a.x * b.y - b.x * a.y;
  }
  return 0.5 * s;
}

// Collinear points generated along a straight edge carry rounding noise, so a
// small relative band counts as zero.
int orient(Point2 a, Point2 b, Point2 c) {
  const double v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  const double s = std::max({std::abs(b.x - a.x), std::abs(b.y - a.y), std::abs(c.x - a.x), std::abs(c.y - a.y)});
  const double tol = 1e-10 * s * s;
  return (v > tol) - (v < -tol);
}

bool on_seg(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool cross_or_touch(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  return (o1 == 0 && on_seg(a, b, c)) || (o2 == 0 && on_seg(a, b, d)) || (o3 == 0 && on_seg(c, d, a)) ||
         (o4 == 0 && on_seg(c, d, b));
}

// Every pair of non-adjacent edges is disjoint; adjacent edges only share their joint.
bool brute_simple(const std::vector<Point2>& p) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      const Point2 a = p[i], b = p[(i + 1) % n], c = p[j], d = p[(j + 1) % n];
      if (adjacent) {
        // Folded back onto itself.
        const Point2 shared = (j == i + 1) ? b : a;
        const Point2 u = (j == i + 1) ? a : b;
        const Point2 w = (j == i + 1) ? d : c;
        if (orient(shared, u, w) == 0 && (u.x - shared.x) * (w.x - shared.x) + (u.y - shared.y) * (w.y - shared.y) > 0)
          return false;
        continue;
      }
      if (cross_or_touch(a, b, c, d)) return false;
    }
  }
  return true;
}

PolyBoundary regular_cw(std::size_t n, double r, double phase = 0.0) {
  std::vector<Point2> p;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = phase - 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    p.push_back({r * std::cos(t), r * std::sin(t)});
  }
  return PolyBoundary(p);
}

// 2x2 square with edge midpoints, clockwise.
PolyBoundary square8() {
  return PolyBoundary({{0, 0}, {0, 1}, {0, 2}, {1, 2}, {2, 2}, {2, 1}, {2, 0}, {1, 0}});
}

// Density ramp written out from its definition.
double density_oracle(double area, double e_min, double e_max, double kappa, double upsilon) {
  const double a_min = upsilon * e_min * e_min;
  const double side = (e_max - e_min) / kappa + e_min;
  const double a_max = upsilon * side * side;
  if (area < a_min) return -1.0;
  if (area < a_max) return (area - a_min) / (a_max - a_min);
  return 0.0;
}

std::pair<double, double> edge_range_oracle(const std::vector<Point2>& p) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point2 a = p[i], b = p[(i + 1) % p.size()];
    const double l = std::hypot(b.x - a.x, b.y - a.y);
    lo = std::min(lo, l);
    hi = std::max(hi, l);
  }
  return {lo, hi};
}

}  // namespace

TEST_CASE("element quality of reference shapes") {
  const QuadElement square{{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}}};
  CHECK(std::abs(element_quality(square) - 1.0) <= 1e-12);
  const QuadElement rect{{{{0, 0}, {0, 1}, {2, 1}, {2, 0}}}};
  // sqrt(2) * 1 / sqrt(5) for the edges, 1 for the angles.
  const double oracle = std::sqrt(std::sqrt(2.0) / std::sqrt(5.0));
  CHECK(std::abs(element_quality(rect) - oracle) <= 1e-9);
  CHECK(element_quality(rect) == doctest::Approx(0.7953).epsilon(1e-4));
  const QuadElement flat{{{{0, 0}, {0, 0}, {0, 0}, {0, 0}}}};
  CHECK_THROWS_AS(element_quality(flat), GeometryError);
}

TEST_CASE("boundary quality fixtures") {
  const ProximityGap even{1.0, 1.0, 1.0};
  CHECK(distance_quality(even) == 1.0);
  CHECK(boundary_quality({90.0, 75.0}, even, 60.0) == 0.0);
  CHECK(boundary_quality({90.0, 75.0}, std::nullopt, 60.0) == 0.0);
  CHECK(std::abs(boundary_quality({90.0, 30.0}, even, 60.0) - (std::sqrt(0.5) - 1.0)) <= 1e-12);
  const ProximityGap tight{0.5, 1.0, 1.0};
  CHECK(distance_quality(tight) == doctest::Approx(0.5));
  CHECK(boundary_quality({0.0, 90.0}, even, 60.0) == -1.0);
}

TEST_CASE("density term fixtures") {
  CHECK(std::abs(density_term(0.1, 0.5, 1.5, 4.0, 1.0) - (-1.0)) <= 1e-12);
  CHECK(std::abs(density_term(0.4, 0.5, 1.5, 4.0, 1.0) - 0.48) <= 1e-12);
  CHECK(std::abs(density_term(0.6, 0.5, 1.5, 4.0, 1.0) - 0.0) <= 1e-12);
  // At the minimum area the ramp starts at zero.
  CHECK(density_term(0.25, 0.5, 1.5, 4.0, 1.0) == 0.0);
}

TEST_CASE("config validation") {
  EnvConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.observation_size() == 15);
  c.upsilon = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.upsilon = 10.0;
  CHECK_NOTHROW(c.validate());
  c.upsilon = 10.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = EnvConfig{};
  c.g = 0;
  CHECK_THROWS_AS(MeshEnv{c}, ConfigError);
}

TEST_CASE("reset preconditions") {
  MeshEnv env;
  const double a[3] = {0, 0, 0};
  CHECK_THROWS_AS(env.step(a), EnvError);
  CHECK_THROWS_AS(env.reset(regular_cw(7, 1.0)), GeometryError);
  std::vector<Point2> ccw = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0.5}};
  CHECK_THROWS_AS(env.reset(PolyBoundary::trusted(ccw)), GeometryError);
  const Observation obs = env.reset(square8());
  CHECK(obs.size() == 15);
  CHECK(obs.back() == 1.0);
  CHECK(env.area_ratio() == 1.0);
}

TEST_CASE("invalid action costs exactly -0.1") {
  MeshEnv env;
  env.reset(square8());
  // Zero radius puts the new vertex on V0.
  const double raw[3] = {1.0, -1.0, 0.0};
  const StepResult r = env.step(raw);
  CHECK(r.reward == -0.1);
  CHECK(r.outcome == StepOutcome::invalid);
  CHECK_FALSE(r.element);
  CHECK(env.boundary().size() == 8);
  CHECK(env.consecutive_invalid() == 1);
}

TEST_CASE("closing a hexagon ends with the completion reward") {
  MeshEnv env;
  env.reset(regular_cw(6, 1.0));
  const double raw[3] = {-1.0, 0.0, 0.0};
  const StepResult r = env.step(raw);
  CHECK(r.reward == 10.0);
  CHECK(r.outcome == StepOutcome::completed);
  CHECK(r.done);
  CHECK_FALSE(r.truncated);
  CHECK(r.rule_applied == 0);
  REQUIRE(r.closing_element);
  CHECK(env.completed());
  CHECK(env.elements().size() == 2);
  double total = 0.0;
  for (const auto& q : env.elements()) total += std::abs(shoelace({q.corners.begin(), q.corners.end()}));
  CHECK(total == doctest::Approx(std::abs(shoelace(regular_cw(6, 1.0).vertices()))).epsilon(1e-12));
  CHECK_THROWS_AS(env.step(raw), EnvError);
}

TEST_CASE("a four-vertex front is meshed in one step") {
  MeshEnv env;
  env.reset(PolyBoundary({{0, 0}, {0, 1}, {1, 1}, {1, 0}}));
  const double raw[3] = {0.3, 0.3, 0.3};
  const StepResult r = env.step(raw);
  CHECK(r.reward == 10.0);
  CHECK(env.completed());
  CHECK(env.elements().size() == 1);
}

TEST_CASE("one-vertex extraction of a unit square from the 2x2 square") {
  EnvConfig cfg;
  cfg.upsilon = 0.5;
  MeshEnv env(cfg);
  env.reset(square8());
  const std::size_t ref = env.reference_vertex();
  const Point2 v0 = env.boundary()[ref];
  // Reference vertex is a corner: both neighbours are unit-distance midpoints.
  CHECK(distance(v0, env.boundary().at_offset(ref, -1)) == doctest::Approx(1.0));
  CHECK(distance(v0, env.boundary().at_offset(ref, 1)) == doctest::Approx(1.0));
  // radius sqrt(2) = fraction * alpha * L with alpha = 2, L = 1; angle half of 90 degrees.
  const double raw[3] = {1.0, std::sqrt(2.0) - 1.0, 0.0};
  const StepResult r = env.step(raw);
  CHECK(r.outcome == StepOutcome::valid);
  CHECK(r.rule_applied == 1);
  // Square element (quality 1), 90-degree junctions, even gap, area above the density band.
  CHECK(r.reward == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(env.boundary().size() == 8);
  CHECK(r.observation.back() == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("decoded action matches the polar construction") {
  const PolyBoundary b = square8();
  EnvConfig cfg;
  const std::size_t ref = select_reference_vertex(b, cfg.n_rv);
  const Point2 v0 = b[ref];
  const Point2 d = b.at_offset(ref, -1) - v0;
  const double raw[3] = {0.5, 0.2, -0.4};
  const MeshAction a = decode_action(raw, b, ref, cfg);
  CHECK(a.rule_type == 1);
  const double radius = 0.6 * 2.0 * base_length(b, ref, 2);
  const double phi = std::atan2(d.y, d.x) + 0.3 * (kPi / 2.0);
  CHECK(a.vertex.x == doctest::Approx(v0.x + radius * std::cos(phi)).epsilon(1e-12));
  CHECK(a.vertex.y == doctest::Approx(v0.y + radius * std::sin(phi)).epsilon(1e-12));

  const double zero[3] = {0.0, 0.0, 0.0};
  CHECK(decode_action(zero, b, ref, cfg).rule_type == 1);
  const double neg[3] = {-1e-12, 0.0, 0.0};
  CHECK(decode_action(neg, b, ref, cfg).rule_type == 0);
  const double nan[3] = {std::numeric_limits<double>::quiet_NaN(), 7.0, -7.0};
  const MeshAction m = decode_action(nan, b, ref, cfg);
  CHECK(m.rule_type == 1);
  CHECK(m.radius_fraction == 1.0);
  CHECK(m.angle_fraction == 0.0);
  const double short_raw[2] = {0.0, 0.0};
  CHECK_THROWS_AS(decode_action(short_raw, b, ref, cfg), EnvError);
}

TEST_CASE("reference vertex is the sharpest averaged corner") {
  // Clockwise L: the convex corner at the origin beats the reflex corner.
  const PolyBoundary l({{0, 0}, {0, 2}, {1, 2}, {1, 1}, {2, 1}, {2, 0}});
  const std::size_t ref = select_reference_vertex(l, 1);
  CHECK(interior_angle(l, ref) == doctest::Approx(90.0));
  CHECK(ref == 0);
  const PolyBoundary hex = regular_cw(6, 1.0);
  CHECK(select_reference_vertex(hex, 2) == 0);
}

TEST_CASE("observation is invariant under similarity transforms") {
  EnvConfig cfg;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto kind : {DomainKind::t1_like, DomainKind::star, DomainKind::convex, DomainKind::l_shape}) {
    for (int trial = 0; trial < 20; ++trial) {
      DomainSpec spec;
      spec.kind = kind;
      spec.seed = 3;
      const PolyBoundary base = make_domain(spec);
      const double theta = kPi * u(rng);
      const double scale = std::exp(2.0 * u(rng));
      const Point2 shift{10.0 * u(rng), 10.0 * u(rng)};
      std::vector<Point2> moved;
      for (const auto& p : base.vertices()) moved.push_back(scale * rotate(p, theta) + shift);
      const PolyBoundary other(moved);
      for (std::size_t ref = 0; ref < base.size(); ++ref) {
        const Observation a = observe(base, ref, cfg, 0.5);
        const Observation b = observe(other, ref, cfg, 0.5);
        REQUIRE(a.size() == b.size());
        for (std::size_t k = 0; k < a.size(); ++k) {
          double diff = std::abs(a[k] - b[k]);
          // Angles at +-pi may flip sign.
          if (k % 2 == 1 && k + 1 < a.size()) diff = std::min(diff, std::abs(std::abs(diff) - 2.0 * kPi));
          INFO("trial ", trial, " ref ", ref, " k ", k, " a ", a[k], " b ", b[k]);
          CHECK(diff <= 1e-9);
        }
      }
    }
  }
}

TEST_CASE("random episodes conserve area and keep the front simple") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<PolyBoundary> domains;
  for (auto kind : {DomainKind::t1_like, DomainKind::star, DomainKind::multi_notch, DomainKind::convex}) {
    DomainSpec s;
    s.kind = kind;
    s.seed = 3;
    domains.push_back(make_domain(s));
  }
  std::size_t valid = 0;
  for (int episode = 0; episode < 12; ++episode) {
    const PolyBoundary& b = domains[static_cast<std::size_t>(episode) % domains.size()];
    const double area0 = std::abs(shoelace(b.vertices()));
    MeshEnv env;
    env.reset(b);
    while (!env.done()) {
      const double raw[3] = {u(rng), u(rng), u(rng)};
      const StepResult r = env.step(raw);
      double placed = 0.0;
      for (const auto& q : env.elements()) placed += std::abs(shoelace({q.corners.begin(), q.corners.end()}));
      const double left = env.completed() ? 0.0 : std::abs(shoelace(env.boundary().vertices()));
      CHECK(std::abs(placed + left - area0) <= 1e-9 * area0);
      if (r.outcome == StepOutcome::valid) {
        ++valid;
        CHECK(env.boundary().size() % 2 == 0);
        if (env.boundary().size() <= 100) CHECK(brute_simple(env.boundary().vertices()));
        CHECK(shoelace(env.boundary().vertices()) < 0.0);
      }
      CHECK(std::isfinite(r.reward));
      CHECK(r.reward >= -2.0);
      CHECK(r.reward <= 10.0);
    }
  }
  CHECK(valid > 0);
}

TEST_CASE("episode limits") {
  SUBCASE("step budget truncates") {
    EnvConfig cfg;
    cfg.max_steps = 3;
    MeshEnv env(cfg);
    env.reset(square8());
    const double bad[3] = {1.0, -1.0, 0.0};
    CHECK_FALSE(env.step(bad).done);
    CHECK_FALSE(env.step(bad).done);
    const StepResult r = env.step(bad);
    CHECK(r.done);
    CHECK(r.truncated);
    CHECK(r.outcome == StepOutcome::failed);
  }
  SUBCASE("consecutive invalid actions fail the episode") {
    MeshEnv env;
    env.reset(square8());
    const double bad[3] = {1.0, -1.0, 0.0};
    StepResult r;
    for (int k = 0; k < 50; ++k) r = env.step(bad);
    CHECK(r.done);
    CHECK_FALSE(r.truncated);
    CHECK(r.outcome == StepOutcome::failed);
    CHECK(r.reward == -0.1);
    CHECK(env.invalid_total() == 50);
  }
}

TEST_CASE("flat fronts trigger the two-vertex rule") {
  MeshEnv env;
  env.reset(regular_cw(40, 5.0));
  const double raw[3] = {-1.0, 0.0, 0.0};
  const StepResult r = env.step(raw);
  CHECK(r.rule_applied == 2);
  CHECK(r.outcome == StepOutcome::valid);
  CHECK(env.boundary().size() == 42);
  CHECK(env.rule_counts()[2] == 1);

  EnvConfig off;
  off.auto_two_vertex_rule = false;
  MeshEnv plain(off);
  plain.reset(regular_cw(40, 5.0));
  CHECK(plain.step(raw).rule_applied == 0);
}

TEST_CASE("density reference: initial boundary versus current front") {
  DomainSpec spec;
  spec.kind = DomainKind::star;
  const PolyBoundary b = make_domain(spec);
  EnvConfig fixed;
  EnvConfig moving;
  moving.density_from_initial = false;
  MeshEnv a(fixed), c(moving);
  a.reset(b);
  c.reset(b);
  const auto [e0_min, e0_max] = edge_range_oracle(b.vertices());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::size_t compared = 0, differing = 0;
  while (!a.done()) {
    const std::vector<Point2> front = a.boundary().vertices();
    const double raw[3] = {u(rng), u(rng), u(rng)};
    const StepResult ra = a.step(raw);
    const StepResult rc = c.step(raw);
    REQUIRE(ra.outcome == rc.outcome);
    if (ra.outcome != StepOutcome::valid) continue;
    const auto& q = a.elements().back().corners;
    const double area = std::abs(shoelace({q.begin(), q.end()}));
    const auto [f_min, f_max] = edge_range_oracle(front);
    const double expected = density_oracle(area, e0_min, e0_max, fixed.kappa, fixed.upsilon) -
                            density_oracle(area, f_min, f_max, fixed.kappa, fixed.upsilon);
    CHECK(ra.reward - rc.reward == doctest::Approx(expected).epsilon(1e-12));
    if (compared == 0) CHECK(ra.reward == rc.reward);
    ++compared;
    if (std::abs(expected) > 1e-9) ++differing;
  }
  CHECK(compared > 3);
  INFO("steps whose reward depends on the reference: ", differing);
  CHECK(differing > 0);
}
