#include "freemesh/mesh_env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>
#include <utility>

namespace freemesh {

void EnvConfig::validate() const {
  if (n_rv == 0) throw ConfigError("n_rv must be positive");
  if (n == 0) throw ConfigError("n must be at least 1");
  if (g == 0) throw ConfigError("g must be at least 1");
  if (!(radius_alpha > 0.0)) throw ConfigError("radius_alpha must be positive");
  if (!(fan_beta > 0.0)) throw ConfigError("fan_beta must be positive");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(upsilon > 0.0 && upsilon <= 10.0)) throw ConfigError("upsilon must lie in (0, 10]");
  if (!(m_angle > 0.0)) throw ConfigError("m_angle must be positive");
  if (max_consecutive_invalid == 0) throw ConfigError("max_consecutive_invalid must be positive");
}

MeshEnv::MeshEnv(EnvConfig cfg) : cfg_(cfg) { cfg_.validate(); }

double MeshEnv::area_ratio() const {
  if (boundary_.size() < 3) return 0.0;
  return std::clamp(std::abs(signed_area(boundary_)) / area0_, 0.0, 1.0);
}

namespace {

std::pair<double, double> edge_range(const PolyBoundary& b) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double len = distance(b[i], b.at_offset(i, 1));
    lo = std::min(lo, len);
    hi = std::max(hi, len);
  }
  return {lo, hi};
}

}  // namespace

Observation MeshEnv::reset(const PolyBoundary& boundary) {
  const std::size_t n = boundary.size();
  if (n < 4) throw GeometryError("reset: boundary needs at least 4 vertices");
  if (n % 2 != 0) {
    throw GeometryError("reset: an all-quad mesh needs an even boundary vertex count, got " + std::to_string(n));
  }
  if (!is_simple(boundary.vertices())) throw GeometryError("reset: boundary is not simple");
  if (!(signed_area(boundary) < 0.0)) throw GeometryError("reset: boundary must be clockwise");

  boundary_ = boundary;
  elements_.clear();
  area0_ = std::abs(signed_area(boundary_));
  std::tie(e_min0_, e_max0_) = edge_range(boundary_);
  steps_ = 0;
  max_steps_ = cfg_.max_steps != 0 ? cfg_.max_steps : 20 * n;
  consecutive_invalid_ = 0;
  invalid_total_ = 0;
  rule_counts_ = {};
  started_ = true;
  done_ = false;
  completed_ = false;
  ref_ = select_reference_vertex(boundary_, cfg_.n_rv);
  Observation obs = current_observation();
  obs.back() = 1.0;
  return obs;
}

Observation MeshEnv::current_observation() const {
  if (boundary_.size() < 4) {
    Observation zero(cfg_.observation_size(), 0.0);
    return zero;
  }
  return observe(boundary_, ref_, cfg_, area_ratio());
}

std::optional<MeshEnv::Extraction> MeshEnv::build_close_with_neighbour() const {
  const std::size_t n = boundary_.size();
  if (n < 6) return std::nullopt;
  const std::size_t i0 = ref_;
  const std::size_t ir1 = boundary_.wrap(ref_, -1);
  const std::size_t ir2 = boundary_.wrap(ref_, -2);
  const std::size_t il1 = boundary_.wrap(ref_, 1);

  Extraction ex;
  ex.rule = 0;
  ex.quad.corners = {boundary_[ir2], boundary_[ir1], boundary_[i0], boundary_[il1]};
  ex.on_boundary = {ir2, ir1, i0, il1};
  // Drop V0 and V_{r,1}; the front now runs V_{r,2} -> V_{l,1}.
  ex.next_front.reserve(n - 2);
  std::size_t k = il1;
  for (std::size_t c = 0; c < n - 2; ++c) {
    ex.next_front.push_back(boundary_[k]);
    k = boundary_.wrap(k, 1);
  }
  // next_front starts at V_{l,1} and ends at V_{r,2}.
  ex.junctions = {n - 3, 0};
  ex.new_edge_starts = {n - 3};
  return ex;
}

std::optional<MeshEnv::Extraction> MeshEnv::build_one_vertex(Point2 candidate) const {
  const std::size_t n = boundary_.size();
  const std::size_t i0 = ref_;
  const std::size_t ir1 = boundary_.wrap(ref_, -1);
  const std::size_t il1 = boundary_.wrap(ref_, 1);

  Extraction ex;
  ex.rule = 1;
  ex.quad.corners = {candidate, boundary_[ir1], boundary_[i0], boundary_[il1]};
  ex.on_boundary = {std::nullopt, ir1, i0, il1};
  // Front: V_{l,1}, ..., V_{r,1}, V_new with V_new replacing V0.
  ex.next_front.reserve(n);
  std::size_t k = il1;
  for (std::size_t c = 0; c < n - 1; ++c) {
    ex.next_front.push_back(boundary_[k]);
    k = boundary_.wrap(k, 1);
  }
  ex.next_front.push_back(candidate);
  ex.junctions = {n - 2, 0};
  ex.new_vertex = n - 1;
  ex.new_edge_starts = {n - 2, n - 1};
  return ex;
}

bool MeshEnv::two_vertex_rule_applies() const {
  if (!cfg_.auto_two_vertex_rule) return false;
  const std::size_t n = boundary_.size();
  if (n < 6) return false;
  const Point2 v = boundary_[ref_];
  double sum = 0.0;
  const std::size_t window = std::max<std::size_t>(1, std::min(cfg_.n_rv, (n - 1) / 2));
  for (std::size_t j = 1; j <= window; ++j) {
    const auto o = static_cast<std::ptrdiff_t>(j);
    sum += ccw_angle(boundary_.at_offset(ref_, -o) - v, boundary_.at_offset(ref_, o) - v);
  }
  if (to_degrees(sum / static_cast<double>(window)) <= cfg_.two_vertex_ref_angle) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (interior_angle(boundary_, i) <= cfg_.two_vertex_all_angles) return false;
  }
  return true;
}

std::optional<MeshEnv::Extraction> MeshEnv::build_two_vertex() const {
  const std::size_t n = boundary_.size();
  const std::size_t i0 = ref_;
  const std::size_t ir1 = boundary_.wrap(ref_, -1);
  const std::size_t window = std::max<std::size_t>(1, std::min(cfg_.n, (n - 1) / 2));
  const double base = base_length(boundary_, ref_, window);
  const Point2 v0 = boundary_[i0];
  const Point2 vr = boundary_[ir1];
  const Point2 along = v0 - vr;
  // Interior is on the right of travel along a clockwise front.
  const Point2 inward = (1.0 / norm(along)) * Point2{along.y, -along.x};
  const Point2 v2 = vr + base * inward;
  const Point2 v3 = v0 + base * inward;

  Extraction ex;
  ex.rule = 2;
  ex.quad.corners = {vr, v0, v3, v2};
  ex.on_boundary = {ir1, i0, std::nullopt, std::nullopt};
  // Front: V0, V_{l,1}, ..., V_{r,1}, V2, V3.
  ex.next_front.reserve(n + 2);
  std::size_t k = i0;
  for (std::size_t c = 0; c < n; ++c) {
    ex.next_front.push_back(boundary_[k]);
    k = boundary_.wrap(k, 1);
  }
  ex.next_front.push_back(v2);
  ex.next_front.push_back(v3);
  ex.junctions = {n - 1, 0};
  ex.new_edge_starts = {n - 1, n, n + 1};
  return ex;
}

bool MeshEnv::admissible(const Extraction& ex) const {
  if (!quad_is_valid(ex.quad, boundary_, ex.on_boundary)) return false;
  const auto& f = ex.next_front;
  const std::size_t m = f.size();
  if (m < 4) return false;
  if (m == 4) {
    // The remainder becomes the closing element and must itself be a valid quad.
    if (!is_simple(f) || !(signed_area(f) < 0.0)) return false;
    for (std::size_t i = 0; i < 4; ++i) {
      const double a = interior_angle(f, i);
      if (!(a > 1e-7 && a < 180.0 - 1e-7)) return false;
    }
    return true;
  }
  // Only the edges introduced by the extraction can break simplicity.
  for (const std::size_t s : ex.new_edge_starts) {
    const std::size_t s2 = (s + 1) % m;
    const std::size_t sp = (s + m - 1) % m;
    const std::size_t sn = (s2 + 1) % m;
    if (f[s] == f[s2]) return false;
    for (const auto [a, b, c] : {std::array{sp, s, s2}, std::array{s, s2, sn}}) {
      const Point2 u = f[a] - f[b];
      const Point2 w = f[c] - f[b];
      if (std::abs(cross(u, w)) <= kGeomEps * norm(u) * norm(w) && dot(u, w) > 0.0) return false;
    }
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t j2 = (j + 1) % m;
      if (j == s || j == s2 || j2 == s) continue;
      if (segments_intersect(f[s], f[s2], f[j], f[j2])) return false;
    }
  }
  return signed_area(f) < 0.0;
}

double MeshEnv::reward_for(const Extraction& ex) const {
  const double eta_e = element_quality(ex.quad);

  const auto& f = ex.next_front;
  const std::array<double, 2> junction = {interior_angle(f, ex.junctions[0]), interior_angle(f, ex.junctions[1])};
  std::optional<ProximityGap> gap;
  if (ex.new_vertex) {
    const std::size_t m = f.size();
    const std::size_t v = *ex.new_vertex;
    const std::size_t prev = (v + m - 1) % m;
    const std::size_t next = (v + 1) % m;
    ProximityGap g;
    g.d1 = distance(f[v], f[prev]);
    g.d2 = distance(f[v], f[next]);
    g.d_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t j2 = (j + 1) % m;
      if (j == v || j2 == v) continue;
      g.d_min = std::min(g.d_min, point_segment_distance(f[v], f[j], f[j2]));
    }
    gap = g;
  }
  const double eta_b = boundary_quality(junction, gap, cfg_.m_angle);

  auto [e_min, e_max] = cfg_.density_from_initial ? std::pair{e_min0_, e_max0_} : edge_range(boundary_);
  const double mu = density_term(quad_area(ex.quad), e_min, e_max, cfg_.kappa, cfg_.upsilon);
  return eta_e + eta_b + mu;
}

StepResult MeshEnv::step(std::span<const double> raw_action) {
  if (!started_) throw EnvError("step called before reset");
  if (done_) throw EnvError("step called after the episode finished");

  StepResult res;
  ++steps_;

  std::optional<Extraction> ex;
  if (boundary_.size() == 4) {
    // A four-vertex start is already the last element.
    QuadElement q{{boundary_[0], boundary_[1], boundary_[2], boundary_[3]}};
    bool ok = true;
    for (std::size_t i = 0; i < 4; ++i) {
      const double a = interior_angle(boundary_, i);
      ok = ok && a > 1e-7 && a < 180.0 - 1e-7;
    }
    if (ok) {
      elements_.push_back(q);
      boundary_ = PolyBoundary{};
      res.element = q;
      res.reward = 10.0;
      res.outcome = StepOutcome::completed;
      res.done = true;
      done_ = completed_ = true;
    } else {
      res.reward = -0.1;
      res.outcome = StepOutcome::failed;
      res.done = true;
      done_ = true;
    }
    res.observation = current_observation();
    return res;
  }

  if (two_vertex_rule_applies()) {
    ex = build_two_vertex();
    if (ex && !admissible(*ex)) ex.reset();
  }
  if (!ex) {
    const MeshAction action = decode_action(raw_action, boundary_, ref_, cfg_);
    ex = action.rule_type == 0 ? build_close_with_neighbour() : build_one_vertex(action.vertex);
    if (ex && !admissible(*ex)) ex.reset();
  }

  if (!ex) {
    ++consecutive_invalid_;
    ++invalid_total_;
    res.reward = -0.1;
    res.outcome = StepOutcome::invalid;
    if (consecutive_invalid_ >= cfg_.max_consecutive_invalid) {
      res.outcome = StepOutcome::failed;
      res.done = true;
      done_ = true;
    } else if (steps_ >= max_steps_) {
      res.outcome = StepOutcome::failed;
      res.done = true;
      res.truncated = true;
      done_ = true;
    }
    res.observation = current_observation();
    return res;
  }

  consecutive_invalid_ = 0;
  res.rule_applied = ex->rule;
  ++rule_counts_[static_cast<std::size_t>(ex->rule)];
  res.element = ex->quad;
  elements_.push_back(ex->quad);

  if (ex->next_front.size() == 4) {
    const auto& f = ex->next_front;
    QuadElement last{{f[0], f[1], f[2], f[3]}};
    elements_.push_back(last);
    res.closing_element = last;
    boundary_ = PolyBoundary{};
    res.reward = 10.0;
    res.outcome = StepOutcome::completed;
    res.done = true;
    done_ = completed_ = true;
    res.observation = current_observation();
    return res;
  }

  res.reward = reward_for(*ex);
  res.outcome = StepOutcome::valid;
  boundary_ = PolyBoundary::trusted(std::move(ex->next_front));
  ref_ = select_reference_vertex(boundary_, cfg_.n_rv);
  if (steps_ >= max_steps_) {
    // The element stands; the episode ends unfinished.
    res.done = true;
    res.truncated = true;
    done_ = true;
  }
  res.observation = current_observation();
  return res;
}

}  // namespace freemesh
