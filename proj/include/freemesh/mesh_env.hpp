#pragma once

// Element-extraction environment: an advancing front that loses one
// quadrilateral per accepted action until a single quad is left.
//
// Neighbour naming around the reference vertex V0 (boundary index i):
//   right side V_{r,j} = vertex i - j   (the domain lies counterclockwise
//   left side  V_{l,j} = vertex i + j    from V0->V_{r,1} to V0->V_{l,1})

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "freemesh/geom2d.hpp"

namespace freemesh {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EnvError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct EnvConfig {
  std::size_t n_rv = 2;          // reference-vertex averaging window
  std::size_t n = 2;             // neighbours per side in the observation and base length
  std::size_t g = 3;             // fan probes
  double radius_alpha = 2.0;     // action radius factor
  double fan_beta = 6.0;         // probe radius factor
  double kappa = 4.0;            // density: maximum-area adjustment
  double upsilon = 1.0;          // density weight, (0, 10]; smaller is denser
  double m_angle = 60.0;         // degrees; junction angles below this are penalised
  std::size_t max_steps = 0;     // 0 = 20 x initial vertex count
  std::size_t max_consecutive_invalid = 50;
  bool auto_two_vertex_rule = true;
  // Density thresholds from the episode's initial boundary edges (true) or
  // from the current front (false).
  bool density_from_initial = true;
  double two_vertex_ref_angle = 160.0;  // degrees, averaged angle at V0
  double two_vertex_all_angles = 150.0; // degrees, every front angle

  void validate() const;
  std::size_t observation_size() const { return 2 * (2 * n + g) + 1; }
};

using Observation = std::vector<double>;

struct MeshAction {
  std::array<double, 3> raw{};  // policy output, clamped to [-1, 1]
  int rule_type = 1;            // 0: close with V_{r,2}; 1: one new vertex
  double radius_fraction = 0.0; // of radius_alpha * L
  double angle_fraction = 0.0;  // of the interior angle at V0
  Point2 vertex{};              // candidate vertex for rule 1
};

enum class StepOutcome { valid, invalid, completed, failed };

// `outcome` describes this step. An episode that ends with done && outcome
// != completed (including a truncated valid step) is a failed episode.
struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  bool truncated = false;  // step budget ran out; learners should bootstrap
  StepOutcome outcome = StepOutcome::invalid;
  int rule_applied = -1;   // 0, 1, 2 (environment-applied), or -1 when rejected
  std::optional<QuadElement> element;
  std::optional<QuadElement> closing_element;  // remaining 4-vertex front on completion
};

/// Argmin over vertices of the mean interior-side angle to the j-th
/// neighbour pair, j = 1..n_rv; lowest index wins ties.
std::size_t select_reference_vertex(const PolyBoundary& boundary, std::size_t n_rv);

/// Mean length of the n front edges on each side of `ref`.
double base_length(const PolyBoundary& boundary, std::size_t ref, std::size_t n);

/// Fixed-length local encoding of the front around `ref`. `rho` is the
/// remaining-area fraction appended as the last component.
Observation observe(const PolyBoundary& boundary, std::size_t ref, const EnvConfig& cfg, double rho);

MeshAction decode_action(std::span<const double> raw, const PolyBoundary& boundary, std::size_t ref,
                         const EnvConfig& cfg);

/// Edge and angle regularity of one quad in [0, 1]; 1 for a square.
double element_quality(const QuadElement& q);

struct ProximityGap {
  double d_min = 0.0;  // new vertex to the closest non-incident front edge
  double d1 = 0.0;     // lengths of the two front edges meeting at the new vertex
  double d2 = 0.0;
};

double distance_quality(const ProximityGap& gap);

/// Penalty in [-1, 0] for sharp junction angles and crowding on the front
/// left behind by an extraction.
double boundary_quality(std::array<double, 2> junction_angles_deg, const std::optional<ProximityGap>& gap,
                        double m_angle);

/// Element-size shaping term: -1 below the minimum area, a linear ramp up to
/// the maximum area, 0 above.
double density_term(double element_area, double e_min, double e_max, double kappa, double upsilon);

class MeshEnv {
 public:
  explicit MeshEnv(EnvConfig cfg = {});

  /// Starts an episode. Requires a simple clockwise boundary with an even
  /// vertex count of at least 4.
  Observation reset(const PolyBoundary& boundary);

  StepResult step(std::span<const double> raw_action);

  const EnvConfig& config() const { return cfg_; }
  const PolyBoundary& boundary() const { return boundary_; }
  const std::vector<QuadElement>& elements() const { return elements_; }
  std::size_t reference_vertex() const { return ref_; }
  std::size_t steps_taken() const { return steps_; }
  std::size_t consecutive_invalid() const { return consecutive_invalid_; }
  std::size_t invalid_total() const { return invalid_total_; }
  std::array<std::size_t, 3> rule_counts() const { return rule_counts_; }
  double original_area() const { return area0_; }
  double area_ratio() const;
  bool done() const { return done_; }
  bool completed() const { return completed_; }

 private:
  struct Extraction {
    QuadElement quad;
    QuadBoundaryMap on_boundary;
    std::vector<Point2> next_front;
    std::array<std::size_t, 2> junctions{};     // indices into next_front
    std::optional<std::size_t> new_vertex;      // index into next_front (rule 1)
    std::vector<std::size_t> new_edge_starts;   // indices into next_front
    int rule = -1;
  };

  std::optional<Extraction> build_close_with_neighbour() const;
  std::optional<Extraction> build_one_vertex(Point2 candidate) const;
  std::optional<Extraction> build_two_vertex() const;
  bool two_vertex_rule_applies() const;
  bool admissible(const Extraction& ex) const;
  double reward_for(const Extraction& ex) const;
  Observation current_observation() const;

  EnvConfig cfg_;
  PolyBoundary boundary_;
  std::vector<QuadElement> elements_;
  std::size_t ref_ = 0;
  std::size_t steps_ = 0;
  std::size_t max_steps_ = 0;
  std::size_t consecutive_invalid_ = 0;
  std::size_t invalid_total_ = 0;
  std::array<std::size_t, 3> rule_counts_{};
  double area0_ = 0.0;
  double e_min0_ = 0.0;
  double e_max0_ = 0.0;
  bool started_ = false;
  bool done_ = false;
  bool completed_ = false;
};

}  // namespace freemesh
