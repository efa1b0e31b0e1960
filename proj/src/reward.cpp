#include <algorithm>
#include <cmath>

#include "freemesh/mesh_env.hpp"

namespace freemesh {

double element_quality(const QuadElement& q) {
  const double diag = quad_max_diagonal(q);
  if (!(diag > 0.0)) throw GeometryError("element_quality: zero-length diagonal");
  const auto edges = quad_edge_lengths(q);
  const auto angles = quad_interior_angles_deg(q);
  const double q_edge = std::sqrt(2.0) * *std::min_element(edges.begin(), edges.end()) / diag;
  const double q_angle =
      *std::min_element(angles.begin(), angles.end()) / *std::max_element(angles.begin(), angles.end());
  return std::sqrt(q_edge * q_angle);
}

double distance_quality(const ProximityGap& gap) {
  const double mean = 0.5 * (gap.d1 + gap.d2);
  if (gap.d_min < mean) return gap.d_min / mean;
  return 1.0;
}

double boundary_quality(std::array<double, 2> junction_angles_deg, const std::optional<ProximityGap>& gap,
                        double m_angle) {
  const double sharpest =
      std::min(std::min(junction_angles_deg[0], m_angle), std::min(junction_angles_deg[1], m_angle));
  const double q_angle = std::max(sharpest, 0.0) / m_angle;
  const double q_dist = gap ? distance_quality(*gap) : 1.0;
  return std::sqrt(q_angle * q_dist) - 1.0;
}

double density_term(double element_area, double e_min, double e_max, double kappa, double upsilon) {
  const double a_min = upsilon * e_min * e_min;
  const double side_max = (e_max - e_min) / kappa + e_min;
  const double a_max = upsilon * side_max * side_max;
  if (element_area < a_min) return -1.0;
  if (element_area >= a_max) return 0.0;
  // element_area in [a_min, a_max) implies a_max > a_min here.
  return (element_area - a_min) / (a_max - a_min);
}

}  // namespace freemesh
