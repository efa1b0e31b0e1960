#pragma once

// Per-element quad quality indices and whole-mesh aggregation.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "freemesh/geom2d.hpp"

namespace freemesh {

/// Indexed face mesh. Faces are stored counterclockwise.
struct Mesh {
  std::vector<Point2> vertices;
  std::vector<std::array<std::size_t, 4>> quads;
  std::vector<std::array<std::size_t, 3>> triangles;

  /// Throws GeometryError on out-of-range or repeated face indices.
  void validate() const;
  QuadElement quad(std::size_t i) const;
};

/// Indexes extracted elements, merging bitwise-identical corner points.
Mesh mesh_from_elements(std::span<const QuadElement> elements);

/// Interior vertices whose edge valence differs from 4. A vertex is on the
/// boundary when it touches an edge used by exactly one face.
std::size_t singularity_count(const Mesh& mesh);

/// Minimum over corners of the normalised cross product of the two corner
/// edges; positive for a convex counterclockwise quad.
double scaled_jacobian(const QuadElement& q);

/// sqrt(2) * shortest edge / longest diagonal.
double stretch(const QuadElement& q);

/// Largest 1 - (smaller / larger) over the two diagonal splits.
double taper(const QuadElement& q);

struct AngleDeviation {
  double min_dev = 0.0;  // |smallest interior angle - 90|
  double max_dev = 0.0;  // |largest interior angle - 90|
};

AngleDeviation angle_deviations(const QuadElement& q);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population
};

MeanStd mean_std(std::span<const double> values);

struct QualityReport {
  std::size_t quad_count = 0;
  std::size_t triangle_count = 0;
  std::size_t singularity = 0;
  MeanStd element_quality;
  MeanStd min_angle_dev;
  MeanStd max_angle_dev;
  MeanStd scaled_jacobian;
  MeanStd stretch;
  MeanStd taper;
};

QualityReport report(const Mesh& mesh);

std::string format_table(const QualityReport& r);
std::string format_kv(const QualityReport& r);

}  // namespace freemesh
