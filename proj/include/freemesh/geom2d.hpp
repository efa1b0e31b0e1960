#pragma once

// Planar geometry kernel shared by the meshing environment and the quality
// metrics. Boundaries are stored clockwise; angles are radians internally and
// degrees wherever a function name says so.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace freemesh {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGeomEps = 1e-9;

inline double to_degrees(double rad) { return rad * 180.0 / kPi; }
inline double to_radians(double deg) { return deg * kPi / 180.0; }

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend Point2 operator*(Point2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Rotates `v` counterclockwise by `angle` radians.
inline Point2 rotate(Point2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Counterclockwise angle from direction `from` to direction `to`, in [0, 2pi).
double ccw_angle(Point2 from, Point2 to);

enum class OrientationPolicy { require_clockwise, reverse_if_ccw };

/// Closed simple polygon stored in clockwise order. The last vertex connects
/// back to the first; the loop is never stored with a duplicated endpoint.
class PolyBoundary {
 public:
  PolyBoundary() = default;

  /// Validates and stores the loop. Throws GeometryError when the input has
  /// fewer than 3 vertices, non-finite or repeated consecutive vertices,
  /// crossing edges, zero area, or the wrong orientation under `policy`.
  explicit PolyBoundary(std::vector<Point2> vertices,
                        OrientationPolicy policy = OrientationPolicy::require_clockwise);

  /// Skips validation. Used for loops derived from an already-validated loop
  /// by an operation that has checked the edges it introduced.
  static PolyBoundary trusted(std::vector<Point2> vertices);

  std::size_t size() const { return vertices_.size(); }
  const std::vector<Point2>& vertices() const { return vertices_; }
  const Point2& operator[](std::size_t i) const { return vertices_[i]; }
  double perimeter() const { return perimeter_; }

  /// Vertex index `offset` steps from `i` along storage order (may be negative).
  std::size_t wrap(std::size_t i, std::ptrdiff_t offset) const;
  const Point2& at_offset(std::size_t i, std::ptrdiff_t offset) const {
    return vertices_[wrap(i, offset)];
  }

 private:
  void update_perimeter();

  std::vector<Point2> vertices_;
  double perimeter_ = 0.0;
};

/// Corners of one quadrilateral, in the winding the producer chose.
struct QuadElement {
  std::array<Point2, 4> corners;
};

// Shoelace sum; negative for clockwise loops.
double signed_area(std::span<const Point2> loop);
double signed_area(const PolyBoundary& poly);

/// Interior angle at vertex `i` of a clockwise loop, degrees in (0, 360).
double interior_angle(std::span<const Point2> loop, std::size_t i);
double interior_angle(const PolyBoundary& poly, std::size_t i);

/// True iff closed segments [a1,a2] and [b1,b2] share at least one point.
bool segments_intersect(Point2 a1, Point2 a2, Point2 b1, Point2 b2);

double point_segment_distance(Point2 p, Point2 s1, Point2 s2);

/// Even-odd containment; points on the boundary are reported as outside.
bool point_in_polygon(Point2 p, std::span<const Point2> loop);

/// Distance from `p` to the nearest edge of the closed loop.
double distance_to_loop(Point2 p, std::span<const Point2> loop);

/// Brute-force O(n^2) simplicity test over all non-adjacent edge pairs.
bool is_simple(std::span<const Point2> loop);

struct Polar {
  double radius = 0.0;
  double angle = 0.0;  // radians in (-pi, pi], counterclockwise positive
};

/// Maps points into the polar frame centred at `origin` whose zero direction
/// points at `ref_point`, with radii divided by `scale`. For a clockwise
/// boundary observed with `ref_point` = the previous vertex, interior-side
/// points come out with positive angles.
std::vector<Polar> polar_normalize(std::span<const Point2> points, Point2 origin, Point2 ref_point,
                                   double scale);

/// Corners of `q` that coincide with boundary vertices carry that vertex
/// index; corners created by the element carry nullopt.
using QuadBoundaryMap = std::array<std::optional<std::size_t>, 4>;

/// Full element admissibility against the current front: simple, convex,
/// oriented like the boundary (clockwise), new edges clear of the boundary,
/// new corners strictly inside, and no boundary vertex swallowed.
bool quad_is_valid(const QuadElement& q, const PolyBoundary& poly, const QuadBoundaryMap& on_boundary);

// Quad helpers, orientation independent.
std::array<double, 4> quad_interior_angles_deg(const QuadElement& q);
std::array<double, 4> quad_edge_lengths(const QuadElement& q);
double quad_max_diagonal(const QuadElement& q);
double quad_area(const QuadElement& q);

}  // namespace freemesh
