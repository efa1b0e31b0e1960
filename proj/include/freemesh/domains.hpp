#pragma once

// Deterministic boundary generators for training and test domains. Every
// generator returns a simple clockwise loop with an even vertex count.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "freemesh/geom2d.hpp"

namespace freemesh {

enum class DomainKind { polygon_file, star, l_shape, multi_notch, ring_bridged, convex, t1_like };

struct DomainSpec {
  DomainKind kind = DomainKind::t1_like;
  std::size_t count = 0;          // star points, notches, ring/convex vertices; 0 = generator default
  double depth = 0.0;             // notch depth or star inner ratio; 0 = generator default
  double variation = 0.0;         // relative jitter of segment lengths, [0, 0.9]
  double segment_length = 0.0;    // target front edge length after subdivision; 0 = none
  std::uint64_t seed = 1;
  std::filesystem::path path;     // polygon_file only
};

DomainKind parse_domain_kind(const std::string& name);
std::string domain_kind_name(DomainKind kind);

PolyBoundary make_domain(const DomainSpec& spec);

/// Splits every edge of a counterclockwise or clockwise outline into pieces of
/// roughly `h`, jittering piece lengths by `variation`, and adds one more
/// split on the longest edge if needed to make the count even.
std::vector<Point2> subdivide_outline(const std::vector<Point2>& outline, double h, double variation,
                                      std::uint64_t seed);

}  // namespace freemesh
