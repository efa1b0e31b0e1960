#pragma once

// Boundary JSON and mesh text files.
//
// Mesh text: one record per line, `#` starts a comment.
//   v x y
//   q i1 i2 i3 i4     (one-based, counterclockwise)
//   t i1 i2 i3        (read only; never written by the generator)

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "freemesh/geom2d.hpp"
#include "freemesh/quality.hpp"

namespace freemesh {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Mesh parse_mesh_text(std::string_view text);
std::string mesh_to_text(const Mesh& mesh);

/// {"vertices": [[x, y], ...], "orientation": "cw" | "ccw"}. A counterclockwise
/// loop is reversed on read.
PolyBoundary parse_boundary_json(std::string_view text);
std::string boundary_to_json(const PolyBoundary& boundary);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

Mesh read_mesh_file(const std::filesystem::path& path);
PolyBoundary read_boundary_file(const std::filesystem::path& path);

/// Formats with the shortest representation that round-trips.
std::string format_double(double v);

}  // namespace freemesh
