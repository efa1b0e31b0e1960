#pragma once

#include <optional>
#include <string>

#include "freemesh/geom2d.hpp"
#include "freemesh/quality.hpp"

namespace freemesh {

struct SvgOptions {
  double width = 800.0;   // pixels; height follows the aspect ratio
  double margin = 20.0;
};

/// One filled <path> per quad (and per triangle), then the boundary: the given
/// loop as a <polyline>, or else the mesh's one-sided edges as <line>s.
std::string render_mesh_svg(const Mesh& mesh, const std::optional<PolyBoundary>& boundary = std::nullopt,
                            const SvgOptions& opt = {});

std::string render_boundary_svg(const PolyBoundary& boundary, const SvgOptions& opt = {});

}  // namespace freemesh
