#include "freemesh/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include <unistd.h>

#include "json.hpp"

namespace freemesh {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw InputError("line " + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view tok, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
    fail_at(line, "bad coordinate '" + std::string(tok) + "'");
  }
  return v;
}

std::size_t parse_index(std::string_view tok, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0) {
    fail_at(line, "bad vertex index '" + std::string(tok) + "'");
  }
  return v - 1;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Mesh parse_mesh_text(std::string_view text) {
  Mesh mesh;
  std::vector<std::size_t> quad_lines, tri_lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto tok = split_ws(line);
    if (tok.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (tok[0] == "v") {
      if (tok.size() != 3) fail_at(line_no, "vertex needs 2 coordinates");
      mesh.vertices.push_back({parse_real(tok[1], line_no), parse_real(tok[2], line_no)});
    } else if (tok[0] == "q") {
      if (tok.size() != 5) fail_at(line_no, "quad needs 4 indices");
      mesh.quads.push_back({parse_index(tok[1], line_no), parse_index(tok[2], line_no),
                            parse_index(tok[3], line_no), parse_index(tok[4], line_no)});
      quad_lines.push_back(line_no);
    } else if (tok[0] == "t") {
      if (tok.size() != 4) fail_at(line_no, "triangle needs 3 indices");
      mesh.triangles.push_back({parse_index(tok[1], line_no), parse_index(tok[2], line_no),
                                parse_index(tok[3], line_no)});
      tri_lines.push_back(line_no);
    } else {
      fail_at(line_no, "unknown record '" + std::string(tok[0]) + "'");
    }
    if (end == text.size()) break;
  }
  // Index checks run after the whole file is read so faces may precede vertices.
  auto check = [&](std::span<const std::size_t> face, std::size_t at) {
    for (std::size_t i = 0; i < face.size(); ++i) {
      if (face[i] >= mesh.vertices.size()) {
        fail_at(at, "vertex index " + std::to_string(face[i] + 1) + " out of range (" +
                        std::to_string(mesh.vertices.size()) + " vertices)");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (face[i] == face[j]) fail_at(at, "face repeats vertex " + std::to_string(face[i] + 1));
      }
    }
  };
  for (std::size_t i = 0; i < mesh.quads.size(); ++i) check(mesh.quads[i], quad_lines[i]);
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) check(mesh.triangles[i], tri_lines[i]);
  if (mesh.quads.empty() && mesh.triangles.empty()) throw InputError("mesh has no faces");
  return mesh;
}

std::string mesh_to_text(const Mesh& mesh) {
  mesh.validate();
  std::string out;
  for (const auto& v : mesh.vertices) out += "v " + format_double(v.x) + " " + format_double(v.y) + "\n";
  for (const auto& q : mesh.quads) {
    out += "q";
    for (auto i : q) out += " " + std::to_string(i + 1);
    out += "\n";
  }
  for (const auto& t : mesh.triangles) {
    out += "t";
    for (auto i : t) out += " " + std::to_string(i + 1);
    out += "\n";
  }
  return out;
}

PolyBoundary parse_boundary_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("boundary JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("vertices") || !doc["vertices"].is_array()) {
    throw InputError("boundary JSON needs a \"vertices\" array");
  }
  std::vector<Point2> pts;
  for (std::size_t i = 0; i < doc["vertices"].size(); ++i) {
    const auto& p = doc["vertices"][i];
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw InputError("boundary vertex " + std::to_string(i) + " is not an [x, y] pair");
    }
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  std::string orientation = "cw";
  if (doc.contains("orientation")) {
    if (!doc["orientation"].is_string()) throw InputError("boundary orientation must be a string");
    orientation = doc["orientation"].get<std::string>();
  }
  if (orientation != "cw" && orientation != "ccw") {
    throw InputError("boundary orientation must be \"cw\" or \"ccw\", got \"" + orientation + "\"");
  }
  if (orientation == "ccw") std::reverse(pts.begin(), pts.end());
  try {
    return PolyBoundary(std::move(pts), OrientationPolicy::require_clockwise);
  } catch (const GeometryError& e) {
    throw InputError(std::string("boundary: ") + e.what());
  }
}

std::string boundary_to_json(const PolyBoundary& boundary) {
  // Hand-formatted so coordinates keep their shortest round-trip spelling.
  std::string out = "{\"orientation\": \"cw\", \"vertices\": [";
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    if (i > 0) out += ", ";
    out += "[" + format_double(boundary[i].x) + ", " + format_double(boundary[i].y) + "]";
  }
  out += "]}\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InputError("cannot read " + path.string());
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw std::runtime_error("short write to " + path.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw std::runtime_error("cannot replace " + path.string());
  }
}

Mesh read_mesh_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_mesh_text(text);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

PolyBoundary read_boundary_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return parse_boundary_json(text);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace freemesh
