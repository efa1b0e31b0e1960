// meshctl: generate domains, train a meshing policy, mesh boundaries,
// evaluate and render meshes.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "freemesh/checkpoint.hpp"
#include "freemesh/domains.hpp"
#include "freemesh/mesh_env.hpp"
#include "freemesh/mesh_io.hpp"
#include "freemesh/quality.hpp"
#include "freemesh/sac.hpp"
#include "freemesh/svg.hpp"

namespace fs = std::filesystem;
using namespace freemesh;

namespace {

constexpr int kOk = 0;
constexpr int kMeshingFailed = 2;
constexpr int kInputError = 3;
constexpr int kConfigError = 4;

fs::path default_out_dir() {
  const char* env = std::getenv("FREEMESH_OUT_DIR");
  return env != nullptr && *env != '\0' ? fs::path(env) : fs::path(".");
}

struct GenArgs {
  std::string kind = "t1-like";
  std::size_t count = 0;
  double depth = 0.0;
  double variation = 0.0;
  double segment_length = 0.0;
  std::uint64_t seed = 1;
  std::string input;
  std::string out;
};

struct TrainArgs {
  std::string domain;
  std::string eval_domain;
  std::string out;
  std::uint64_t seed = 356;
  std::uint64_t total_steps = 0;
  double upsilon = 1.0;
  std::size_t batch_size = 0;
  std::uint64_t eval_interval = 0;
  std::size_t eval_episodes = 0;
  std::uint64_t checkpoint_interval = 0;
  std::size_t max_steps = 0;
  bool quiet = false;
};

struct MeshArgs {
  std::string domain;
  std::string checkpoint;
  std::string out;
  std::string svg;
};

struct EvalArgs {
  std::string mesh;
  bool kv = false;
};

struct RenderArgs {
  std::string input;
  std::string svg;
  std::string boundary;
};

int cmd_gen_domain(const GenArgs& a) {
  DomainSpec spec;
  spec.kind = parse_domain_kind(a.kind);
  spec.count = a.count;
  spec.depth = a.depth;
  spec.variation = a.variation;
  spec.segment_length = a.segment_length;
  spec.seed = a.seed;
  spec.path = a.input;
  if (spec.kind == DomainKind::polygon_file && a.input.empty()) throw ConfigError("polygon-file needs --input");
  const PolyBoundary b = make_domain(spec);
  const fs::path out = a.out.empty() ? default_out_dir() / (a.kind + ".json") : fs::path(a.out);
  write_file_atomic(out, boundary_to_json(b));
  std::cout << "wrote " << out.string() << " (" << b.size() << " vertices)\n";
  return kOk;
}

PolyBoundary load_or_default(const std::string& path, std::uint64_t seed) {
  if (!path.empty()) return read_boundary_file(path);
  DomainSpec spec;
  spec.seed = seed;
  return make_domain(spec);
}

int cmd_train(const TrainArgs& a) {
  RunManifest m;
  m.seed = a.seed;
  m.env.upsilon = a.upsilon;
  m.env.max_steps = a.max_steps;
  m.sac.seed = a.seed;
  if (a.total_steps != 0) m.sac.total_steps = a.total_steps;
  if (a.batch_size != 0) m.sac.batch_size = a.batch_size;
  if (a.eval_interval != 0) m.sac.eval_interval = a.eval_interval;
  if (a.eval_episodes != 0) m.sac.eval_episodes = a.eval_episodes;
  if (a.checkpoint_interval != 0) m.sac.checkpoint_interval = a.checkpoint_interval;
  m.env.validate();
  m.sac.validate();

  const PolyBoundary train_domain = load_or_default(a.domain, a.seed);
  const PolyBoundary eval_domain = a.eval_domain.empty() ? train_domain : read_boundary_file(a.eval_domain);
  m.domain = a.domain.empty() ? "t1-like (seed " + std::to_string(a.seed) + ")" : a.domain;
  const fs::path out = a.out.empty() ? default_out_dir() : fs::path(a.out);
  fs::create_directories(out);
  m.output_dir = out.string();
  write_file_atomic(out / "manifest.json", manifest_to_json(m));

  sac::EpisodeSource src;
  src.env = m.env;
  src.boundary = [&](std::uint64_t) { return train_domain; };
  src.eval_boundary = [&] { return eval_domain; };

  sac::SacAgent agent(m.env.observation_size(), 3, m.sac);
  std::string log_text;
  sac::TrainHooks hooks;
  hooks.on_eval = [&](const sac::EvalRecord& r) {
    log_text += sac::to_log_line(r) + "\n";
    write_file_atomic(out / "train_log.jsonl", log_text);
    if (!a.quiet) std::cout << sac::to_log_line(r) << std::endl;
  };
  hooks.on_checkpoint = [&](std::uint64_t step, const sac::SacAgent& ag) {
    RunManifest snap = m;
    snap.step = step;
    save_checkpoint(out / ("checkpoint_" + std::to_string(step) + ".fmck"), ag, snap);
  };
  const sac::TrainingLog log = sac::train(src, agent, m.sac, hooks);
  RunManifest fin = m;
  fin.step = m.sac.total_steps;
  save_checkpoint(out / "final.fmck", agent, fin);
  std::cout << "trained " << m.sac.total_steps << " steps, " << log.episodes << " episodes ("
            << log.completed_episodes << " completed), " << log.gradient_updates << " gradient updates\n"
            << "wrote " << (out / "final.fmck").string() << "\n";
  return kOk;
}

int cmd_mesh(const MeshArgs& a) {
  const PolyBoundary boundary = read_boundary_file(a.domain);
  LoadedCheckpoint ck = load_checkpoint(a.checkpoint);
  const auto t0 = std::chrono::steady_clock::now();
  sac::EvalResult r = sac::evaluate(ck.agent, boundary, 1, ck.manifest.env);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const Mesh mesh = mesh_from_elements(r.meshes[0]);
  const fs::path out = a.out.empty() ? default_out_dir() / "mesh.txt" : fs::path(a.out);
  if (!r.completed[0]) {
    std::cerr << "meshing failed after " << r.steps[0] << " steps with " << r.meshes[0].size()
              << " elements placed; return " << r.returns[0] << "\n";
    if (!r.meshes[0].empty()) {
      write_file_atomic(out.string() + ".partial", mesh_to_text(mesh));
      std::cerr << "partial mesh written to " << out.string() << ".partial\n";
    }
    return kMeshingFailed;
  }
  write_file_atomic(out, mesh_to_text(mesh));
  if (!a.svg.empty()) write_file_atomic(a.svg, render_mesh_svg(mesh, boundary));
  std::cout << "completed: " << mesh.quads.size() << " quads, " << r.steps[0] << " steps, " << secs
            << " s\nwrote " << out.string() << "\n";
  return kOk;
}

int cmd_eval(const EvalArgs& a) {
  const Mesh mesh = read_mesh_file(a.mesh);
  const QualityReport r = report(mesh);
  std::cout << (a.kv ? format_kv(r) : format_table(r));
  return kOk;
}

int cmd_render(const RenderArgs& a) {
  const fs::path in(a.input);
  std::string svg;
  if (in.extension() == ".json") {
    svg = render_boundary_svg(read_boundary_file(in));
  } else {
    std::optional<PolyBoundary> b;
    if (!a.boundary.empty()) b = read_boundary_file(a.boundary);
    svg = render_mesh_svg(read_mesh_file(in), b);
  }
  const fs::path out = a.svg.empty() ? default_out_dir() / (in.stem().string() + ".svg") : fs::path(a.svg);
  write_file_atomic(out, svg);
  std::cout << "wrote " << out.string() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reinforcement-learning quadrilateral mesh generator"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-domain", "Write a generated boundary as JSON");
  g->add_option("--kind", gen.kind, "polygon-file, star, l-shape, multi-notch, ring-bridged, convex, t1-like");
  g->add_option("--count", gen.count, "Star points, notches, or vertices per arc / polygon");
  g->add_option("--depth", gen.depth, "Notch depth or star inner radius ratio");
  g->add_option("--variation", gen.variation, "Segment-length jitter in [0, 0.9]");
  g->add_option("--segment-length", gen.segment_length, "Subdivide edges to about this length");
  g->add_option("--seed", gen.seed);
  g->add_option("--input", gen.input, "Source boundary for polygon-file");
  g->add_option("--out", gen.out, "Output JSON path");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a policy with soft actor-critic");
  t->add_option("--domain", tr.domain, "Training boundary JSON (default: built-in t1-like fixture)");
  t->add_option("--eval-domain", tr.eval_domain, "Boundary used for periodic evaluation");
  t->add_option("--out", tr.out, "Output directory");
  t->add_option("--seed", tr.seed);
  t->add_option("--total-steps", tr.total_steps);
  t->add_option("--upsilon", tr.upsilon, "Density: 1.5 sparse, 1 medium, 0.5 dense");
  t->add_option("--batch-size", tr.batch_size);
  t->add_option("--eval-interval", tr.eval_interval);
  t->add_option("--eval-episodes", tr.eval_episodes);
  t->add_option("--checkpoint-interval", tr.checkpoint_interval);
  t->add_option("--max-steps", tr.max_steps, "Episode step budget (0: 20 x boundary vertices)");
  t->add_flag("--quiet", tr.quiet);

  MeshArgs me;
  auto* m = app.add_subcommand("mesh", "Mesh a boundary with a trained checkpoint");
  m->add_option("--domain", me.domain, "Boundary JSON")->required();
  m->add_option("--checkpoint", me.checkpoint)->required();
  m->add_option("--out", me.out, "Mesh text output");
  m->add_option("--svg", me.svg, "Also render the mesh");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Report quality metrics of a mesh file");
  e->add_option("mesh", ev.mesh)->required();
  e->add_flag("--kv", ev.kv, "key=value output");

  RenderArgs rd;
  auto* r = app.add_subcommand("render", "Render a boundary (.json) or mesh file to SVG");
  r->add_option("input", rd.input)->required();
  r->add_option("--svg", rd.svg, "Output SVG path");
  r->add_option("--boundary", rd.boundary, "Boundary JSON drawn over a mesh");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*g) return cmd_gen_domain(gen);
    if (*t) return cmd_train(tr);
    if (*m) return cmd_mesh(me);
    if (*e) return cmd_eval(ev);
    if (*r) return cmd_render(rd);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kConfigError;
  } catch (const std::invalid_argument& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kConfigError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kInputError;
  }
  return kOk;
}
