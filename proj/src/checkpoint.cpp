#include "freemesh/checkpoint.hpp"

#include <cstring>

#include "freemesh/mesh_io.hpp"
#include "json.hpp"

namespace freemesh {

namespace {

using nlohmann::ordered_json;

constexpr std::uint8_t kMagic[4] = {'F', 'M', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest field '") + key + "': " + e.what());
  }
}

ordered_json env_json(const EnvConfig& c) {
  ordered_json j;
  j["n_rv"] = c.n_rv;
  j["n"] = c.n;
  j["g"] = c.g;
  j["radius_alpha"] = c.radius_alpha;
  j["fan_beta"] = c.fan_beta;
  j["kappa"] = c.kappa;
  j["upsilon"] = c.upsilon;
  j["m_angle"] = c.m_angle;
  j["max_steps"] = c.max_steps;
  j["max_consecutive_invalid"] = c.max_consecutive_invalid;
  j["auto_two_vertex_rule"] = c.auto_two_vertex_rule;
  j["density_from_initial"] = c.density_from_initial;
  j["two_vertex_ref_angle"] = c.two_vertex_ref_angle;
  j["two_vertex_all_angles"] = c.two_vertex_all_angles;
  return j;
}

EnvConfig env_from(const nlohmann::json& j) {
  EnvConfig c;
  read_opt(j, "n_rv", c.n_rv);
  read_opt(j, "n", c.n);
  read_opt(j, "g", c.g);
  read_opt(j, "radius_alpha", c.radius_alpha);
  read_opt(j, "fan_beta", c.fan_beta);
  read_opt(j, "kappa", c.kappa);
  read_opt(j, "upsilon", c.upsilon);
  read_opt(j, "m_angle", c.m_angle);
  read_opt(j, "max_steps", c.max_steps);
  read_opt(j, "max_consecutive_invalid", c.max_consecutive_invalid);
  read_opt(j, "auto_two_vertex_rule", c.auto_two_vertex_rule);
  read_opt(j, "density_from_initial", c.density_from_initial);
  read_opt(j, "two_vertex_ref_angle", c.two_vertex_ref_angle);
  read_opt(j, "two_vertex_all_angles", c.two_vertex_all_angles);
  return c;
}

ordered_json sac_json(const sac::SacConfig& c) {
  ordered_json j;
  j["buffer_capacity"] = c.buffer_capacity;
  j["batch_size"] = c.batch_size;
  j["gamma"] = c.gamma;
  j["lr_q"] = c.lr_q;
  j["lr_policy"] = c.lr_policy;
  j["lr_alpha"] = c.lr_alpha;
  j["total_steps"] = c.total_steps;
  j["gradient_steps"] = c.gradient_steps;
  j["tau"] = c.tau;
  j["target_entropy"] = c.target_entropy;
  j["initial_log_alpha"] = c.initial_log_alpha;
  j["warmup_steps"] = c.warmup_steps;
  j["eval_interval"] = c.eval_interval;
  j["eval_episodes"] = c.eval_episodes;
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["hidden"] = c.hidden;
  j["log_std_min"] = c.log_std_min;
  j["log_std_max"] = c.log_std_max;
  j["seed"] = c.seed;
  return j;
}

sac::SacConfig sac_from(const nlohmann::json& j) {
  sac::SacConfig c;
  read_opt(j, "buffer_capacity", c.buffer_capacity);
  read_opt(j, "batch_size", c.batch_size);
  read_opt(j, "gamma", c.gamma);
  read_opt(j, "lr_q", c.lr_q);
  read_opt(j, "lr_policy", c.lr_policy);
  read_opt(j, "lr_alpha", c.lr_alpha);
  read_opt(j, "total_steps", c.total_steps);
  read_opt(j, "gradient_steps", c.gradient_steps);
  read_opt(j, "tau", c.tau);
  read_opt(j, "target_entropy", c.target_entropy);
  read_opt(j, "initial_log_alpha", c.initial_log_alpha);
  read_opt(j, "warmup_steps", c.warmup_steps);
  read_opt(j, "eval_interval", c.eval_interval);
  read_opt(j, "eval_episodes", c.eval_episodes);
  read_opt(j, "checkpoint_interval", c.checkpoint_interval);
  read_opt(j, "hidden", c.hidden);
  read_opt(j, "log_std_min", c.log_std_min);
  read_opt(j, "log_std_max", c.log_std_max);
  read_opt(j, "seed", c.seed);
  return c;
}

void put_stream(std::vector<std::uint8_t>& out, const nn::Mlp& net) {
  const auto w = nn::save_weights(net);
  nn::put_u64(out, w.size());
  out.insert(out.end(), w.begin(), w.end());
}

nn::Mlp take_stream(nn::ByteReader& in, const nn::Mlp& like, const char* name) {
  const std::uint64_t len = in.u64();
  if (len > in.remaining()) throw nn::FormatError(std::string("checkpoint: truncated ") + name + " stream");
  nn::Mlp net = nn::load_weights(in.take(static_cast<std::size_t>(len)));
  if (net.sizes() != like.sizes()) {
    throw nn::FormatError(std::string("checkpoint: ") + name + " shape does not match the manifest");
  }
  return net;
}

}  // namespace

std::string manifest_to_json(const RunManifest& m) {
  ordered_json j;
  j["version"] = m.version;
  j["seed"] = m.seed;
  j["step"] = m.step;
  j["domain"] = m.domain;
  j["output_dir"] = m.output_dir;
  j["env"] = env_json(m.env);
  j["sac"] = sac_json(m.sac);
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("manifest must be a JSON object");
  RunManifest m;
  read_opt(j, "version", m.version);
  read_opt(j, "seed", m.seed);
  read_opt(j, "step", m.step);
  read_opt(j, "domain", m.domain);
  read_opt(j, "output_dir", m.output_dir);
  if (j.contains("env")) m.env = env_from(j["env"]);
  if (j.contains("sac")) m.sac = sac_from(j["sac"]);
  m.env.validate();
  m.sac.validate();
  return m;
}

std::vector<std::uint8_t> encode_checkpoint(const sac::SacAgent& agent, const RunManifest& manifest) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  nn::put_u32(out, kVersion);
  const std::string text = manifest_to_json(manifest);
  nn::put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  put_stream(out, agent.policy);
  put_stream(out, agent.q1);
  put_stream(out, agent.q2);
  put_stream(out, agent.q1_target);
  put_stream(out, agent.q2_target);
  nn::put_f64(out, agent.log_alpha(0, 0));
  return out;
}

LoadedCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  nn::ByteReader in(bytes);
  if (in.remaining() < 4 || std::memcmp(in.take(4).data(), kMagic, 4) != 0) {
    throw nn::FormatError("not a checkpoint (bad magic)");
  }
  if (in.u32() != kVersion) throw nn::FormatError("unsupported checkpoint version");
  const std::uint64_t mlen = in.u64();
  if (mlen > in.remaining()) throw nn::FormatError("checkpoint: truncated manifest");
  const auto mbytes = in.take(static_cast<std::size_t>(mlen));
  RunManifest manifest = manifest_from_json(std::string(mbytes.begin(), mbytes.end()));

  sac::SacAgent agent(manifest.env.observation_size(), 3, manifest.sac);
  agent.policy = take_stream(in, agent.policy, "policy");
  agent.q1 = take_stream(in, agent.q1, "q1");
  agent.q2 = take_stream(in, agent.q2, "q2");
  agent.q1_target = take_stream(in, agent.q1_target, "q1 target");
  agent.q2_target = take_stream(in, agent.q2_target, "q2 target");
  agent.log_alpha(0, 0) = in.f64();
  if (in.remaining() != 0) throw nn::FormatError("checkpoint: trailing bytes");
  agent.reset_optimizers();
  return LoadedCheckpoint{std::move(manifest), std::move(agent)};
}

void save_checkpoint(const std::filesystem::path& path, const sac::SacAgent& agent, const RunManifest& manifest) {
  const auto bytes = encode_checkpoint(agent, manifest);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  const auto* p = reinterpret_cast<const std::uint8_t*>(text.data());
  return decode_checkpoint(std::span<const std::uint8_t>(p, text.size()));
}

}  // namespace freemesh
