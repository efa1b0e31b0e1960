#include "freemesh/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace freemesh::sac {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
constexpr double kLog2 = 0.69314718055994530942;

// Largest double below 1; keeps squashed actions strictly inside (-1, 1).
const double kActionBound = std::nextafter(1.0, 0.0);

double squash(double u) { return std::clamp(std::tanh(u), -kActionBound, kActionBound); }

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// log(1 - tanh(u)^2) without cancellation for large |u|.
double log_one_minus_tanh_sq(double u) { return 2.0 * (kLog2 - u - softplus(-2.0 * u)); }

void require_batch(const Batch& b) {
  if (b.state.cols() == 0) throw std::invalid_argument("empty batch");
}

std::vector<std::size_t> layer_sizes(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> s{in};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(out);
  return s;
}

nn::AdamConfig adam(double lr) {
  nn::AdamConfig c;
  c.learning_rate = lr;
  return c;
}

}  // namespace

void SacConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("sac config: " + what); };
  if (buffer_capacity == 0) fail("buffer capacity must be positive");
  if (batch_size == 0) fail("batch size must be positive");
  if (batch_size > buffer_capacity) fail("batch size exceeds buffer capacity");
  if (!(gamma > 0.0 && gamma < 1.0)) fail("gamma must lie in (0, 1)");
  if (!(tau > 0.0 && tau < 1.0)) fail("tau must lie in (0, 1)");
  if (!(lr_q > 0.0) || !(lr_policy > 0.0) || !(lr_alpha > 0.0)) fail("learning rates must be positive");
  if (total_steps == 0) fail("total steps must be positive");
  if (gradient_steps == 0) fail("gradient steps must be positive");
  if (eval_interval == 0) fail("eval interval must be positive");
  if (checkpoint_interval == 0) fail("checkpoint interval must be positive");
  if (hidden.empty()) fail("at least one hidden layer is required");
  for (auto h : hidden) {
    if (h == 0) fail("hidden layer sizes must be positive");
  }
  if (!(log_std_min < log_std_max)) fail("log-std bounds are inverted");
  if (!std::isfinite(target_entropy) || !std::isfinite(initial_log_alpha)) fail("non-finite temperature setting");
  if (effective_warmup() > buffer_capacity) fail("warmup exceeds buffer capacity");
}

SacAgent::SacAgent(std::size_t obs_dim, std::size_t act_dim, const SacConfig& cfg)
    : rng(cfg.seed), obs_dim_(obs_dim), act_dim_(act_dim), cfg_(cfg) {
  cfg_.validate();
  if (obs_dim == 0 || act_dim == 0) throw ConfigError("agent dimensions must be positive");
  std::mt19937_64 init(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  policy = nn::Mlp(layer_sizes(obs_dim, cfg.hidden, 2 * act_dim), init);
  q1 = nn::Mlp(layer_sizes(obs_dim + act_dim, cfg.hidden, 1), init);
  q2 = nn::Mlp(layer_sizes(obs_dim + act_dim, cfg.hidden, 1), init);
  q1_target = q1;
  q2_target = q2;
  log_alpha = Matrix::Constant(1, 1, cfg.initial_log_alpha);
  reset_optimizers();
}

double SacAgent::alpha() const { return std::exp(log_alpha(0, 0)); }

void SacAgent::reset_optimizers() {
  policy_opt = nn::Adam(policy.parameters(), adam(cfg_.lr_policy));
  q1_opt = nn::Adam(q1.parameters(), adam(cfg_.lr_q));
  q2_opt = nn::Adam(q2.parameters(), adam(cfg_.lr_q));
  alpha_opt = nn::Adam({log_alpha}, adam(cfg_.lr_alpha));
}

Matrix SacAgent::critic_input(const Matrix& state, const Matrix& action) const {
  if (state.cols() != action.cols()) throw nn::ShapeError("state and action batch sizes differ");
  Matrix sa(state.rows() + action.rows(), state.cols());
  sa.topRows(state.rows()) = state;
  sa.bottomRows(action.rows()) = action;
  return sa;
}

PolicyDraw SacAgent::draw(const Matrix& out, std::span<const double> noise_override) {
  const auto a = static_cast<Eigen::Index>(act_dim_);
  const Eigen::Index m = out.cols();
  if (out.rows() != 2 * a) throw nn::ShapeError("policy output has the wrong number of rows");
  PolicyDraw d;
  d.mean = out.topRows(a);
  const Matrix raw = out.bottomRows(a);
  d.log_std = raw.cwiseMax(cfg_.log_std_min).cwiseMin(cfg_.log_std_max);
  d.in_range = ((raw.array() >= cfg_.log_std_min) && (raw.array() <= cfg_.log_std_max)).cast<double>().matrix();
  d.noise.resize(a, m);
  if (!noise_override.empty()) {
    if (noise_override.size() != static_cast<std::size_t>(a * m)) throw nn::ShapeError("noise override size");
    for (Eigen::Index c = 0; c < m; ++c) {
      for (Eigen::Index r = 0; r < a; ++r) d.noise(r, c) = noise_override[static_cast<std::size_t>(c * a + r)];
    }
  } else {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index c = 0; c < m; ++c) {
      for (Eigen::Index r = 0; r < a; ++r) d.noise(r, c) = normal(rng);
    }
  }
  d.pre_tanh = d.mean + d.log_std.array().exp().matrix().cwiseProduct(d.noise);
  d.action = d.pre_tanh.unaryExpr([](double u) { return squash(u); });
  d.log_prob.resize(1, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    double lp = 0.0;
    for (Eigen::Index r = 0; r < a; ++r) {
      const double e = d.noise(r, c);
      lp += -0.5 * e * e - d.log_std(r, c) - kHalfLog2Pi - log_one_minus_tanh_sq(d.pre_tanh(r, c));
    }
    d.log_prob(0, c) = lp;
  }
  return d;
}

double squashed_log_prob(std::span<const double> pre_tanh, std::span<const double> mean,
                         std::span<const double> log_std) {
  if (pre_tanh.size() != mean.size() || mean.size() != log_std.size()) {
    throw nn::ShapeError("squashed_log_prob: length mismatch");
  }
  double lp = 0.0;
  for (std::size_t i = 0; i < pre_tanh.size(); ++i) {
    const double z = (pre_tanh[i] - mean[i]) / std::exp(log_std[i]);
    lp += -0.5 * z * z - log_std[i] - kHalfLog2Pi - log_one_minus_tanh_sq(pre_tanh[i]);
  }
  return lp;
}

ActionSample sample_action(SacAgent& agent, std::span<const double> state, bool deterministic) {
  if (state.size() != agent.obs_dim()) {
    throw nn::ShapeError("observation has " + std::to_string(state.size()) + " entries, policy expects " +
                         std::to_string(agent.obs_dim()));
  }
  Matrix s(static_cast<Eigen::Index>(state.size()), 1);
  for (std::size_t i = 0; i < state.size(); ++i) s(static_cast<Eigen::Index>(i), 0) = state[i];
  const Matrix out = agent.policy.predict(s);
  ActionSample res;
  if (deterministic) {
    const auto a = static_cast<Eigen::Index>(agent.act_dim());
    for (Eigen::Index r = 0; r < a; ++r) res.action.push_back(squash(out(r, 0)));
    return res;
  }
  PolicyDraw d = agent.draw(out);
  for (Eigen::Index r = 0; r < d.action.rows(); ++r) res.action.push_back(d.action(r, 0));
  res.log_prob = d.log_prob(0, 0);
  return res;
}

double soft_value(double q1_target, double q2_target, double alpha, double log_prob) {
  return std::min(q1_target, q2_target) - alpha * log_prob;
}

double soft_value(const SacAgent& agent, std::span<const double> next_state, std::span<const double> next_action,
                  double log_prob) {
  if (next_state.size() != agent.obs_dim() || next_action.size() != agent.act_dim()) {
    throw nn::ShapeError("soft_value: state or action length mismatch");
  }
  Matrix sa(static_cast<Eigen::Index>(next_state.size() + next_action.size()), 1);
  Eigen::Index r = 0;
  for (double v : next_state) sa(r++, 0) = v;
  for (double v : next_action) sa(r++, 0) = v;
  return soft_value(agent.q1_target.predict(sa)(0, 0), agent.q2_target.predict(sa)(0, 0), agent.alpha(), log_prob);
}

double q_target(double reward, double done, double soft_value_next, double gamma) {
  return reward + gamma * (1.0 - done) * soft_value_next;
}

double update_critics(SacAgent& agent, const Batch& batch) {
  require_batch(batch);
  const Eigen::Index m = batch.state.cols();
  const double gamma = agent.config().gamma;
  const double alpha = agent.alpha();

  PolicyDraw next = agent.draw(agent.policy.predict(batch.next_state));
  const Matrix next_sa = agent.critic_input(batch.next_state, next.action);
  const Matrix t1 = agent.q1_target.predict(next_sa);
  const Matrix t2 = agent.q2_target.predict(next_sa);
  Matrix y(1, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const double v = soft_value(t1(0, c), t2(0, c), alpha, next.log_prob(0, c));
    y(0, c) = q_target(batch.reward(0, c), batch.done(0, c), v, gamma);
  }

  const Matrix sa = agent.critic_input(batch.state, batch.action);
  double loss = 0.0;
  auto step_one = [&](nn::Mlp& q, nn::Adam& opt) {
    const Matrix err = q.forward(sa) - y;
    loss += 0.5 * err.squaredNorm() / static_cast<double>(m);
    nn::Gradients g = q.backward(err / static_cast<double>(m));
    opt.step(q.parameters(), g.params);
  };
  step_one(agent.q1, agent.q1_opt);
  step_one(agent.q2, agent.q2_opt);
  return loss;
}

CriticEval twin_min_critic(SacAgent& agent, const Matrix& state, const Matrix& action) {
  const Matrix sa = agent.critic_input(state, action);
  const Matrix v1 = agent.q1.forward(sa);
  const Matrix v2 = agent.q2.forward(sa);
  const Matrix pick1 = (v1.array() <= v2.array()).cast<double>().matrix();
  const Matrix pick2 = Matrix::Ones(1, v1.cols()) - pick1;
  const Matrix g1 = agent.q1.backward(pick1, false).input;
  const Matrix g2 = agent.q2.backward(pick2, false).input;
  const Eigen::Index a = action.rows();
  CriticEval ev;
  ev.value = v1.cwiseMin(v2);
  ev.action_grad = g1.bottomRows(a) + g2.bottomRows(a);
  return ev;
}

PolicyUpdate update_policy(SacAgent& agent, const Batch& batch) {
  return update_policy(agent, batch,
                       [&agent](const Matrix& s, const Matrix& a) { return twin_min_critic(agent, s, a); });
}

PolicyUpdate update_policy(SacAgent& agent, const Batch& batch, const CriticFn& critic) {
  require_batch(batch);
  const Eigen::Index m = batch.state.cols();
  const double inv_m = 1.0 / static_cast<double>(m);
  const double alpha = agent.alpha();

  const Matrix out = agent.policy.forward(batch.state);
  PolicyDraw d = agent.draw(out);
  const CriticEval q = critic(batch.state, d.action);

  PolicyUpdate res;
  res.loss = (alpha * d.log_prob - q.value).sum() * inv_m;
  res.log_prob = d.log_prob;

  // Reparameterised gradient: u = mean + exp(log_std) * eps, a = tanh(u),
  // d log pi / du = 2a, d log pi / d log_std = -1 at fixed eps.
  const Matrix one_minus_a2 = (1.0 - d.action.array().square()).matrix();
  const Matrix d_u =
      (-inv_m) * q.action_grad.cwiseProduct(one_minus_a2) + (alpha * inv_m * 2.0) * d.action;
  const Matrix sigma = d.log_std.array().exp().matrix();
  Matrix d_ls = d_u.cwiseProduct(sigma).cwiseProduct(d.noise);
  d_ls.array() -= alpha * inv_m;
  d_ls = d_ls.cwiseProduct(d.in_range);

  Matrix grad_out(out.rows(), m);
  grad_out.topRows(d.mean.rows()) = d_u;
  grad_out.bottomRows(d.mean.rows()) = d_ls;
  nn::Gradients g = agent.policy.backward(grad_out);
  agent.policy_opt.step(agent.policy.parameters(), g.params);
  return res;
}

double update_temperature(SacAgent& agent, const Matrix& batch_log_probs) {
  if (batch_log_probs.size() == 0) return agent.alpha();
  const double mean_lp = batch_log_probs.mean();
  const double h = agent.config().target_entropy;
  std::vector<Matrix> grad{Matrix::Constant(1, 1, -agent.alpha() * (mean_lp + h))};
  std::vector<Matrix> params{agent.log_alpha};
  agent.alpha_opt.step(params, grad);
  agent.log_alpha = params[0];
  return agent.alpha();
}

void soft_update(nn::Mlp& target, const nn::Mlp& source, double tau) {
  auto& tp = target.parameters();
  const auto& sp = source.parameters();
  if (tp.size() != sp.size()) throw nn::ShapeError("soft_update: parameter block count mismatch");
  for (std::size_t i = 0; i < tp.size(); ++i) {
    if (tp[i].rows() != sp[i].rows() || tp[i].cols() != sp[i].cols()) {
      throw nn::ShapeError("soft_update: block " + std::to_string(i) + " shape mismatch");
    }
  }
  for (std::size_t i = 0; i < tp.size(); ++i) tp[i] = tau * sp[i] + (1.0 - tau) * tp[i];
}

double EvalResult::mean_return() const {
  if (returns.empty()) return 0.0;
  return std::accumulate(returns.begin(), returns.end(), 0.0) / static_cast<double>(returns.size());
}

double EvalResult::std_return() const {
  if (returns.empty()) return 0.0;
  const double mu = mean_return();
  double s = 0.0;
  for (double r : returns) s += (r - mu) * (r - mu);
  return std::sqrt(s / static_cast<double>(returns.size()));
}

double EvalResult::completion_rate() const {
  if (completed.empty()) return 0.0;
  return static_cast<double>(std::count(completed.begin(), completed.end(), true)) /
         static_cast<double>(completed.size());
}

EvalResult evaluate(SacAgent& agent, const PolyBoundary& boundary, std::size_t episodes, const EnvConfig& env_cfg) {
  EvalResult res;
  for (std::size_t e = 0; e < episodes; ++e) {
    MeshEnv env(env_cfg);
    Observation obs = env.reset(boundary);
    double ret = 0.0;
    while (!env.done()) {
      const ActionSample a = sample_action(agent, obs, true);
      StepResult sr = env.step(a.action);
      ret += sr.reward;
      obs = std::move(sr.observation);
    }
    res.returns.push_back(ret);
    res.completed.push_back(env.completed());
    res.meshes.push_back(env.elements());
    res.steps.push_back(env.steps_taken());
  }
  return res;
}

std::string to_log_line(const EvalRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["mean_return"] = r.mean_return;
  j["std_return"] = r.std_return;
  j["completion_rate"] = r.completion_rate;
  j["mean_elements"] = r.mean_elements;
  j["alpha"] = r.alpha;
  j["episodes"] = r.episodes;
  return j.dump();
}

TrainingLog train(const EpisodeSource& source, SacAgent& agent, const SacConfig& cfg, const TrainHooks& hooks) {
  cfg.validate();
  source.env.validate();
  if (!source.boundary) throw ConfigError("training needs a boundary source");
  if (agent.obs_dim() != source.env.observation_size() || agent.act_dim() != 3) {
    throw ConfigError("agent dimensions do not match the environment");
  }

  TrainingLog log;
  ReplayBuffer buffer(cfg.buffer_capacity, agent.obs_dim(), agent.act_dim());
  std::mt19937_64 rng(cfg.seed + 1);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  const std::size_t warmup = cfg.effective_warmup();
  const PolyBoundary eval_boundary = source.eval_boundary ? source.eval_boundary() : source.boundary(0);

  MeshEnv env(source.env);
  Observation obs = env.reset(source.boundary(log.episodes));
  double episode_return = 0.0;
  std::vector<double> action(agent.act_dim());

  for (std::uint64_t t = 1; t <= cfg.total_steps; ++t) {
    if (buffer.size() < warmup) {
      for (auto& v : action) v = uniform(rng);
    } else {
      action = sample_action(agent, obs, false).action;
    }
    StepResult sr = env.step(action);
    episode_return += sr.reward;
    // Time-limit truncation bootstraps; only genuine terminals cut the target.
    const bool terminal = sr.done && !sr.truncated;
    buffer.add(obs, action, sr.reward, sr.observation, terminal);
    obs = std::move(sr.observation);

    if (sr.done) {
      ++log.episodes;
      if (env.completed()) ++log.completed_episodes;
      if (hooks.on_episode) hooks.on_episode(t, episode_return, env.completed());
      episode_return = 0.0;
      obs = env.reset(source.boundary(log.episodes));
    }

    if (buffer.size() > cfg.batch_size) {
      for (std::size_t k = 0; k < cfg.gradient_steps; ++k) {
        const Batch batch = buffer.sample(cfg.batch_size, rng);
        update_critics(agent, batch);
        const PolicyUpdate pu = update_policy(agent, batch);
        soft_update(agent.q1_target, agent.q1, cfg.tau);
        soft_update(agent.q2_target, agent.q2, cfg.tau);
        update_temperature(agent, pu.log_prob);
        ++log.gradient_updates;
      }
    }

    if (t % cfg.eval_interval == 0) {
      const EvalResult ev = evaluate(agent, eval_boundary, cfg.eval_episodes, source.env);
      EvalRecord rec;
      rec.step = t;
      rec.mean_return = ev.mean_return();
      rec.std_return = ev.std_return();
      rec.completion_rate = ev.completion_rate();
      double elems = 0.0;
      for (const auto& mesh : ev.meshes) elems += static_cast<double>(mesh.size());
      rec.mean_elements = ev.meshes.empty() ? 0.0 : elems / static_cast<double>(ev.meshes.size());
      rec.alpha = agent.alpha();
      rec.episodes = log.episodes;
      log.evals.push_back(rec);
      if (hooks.on_eval) hooks.on_eval(rec);
    }
    if (hooks.on_checkpoint && t % cfg.checkpoint_interval == 0) hooks.on_checkpoint(t, agent);
  }
  return log;
}

}  // namespace freemesh::sac
