#pragma once

// Soft actor-critic with a tanh-squashed Gaussian policy, twin critics with
// Polyak-averaged targets and automatic entropy temperature.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "freemesh/mesh_env.hpp"
#include "freemesh/tinynet.hpp"

namespace freemesh::sac {

using nn::Matrix;

struct SacConfig {
  std::size_t buffer_capacity = 1'000'000;
  std::size_t batch_size = 256;
  double gamma = 0.99;
  double lr_q = 3e-4;
  double lr_policy = 3e-4;
  double lr_alpha = 3e-4;
  std::uint64_t total_steps = 1'200'000;
  std::size_t gradient_steps = 1;
  double tau = 5e-3;
  double target_entropy = -3.0;
  double initial_log_alpha = 0.0;
  std::size_t warmup_steps = 0;  // 0 = batch_size
  std::uint64_t eval_interval = 10'000;
  std::size_t eval_episodes = 10;
  std::uint64_t checkpoint_interval = 50'000;
  std::vector<std::size_t> hidden = {128, 128, 128};
  double log_std_min = -20.0;
  double log_std_max = 2.0;
  std::uint64_t seed = 356;

  void validate() const;
  std::size_t effective_warmup() const { return warmup_steps != 0 ? warmup_steps : batch_size; }
};

struct Transition {
  std::vector<double> state;
  std::vector<double> action;
  double reward = 0.0;
  std::vector<double> next_state;
  double done = 0.0;
};

struct Batch {
  Matrix state;       // obs_dim x m
  Matrix action;      // act_dim x m
  Matrix reward;      // 1 x m
  Matrix next_state;  // obs_dim x m
  Matrix done;        // 1 x m
  std::vector<std::size_t> indices;
};

/// Fixed-capacity ring of transitions; the oldest entry is overwritten first.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t obs_dim, std::size_t act_dim);

  void add(std::span<const double> state, std::span<const double> action, double reward,
           std::span<const double> next_state, bool done);
  void add(const Transition& t) { add(t.state, t.action, t.reward, t.next_state, t.done != 0.0); }

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }

  /// Slot `i` in storage order (0 .. size-1).
  Transition at(std::size_t i) const;

  /// m distinct slots drawn uniformly.
  Batch sample(std::size_t m, std::mt19937_64& rng) const;
  Batch gather(std::span<const std::size_t> indices) const;

 private:
  std::size_t capacity_;
  std::size_t obs_dim_;
  std::size_t act_dim_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  std::vector<double> state_;
  std::vector<double> action_;
  std::vector<double> reward_;
  std::vector<double> next_state_;
  std::vector<double> done_;
};

struct ActionSample {
  std::vector<double> action;        // strictly inside (-1, 1)
  std::optional<double> log_prob;    // absent for deterministic actions
};

/// Reparameterised batch sample from the squashed Gaussian policy.
struct PolicyDraw {
  Matrix mean;
  Matrix log_std;       // clamped
  Matrix in_range;      // 1 where the raw log-std was inside the clamp
  Matrix noise;
  Matrix pre_tanh;
  Matrix action;
  Matrix log_prob;      // 1 x m
};

class SacAgent {
 public:
  SacAgent(std::size_t obs_dim, std::size_t act_dim, const SacConfig& cfg);

  std::size_t obs_dim() const { return obs_dim_; }
  std::size_t act_dim() const { return act_dim_; }
  double alpha() const;
  const SacConfig& config() const { return cfg_; }

  nn::Mlp policy;
  nn::Mlp q1;
  nn::Mlp q2;
  nn::Mlp q1_target;
  nn::Mlp q2_target;
  nn::Matrix log_alpha;  // 1 x 1

  nn::Adam policy_opt;
  nn::Adam q1_opt;
  nn::Adam q2_opt;
  nn::Adam alpha_opt;

  std::mt19937_64 rng;

  /// Rebuilds optimizer state around the current parameters.
  void reset_optimizers();

  PolicyDraw draw(const Matrix& policy_output, std::span<const double> noise_override = {});
  Matrix critic_input(const Matrix& state, const Matrix& action) const;

 private:
  std::size_t obs_dim_;
  std::size_t act_dim_;
  SacConfig cfg_;
};

/// Log-density of the tanh-squashed Gaussian summed over dimensions, with
/// the change-of-variables term written in a numerically stable form.
double squashed_log_prob(std::span<const double> pre_tanh, std::span<const double> mean,
                         std::span<const double> log_std);

ActionSample sample_action(SacAgent& agent, std::span<const double> state, bool deterministic);

double soft_value(double q1_target, double q2_target, double alpha, double log_prob);
double soft_value(const SacAgent& agent, std::span<const double> next_state, std::span<const double> next_action,
                  double log_prob);

double q_target(double reward, double done, double soft_value_next, double gamma);

/// Steps both critics on 0.5 * mean squared TD error against a shared target
/// built from the target critics. Returns the pre-step loss summed over the
/// two critics.
double update_critics(SacAgent& agent, const Batch& batch);

struct CriticEval {
  Matrix value;        // 1 x m
  Matrix action_grad;  // act_dim x m, d value / d action
};
using CriticFn = std::function<CriticEval(const Matrix& state, const Matrix& action)>;

/// min(Q1, Q2) and its action gradient, without touching critic parameters.
CriticEval twin_min_critic(SacAgent& agent, const Matrix& state, const Matrix& action);

struct PolicyUpdate {
  double loss = 0.0;
  Matrix log_prob;  // 1 x m, from the fresh reparameterised sample
};

PolicyUpdate update_policy(SacAgent& agent, const Batch& batch);
PolicyUpdate update_policy(SacAgent& agent, const Batch& batch, const CriticFn& critic);

/// Gradient step on mean[-alpha * (log pi + target_entropy)] w.r.t. log alpha.
double update_temperature(SacAgent& agent, const Matrix& batch_log_probs);

void soft_update(nn::Mlp& target, const nn::Mlp& source, double tau);

struct EvalResult {
  std::vector<double> returns;
  std::vector<bool> completed;
  std::vector<std::vector<QuadElement>> meshes;
  std::vector<std::size_t> steps;

  double mean_return() const;
  double std_return() const;
  double completion_rate() const;
};

EvalResult evaluate(SacAgent& agent, const PolyBoundary& boundary, std::size_t episodes, const EnvConfig& env_cfg);

struct EvalRecord {
  std::uint64_t step = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double completion_rate = 0.0;
  double mean_elements = 0.0;
  double alpha = 0.0;
  std::uint64_t episodes = 0;  // training episodes finished so far
};

std::string to_log_line(const EvalRecord& r);

struct TrainingLog {
  std::vector<EvalRecord> evals;
  std::uint64_t gradient_updates = 0;
  std::uint64_t episodes = 0;
  std::uint64_t completed_episodes = 0;
};

struct EpisodeSource {
  EnvConfig env;
  std::function<PolyBoundary(std::uint64_t episode)> boundary;
  std::function<PolyBoundary()> eval_boundary;  // defaults to boundary(0)
};

struct TrainHooks {
  std::function<void(const EvalRecord&)> on_eval;
  std::function<void(std::uint64_t step, const SacAgent&)> on_checkpoint;
  std::function<void(std::uint64_t step, double episode_return, bool completed)> on_episode;
};

TrainingLog train(const EpisodeSource& source, SacAgent& agent, const SacConfig& cfg, const TrainHooks& hooks = {});

}  // namespace freemesh::sac
