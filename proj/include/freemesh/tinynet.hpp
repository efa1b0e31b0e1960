#pragma once

// Dense ReLU multilayer perceptrons with an explicit reverse pass. Batches are
// column-major: one sample per column.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace freemesh::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Gradients {
  std::vector<Matrix> params;  // same layout as Mlp::parameters()
  Matrix input;                // d loss / d input, in x batch
};

class Mlp {
 public:
  Mlp() = default;

  /// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] for weights and biases.
  Mlp(std::vector<std::size_t> sizes, std::mt19937_64& rng);

  static Mlp zeros(std::vector<std::size_t> sizes);

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t layer_count() const { return sizes_.size() - 1; }
  std::size_t parameter_count() const;

  /// Runs the net and records what `backward` needs.
  Matrix forward(const Matrix& input);

  /// Runs the net without touching the recorded pass.
  Matrix predict(const Matrix& input) const;

  /// Gradients of sum(grad_output .* output) for the last recorded forward.
  /// With `with_params` false only the input gradient is produced.
  Gradients backward(const Matrix& grad_output, bool with_params = true) const;

  bool has_recorded_pass() const { return !acts_.empty(); }

  /// Flat parameter list: W0, b0, W1, b1, ... with W_k of shape out x in and
  /// b_k of shape out x 1.
  std::vector<Matrix>& parameters() { return params_; }
  const std::vector<Matrix>& parameters() const { return params_; }

  Matrix& weight(std::size_t layer) { return params_[2 * layer]; }
  Matrix& bias(std::size_t layer) { return params_[2 * layer + 1]; }
  const Matrix& weight(std::size_t layer) const { return params_[2 * layer]; }
  const Matrix& bias(std::size_t layer) const { return params_[2 * layer + 1]; }

 private:
  void check_input(const Matrix& input) const;

  std::vector<std::size_t> sizes_;
  std::vector<Matrix> params_;
  // Recorded pass: acts_[k] is the input to layer k; pre_[k] the pre-activation.
  std::vector<Matrix> acts_;
  std::vector<Matrix> pre_;
};

struct AdamConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a list of parameter blocks.
class Adam {
 public:
  Adam() = default;
  Adam(const std::vector<Matrix>& params, AdamConfig cfg = {});

  void step(std::vector<Matrix>& params, const std::vector<Matrix>& grads);

  std::uint64_t steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

 private:
  AdamConfig cfg_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::uint64_t t_ = 0;
};

/// Layer sizes followed by row-major little-endian float64 payload.
std::vector<std::uint8_t> save_weights(const Mlp& net);
Mlp load_weights(std::span<const std::uint8_t> bytes);

// Little-endian primitives shared with the checkpoint container.
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v);
void put_f64(std::vector<std::uint8_t>& out, double v);

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  std::span<const std::uint8_t> take(std::size_t n);
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace freemesh::nn
